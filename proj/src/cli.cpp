#include "lossyphase/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <ctime>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "lossyphase/errors.hpp"
#include "lossyphase/io.hpp"

namespace lossyphase {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + path.string());
  f << content;
  if (!f) throw InputError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

// Writes the manifest for one command run and reports the files produced.
void write_manifest(const fs::path& dir, const std::string& command, json arguments,
                    const std::optional<ExperimentConfig>& config, std::uint64_t seed,
                    const std::vector<std::string>& outputs, const std::string& started,
                    std::ostream& out) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["arguments"] = std::move(arguments);
  if (config) m["config"] = config_to_json(*config);
  m["master_seed"] = seed;
  m["outputs"] = outputs;
  m["started_at"] = started;
  m["finished_at"] = utc_now();
  const std::string name = command + "_manifest.json";
  write_file(dir / name, m.dump(2) + "\n");
  for (const auto& o : outputs) out << (dir / o).string() << '\n';
  out << (dir / name).string() << '\n';
}

std::uint64_t default_seed() { return seed_from_env().value_or(kDefaultSeed); }

ProbeKind require_probe(const std::string& s) {
  const auto p = parse_probe(s);
  if (!p) throw InputError("unknown probe '" + s + "' (expected optimal or noon)");
  return *p;
}

// ---- bounds ---------------------------------------------------------------

struct BoundsArgs {
  double eta_min = 0.0;
  double eta_max = 0.0;
  int steps = 0;  // 0: default grid with the experimental transmissions
};

void run_bounds(const BoundsArgs& a, const fs::path& dir, std::ostream& out) {
  const std::string started = utc_now();
  std::vector<double> grid;
  if (a.steps == 0) {
    grid = default_eta_grid();
  } else {
    if (!(a.eta_min > 0.0 && a.eta_min <= a.eta_max && a.eta_max <= 1.0)) {
      throw DomainError("bounds: require 0 < eta_min <= eta_max <= 1");
    }
    if (a.steps < 1) throw DomainError("bounds: steps must be >= 1");
    if (a.steps == 1) {
      grid = {a.eta_max};
    } else {
      for (int i = 0; i < a.steps; ++i) {
        grid.push_back(a.eta_min + (a.eta_max - a.eta_min) * i / (a.steps - 1));
      }
    }
  }
  std::vector<BoundsRow> rows;
  for (const auto& p : precision_curve(grid)) {
    rows.push_back({p, solve_prep(p.weights).success_prob});
  }
  std::ostringstream csv;
  write_bounds_csv(csv, rows);
  write_file(dir / "bounds.csv", csv.str());
  write_manifest(dir, "bounds",
                 {{"eta_min", a.eta_min}, {"eta_max", a.eta_max}, {"steps", a.steps}},
                 std::nullopt, 0, {"bounds.csv"}, started, out);
}

// ---- fringes --------------------------------------------------------------

struct FringesArgs {
  double eta = 0.361;
  std::string probe = "noon";
  int phi_steps = 181;
  double phi_min = -std::numbers::pi;
  double phi_max = std::numbers::pi;
  /// Events per phase and setting; 0 prints probabilities.
  std::int64_t counts = 0;
  std::uint64_t seed = kDefaultSeed;
  ImperfectionParams imperfections;
};

void run_fringes(const FringesArgs& a, const fs::path& dir, std::ostream& out) {
  const std::string started = utc_now();
  if (!(a.eta > 0.0 && a.eta <= 1.0)) throw DomainError("fringes: eta must lie in (0, 1]");
  if (a.phi_steps < 1) throw DomainError("fringes: phi_steps must be >= 1");
  if (!(a.phi_max >= a.phi_min)) throw DomainError("fringes: phi_max below phi_min");
  if (a.counts < 0) throw DomainError("fringes: counts must be non-negative");
  a.imperfections.validate();
  const ProbeKind kind = require_probe(a.probe);
  const ModelPair models = make_model_pair(probe_prep(kind, a.eta), a.eta, a.imperfections);

  std::vector<double> phis;
  for (int i = 0; i < a.phi_steps; ++i) {
    phis.push_back(a.phi_steps == 1 ? a.phi_min
                                    : a.phi_min + (a.phi_max - a.phi_min) * i / (a.phi_steps - 1));
  }
  std::ostringstream csv;
  if (a.counts == 0) {
    write_fringes_csv(csv, fringe_scan(models, phis));
  } else {
    std::vector<LabelCounts> quarter;
    std::vector<LabelCounts> half;
    for (std::size_t i = 0; i < phis.size(); ++i) {
      for (Setting s : {Setting::quarter, Setting::half}) {
        std::mt19937_64 rng(substream_seed(a.seed, static_cast<int>(kind), 0, static_cast<int>(i),
                                           0, s == Setting::quarter ? 0 : 1));
        (s == Setting::quarter ? quarter : half)
            .push_back(sample_counts(models[s](phis[i]), a.counts, rng));
      }
    }
    write_fringe_counts_csv(csv, phis, quarter, half);
  }
  write_file(dir / "fringes.csv", csv.str());
  const json args = {{"eta", a.eta},
                     {"probe", a.probe},
                     {"phi_steps", a.phi_steps},
                     {"phi_min", a.phi_min},
                     {"phi_max", a.phi_max},
                     {"counts", a.counts},
                     {"seed", a.seed},
                     {"epsilon", a.imperfections.epsilon},
                     {"delta", a.imperfections.delta},
                     {"lambda_hom", a.imperfections.lambda_hom},
                     {"v_classical", a.imperfections.v_classical}};
  write_manifest(dir, "fringes", args, std::nullopt, a.seed, {"fringes.csv"}, started, out);
}

// ---- simulate / estimate -------------------------------------------------

void run_simulate(const ExperimentConfig& config, unsigned threads, const fs::path& dir,
                  std::ostream& out) {
  const std::string started = utc_now();
  const EventDataset ds = run_campaign(config, threads);
  std::ostringstream csv;
  write_dataset_csv(csv, ds);
  write_file(dir / "dataset.csv", csv.str());
  write_manifest(dir, "simulate", json::object(), config, config.master_seed, {"dataset.csv"},
                 started, out);
}

struct HistogramGroup {
  SeriesKey key;
  std::vector<double> values;
};

std::string histogram_csv(std::span<const SeriesEstimate> estimates, double bin_width) {
  std::vector<HistogramGroup> groups;
  for (const auto& e : estimates) {
    if (!e.estimate) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const HistogramGroup& g) {
      return g.key.probe == e.key.probe && g.key.eta == e.key.eta &&
             g.key.phi_true == e.key.phi_true;
    });
    if (it == groups.end()) it = groups.insert(groups.end(), {e.key, {}});
    it->values.push_back(e.estimate->phi_hat);
  }
  std::ostringstream o;
  for (std::size_t i = 0; i < kHistogramColumns.size(); ++i) {
    o << (i ? "," : "") << kHistogramColumns[i];
  }
  o << '\n';
  for (const auto& g : groups) {
    const auto [lo_it, hi_it] = std::minmax_element(g.values.begin(), g.values.end());
    // Bin edges sit on multiples of the bin width, shared by all groups.
    const double low = std::floor(*lo_it / bin_width) * bin_width;
    const double high = (std::floor(*hi_it / bin_width) + 1.0) * bin_width;
    const Histogram h = histogram(g.values, bin_width, low, high);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      o << format_number(g.key.eta) << ',' << probe_name(g.key.probe) << ','
        << format_number(g.key.phi_true) << ',' << format_number(h.bin_low(b)) << ','
        << format_number(h.bin_low(b + 1)) << ',' << h.counts[b] << '\n';
    }
  }
  return o.str();
}

double parse_hist_spec(const std::string& spec) {
  std::string v = spec;
  if (v.rfind("bin=", 0) == 0) v = v.substr(4);
  try {
    std::size_t used = 0;
    const double w = std::stod(v, &used);
    if (used != v.size()) throw InputError("");
    if (!(w > 0.0)) throw DomainError("--hist: bin width must be positive");
    return w;
  } catch (const std::logic_error&) {
    throw InputError("--hist: expected bin=<width>, got '" + spec + "'");
  }
}

void run_estimate(const fs::path& dataset_path, const ExperimentConfig& config, double hist_bin,
                  unsigned threads, const fs::path& dir, std::ostream& out) {
  const std::string started = utc_now();
  std::ifstream in(dataset_path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset " + dataset_path.string());
  const EventDataset ds = read_dataset_csv(in, dataset_path.string());
  if (ds.records.empty()) throw InputError(dataset_path.string() + ": dataset has no records");

  const auto estimates = estimate_dataset(ds, config, threads);
  const auto report = analyze(estimates);

  std::vector<std::string> outputs = {"estimates.csv", "report.csv"};
  std::ostringstream e_csv;
  write_estimates_csv(e_csv, estimates);
  write_file(dir / "estimates.csv", e_csv.str());
  std::ostringstream r_csv;
  write_report_csv(r_csv, report);
  write_file(dir / "report.csv", r_csv.str());
  if (hist_bin > 0.0) {
    write_file(dir / "histogram.csv", histogram_csv(estimates, hist_bin));
    outputs.push_back("histogram.csv");
  }
  const json args = {{"dataset", fs::absolute(dataset_path).string()}, {"hist_bin", hist_bin}};
  write_manifest(dir, "estimate", args, config, config.master_seed, outputs, started, out);
}

// Model configuration for estimation: explicit manifest, explicit config file,
// the simulate manifest next to the dataset, or defaults.
ExperimentConfig estimation_config(const fs::path& dataset, const std::string& manifest,
                                   const std::string& config_path) {
  if (!manifest.empty()) {
    const json m = json::parse(read_file(manifest), nullptr, false);
    if (m.is_discarded() || !m.contains("config")) {
      throw InputError(manifest + ": not a manifest with a config section");
    }
    return config_from_json(m["config"]);
  }
  if (!config_path.empty()) return load_config(config_path);
  const fs::path beside = dataset.parent_path() / "simulate_manifest.json";
  if (fs::exists(beside)) return estimation_config(dataset, beside.string(), "");
  return ExperimentConfig{};
}

void run_replay(const fs::path& manifest_path, const std::string& out_dir, unsigned threads,
                std::ostream& out) {
  const json m = json::parse(read_file(manifest_path), nullptr, false);
  if (m.is_discarded() || !m.contains("command") || !m.contains("arguments")) {
    throw InputError(manifest_path.string() + ": not a manifest");
  }
  const fs::path dir = prepare_dir(out_dir.empty() ? manifest_path.parent_path().string() : out_dir);
  const std::string command = m["command"].get<std::string>();
  const json& a = m["arguments"];
  try {
    if (command == "bounds") {
      run_bounds({a.at("eta_min").get<double>(), a.at("eta_max").get<double>(),
                  a.at("steps").get<int>()},
                 dir, out);
    } else if (command == "fringes") {
      FringesArgs f;
      f.eta = a.at("eta").get<double>();
      f.probe = a.at("probe").get<std::string>();
      f.phi_steps = a.at("phi_steps").get<int>();
      f.phi_min = a.at("phi_min").get<double>();
      f.phi_max = a.at("phi_max").get<double>();
      f.counts = a.at("counts").get<std::int64_t>();
      f.seed = a.at("seed").get<std::uint64_t>();
      f.imperfections.epsilon = a.at("epsilon").get<double>();
      f.imperfections.delta = a.at("delta").get<double>();
      f.imperfections.lambda_hom = a.at("lambda_hom").get<double>();
      f.imperfections.v_classical = a.at("v_classical").get<double>();
      run_fringes(f, dir, out);
    } else if (command == "simulate") {
      run_simulate(config_from_json(m.at("config")), threads, dir, out);
    } else if (command == "estimate") {
      run_estimate(a.at("dataset").get<std::string>(), config_from_json(m.at("config")),
                   a.at("hist_bin").get<double>(), threads, dir, out);
    } else {
      throw InputError(manifest_path.string() + ": unknown command '" + command + "'");
    }
  } catch (const json::exception& e) {
    throw InputError(manifest_path.string() + ": " + e.what());
  }
}

void add_imperfection_options(CLI::App* cmd, ImperfectionParams& p) {
  cmd->add_option("--epsilon", p.epsilon, "fibre admixture weight");
  cmd->add_option("--delta", p.delta, "fibre phase [rad]");
  cmd->add_option("--lambda-hom", p.lambda_hom, "two-photon indistinguishability");
  cmd->add_option("--v-classical", p.v_classical, "single-photon fringe visibility");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lossy phase estimation with two-photon states", "lossyphase"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string out_dir = ".";
  unsigned threads = 0;

  BoundsArgs bounds;
  auto* c_bounds = app.add_subcommand("bounds", "precision curves and optimal weights");
  c_bounds->add_option("--eta-min", bounds.eta_min);
  c_bounds->add_option("--eta-max", bounds.eta_max);
  c_bounds->add_option("--steps", bounds.steps, "grid points; omit for the default grid");
  c_bounds->add_option("-o,--out-dir", out_dir);

  FringesArgs fringes;
  std::optional<std::uint64_t> fringe_seed;
  auto* c_fringes = app.add_subcommand("fringes", "coincidence probabilities versus phase");
  c_fringes->add_option("--eta", fringes.eta)->required();
  c_fringes->add_option("--probe", fringes.probe);
  c_fringes->add_option("--phi-steps", fringes.phi_steps);
  c_fringes->add_option("--phi-min", fringes.phi_min);
  c_fringes->add_option("--phi-max", fringes.phi_max);
  c_fringes->add_option("--counts", fringes.counts, "events per phase and setting");
  c_fringes->add_option("--seed", fringe_seed);
  add_imperfection_options(c_fringes, fringes.imperfections);
  c_fringes->add_option("-o,--out-dir", out_dir);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<double> etas;
  std::vector<double> phases;
  std::string probe;
  std::optional<int> series;
  std::optional<int> events;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo coincidence dataset");
  c_sim->add_option("config", config_path, "key=value configuration file");
  c_sim->add_option("--seed", seed);
  c_sim->add_option("--eta", etas)->delimiter(',');
  c_sim->add_option("--phases", phases)->delimiter(',');
  c_sim->add_option("--probe", probe, "optimal, noon or both");
  c_sim->add_option("--series", series);
  c_sim->add_option("--events", events);
  c_sim->add_option("--threads", threads);
  c_sim->add_option("-o,--out-dir", out_dir);

  std::string dataset_path;
  std::string manifest_path;
  std::string hist;
  auto* c_est = app.add_subcommand("estimate", "maximum-likelihood estimates and report");
  c_est->add_option("dataset", dataset_path)->required();
  c_est->add_option("--manifest", manifest_path, "simulate manifest with the model config");
  c_est->add_option("--config", config_path, "model config if no manifest is used");
  c_est->add_option("--hist", hist, "emit histograms, e.g. bin=0.01");
  c_est->add_option("--threads", threads);
  c_est->add_option("-o,--out-dir", out_dir);

  std::string replay_manifest;
  std::string replay_dir;
  auto* c_replay = app.add_subcommand("replay", "rerun a command from its manifest");
  c_replay->add_option("manifest", replay_manifest)->required();
  c_replay->add_option("-o,--out-dir", replay_dir);
  c_replay->add_option("--threads", threads);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_bounds->parsed()) {
      run_bounds(bounds, prepare_dir(out_dir), out);
    } else if (c_fringes->parsed()) {
      fringes.seed = fringe_seed ? *fringe_seed : default_seed();
      run_fringes(fringes, prepare_dir(out_dir), out);
    } else if (c_sim->parsed()) {
      ExperimentConfig base;
      base.master_seed = default_seed();
      ExperimentConfig config = config_path.empty() ? base : load_config(config_path, base);
      if (seed) config.master_seed = *seed;
      if (!etas.empty()) config.eta_list = etas;
      if (!phases.empty()) config.phase_list = phases;
      if (!probe.empty()) {
        config.probe_kinds = probe == "both" ? std::vector{ProbeKind::optimal, ProbeKind::noon}
                                             : std::vector{require_probe(probe)};
      }
      if (series) config.series_count = *series;
      if (events) config.events_per_series = *events;
      run_simulate(config, threads, prepare_dir(out_dir), out);
    } else if (c_est->parsed()) {
      const double bin = hist.empty() ? 0.0 : parse_hist_spec(hist);
      const ExperimentConfig config =
          estimation_config(dataset_path, manifest_path, config_path);
      config.validate();
      run_estimate(dataset_path, config, bin, threads, prepare_dir(out_dir), out);
    } else if (c_replay->parsed()) {
      run_replay(replay_manifest, replay_dir, threads, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace lossyphase
