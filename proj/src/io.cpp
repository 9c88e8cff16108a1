#include "lossyphase/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "lossyphase/errors.hpp"

namespace lossyphase {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

template <class Int>
std::optional<Int> to_int(std::string_view s) {
  Int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

std::string join(std::span<const double> xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += format_number(xs[i]);
  }
  return s;
}

std::string_view tuning_name(QuarterTuning t) {
  return t == QuarterTuning::fixed_phase ? "fixed" : "trimmed";
}

std::string_view scope_name(EventsScope s) {
  return s == EventsScope::joint ? "joint" : "per_setting";
}

void write_header(std::ostream& out, const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
}

void apply_key(ExperimentConfig& c, std::string_view key, std::string_view value,
               const std::string& where) {
  auto fail = [&](std::string_view what) {
    throw InputError(where + ": " + std::string(what) + " for key '" + std::string(key) + "'");
  };
  auto real = [&] {
    const auto v = to_double(value);
    if (!v) fail("expected a number");
    return *v;
  };
  auto reals = [&] {
    std::vector<double> out;
    for (auto part : split(value, ',')) {
      const auto v = to_double(part);
      if (!v) fail("expected a comma-separated list of numbers");
      out.push_back(*v);
    }
    return out;
  };
  auto integer = [&] {
    const auto v = to_int<int>(value);
    if (!v) fail("expected an integer");
    return *v;
  };
  auto boolean = [&] {
    const auto v = to_bool(value);
    if (!v) fail("expected true or false");
    return *v;
  };

  if (key == "eta_list") {
    c.eta_list = reals();
  } else if (key == "probe") {
    c.probe_kinds.clear();
    if (value == "both") {
      c.probe_kinds = {ProbeKind::optimal, ProbeKind::noon};
      return;
    }
    for (auto part : split(value, ',')) {
      const auto p = parse_probe(part);
      if (!p) fail("expected optimal, noon or both");
      c.probe_kinds.push_back(*p);
    }
  } else if (key == "phases") {
    c.phase_list = reals();
  } else if (key == "series") {
    c.series_count = integer();
  } else if (key == "events") {
    c.events_per_series = integer();
  } else if (key == "seed") {
    const auto v = to_int<std::uint64_t>(value);
    if (!v) fail("expected an unsigned 64-bit integer");
    c.master_seed = *v;
  } else if (key == "epsilon") {
    c.imperfections.epsilon = real();
  } else if (key == "delta") {
    c.imperfections.delta = real();
  } else if (key == "lambda_hom") {
    c.imperfections.lambda_hom = real();
  } else if (key == "v_classical") {
    c.imperfections.v_classical = real();
  } else if (key == "coupler_thinning") {
    c.imperfections.coupler_thinning = boolean();
  } else if (key == "poissonize_m") {
    c.poissonize_m = boolean();
  } else if (key == "include_cc") {
    c.include_cc = boolean();
  } else if (key == "joint_normalization") {
    c.joint_normalization = boolean();
  } else if (key == "events_scope") {
    if (value == "joint") c.events_scope = EventsScope::joint;
    else if (value == "per_setting") c.events_scope = EventsScope::per_setting;
    else fail("expected joint or per_setting");
  } else if (key == "quarter_fraction") {
    c.quarter_fraction = real();
  } else if (key == "quarter_tuning") {
    if (value == "fixed") c.quarter_tuning = QuarterTuning::fixed_phase;
    else if (value == "trimmed") c.quarter_tuning = QuarterTuning::trimmed_phase;
    else fail("expected fixed or trimmed");
  } else {
    throw InputError(where + ": unknown key '" + std::string(key) + "'");
  }
}

}  // namespace

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

ExperimentConfig parse_config(std::istream& in, std::string_view source,
                              ExperimentConfig base) {
  ExperimentConfig c = std::move(base);
  std::string line;
  std::map<std::string, int> seen;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw InputError(where + ": expected key=value");
    const auto key = trim(s.substr(0, eq));
    const auto value = trim(s.substr(eq + 1));
    if (key.empty()) throw InputError(where + ": empty key");
    if (auto [it, inserted] = seen.emplace(std::string(key), line_no); !inserted) {
      throw InputError(where + ": duplicate key '" + std::string(key) + "' (first on line " +
                       std::to_string(it->second) + ")");
    }
    apply_key(c, key, value, where);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  return parse_config(in, path.string(), std::move(base));
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "eta_list=" << join(c.eta_list) << '\n';
  o << "probe=";
  for (std::size_t i = 0; i < c.probe_kinds.size(); ++i) {
    o << (i ? "," : "") << probe_name(c.probe_kinds[i]);
  }
  o << '\n';
  o << "phases=" << join(c.phase_list) << '\n';
  o << "series=" << c.series_count << '\n';
  o << "events=" << c.events_per_series << '\n';
  o << "seed=" << c.master_seed << '\n';
  o << "epsilon=" << format_number(c.imperfections.epsilon) << '\n';
  o << "delta=" << format_number(c.imperfections.delta) << '\n';
  o << "lambda_hom=" << format_number(c.imperfections.lambda_hom) << '\n';
  o << "v_classical=" << format_number(c.imperfections.v_classical) << '\n';
  o << "coupler_thinning=" << (c.imperfections.coupler_thinning ? "true" : "false") << '\n';
  o << "poissonize_m=" << (c.poissonize_m ? "true" : "false") << '\n';
  o << "include_cc=" << (c.include_cc ? "true" : "false") << '\n';
  o << "joint_normalization=" << (c.joint_normalization ? "true" : "false") << '\n';
  o << "events_scope=" << scope_name(c.events_scope) << '\n';
  o << "quarter_fraction=" << format_number(c.quarter_fraction) << '\n';
  o << "quarter_tuning=" << tuning_name(c.quarter_tuning) << '\n';
  return o.str();
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["eta_list"] = c.eta_list;
  std::vector<std::string> probes;
  for (auto p : c.probe_kinds) probes.emplace_back(probe_name(p));
  j["probe"] = probes;
  j["phases"] = c.phase_list;
  j["series"] = c.series_count;
  j["events"] = c.events_per_series;
  j["seed"] = c.master_seed;
  j["epsilon"] = c.imperfections.epsilon;
  j["delta"] = c.imperfections.delta;
  j["lambda_hom"] = c.imperfections.lambda_hom;
  j["v_classical"] = c.imperfections.v_classical;
  j["coupler_thinning"] = c.imperfections.coupler_thinning;
  j["poissonize_m"] = c.poissonize_m;
  j["include_cc"] = c.include_cc;
  j["joint_normalization"] = c.joint_normalization;
  j["events_scope"] = scope_name(c.events_scope);
  j["quarter_fraction"] = c.quarter_fraction;
  j["quarter_tuning"] = tuning_name(c.quarter_tuning);
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    c.eta_list = j.at("eta_list").get<std::vector<double>>();
    c.probe_kinds.clear();
    for (const auto& s : j.at("probe").get<std::vector<std::string>>()) {
      const auto p = parse_probe(s);
      if (!p) throw InputError("manifest: unknown probe '" + s + "'");
      c.probe_kinds.push_back(*p);
    }
    c.phase_list = j.at("phases").get<std::vector<double>>();
    c.series_count = j.at("series").get<int>();
    c.events_per_series = j.at("events").get<int>();
    c.master_seed = j.at("seed").get<std::uint64_t>();
    c.imperfections.epsilon = j.at("epsilon").get<double>();
    c.imperfections.delta = j.at("delta").get<double>();
    c.imperfections.lambda_hom = j.at("lambda_hom").get<double>();
    c.imperfections.v_classical = j.at("v_classical").get<double>();
    c.imperfections.coupler_thinning = j.at("coupler_thinning").get<bool>();
    c.poissonize_m = j.at("poissonize_m").get<bool>();
    c.include_cc = j.at("include_cc").get<bool>();
    c.joint_normalization = j.at("joint_normalization").get<bool>();
    c.events_scope = j.at("events_scope").get<std::string>() == "per_setting"
                         ? EventsScope::per_setting
                         : EventsScope::joint;
    c.quarter_fraction = j.at("quarter_fraction").get<double>();
    c.quarter_tuning = j.at("quarter_tuning").get<std::string>() == "trimmed"
                           ? QuarterTuning::trimmed_phase
                           : QuarterTuning::fixed_phase;
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("manifest config: ") + e.what());
  }
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv(kSeedEnvVar);
  if (!v || !*v) return std::nullopt;
  const auto seed = to_int<std::uint64_t>(trim(v));
  if (!seed) throw InputError(std::string(kSeedEnvVar) + " is not an unsigned integer");
  return seed;
}

void write_bounds_csv(std::ostream& out, std::span<const BoundsRow> rows) {
  write_header(out, kBoundsColumns);
  for (const auto& r : rows) {
    const auto& p = r.point;
    out << format_number(p.eta) << ',' << format_number(p.dphi_optimal) << ','
        << format_number(p.dphi_noon) << ',' << format_number(p.dphi_sil) << ','
        << format_number(p.weights.x0()) << ',' << format_number(p.weights.x1()) << ','
        << format_number(p.weights.x2()) << ',' << format_number(r.prep_success_p) << '\n';
  }
}

void write_fringes_csv(std::ostream& out, std::span<const FringeRow> rows, double scale) {
  write_header(out, kFringeColumns);
  for (const auto& r : rows) {
    for (Setting s : {Setting::quarter, Setting::half}) {
      const LabelProbs& p = s == Setting::quarter ? r.quarter : r.half;
      out << format_number(r.phi) << ',' << setting_name(s);
      for (double v : p) out << ',' << format_number(v * scale);
      out << '\n';
    }
  }
}

void write_fringe_counts_csv(std::ostream& out, std::span<const double> phis,
                             std::span<const LabelCounts> quarter,
                             std::span<const LabelCounts> half) {
  write_header(out, kFringeColumns);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    for (Setting s : {Setting::quarter, Setting::half}) {
      const LabelCounts& c = s == Setting::quarter ? quarter[i] : half[i];
      out << format_number(phis[i]) << ',' << setting_name(s);
      for (auto v : c) out << ',' << v;
      out << '\n';
    }
  }
}

void write_dataset_csv(std::ostream& out, const EventDataset& dataset) {
  write_header(out, kDatasetColumns);
  for (const auto& r : dataset.records) {
    out << format_number(r.eta) << ',' << probe_name(r.probe) << ','
        << format_number(r.phi_true) << ',' << setting_name(r.setting) << ',' << r.series_id;
    for (auto n : r.counts) out << ',' << n;
    out << ',' << r.seed_used << '\n';
  }
}

void write_estimates_csv(std::ostream& out, std::span<const SeriesEstimate> estimates) {
  write_header(out, kEstimateColumns);
  for (const auto& e : estimates) {
    out << format_number(e.key.eta) << ',' << probe_name(e.key.probe) << ','
        << format_number(e.key.phi_true) << ',' << e.key.series_id << ',';
    if (e.estimate) {
      out << format_number(e.estimate->phi_hat) << ','
          << format_number(e.estimate->log_likelihood_max) << ','
          << e.estimate->n_coincidences << '\n';
    } else {
      out << ",,0\n";
    }
  }
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  write_header(out, kReportColumns);
  for (const auto& r : rows) {
    out << format_number(r.eta) << ',' << probe_name(r.probe) << ','
        << format_number(r.phi_true) << ',' << format_number(r.mean) << ','
        << format_number(r.sigma) << ',' << format_number(r.m_bar) << ','
        << format_number(r.sigma_scaled) << ',' << format_number(r.crb) << '\n';
  }
}

EventDataset read_dataset_csv(std::istream& in, std::string_view source) {
  const std::string src(source);
  std::string line;
  if (!std::getline(in, line)) throw InputError(src + ": empty dataset file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
    if (i >= header.size()) {
      throw InputError(src + ": missing column '" + kDatasetColumns[i] + "'");
    }
    if (header[i] != kDatasetColumns[i]) {
      throw InputError(src + ": column " + std::to_string(i + 1) + " is '" +
                       std::string(header[i]) + "', expected '" + kDatasetColumns[i] + "'");
    }
  }
  if (header.size() > kDatasetColumns.size()) {
    throw InputError(src + ": unexpected column '" + std::string(header[kDatasetColumns.size()]) +
                     "'");
  }

  EventDataset ds;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    const std::string where = src + ":" + std::to_string(line_no);
    if (f.size() != kDatasetColumns.size()) {
      throw InputError(where + ": expected " + std::to_string(kDatasetColumns.size()) +
                       " fields, found " + std::to_string(f.size()));
    }
    auto bad = [&](std::size_t col) {
      return InputError(where + ": invalid value '" + std::string(f[col]) + "' in column '" +
                        kDatasetColumns[col] + "'");
    };
    EventRecord r;
    const auto eta = to_double(f[0]);
    if (!eta) throw bad(0);
    r.eta = *eta;
    const auto probe = parse_probe(f[1]);
    if (!probe) throw bad(1);
    r.probe = *probe;
    const auto phi = to_double(f[2]);
    if (!phi) throw bad(2);
    r.phi_true = *phi;
    const auto setting = parse_setting(f[3]);
    if (!setting) throw bad(3);
    r.setting = *setting;
    const auto series = to_int<int>(f[4]);
    if (!series || *series < 0) throw bad(4);
    r.series_id = *series;
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      const auto n = to_int<std::int64_t>(f[5 + k]);
      if (!n || *n < 0) throw bad(5 + k);
      r.counts[k] = *n;
    }
    const auto seed = to_int<std::uint64_t>(f[11]);
    if (!seed) throw bad(11);
    r.seed_used = *seed;
    r.drawn = total(r.counts);
    ds.records.push_back(r);
  }
  return ds;
}

}  // namespace lossyphase
