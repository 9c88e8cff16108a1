#include "lossyphase/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lossyphase/bounds.hpp"
#include "lossyphase/errors.hpp"

namespace lossyphase {
namespace {

constexpr double kSamplingTolerance = 1e-9;
constexpr int kEventStream = 2;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::int64_t draw_events(const ExperimentConfig& config, std::mt19937_64& rng) {
  if (!config.poissonize_m) return config.events_per_series;
  std::poisson_distribution<std::int64_t> poisson(config.events_per_series);
  return poisson(rng);
}

// Events allotted to each setting for one series.
std::pair<std::int64_t, std::int64_t> split_events(const ExperimentConfig& config,
                                                   std::mt19937_64& rng) {
  if (config.events_scope == EventsScope::per_setting) {
    const std::int64_t q = draw_events(config, rng);
    const std::int64_t h = draw_events(config, rng);
    return {q, h};
  }
  const std::int64_t m = draw_events(config, rng);
  const auto q = static_cast<std::int64_t>(std::floor(static_cast<double>(m) * config.quarter_fraction));
  return {q, m - q};
}

}  // namespace

std::string_view probe_name(ProbeKind k) {
  return k == ProbeKind::optimal ? "optimal" : "noon";
}

std::optional<ProbeKind> parse_probe(std::string_view s) {
  if (s == "optimal") return ProbeKind::optimal;
  if (s == "noon") return ProbeKind::noon;
  return std::nullopt;
}

std::vector<double> default_phase_list() {
  std::vector<double> phases;
  for (int k = -7; k <= 7; ++k) phases.push_back(0.02 * k);
  return phases;
}

void ExperimentConfig::validate() const {
  if (eta_list.empty()) throw DomainError("eta_list must not be empty");
  for (double eta : eta_list) {
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta values must lie in (0, 1]");
  }
  if (probe_kinds.empty()) throw DomainError("at least one probe kind is required");
  if (phase_list.empty()) throw DomainError("phase_list must not be empty");
  for (double phi : phase_list) {
    if (!std::isfinite(phi)) throw DomainError("phases must be finite");
  }
  if (series_count < 1) throw DomainError("series_count must be >= 1");
  if (events_per_series < 1) throw DomainError("events_per_series must be >= 1");
  if (!(quarter_fraction >= 0.0 && quarter_fraction <= 1.0)) {
    throw DomainError("quarter_fraction must lie in [0, 1]");
  }
  imperfections.validate();
}

std::uint64_t substream_seed(std::uint64_t master_seed, int probe_index, int eta_index,
                             int phi_index, int series_id, int stream) {
  std::uint64_t h = splitmix64(master_seed);
  for (int v : {probe_index, eta_index, phi_index, series_id, stream}) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
  }
  return h;
}

LabelCounts sample_counts(const LabelProbs& distribution, std::int64_t m,
                          std::mt19937_64& rng) {
  if (m < 0) throw DomainError("sample_counts: negative event number");
  for (double p : distribution) {
    if (!(p >= 0.0)) throw DomainError("sample_counts: negative probability");
  }
  if (std::abs(total(distribution) - 1.0) > kSamplingTolerance) {
    throw DomainError("sample_counts: distribution is not normalized");
  }
  LabelCounts counts{};
  std::int64_t remaining = m;
  double remaining_p = 1.0;
  for (std::size_t k = 0; k + 1 < kLabelCount && remaining > 0; ++k) {
    const double p = distribution[k];
    if (p <= 0.0) continue;
    std::int64_t n;
    if (p >= remaining_p) {
      n = remaining;
    } else {
      std::binomial_distribution<std::int64_t> binom(remaining, p / remaining_p);
      n = binom(rng);
    }
    counts[k] = n;
    remaining -= n;
    remaining_p -= p;
  }
  counts[kLabelCount - 1] += remaining;
  return counts;
}

PrepConfig probe_prep(ProbeKind kind, double eta) {
  if (kind == ProbeKind::noon) return PrepConfig{0.5, 1.0, Arm::reference, 1.0};
  return solve_prep(optimize_weights(eta).weights);
}

double reference_qfi(ProbeKind kind, double eta) {
  return kind == ProbeKind::noon ? qfi_lossy(ProbeWeights::noon(), eta)
                                 : optimize_weights(eta).qfi;
}

ModelPair campaign_models(ProbeKind kind, double eta, const ExperimentConfig& config) {
  return make_model_pair(probe_prep(kind, eta), eta, config.imperfections,
                         config.quarter_tuning);
}

EventRecord simulate_record(const ExperimentConfig& config, const ModelPair& models,
                            int probe_index, int eta_index, int phi_index, int series_id,
                            Setting setting) {
  const std::uint64_t master = config.master_seed;
  std::mt19937_64 event_rng(
      substream_seed(master, probe_index, eta_index, phi_index, series_id, kEventStream));
  const auto [m_quarter, m_half] = split_events(config, event_rng);

  const int stream = setting == Setting::quarter ? 0 : 1;
  EventRecord r;
  r.eta = config.eta_list[static_cast<std::size_t>(eta_index)];
  r.probe = config.probe_kinds[static_cast<std::size_t>(probe_index)];
  r.phi_true = config.phase_list[static_cast<std::size_t>(phi_index)];
  r.setting = setting;
  r.series_id = series_id;
  r.drawn = setting == Setting::quarter ? m_quarter : m_half;
  r.seed_used = substream_seed(master, probe_index, eta_index, phi_index, series_id, stream);

  std::mt19937_64 rng(r.seed_used);
  const LabelCounts all = sample_counts(models[setting](r.phi_true), r.drawn, rng);
  for (Label l : kAllLabels) {
    if (scored_by(setting, l)) r.counts[index(l)] = all[index(l)];
  }
  if (config.imperfections.coupler_thinning) r.counts = apply_coupler_thinning(r.counts, rng);
  return r;
}

EventDataset run_campaign(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const int n_probe = static_cast<int>(config.probe_kinds.size());
  const int n_eta = static_cast<int>(config.eta_list.size());
  const int n_phi = static_cast<int>(config.phase_list.size());
  const int n_series = config.series_count;

  std::vector<ModelPair> models;
  for (int pi = 0; pi < n_probe; ++pi) {
    for (int ei = 0; ei < n_eta; ++ei) {
      models.push_back(campaign_models(config.probe_kinds[static_cast<std::size_t>(pi)],
                                       config.eta_list[static_cast<std::size_t>(ei)], config));
    }
  }

  const std::size_t n_series_total = static_cast<std::size_t>(n_probe) * n_eta * n_phi * n_series;
  EventDataset ds;
  ds.records.resize(2 * n_series_total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t item = next++; item < n_series_total; item = next++) {
      const int series = static_cast<int>(item % n_series);
      const std::size_t cell = item / n_series;
      const int phi_i = static_cast<int>(cell % n_phi);
      const int eta_i = static_cast<int>((cell / n_phi) % n_eta);
      const int probe_i = static_cast<int>(cell / (static_cast<std::size_t>(n_phi) * n_eta));
      const ModelPair& mp = models[static_cast<std::size_t>(probe_i * n_eta + eta_i)];
      for (Setting s : {Setting::quarter, Setting::half}) {
        ds.records[2 * item + (s == Setting::quarter ? 0 : 1)] =
            simulate_record(config, mp, probe_i, eta_i, phi_i, series, s);
      }
    }
  };
  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_series_total));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  return ds;
}

}  // namespace lossyphase
