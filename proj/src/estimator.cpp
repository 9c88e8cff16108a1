#include "lossyphase/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "lossyphase/errors.hpp"

namespace lossyphase {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kFlatTolerance = 1e-12;
// Local maxima further than this below the best grid value are not refined.
constexpr double kCandidateWindow = 1.0;
// Relative. Probes without a |11> component give likelihoods symmetric under
// phi -> pi/2 - phi; optimizer residue of order 1e-12 in that weight splits the
// mirrored peaks by ~1e-6 nats, which must still count as a tie.
constexpr double kTieTolerance = 1e-6;

bool in_scored_set(Setting s, Label l, const LikelihoodOptions& o) {
  if (!scored_by(s, l)) return false;
  return l != Label::CC || o.include_cc;
}

// Per-label log weights of one setting: ln p_k, renormalized over the scored
// set unless joint normalization is requested. -inf for p_k = 0.
LabelProbs log_weights(Setting s, const LabelProbs& p, const LikelihoodOptions& o) {
  double norm = 0.0;
  for (Label l : kAllLabels) {
    if (in_scored_set(s, l, o)) norm += p[index(l)];
  }
  LabelProbs out;
  out.fill(kNegInf);
  for (Label l : kAllLabels) {
    const double pk = p[index(l)];
    if (!in_scored_set(s, l, o) || pk <= 0.0) continue;
    out[index(l)] = o.joint_normalization ? std::log(pk) : std::log(pk / norm);
  }
  return out;
}

double score(Setting s, const LabelCounts& n, const LabelProbs& logw, const LikelihoodOptions& o) {
  double sum = 0.0;
  for (Label l : kAllLabels) {
    const auto k = index(l);
    if (n[k] == 0 || !in_scored_set(s, l, o)) continue;
    if (logw[k] == kNegInf) return kNegInf;
    sum += static_cast<double>(n[k]) * logw[k];
  }
  return sum;
}

unsigned resolve_threads(unsigned threads, std::size_t work) {
  unsigned n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, work)));
}

}  // namespace

double log_likelihood(const SeriesCounts& counts, const LabelProbs& quarter,
                      const LabelProbs& half, const LikelihoodOptions& options) {
  const double q = score(Setting::quarter, counts.quarter,
                         log_weights(Setting::quarter, quarter, options), options);
  if (q == kNegInf) return kNegInf;
  const double h =
      score(Setting::half, counts.half, log_weights(Setting::half, half, options), options);
  return h == kNegInf ? kNegInf : q + h;
}

double log_likelihood(const SeriesCounts& counts, double phi, const ModelPair& models,
                      const LikelihoodOptions& options) {
  return log_likelihood(counts, models.quarter(phi), models.half(phi), options);
}

std::int64_t scored_coincidences(const SeriesCounts& counts, const LikelihoodOptions& options) {
  std::int64_t n = 0;
  for (Label l : kAllLabels) {
    if (in_scored_set(Setting::quarter, l, options)) n += counts.quarter[index(l)];
    if (in_scored_set(Setting::half, l, options)) n += counts.half[index(l)];
  }
  return n;
}

LikelihoodTable::LikelihoodTable(const ModelPair& models, LikelihoodOptions options,
                                 double low, double high, double step)
    : models_(&models), options_(options), low_(low), high_(high) {
  if (!(step > 0.0) || !(high > low)) throw DomainError("LikelihoodTable: bad grid");
  const auto n = static_cast<std::size_t>(std::ceil((high - low) / step));
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = low + step * static_cast<double>(i);
    if (phi >= high) break;
    phases_.push_back(phi);
    quarter_.push_back(log_weights(Setting::quarter, models.quarter(phi), options));
    half_.push_back(log_weights(Setting::half, models.half(phi), options));
  }
}

double LikelihoodTable::log_likelihood_at(std::size_t i, const SeriesCounts& counts) const {
  const double q = score(Setting::quarter, counts.quarter, quarter_[i], options_);
  if (q == kNegInf) return kNegInf;
  const double h = score(Setting::half, counts.half, half_[i], options_);
  return h == kNegInf ? kNegInf : q + h;
}

double LikelihoodTable::log_likelihood(const SeriesCounts& counts, double phi) const {
  return lossyphase::log_likelihood(counts, phi, *models_, options_);
}

std::optional<Estimate> ml_estimate(const SeriesCounts& counts, const LikelihoodTable& table) {
  const std::size_t n = table.size();
  std::vector<double> values(n);
  double best = kNegInf;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = table.log_likelihood_at(i, counts);
    if (values[i] == kNegInf) continue;
    best = std::max(best, values[i]);
    worst = std::min(worst, values[i]);
  }
  if (best == kNegInf || best - worst <= kFlatTolerance) return std::nullopt;

  struct Candidate {
    double phi;
    double value;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i];
    if (v < best - kCandidateWindow) continue;
    const double left = i > 0 ? values[i - 1] : kNegInf;
    const double right = i + 1 < n ? values[i + 1] : kNegInf;
    if (v < left || v < right) continue;

    Candidate c{table.phase(i), v};
    if (i > 0 && i + 1 < n) {
      const double curvature = left - 2.0 * v + right;
      if (curvature < 0.0) {
        const double step = table.phase(i + 1) - table.phase(i);
        const double phi = table.phase(i) + 0.5 * step * (left - right) / curvature;
        if (phi >= table.low() && phi < table.high()) {
          const double exact = table.log_likelihood(counts, phi);
          if (exact >= v) c = {phi, exact};
        }
      }
    }
    candidates.push_back(c);
  }

  double top = kNegInf;
  for (const auto& c : candidates) top = std::max(top, c.value);
  const double tie = kTieTolerance * std::max(1.0, std::abs(top));
  const Candidate* chosen = nullptr;
  for (const auto& c : candidates) {
    if (c.value < top - tie) continue;
    if (!chosen || std::abs(c.phi) < std::abs(chosen->phi)) chosen = &c;
  }
  return Estimate{chosen->phi, chosen->value, scored_coincidences(counts, table.options())};
}

std::vector<std::pair<SeriesKey, SeriesCounts>> group_series(const EventDataset& dataset) {
  std::vector<std::pair<SeriesKey, SeriesCounts>> out;
  std::map<std::tuple<int, double, double, int>, std::size_t> slot;
  for (const auto& r : dataset.records) {
    const auto key = std::make_tuple(static_cast<int>(r.probe), r.eta, r.phi_true, r.series_id);
    auto [it, inserted] = slot.emplace(key, out.size());
    if (inserted) out.push_back({SeriesKey{r.eta, r.probe, r.phi_true, r.series_id}, {}});
    SeriesCounts& c = out[it->second].second;
    (r.setting == Setting::quarter ? c.quarter : c.half) = r.counts;
  }
  return out;
}

std::vector<SeriesEstimate> estimate_dataset(const EventDataset& dataset,
                                             const ExperimentConfig& config, unsigned threads) {
  const auto series = group_series(dataset);
  const LikelihoodOptions options{config.include_cc, config.joint_normalization};

  // One model and table per (probe, eta); node-based so addresses are stable.
  std::map<std::pair<int, double>, ModelPair> models;
  std::map<std::pair<int, double>, LikelihoodTable> tables;
  for (const auto& [key, counts] : series) {
    const auto id = std::make_pair(static_cast<int>(key.probe), key.eta);
    if (models.contains(id)) continue;
    if (!(key.eta > 0.0 && key.eta <= 1.0)) throw DomainError("dataset eta outside (0, 1]");
    const auto& mp = models.emplace(id, campaign_models(key.probe, key.eta, config)).first->second;
    tables.emplace(id, LikelihoodTable(mp, options));
  }

  std::vector<SeriesEstimate> out(series.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < series.size(); i = next++) {
      const auto& [key, counts] = series[i];
      const auto& table = tables.at({static_cast<int>(key.probe), key.eta});
      out[i] = {key, ml_estimate(counts, table)};
    }
  };
  const unsigned n_threads = resolve_threads(threads, series.size());
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  return out;
}

std::vector<ReportRow> analyze(std::span<const SeriesEstimate> estimates) {
  struct Group {
    SeriesKey key;
    std::vector<double> phi_hat;
    std::vector<double> coincidences;
  };
  std::vector<Group> groups;
  std::map<std::tuple<int, double, double>, std::size_t> slot;
  for (const auto& e : estimates) {
    const auto id = std::make_tuple(static_cast<int>(e.key.probe), e.key.eta, e.key.phi_true);
    auto [it, inserted] = slot.emplace(id, groups.size());
    if (inserted) groups.push_back({e.key, {}, {}});
    if (!e.estimate) continue;
    groups[it->second].phi_hat.push_back(e.estimate->phi_hat);
    groups[it->second].coincidences.push_back(static_cast<double>(e.estimate->n_coincidences));
  }

  std::map<std::pair<int, double>, double> qfi;
  std::vector<ReportRow> rows;
  for (const auto& g : groups) {
    const std::size_t n = g.phi_hat.size();
    if (n < 2) throw DomainError("analyze: group with fewer than two estimates");
    ReportRow r;
    r.eta = g.key.eta;
    r.probe = g.key.probe;
    r.phi_true = g.key.phi_true;
    r.estimates = n;
    for (double x : g.phi_hat) r.mean += x;
    r.mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : g.phi_hat) ss += (x - r.mean) * (x - r.mean);
    r.sigma = std::sqrt(ss / static_cast<double>(n - 1));
    for (double m : g.coincidences) r.m_bar += m;
    r.m_bar /= static_cast<double>(n);
    if (!(r.m_bar > 0.0)) throw DomainError("analyze: no registered coincidences");
    r.sigma_scaled = r.sigma * std::sqrt(r.m_bar);
    const auto id = std::make_pair(static_cast<int>(r.probe), r.eta);
    auto it = qfi.find(id);
    if (it == qfi.end()) it = qfi.emplace(id, reference_qfi(r.probe, r.eta)).first;
    r.crb = 1.0 / std::sqrt(it->second);
    rows.push_back(r);
  }
  return rows;
}

Histogram histogram(std::span<const double> values, double bin_width, double low, double high) {
  if (values.empty()) throw DomainError("histogram: no values");
  if (!(bin_width > 0.0)) throw DomainError("histogram: bin width must be positive");
  if (!(high > low)) throw DomainError("histogram: empty range");
  Histogram h;
  h.low = low;
  h.bin_width = bin_width;
  const auto bins = static_cast<std::size_t>(std::ceil((high - low) / bin_width - 1e-9));
  h.counts.assign(std::max<std::size_t>(bins, 1), 0);
  for (double x : values) {
    if (x < low) {
      ++h.underflow;
      continue;
    }
    const auto i = static_cast<std::size_t>(std::floor((x - low) / bin_width));
    if (x >= high || i >= h.counts.size()) {
      ++h.overflow;
      continue;
    }
    ++h.counts[i];
  }
  return h;
}

NormalFit fit_normal(std::span<const double> values) {
  if (values.empty()) throw DomainError("fit_normal: no values");
  NormalFit f;
  for (double x : values) f.mean += x;
  f.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double x : values) ss += (x - f.mean) * (x - f.mean);
  f.sigma = std::sqrt(ss / static_cast<double>(values.size()));
  return f;
}

double overlap_coefficient(const Histogram& a, const Histogram& b) {
  if (a.low != b.low || a.bin_width != b.bin_width || a.counts.size() != b.counts.size()) {
    throw DomainError("overlap_coefficient: histograms do not share a binning");
  }
  auto total_of = [](const Histogram& h) {
    std::int64_t t = h.underflow + h.overflow;
    for (auto c : h.counts) t += c;
    return static_cast<double>(t);
  };
  const double ta = total_of(a);
  const double tb = total_of(b);
  double sum = std::min(a.underflow / ta, b.underflow / tb) +
               std::min(a.overflow / ta, b.overflow / tb);
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    sum += std::min(a.counts[i] / ta, b.counts[i] / tb);
  }
  return sum;
}

}  // namespace lossyphase
