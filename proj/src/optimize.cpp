#include "lossyphase/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lossyphase/errors.hpp"

namespace lossyphase {

ScalarOptimum golden_section_maximize(const std::function<double(double)>& f,
                                      double lo, double hi, double tolerance,
                                      int max_iterations) {
  if (!(hi >= lo)) throw DomainError("golden_section_maximize: empty interval");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  while (b - a > tolerance && it < max_iterations) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++it;
  }
  const double x = 0.5 * (a + b);
  ScalarOptimum best{x, f(x), it};
  if (fc > best.value) best = {c, fc, it};
  if (fd > best.value) best = {d, fd, it};
  return best;
}

ScalarOptimum scan_then_golden_maximize(const std::function<double(double)>& f,
                                        double lo, double hi, int grid_points,
                                        double tolerance) {
  if (grid_points < 2) throw DomainError("scan_then_golden_maximize: need >= 2 grid points");
  const double h = (hi - lo) / (grid_points - 1);
  int best_i = 0;
  double best_v = f(lo);
  for (int i = 1; i < grid_points; ++i) {
    const double v = f(lo + h * i);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  const double a = std::max(lo, lo + h * (best_i - 1));
  const double b = std::min(hi, lo + h * (best_i + 1));
  ScalarOptimum refined = golden_section_maximize(f, a, b, tolerance);
  if (best_v > refined.value) refined = {lo + h * best_i, best_v, refined.iterations};
  return refined;
}

VectorOptimum nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> start, const NelderMeadOptions& options,
    const std::vector<double>& steps) {
  const std::size_t n = start.size();
  if (n == 0) throw DomainError("nelder_mead_minimize: empty start point");
  if (!steps.empty() && steps.size() != n) {
    throw DomainError("nelder_mead_minimize: step vector size mismatch");
  }
  std::vector<std::vector<double>> simplex(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += steps.empty() ? options.initial_step : steps[i];
  }
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);
  if (!std::isfinite(values[0])) {
    throw DomainError("nelder_mead_minimize: start point is infeasible");
  }

  std::vector<std::size_t> order(n + 1);
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        size = std::max(size, std::abs(simplex[i][k] - simplex[best][k]));
      }
    }
    if (std::abs(values[worst] - values[best]) <= options.value_tolerance &&
        size <= options.size_tolerance) {
      break;
    }
    if (size <= options.size_tolerance * 1e-3) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    }
    auto along = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) {
        p[k] = centroid[k] + coef * (simplex[worst][k] - centroid[k]);
      }
      return p;
    };

    auto reflected = along(-1.0);
    const double fr = f(reflected);
    if (fr < values[best]) {
      auto expanded = along(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        values[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = std::move(reflected);
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    auto contracted = along(outside ? -0.5 : 0.5);
    const double fc = f(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = std::move(contracted);
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) {
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      }
      values[i] = f(simplex[i]);
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(best_it - values.begin());
  return {simplex[idx], *best_it, it};
}

}  // namespace lossyphase
