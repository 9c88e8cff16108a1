#pragma once

#include <functional>
#include <vector>

namespace lossyphase {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// Stops when the bracket is narrower than `tolerance`.
ScalarOptimum golden_section_maximize(const std::function<double(double)>& f,
                                      double lo, double hi, double tolerance,
                                      int max_iterations = 500);

/// Coarse scan with `grid_points` samples, then golden-section refinement in
/// the cell around the best sample. For functions that may not be unimodal
/// over the full interval.
ScalarOptimum scan_then_golden_maximize(const std::function<double(double)>& f,
                                        double lo, double hi, int grid_points,
                                        double tolerance);

struct NelderMeadOptions {
  double initial_step = 1e-3;
  double value_tolerance = 1e-14;
  double size_tolerance = 1e-12;
  int max_iterations = 5000;
};

struct VectorOptimum {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

/// Nelder-Mead downhill simplex minimization. The objective may return
/// +infinity to reject infeasible points; the start point must be feasible.
/// `steps`, when non-empty, gives the signed initial offset per coordinate.
VectorOptimum nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> start, const NelderMeadOptions& options = {},
    const std::vector<double>& steps = {});

}  // namespace lossyphase
