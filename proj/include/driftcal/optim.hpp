#pragma once

#include <functional>
#include <vector>

namespace driftcal {

struct OptimResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct OptimResult1D {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex with standard coefficients (reflect 1, expand 2,
// contract 0.5, shrink 0.5). Terminates when the simplex diameter falls
// below tol or after max_iters.
OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& x0, double step, double tol,
                        int max_iters);

// Two-point simplex variant restricted to x >= 0; negative candidates are
// reflected to |x|.
OptimResult1D nelder_mead_1d(const std::function<double(double)>& f, double x0,
                             double tol, int max_iters);

// Bounded unimodal minimization; a coarse scan picks the bracket, then
// golden-section refines. Deterministic.
OptimResult1D minimize_scalar(const std::function<double(double)>& f, double lo,
                              double hi, int scan_points = 200, double tol = 1e-10);

}  // namespace driftcal
