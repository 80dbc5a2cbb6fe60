#pragma once

#include <functional>
#include <vector>

namespace qio {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer for the low-dimensional searches used by
// the basis and bound-verification routines. Deterministic for a given start.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start, double step,
                             double f_tol, int max_evals);

}  // namespace qio
