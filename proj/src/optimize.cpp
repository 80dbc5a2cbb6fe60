#include "qio/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace qio {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start, double step,
                             double f_tol, int max_evals) {
  const int n = (int)start.size();
  struct Point {
    std::vector<double> x;
    double fx;
  };
  std::vector<Point> simplex;
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };

  simplex.push_back({start, eval(start)});
  for (int i = 0; i < n; ++i) {
    auto x = start;
    x[i] += step;
    simplex.push_back({x, eval(x)});
  }

  auto by_value = [](const Point& a, const Point& b) { return a.fx < b.fx; };
  std::sort(simplex.begin(), simplex.end(), by_value);

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  bool converged = false;
  while (evals < max_evals) {
    if (std::abs(simplex.back().fx - simplex.front().fx) <
        f_tol * (1.0 + std::abs(simplex.front().fx))) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) centroid[j] += simplex[i].x[j];
    }
    for (double& c : centroid) c /= n;

    auto blend = [&](const std::vector<double>& a, const std::vector<double>& b,
                     double t) {
      std::vector<double> out(n);
      for (int j = 0; j < n; ++j) out[j] = a[j] + t * (a[j] - b[j]);
      return out;
    };

    auto xr = blend(centroid, simplex.back().x, alpha);
    double fr = eval(xr);
    if (fr < simplex.front().fx) {
      auto xe = blend(centroid, simplex.back().x, gamma);
      double fe = eval(xe);
      simplex.back() = fe < fr ? Point{xe, fe} : Point{xr, fr};
    } else if (fr < simplex[n - 1].fx) {
      simplex.back() = {xr, fr};
    } else {
      auto xc = blend(centroid, simplex.back().x, -rho);
      double fc = eval(xc);
      if (fc < simplex.back().fx) {
        simplex.back() = {xc, fc};
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int j = 0; j < n; ++j)
            simplex[i].x[j] = simplex[0].x[j] + sigma * (simplex[i].x[j] - simplex[0].x[j]);
          simplex[i].fx = eval(simplex[i].x);
        }
      }
    }
    std::sort(simplex.begin(), simplex.end(), by_value);
  }

  return {simplex.front().x, simplex.front().fx, evals, converged};
}

}  // namespace qio
