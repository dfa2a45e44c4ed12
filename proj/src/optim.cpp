#include "driftcal/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftcal/errors.hpp"

namespace driftcal {

OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& x0, double step, double tol,
                        int max_iters) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::vector<double> fx(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fx[i] = f(simplex[i]);

  auto order = [&]() {
    std::vector<std::size_t> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (std::size_t i : idx) {
      s2.push_back(simplex[i]);
      f2.push_back(fx[i]);
    }
    simplex.swap(s2);
    fx.swap(f2);
  };

  auto diameter = [&]() {
    double d = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d = std::max(d, std::abs(simplex[i][j] - simplex[0][j]));
    return d;
  };

  int iter = 0;
  order();
  for (; iter < max_iters && diameter() >= tol; ++iter) {
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

    auto point = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = centroid[j] + coef * (centroid[j] - simplex[n][j]);
      return p;
    };

    auto refl = point(1.0);
    const double f_refl = f(refl);
    if (f_refl < fx[0]) {
      auto exp_p = point(2.0);
      const double f_exp = f(exp_p);
      if (f_exp < f_refl) {
        simplex[n] = std::move(exp_p);
        fx[n] = f_exp;
      } else {
        simplex[n] = std::move(refl);
        fx[n] = f_refl;
      }
    } else if (f_refl < fx[n - 1]) {
      simplex[n] = std::move(refl);
      fx[n] = f_refl;
    } else {
      auto contr = point(f_refl < fx[n] ? 0.5 : -0.5);
      const double f_contr = f(contr);
      if (f_contr < std::min(f_refl, fx[n])) {
        simplex[n] = std::move(contr);
        fx[n] = f_contr;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fx[i] = f(simplex[i]);
        }
      }
    }
    order();
  }

  return {simplex[0], fx[0], iter, diameter() < tol};
}

OptimResult1D nelder_mead_1d(const std::function<double(double)>& f, double x0,
                             double tol, int max_iters) {
  auto clamp_domain = [](double x) { return x < 0.0 ? std::abs(x) : x; };
  auto eval = [&](double x) {
    const double fx = f(x);
    if (!std::isfinite(fx))
      throw NumericError("nelder_mead_1d: non-finite objective at x=" + std::to_string(x));
    return fx;
  };

  // A coarse second point: tiny initial steps stall on plateaus when the
  // warm start is far above the optimum.
  double a = clamp_domain(x0);
  double b = clamp_domain(x0 != 0.0 ? x0 * 0.5 : 0.05);
  if (a == b) b = a + 0.05;
  double fa = eval(a), fb = eval(b);
  if (fb < fa) {
    std::swap(a, b);
    std::swap(fa, fb);
  }

  int iter = 0;
  for (; iter < max_iters && std::abs(a - b) >= tol; ++iter) {
    // a is best, b is worst; centroid is a.
    double refl = clamp_domain(a + 1.0 * (a - b));
    double f_refl = eval(refl);
    if (f_refl < fa) {
      double expd = clamp_domain(a + 2.0 * (a - b));
      double f_exp = eval(expd);
      if (f_exp < f_refl) {
        b = expd;
        fb = f_exp;
      } else {
        b = refl;
        fb = f_refl;
      }
    } else {
      double contr = clamp_domain(a + (f_refl < fb ? 0.5 : -0.5) * (a - b));
      double f_contr = eval(contr);
      if (f_contr < std::min(f_refl, fb)) {
        b = contr;
        fb = f_contr;
      } else {
        b = clamp_domain(a + 0.5 * (b - a));
        fb = eval(b);
      }
    }
    if (fb < fa) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
  }
  // The |x| fold can pin the simplex on a mirror pair just above zero;
  // probe the boundary so monotone objectives reach it exactly.
  const double f0 = eval(0.0);
  if (f0 < fa) return {0.0, f0, iter, true};
  return {a, fa, iter, std::abs(a - b) < tol};
}

OptimResult1D minimize_scalar(const std::function<double(double)>& f, double lo,
                              double hi, int scan_points, double tol) {
  double best_x = lo;
  double best_f = f(lo);
  for (int i = 1; i < scan_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (scan_points - 1);
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  const double h = (hi - lo) / (scan_points - 1);
  double a = std::max(lo, best_x - h);
  double b = std::min(hi, best_x + h);

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  int iter = 0;
  while (b - a > tol && iter < 200) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
    ++iter;
  }
  const double xm = 0.5 * (a + b);
  const double fm = f(xm);
  if (fm <= best_f) return {xm, fm, iter, true};
  return {best_x, best_f, iter, true};
}

}  // namespace driftcal
