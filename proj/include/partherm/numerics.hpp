#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "partherm/types.hpp"

namespace partherm {

struct QuadOptions {
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
  int max_subdivisions = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

/// Globally adaptive Gauss-Kronrod (7/15) over consecutive breakpoints.
/// The last breakpoint may be +infinity. Throws ConvergenceError when the
/// error target is not met within the subdivision budget.
QuadResult integrate(const Fn1& f, std::vector<double> breakpoints, const QuadOptions& opts = {});
QuadResult integrate(const Fn1& f, double a, double b, const QuadOptions& opts = {});

/// ∫_0^∞ g(χ) dχ for integrands carrying a χ^{-3/2} tail and an
/// exp(-c χ*/χ) head. Evaluated on s = 2 sqrt(χ*/χ), where those become
/// smooth and Gaussian-like.
QuadResult quad_heavy_tail(const Fn1& g, double chi_star, double tol = 1e-9);

/// ∬ g(χ, χ') dχ dχ' on the same substitution in both variables.
QuadResult quad_heavy_tail_2d(const Fn2& g, double chi_star, double tol = 1e-9);

/// Breakpoints in s used by the heavy-tail rules.
const std::vector<double>& heavy_tail_breakpoints();

struct Histogram {
  std::vector<double> edges;
  std::vector<double> centers;     ///< geometric centres
  std::vector<long> counts;
  std::vector<double> density;     ///< per unit linear measure, normalised by total sample count
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  long total = 0;
  long below = 0;
  long above = 0;
};

/// Log-spaced histogram on [lo, hi] with Poisson 68% (Garwood) intervals.
Histogram histogram_log(const std::vector<double>& samples, int bins, double lo, double hi);
Histogram histogram_linear(const std::vector<double>& samples, int bins, double lo, double hi);

/// Central Poisson interval containing 68.27% for an observed count.
std::pair<double, double> poisson_interval(long k);

/// Kolmogorov-Smirnov distance between samples and a CDF.
double ks_distance(std::vector<double> samples, const Fn1& cdf);

/// Root of f in [lo, hi]; f(lo) and f(hi) must differ in sign.
double find_root(const Fn1& f, double lo, double hi, double tol = 1e-14);

/// Safeguarded Newton on a bracket: fdf returns (f, f').
double newton_bisect(const std::function<std::pair<double, double>(double)>& fdf, double lo, double hi,
                     double guess, int digits = 48);

/// n-point Gauss-Hermite rule for weight exp(-x^2).
std::pair<RVector, RVector> gauss_hermite(int n);

/// Monotone cubic (PCHIP) interpolant over strictly increasing x.
class MonotoneSpline {
 public:
  MonotoneSpline() = default;
  MonotoneSpline(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  double x_min() const { return lo_; }
  double x_max() const { return hi_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double lo_ = 0.0, hi_ = 0.0;
};

}  // namespace partherm
