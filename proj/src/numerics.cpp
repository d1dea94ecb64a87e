#include "partherm/numerics.hpp"

#include <cmath>

// Boost 1.74 pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <limits>
#include <queue>

namespace partherm {

namespace {

struct Segment {
  double a, b, value, error;
};

class GK15 {
 public:
  GK15() {
    const auto& xk = boost::math::quadrature::gauss_kronrod<double, 15>::abscissa();
    const auto& wk = boost::math::quadrature::gauss_kronrod<double, 15>::weights();
    const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
    for (int i = 0; i < 8; ++i) {
      x_[i] = xk[i];
      wk_[i] = wk[i];
    }
    // Gauss-7 nodes coincide with the even Kronrod nodes (0 included).
    for (int i = 0; i < 4; ++i) wg_[2 * i] = wg[i];
  }

  template <class F>
  Segment apply(const F& f, double a, double b, long& evals) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double f0 = f(c);
    double k = wk_[0] * f0, g = wg_[0] * f0, abs_k = wk_[0] * std::abs(f0);
    for (int i = 1; i < 8; ++i) {
      const double fl = f(c - h * x_[i]), fr = f(c + h * x_[i]);
      k += wk_[i] * (fl + fr);
      abs_k += wk_[i] * (std::abs(fl) + std::abs(fr));
      if (i % 2 == 0) g += wg_[i] * (fl + fr);
    }
    evals += 15;
    if (!std::isfinite(k)) throw NumericalError("integrand is not finite on [" + std::to_string(a) + ", " +
                                                std::to_string(b) + "]");
    double err = std::abs((k - g) * h);
    // Floor the error at rounding level so smooth segments can retire.
    err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * std::abs(abs_k * h));
    return {a, b, k * h, err};
  }

 private:
  double x_[8]{}, wk_[8]{}, wg_[8]{};
};

const GK15& gk15() {
  static const GK15 rule;
  return rule;
}

}  // namespace

QuadResult integrate(const Fn1& f, std::vector<double> bp, const QuadOptions& opts) {
  if (bp.size() < 2) throw InvalidArgument("integrate needs at least two breakpoints");
  for (std::size_t i = 1; i < bp.size(); ++i) {
    if (!(bp[i] > bp[i - 1])) throw InvalidArgument("breakpoints must increase");
  }
  const bool infinite = std::isinf(bp.back());
  const double a_inf = bp[bp.size() - 2];

  // The semi-infinite piece [a, inf) is mapped to t in [0, 1) by x = a + t/(1-t).
  auto tail_f = [&](double t) -> double {
    const double u = 1.0 - t;
    return f(a_inf + t / u) / (u * u);
  };
  QuadResult res;
  const GK15& rule = gk15();
  auto run = [&](double a, double b, bool tail) {
    if (tail) {
      return rule.apply(tail_f, a, b, res.evaluations);
    }
    return rule.apply(f, a, b, res.evaluations);
  };

  // Tail segments keep their t coordinates and are flagged.
  struct Tagged {
    Segment s;
    bool tail;
  };
  auto cmp = [](const Tagged& x, const Tagged& y) { return x.s.error < y.s.error; };
  std::priority_queue<Tagged, std::vector<Tagged>, decltype(cmp)> pq(cmp);

  double total = 0.0, total_err = 0.0;
  const std::size_t n_regular = infinite ? bp.size() - 2 : bp.size() - 1;
  for (std::size_t i = 0; i < n_regular; ++i) {
    Segment s = run(bp[i], bp[i + 1], false);
    total += s.value;
    total_err += s.error;
    pq.push({s, false});
  }
  if (infinite) {
    Segment s = run(0.0, 1.0, true);
    total += s.value;
    total_err += s.error;
    pq.push({s, true});
  }

  int subdivisions = 0;
  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  while (total_err > target()) {
    if (subdivisions >= opts.max_subdivisions) {
      throw ConvergenceError("adaptive quadrature did not converge", total, total_err);
    }
    Tagged worst = pq.top();
    pq.pop();
    const double mid = 0.5 * (worst.s.a + worst.s.b);
    if (!(mid > worst.s.a && mid < worst.s.b)) {
      throw ConvergenceError("adaptive quadrature reached machine resolution", total, total_err);
    }
    Segment l = run(worst.s.a, mid, worst.tail);
    Segment r = run(mid, worst.s.b, worst.tail);
    total += l.value + r.value - worst.s.value;
    total_err += l.error + r.error - worst.s.error;
    pq.push({l, worst.tail});
    pq.push({r, worst.tail});
    ++subdivisions;
    if (subdivisions % 64 == 0) {
      // Re-sum to stop drift from incremental updates.
      total = 0.0;
      total_err = 0.0;
      auto copy = pq;
      while (!copy.empty()) {
        total += copy.top().s.value;
        total_err += copy.top().s.error;
        copy.pop();
      }
    }
  }
  res.value = total;
  res.error = total_err;
  return res;
}

QuadResult integrate(const Fn1& f, double a, double b, const QuadOptions& opts) {
  return integrate(f, std::vector<double>{a, b}, opts);
}

const std::vector<double>& heavy_tail_breakpoints() {
  static const std::vector<double> bp = {0.0,  1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.1,
                                         0.25, 0.5,  1.0,  1.5,  2.0,  3.0,  4.0,  6.0,  8.0,
                                         12.0, std::numeric_limits<double>::infinity()};
  return bp;
}

QuadResult quad_heavy_tail(const Fn1& g, double chi_star, double tol) {
  if (!(chi_star > 0.0)) throw InvalidArgument("chi_star must be positive");
  auto h = [&](double s) -> double {
    if (s <= 0.0) return 0.0;
    const double chi = 4.0 * chi_star / (s * s);
    const double v = g(chi);
    if (v == 0.0) return 0.0;
    return v * 8.0 * chi_star / (s * s * s);
  };
  QuadOptions opts;
  opts.abs_tol = tol;
  return integrate(h, heavy_tail_breakpoints(), opts);
}

QuadResult quad_heavy_tail_2d(const Fn2& g, double chi_star, double tol) {
  if (!(chi_star > 0.0)) throw InvalidArgument("chi_star must be positive");
  long evals = 0;
  auto outer = [&](double chi1) -> double {
    QuadResult inner = quad_heavy_tail([&](double chi2) { return g(chi1, chi2); }, chi_star, 0.5 * tol);
    evals += inner.evaluations;
    return inner.value;
  };
  QuadResult res = quad_heavy_tail(outer, chi_star, 0.5 * tol);
  res.evaluations = evals;
  return res;
}

std::pair<double, double> poisson_interval(long k) {
  if (k < 0) throw InvalidArgument("negative count");
  const double alpha = 1.0 - 0.6826894921370859;
  const double lo = k == 0 ? 0.0 : boost::math::gamma_p_inv(static_cast<double>(k), 0.5 * alpha);
  const double hi = boost::math::gamma_p_inv(static_cast<double>(k + 1), 1.0 - 0.5 * alpha);
  return {lo, hi};
}

namespace {

Histogram fill_histogram(const std::vector<double>& samples, std::vector<double> edges, bool log_centres) {
  Histogram h;
  const int bins = static_cast<int>(edges.size()) - 1;
  h.counts.assign(bins, 0);
  h.total = static_cast<long>(samples.size());
  for (double x : samples) {
    if (x < edges.front()) {
      ++h.below;
      continue;
    }
    if (x >= edges.back()) {
      ++h.above;
      continue;
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    ++h.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
  }
  h.centers.resize(bins);
  h.density.resize(bins);
  h.ci_low.resize(bins);
  h.ci_high.resize(bins);
  const double n = h.total > 0 ? static_cast<double>(h.total) : 1.0;
  for (int i = 0; i < bins; ++i) {
    const double w = edges[i + 1] - edges[i];
    h.centers[i] = log_centres ? std::sqrt(edges[i] * edges[i + 1]) : 0.5 * (edges[i] + edges[i + 1]);
    h.density[i] = h.counts[i] / (n * w);
    auto [lo, hi] = poisson_interval(h.counts[i]);
    h.ci_low[i] = lo / (n * w);
    h.ci_high[i] = hi / (n * w);
  }
  h.edges = std::move(edges);
  return h;
}

}  // namespace

Histogram histogram_log(const std::vector<double>& samples, int bins, double lo, double hi) {
  if (bins < 1 || !(lo > 0.0) || !(hi > lo)) throw InvalidArgument("bad log-histogram range");
  std::vector<double> edges(bins + 1);
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (int i = 0; i <= bins; ++i) edges[i] = std::exp(l0 + (l1 - l0) * i / bins);
  edges.front() = lo;
  edges.back() = hi;
  return fill_histogram(samples, std::move(edges), true);
}

Histogram histogram_linear(const std::vector<double>& samples, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw InvalidArgument("bad histogram range");
  std::vector<double> edges(bins + 1);
  for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * i / bins;
  return fill_histogram(samples, std::move(edges), false);
}

double ks_distance(std::vector<double> samples, const Fn1& cdf) {
  if (samples.empty()) throw InvalidArgument("no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, F - i / n, (i + 1) / n - F});
  }
  return d;
}

double find_root(const Fn1& f, double lo, double hi, double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw InvalidArgument("root is not bracketed");
  std::uintmax_t iters = 200;
  auto done = [tol](double a, double b) { return std::abs(b - a) <= tol * std::max(1.0, std::abs(a)); };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, done, iters);
  return 0.5 * (r.first + r.second);
}

double newton_bisect(const std::function<std::pair<double, double>(double)>& fdf, double lo, double hi,
                     double guess, int digits) {
  std::uintmax_t iters = 200;
  auto fn = [&](double x) {
    auto [v, d] = fdf(x);
    return std::make_pair(v, d);
  };
  return boost::math::tools::newton_raphson_iterate(fn, std::clamp(guess, lo, hi), lo, hi, digits, iters);
}

std::pair<RVector, RVector> gauss_hermite(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Hermite order must be positive");
  RMatrix jac = RMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(jac);
  RVector w = es.eigenvectors().row(0).transpose().array().square() * std::sqrt(M_PI);
  return {es.eigenvalues(), w};
}

struct MonotoneSpline::Impl {
  boost::math::interpolators::pchip<std::vector<double>> p;
};

MonotoneSpline::MonotoneSpline(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 4) throw InvalidArgument("spline needs >= 4 matching points");
  lo_ = x.front();
  hi_ = x.back();
  impl_ = std::make_shared<const Impl>(Impl{boost::math::interpolators::pchip<std::vector<double>>(std::move(x), std::move(y))});
}

double MonotoneSpline::operator()(double x) const {
  return impl_->p(std::clamp(x, lo_, hi_));
}

}  // namespace partherm
