#include "partherm/bath_probe.hpp"

#include <cmath>
#include <functional>

#include "partherm/numerics.hpp"
#include "partherm/resonance.hpp"
#include "partherm/spectra.hpp"

namespace partherm {

Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::even;
  if (s == "odd") return Parity::odd;
  if (s == "mixed") return Parity::mixed;
  throw InvalidArgument("unknown parity '" + s + "'");
}

std::string to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    default: return "mixed";
  }
}

double v_even(double x, double xp) {
  const double p = transition_p(x), pp = transition_p(xp);
  return 2.0 * ((1.0 - p) * (1.0 - pp) + p * pp);
}

double v_odd(double x, double xp) {
  const double p = transition_p(x), pp = transition_p(xp);
  return 2.0 * ((1.0 - p) * pp + p * (1.0 - pp));
}

namespace {

using VarianceFn = std::function<double(double)>;

// E over chi, chi' iid from the unit-scale family of h(v(J^2 chi, J^2 chi')).
double kernel_expectation(double g, Family family, Parity parity, const VarianceFn& h, double tol) {
  if (!(g >= 0.0)) throw InvalidArgument("J sqrt(chi*) must be non-negative");
  const DistributionModel unit(family, 1.0);
  const double g2 = g * g;
  auto one = [&](bool even) {
    return quad_heavy_tail_2d(
               [&](double c1, double c2) {
                 const double x = g2 * c1, xp = g2 * c2;
                 return unit.pdf(c1) * unit.pdf(c2) * h(even ? v_even(x, xp) : v_odd(x, xp));
               },
               1.0, tol)
        .value;
  };
  switch (parity) {
    case Parity::even: return one(true);
    case Parity::odd: return one(false);
    default: return 0.5 * (one(true) + one(false));
  }
}

}  // namespace

double f_od_pdf(double R, double g, Family family, Parity parity, double tol) {
  return kernel_expectation(
      g, family, parity,
      [R](double v) { return v > 0.0 ? std::exp(-R * R / (2.0 * v)) / std::sqrt(2.0 * M_PI * v) : 0.0; }, tol);
}

double f_od_cdf(double R, double g, Family family, Parity parity, double tol) {
  return kernel_expectation(
      g, family, parity,
      [R](double v) {
        if (v > 0.0) return 0.5 * std::erfc(-R / std::sqrt(2.0 * v));
        return R >= 0.0 ? 1.0 : 0.0;
      },
      tol);
}

double f_od_second_moment(double g, Family family, Parity parity, double tol) {
  return kernel_expectation(g, family, parity, [](double v) { return v; }, tol);
}

double f_od_truncated_second_moment(double eps, double g, Family family, Parity parity, double tol) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  return kernel_expectation(
      g, family, parity,
      [eps](double v) {
        if (!(v > 0.0)) return 0.0;
        const double a = eps / std::sqrt(v);
        return v * (std::erf(a / std::sqrt(2.0)) - 2.0 * a * std::exp(-0.5 * a * a) / std::sqrt(2.0 * M_PI));
      },
      tol);
}

double delta_s_theory(double g, Family family, double tol) {
  if (!(g >= 0.0)) throw InvalidArgument("J sqrt(chi*) must be non-negative");
  if (g == 0.0) return 0.0;
  const DistributionModel unit(family, 1.0);
  const double g2 = g * g;
  const double excess = quad_heavy_tail_2d(
                            [&](double c1, double c2) {
                              const double p = transition_p(g2 * c1), pp = transition_p(g2 * c2);
                              const double q = 1.0 - p, qp = 1.0 - pp;
                              const double k = std::sqrt(p * pp + q * qp) + std::sqrt(p * qp + q * pp);
                              return unit.pdf(c1) * unit.pdf(c2) * (k - 1.0);
                            },
                            1.0, tol)
                            .value;
  return 2.0 * std::log1p(excess);
}

std::pair<double, long> offdiag_abs_sum(const RVector& e, const RMatrix& vp_sq, const std::vector<double>& centres,
                                        double omega, double width) {
  if (vp_sq.rows() != e.size() || vp_sq.cols() != e.size()) throw InvalidArgument("|V'|^2 has the wrong dimension");
  double sum = 0.0;
  long count = 0;
  for (double E : centres) {
    auto [a0, a1] = window_range(e, E, width);
    auto [b0, b1] = window_range(e, E + omega, width);
    if (a1 <= a0) throw EmptyWindow(E);
    if (b1 <= b0) throw EmptyWindow(E + omega);
    sum += vp_sq.block(a0, b0, a1 - a0, b1 - b0).cwiseSqrt().sum();
    count += static_cast<long>((a1 - a0) * (b1 - b0));
  }
  return {sum, count};
}

double measure_delta_s_matrix_elements(const RVector& ce, const RMatrix& cv, const RVector& be, const RMatrix& bv,
                                       const std::vector<double>& centres, double omega, double width) {
  auto [cs, cn] = offdiag_abs_sum(ce, cv, centres, omega, width);
  auto [bs, bn] = offdiag_abs_sum(be, bv, centres, omega, width);
  if (!(cs > 0.0) || !(bs > 0.0)) throw NumericalError("vanishing probe matrix elements in the windows");
  return 2.0 * std::log((cs / cn) / (bs / bn));
}

double renyi_half_entropy(const std::vector<double>& a) {
  double s1 = 0.0, s2 = 0.0;
  for (double x : a) {
    s1 += std::abs(x);
    s2 += x * x;
  }
  if (!(s2 > 0.0)) throw InvalidArgument("all amplitudes vanish");
  return 2.0 * std::log(s1 / std::sqrt(s2));
}

std::vector<ChiSample> chi_prime_samples(const RVector& e, const RMatrix& vp_sq, double h, Index first, Index last) {
  std::vector<ChiSample> out;
  for (int tau : {1, -1}) {
    auto chi = chi_values(e, vp_sq, tau * h, first, last);
    for (Index a = first; a < last; ++a) {
      ChiSample s;
      s.sigma = tau;
      s.a = a;
      s.E = e(a);
      s.chi = chi[a - first];
      out.push_back(s);
    }
  }
  return out;
}

RVector lift_to_full(const RVector& bath_diag) {
  RVector v(2 * bath_diag.size());
  v << bath_diag, bath_diag;
  return v;
}

}  // namespace partherm
