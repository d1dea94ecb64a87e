#include "partherm/resonance.hpp"

#include <algorithm>
#include <cmath>

#include "partherm/numerics.hpp"

namespace partherm {

namespace {

void check_x(double x) {
  if (!(x >= 0.0)) throw InvalidArgument("J^2 chi must be non-negative");
}

// S on the log-x axis, accurate for tiny x.
double entropy_from_p(double p) {
  if (p <= 0.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

}  // namespace

double transition_p(double x) {
  check_x(x);
  if (std::isinf(x)) return 0.5;
  const double r = std::sqrt(1.0 + 4.0 * x);
  return 2.0 * x / ((r + 1.0) * r);
}

double cat_entropy(double x) { return entropy_from_p(transition_p(x)); }

double cat_entropy_derivative(double x) {
  check_x(x);
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  const double p = transition_p(x);
  return (std::log1p(-p) - std::log(p)) * std::pow(1.0 + 4.0 * x, -1.5);
}

ResonancePoint resonance_point(double x) {
  ResonancePoint r;
  r.x = x;
  r.p = transition_p(x);
  r.q = 1.0 - r.p;
  r.S = entropy_from_p(r.p);
  return r;
}

double entropy_to_x(double S) {
  if (!(S > 0.0 && S < std::log(2.0))) throw InvalidArgument("entropy must lie in (0, log 2)");
  auto fdf = [S](double y) {
    const double x = std::exp(y);
    return std::make_pair(cat_entropy(x) - S, cat_entropy_derivative(x) * x);
  };
  double lo = -700.0, hi = 70.0;
  // S(x) ~ x(1 - log x) for small x gives a good first guess there.
  double guess = S < 0.1 ? std::log(S / (1.0 - std::log(S))) : std::log(1.0 / (8.0 * (std::log(2.0) - S)));
  guess = std::clamp(guess, lo, hi);
  while (fdf(hi).first < 0.0 && hi < 700.0) hi += 50.0;
  return std::exp(newton_bisect(fdf, lo, hi, guess, 52));
}

double spin_entropy_from_eigenvector(const Eigen::Ref<const CVector>& state, Index d) {
  if (state.size() != 2 * d) throw InvalidArgument("state must have dimension 2d");
  const double norm = state.norm();
  if (std::abs(norm - 1.0) > 1e-8) throw InvalidArgument("state is not normalised");
  const double a = state.head(d).squaredNorm();
  const double c = state.tail(d).squaredNorm();
  const double b2 = std::norm(state.head(d).dot(state.tail(d)));
  // eigenvalues of [[a, b], [b*, c]]
  const double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b2));
  const double lam = std::clamp(0.5 * (a + c) - disc, 0.0, 0.5);
  return entropy_from_p(lam);
}

double spin_entropy_from_eigenvector(const Eigen::Ref<const RVector>& state, Index d) {
  if (state.size() != 2 * d) throw InvalidArgument("state must have dimension 2d");
  if (std::abs(state.norm() - 1.0) > 1e-8) throw InvalidArgument("state is not normalised");
  const double a = state.head(d).squaredNorm();
  const double c = state.tail(d).squaredNorm();
  const double b = state.head(d).dot(state.tail(d));
  const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return entropy_from_p(std::clamp(0.5 * (a + c) - disc, 0.0, 0.5));
}

RVector spin_entropies(const EigenSystem& full) {
  const Index n = full.dim();
  if (n % 2) throw InvalidArgument("full system dimension must be even");
  RVector S(n);
  if (full.is_real()) {
    const RMatrix& U = full.real_vectors();
    for (Index k = 0; k < n; ++k) S(k) = spin_entropy_from_eigenvector(U.col(k), n / 2);
  } else {
    const CMatrix& U = full.complex_vectors();
    for (Index k = 0; k < n; ++k) S(k) = spin_entropy_from_eigenvector(U.col(k), n / 2);
  }
  return S;
}

double perturbative_entropy(double J, double chi) {
  const double x = J * J * chi;
  check_x(x);
  if (x == 0.0) return 0.0;
  return x * (1.0 - std::log(x));
}

bool perturbative_flag(double J, double chi) { return J * J * chi > 0.1; }

double f_ee_pdf(double S, double J, const DistributionModel& dist) {
  if (!(J > 0.0)) throw InvalidArgument("f_ee needs J > 0");
  const double x = entropy_to_x(S);
  const double J2 = J * J;
  return dist.pdf(x / J2) / (J2 * cat_entropy_derivative(x));
}

EEMoments ee_moments(double J, const DistributionModel& dist) {
  if (!(J >= 0.0)) throw InvalidArgument("J must be non-negative");
  EEMoments m;
  if (J == 0.0) return m;
  const double J2 = J * J, cs = dist.chi_star();
  const double tol = 1e-10 * std::min(1.0, J * std::sqrt(cs));
  m.mean = quad_heavy_tail([&](double chi) { return dist.pdf(chi) * cat_entropy(J2 * chi); }, cs, tol).value;
  const double second =
      quad_heavy_tail([&](double chi) { return dist.pdf(chi) * std::pow(cat_entropy(J2 * chi), 2); }, cs, tol).value;
  m.variance = second - m.mean * m.mean;
  m.median = cat_entropy(J2 * dist.median());
  return m;
}

namespace {

// Integral of S(x)^k x^(-3/2) over (0, inf) on u = x^(-1/2).
double entropy_power_integral(int k) {
  return integrate([k](double u) { return 2.0 * std::pow(cat_entropy(1.0 / (u * u)), k); },
                   {0.0, 0.1, 1.0, 10.0, 1000.0, INFINITY}, {1e-13, 0.0, 4000})
      .value;
}

}  // namespace

double entropy_mean_coefficient() {
  static const double c = entropy_power_integral(1);
  return c;
}

double entropy_variance_coefficient() {
  static const double c = entropy_power_integral(2);
  return c;
}

double strong_coupling_constant(Family family) { return DistributionModel(family, 1.0).inverse_moment(); }

EEMoments ee_weak_asymptotes(double J, double chi_star, Family family) {
  if (!(J >= 0.0) || !(chi_star > 0.0)) throw InvalidArgument("need J >= 0 and chi* > 0");
  EEMoments m;
  if (J == 0.0) return m;
  const double g = J * std::sqrt(chi_star);
  const double cm = DistributionModel(family, 1.0).median();
  const double xm = cm * g * g;
  m.mean = 2.0 * M_PI * g;
  m.median = xm * (1.0 - std::log(xm));
  m.variance = entropy_variance_coefficient() * g;
  return m;
}

}  // namespace partherm
