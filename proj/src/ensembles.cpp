#include "partherm/ensembles.hpp"

#include <algorithm>
#include <cmath>

#include "partherm/numerics.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace partherm {

namespace {

void check_dim(Index d) {
  if (d < 2) throw InvalidArgument("invalid dimension " + std::to_string(d) + " (need d >= 2)");
}

cdouble complex_normal(RngStream& rng, double var) {
  const double s = std::sqrt(0.5 * var);
  const double re = rng.normal() * s;
  const double im = rng.normal() * s;
  return {re, im};
}

void check_info(lapack_int info, const char* routine) {
  if (info != 0) throw NumericalError(std::string(routine) + " failed (info " + std::to_string(info) + ")");
}

// Q of a QR factorisation with the phases of diag(R) moved into Q, which
// makes Q Haar distributed for Gaussian input.
RMatrix phase_fixed_q(RMatrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  std::vector<double> tau(n);
  check_info(LAPACKE_dgeqrf(LAPACK_COL_MAJOR, n, n, a.data(), n, tau.data()), "dgeqrf");
  RVector r = a.diagonal();
  check_info(LAPACKE_dorgqr(LAPACK_COL_MAJOR, n, n, n, a.data(), n, tau.data()), "dorgqr");
  for (Index j = 0; j < n; ++j)
    if (r(j) < 0.0) a.col(j) *= -1.0;
  return a;
}

CMatrix phase_fixed_q(CMatrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  std::vector<cdouble> tau(n);
  check_info(LAPACKE_zgeqrf(LAPACK_COL_MAJOR, n, n, a.data(), n, tau.data()), "zgeqrf");
  CVector r = a.diagonal();
  check_info(LAPACKE_zungqr(LAPACK_COL_MAJOR, n, n, n, a.data(), n, tau.data()), "zungqr");
  for (Index j = 0; j < n; ++j) {
    const double m = std::abs(r(j));
    if (m > 0.0) a.col(j) *= r(j) / m;
  }
  return a;
}

}  // namespace

double SemicircleSpec::density(double E) const {
  const double r2 = radius * radius;
  if (E * E >= r2) return 0.0;
  return 2.0 * d / (M_PI * r2) * std::sqrt(r2 - E * E);
}

double SemicircleSpec::cdf(double E) const {
  const double x = E / radius;
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / M_PI;
}

HermitianMatrix sample_gre(Index d, DysonClass beta, RngStream& rng) {
  check_dim(d);
  const double inv_d = 1.0 / static_cast<double>(d);
  switch (beta.value()) {
    case 1: {
      RMatrix h(d, d);
      for (Index j = 0; j < d; ++j) {
        h(j, j) = rng.normal() * std::sqrt(2.0 * inv_d);
        for (Index i = j + 1; i < d; ++i) h(i, j) = h(j, i) = rng.normal() * std::sqrt(inv_d);
      }
      return HermitianMatrix(std::move(h));
    }
    case 2: {
      CMatrix h(d, d);
      for (Index j = 0; j < d; ++j) {
        h(j, j) = rng.normal() * std::sqrt(inv_d);
        for (Index i = j + 1; i < d; ++i) {
          h(i, j) = complex_normal(rng, inv_d);
          h(j, i) = std::conj(h(i, j));
        }
      }
      return HermitianMatrix(std::move(h));
    }
    default: {
      // Each real quaternion component of an off-diagonal element has
      // variance 1/(4d); real diagonal has 1/(2d).
      CMatrix a(d, d), b = CMatrix::Zero(d, d);
      for (Index j = 0; j < d; ++j) {
        a(j, j) = rng.normal() * std::sqrt(0.5 * inv_d);
        for (Index i = j + 1; i < d; ++i) {
          a(i, j) = complex_normal(rng, 0.5 * inv_d);
          a(j, i) = std::conj(a(i, j));
          b(i, j) = complex_normal(rng, 0.5 * inv_d);
          b(j, i) = -b(i, j);
        }
      }
      CMatrix h(2 * d, 2 * d);
      h.topLeftCorner(d, d) = a;
      h.topRightCorner(d, d) = b;
      h.bottomLeftCorner(d, d) = -b.conjugate();
      h.bottomRightCorner(d, d) = a.conjugate();
      return HermitianMatrix(std::move(h));
    }
  }
}

std::vector<double> sample_semicircle(Index n, RngStream& rng) {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  const SemicircleSpec sc{2.0, 1.0};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& e : out) {
    const double u = rng.uniform_open();
    // Start from the linearised inverse around the centre.
    const double guess = std::clamp(M_PI * (u - 0.5), -1.9, 1.9);
    e = newton_bisect([&](double x) { return std::make_pair(sc.cdf(x) - u, sc.density(x)); }, -2.0, 2.0, guess);
  }
  return out;
}

CVector kramers_partner(const CVector& v) {
  const Index d = v.size() / 2;
  CVector w(v.size());
  w.head(d) = -v.tail(d).conjugate();
  w.tail(d) = v.head(d).conjugate();
  return w;
}

DenseMatrix sample_haar(Index d, DysonClass beta, RngStream& rng) {
  check_dim(d);
  switch (beta.value()) {
    case 1: {
      RMatrix g(d, d);
      for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
      return phase_fixed_q(std::move(g));
    }
    case 2: {
      CMatrix g(d, d);
      for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = complex_normal(rng, 1.0);
      return phase_fixed_q(std::move(g));
    }
    default: {
      // Gram-Schmidt on Gaussian quaternion vectors; each accepted column
      // brings its Kramers partner along.
      CMatrix u(2 * d, 2 * d);
      for (Index j = 0; j < d; ++j) {
        CVector v(2 * d);
        for (Index i = 0; i < 2 * d; ++i) v(i) = complex_normal(rng, 1.0);
        for (int pass = 0; pass < 2; ++pass) {
          if (j == 0) break;
          auto left = u.leftCols(j);
          auto right = u.middleCols(d, j);
          v -= left * (left.adjoint() * v);
          v -= right * (right.adjoint() * v);
        }
        v.normalize();
        u.col(j) = v;
        u.col(d + j) = kramers_partner(v);
      }
      return u;
    }
  }
}

HermitianMatrix rotate_levels(const std::vector<double>& levels, const DenseMatrix& U) {
  return std::visit(
      [&](const auto& u) -> HermitianMatrix {
        using M = std::decay_t<decltype(u)>;
        const Index n = u.rows();
        Eigen::VectorXd lam(n);
        if (static_cast<Index>(levels.size()) == n) {
          for (Index i = 0; i < n; ++i) lam(i) = levels[i];
        } else if (2 * static_cast<Index>(levels.size()) == n) {
          const Index d = n / 2;
          for (Index i = 0; i < d; ++i) lam(i) = lam(d + i) = levels[i];
        } else {
          throw InvalidArgument("level count does not match the rotation");
        }
        M h = (u * lam.asDiagonal()) * u.adjoint();
        M sym = 0.5 * (h + M(h.adjoint()));
        return HermitianMatrix(std::move(sym));
      },
      U);
}

HermitianMatrix sample_poisson_bath(Index d, DysonClass beta, RngStream& rng) {
  check_dim(d);
  auto levels = sample_semicircle(d, rng);
  auto U = sample_haar(d, beta, rng);
  return rotate_levels(levels, U);
}

}  // namespace partherm
