#include "partherm/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace partherm {

namespace {

void require_hermitian(const HermitianMatrix& H) {
  const double defect = H.hermiticity_defect();
  if (defect > 1e-10 * std::max(1.0, H.max_abs())) throw NonHermitianError(defect);
}

void check_info(lapack_int info, const char* routine) {
  if (info < 0) throw InvalidArgument(std::string(routine) + ": illegal argument " + std::to_string(-info));
  if (info > 0) throw NumericalError(std::string(routine) + " failed to converge (info " + std::to_string(info) + ")");
}

RVector run_solver(HermitianMatrix& H, char jobz) {
  const lapack_int n = static_cast<lapack_int>(H.dim());
  RVector w(n);
  if (n == 0) return w;
  if (H.is_real()) {
    RMatrix& a = H.real();
    check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, w.data()), "dsyevd");
  } else {
    CMatrix& a = H.complex();
    check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, w.data()), "zheevd");
  }
  return w;
}

}  // namespace

EigenSystem diagonalize(HermitianMatrix H) {
  require_hermitian(H);
  EigenSystem eig;
  eig.energies = run_solver(H, 'V');
  if (H.is_real()) {
    eig.vectors = std::move(H.real());
  } else {
    eig.vectors = std::move(H.complex());
  }
  return eig;
}

RVector eigenvalues(HermitianMatrix H) {
  require_hermitian(H);
  return run_solver(H, 'N');
}

RVector kramers_reduce(const RVector& energies) {
  if (energies.size() % 2 != 0) throw InvalidArgument("Kramers reduction needs an even dimension");
  const Index d = energies.size() / 2;
  RVector out(d);
  for (Index i = 0; i < d; ++i) out(i) = energies(2 * i);
  return out;
}

EigenSystem kramers_reduce(const EigenSystem& eig) {
  EigenSystem out;
  out.energies = kramers_reduce(eig.energies);
  const Index d = out.energies.size();
  eig.visit_vectors([&](const auto& v) {
    using M = std::decay_t<decltype(v)>;
    M r(v.rows(), d);
    for (Index i = 0; i < d; ++i) r.col(i) = v.col(2 * i);
    out.vectors = std::move(r);
  });
  return out;
}

RMatrix squared_matrix_elements(const EigenSystem& eig, const HermitianMatrix& op) {
  if (op.dim() != eig.visit_vectors([](const auto& v) { return v.rows(); })) {
    throw InvalidArgument("operator dimension does not match the eigenbasis");
  }
  if (eig.is_real() && op.is_real()) {
    const RMatrix& u = eig.real_vectors();
    RMatrix tmp = op.real() * u;
    RMatrix m = u.transpose() * tmp;
    return m.array().square().matrix();
  }
  CMatrix u = eig.is_real() ? CMatrix(eig.real_vectors().cast<cdouble>()) : eig.complex_vectors();
  CMatrix tmp = op.to_complex() * u;
  CMatrix m = u.adjoint() * tmp;
  return m.cwiseAbs2();
}

RMatrix squared_matrix_elements(const EigenSystem& eig, const RVector& diag_op) {
  return eig.visit_vectors([&](const auto& u) -> RMatrix {
    if (u.rows() != diag_op.size()) throw InvalidArgument("operator dimension does not match the eigenbasis");
    using M = std::decay_t<decltype(u)>;
    M tmp = diag_op.asDiagonal() * u;
    M m = u.adjoint() * tmp;
    return m.cwiseAbs2();
  });
}

std::pair<Index, Index> window_range(const RVector& energies, double E, double width) {
  if (!(width > 0.0)) throw InvalidArgument("window width must be positive");
  const double* b = energies.data();
  const double* e = b + energies.size();
  const Index lo = std::lower_bound(b, e, E - 0.5 * width) - b;
  const Index hi = std::lower_bound(b, e, E + 0.5 * width) - b;
  return {lo, hi};
}

double dos_estimate(const RVector& energies, double E, double width) {
  auto [lo, hi] = window_range(energies, E, width);
  if (hi <= lo) throw EmptyWindow(E);
  return static_cast<double>(hi - lo) / width;
}

double spectral_function(const RVector& energies, const RMatrix& v_sq, double E, double omega, double width) {
  auto [a0, a1] = window_range(energies, E, width);
  auto [b0, b1] = window_range(energies, E + omega, width);
  if (a1 <= a0) throw EmptyWindow(E);
  if (b1 <= b0) throw EmptyWindow(E + omega);
  const double s = v_sq.block(a0, b0, a1 - a0, b1 - b0).sum();
  return s / (width * static_cast<double>(a1 - a0));
}

double spectral_function(const EigenSystem& eig, const HermitianMatrix& V, double E, double omega, double width) {
  return spectral_function(eig.energies, squared_matrix_elements(eig, V), E, omega, width);
}

std::pair<Index, Index> mid_spectrum_indices(Index dim, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must lie in (0, 1]");
  if (dim < 1) throw InvalidArgument("empty spectrum");
  Index n = static_cast<Index>(std::ceil(fraction * static_cast<double>(dim) - 1e-12));
  n = std::clamp<Index>(n, 1, dim);
  const Index start = (dim - n) / 2;
  return {start, start + n};
}

std::vector<Index> solve_assignment(const RMatrix& cost_in) {
  const Index n = cost_in.rows();
  if (cost_in.cols() != n) throw InvalidArgument("assignment needs a square cost matrix");
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cost = cost_in;
  // Shortest augmenting path with dual potentials (Kuhn-Munkres), 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<Index> row_to_col(n);
  for (Index j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

std::vector<Index> match_from_overlaps(const RMatrix& overlap_sq) {
  constexpr double floor = 1e-300;
  const Index n = overlap_sq.rows();
  RMatrix cost(n, overlap_sq.cols());
  for (Index r = 0; r < n; ++r) {
    if (overlap_sq.row(r).maxCoeff() < floor) throw DegenerateOverlap(static_cast<std::size_t>(r));
    for (Index c = 0; c < cost.cols(); ++c) cost(r, c) = -std::log(std::max(overlap_sq(r, c), floor));
  }
  return solve_assignment(cost);
}

std::vector<Index> match_eigenstates(const EigenSystem& unperturbed, const EigenSystem& coupled) {
  if (unperturbed.dim() != coupled.dim()) throw InvalidArgument("matching needs equal dimensions");
  RMatrix ov;
  if (unperturbed.is_real() && coupled.is_real()) {
    ov = (unperturbed.real_vectors().transpose() * coupled.real_vectors()).array().square().matrix();
  } else {
    auto as_c = [](const EigenSystem& e) {
      return e.is_real() ? CMatrix(e.real_vectors().cast<cdouble>()) : e.complex_vectors();
    };
    ov = (as_c(unperturbed).adjoint() * as_c(coupled)).cwiseAbs2();
  }
  return match_from_overlaps(ov);
}

}  // namespace partherm
