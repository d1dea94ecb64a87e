#include "partherm/dynamics.hpp"

#include <cmath>

#include "partherm/numerics.hpp"
#include "partherm/spectra.hpp"

namespace partherm {

RMatrix sigma_z_weights(const EigenSystem& full, const RVector& z_diag) {
  if (z_diag.size() != full.dim()) throw InvalidArgument("sigma^z diagonal has the wrong dimension");
  return squared_matrix_elements(full, z_diag);
}

CorrelatorSeries czz_t(const EigenSystem& full, const RMatrix& W, const std::vector<double>& times) {
  const Index n = full.dim();
  if (W.rows() != n || W.cols() != n) throw InvalidArgument("weight matrix has the wrong dimension");
  const auto T = static_cast<Index>(times.size());
  CorrelatorSeries out;
  out.times = times;
  out.values.resize(times.size());
  if (T == 0) return out;
  // C(t) = c^T W c + s^T W s with c = cos(E t), s = sin(E t).
  RMatrix C(n, T), S(n, T);
  for (Index k = 0; k < T; ++k) {
    for (Index a = 0; a < n; ++a) {
      const double ph = full.energies(a) * times[k];
      C(a, k) = std::cos(ph);
      S(a, k) = std::sin(ph);
    }
  }
  const RMatrix WC = W * C;
  const RMatrix WS = W * S;
  for (Index k = 0; k < T; ++k) {
    const double v = (C.col(k).dot(WC.col(k)) + S.col(k).dot(WS.col(k))) / static_cast<double>(n);
    if (!std::isfinite(v)) throw NumericalError("non-finite correlator value");
    out.values[k] = v;
  }
  return out;
}

CorrelatorSeries czz_t(const EigenSystem& full, const RVector& z_diag, const std::vector<double>& times) {
  return czz_t(full, sigma_z_weights(full, z_diag), times);
}

PlateauResult czz_infinite_exact(const EigenSystem& full, const RVector& z, double gap_tol) {
  const Index n = full.dim();
  if (z.size() != n) throw InvalidArgument("sigma^z diagonal has the wrong dimension");
  PlateauResult r;
  double acc = 0.0;
  full.visit_vectors([&](const auto& U) {
    Index start = 0;
    while (start < n) {
      Index end = start + 1;
      while (end < n && full.energies(end) - full.energies(end - 1) < gap_tol) ++end;
      if (end - start == 1) {
        acc += std::pow((U.col(start).cwiseAbs2().transpose() * z)(0), 2);
      } else {
        ++r.degenerate_blocks;
        const auto B = U.middleCols(start, end - start);
        acc += (B.adjoint() * z.asDiagonal() * B).cwiseAbs2().sum();
      }
      start = end;
    }
  });
  r.value = acc / static_cast<double>(n);
  return r;
}

double fgr_gamma(const RVector& e, const RMatrix& v_sq, double J, double h_S, double width) {
  const Index d = e.size();
  if (v_sq.rows() != d || v_sq.cols() != d) throw InvalidArgument("|V_ab|^2 must be d x d");
  double acc = 0.0;
  for (Index a = 0; a < d; ++a) {
    auto [a0, a1] = window_range(e, e(a), width);
    for (int sigma : {1, -1}) {
      auto [b0, b1] = window_range(e, e(a) + sigma * h_S, width);
      if (b1 <= b0) continue;
      acc += v_sq.block(a0, b0, a1 - a0, b1 - b0).sum() / (width * static_cast<double>(a1 - a0));
    }
  }
  return 2.0 * M_PI * J * J * acc / static_cast<double>(d);
}

namespace {

// 1 - E[1/(1 + 4 y x)] at unit scale.
double plateau_deficit(double y, const DistributionModel& unit) {
  if (y <= 0.0) return 0.0;
  const double tol = 1e-11 * std::min(1.0, std::sqrt(y));
  return quad_heavy_tail([&](double x) { return unit.pdf(x) * 4.0 * y * x / (1.0 + 4.0 * y * x); }, 1.0, tol).value;
}

}  // namespace

double czz_infinite_theory(double J, const ChiStarProfile& profile, Family family, double h_S, int order) {
  if (!(J >= 0.0)) throw InvalidArgument("J must be non-negative");
  if (J == 0.0) return 1.0;
  const DistributionModel unit(family, 1.0);
  const double J2 = J * J;
  switch (profile.kind()) {
    case ChiStarProfile::Kind::constant:
      return 1.0 - plateau_deficit(J2 * profile(0.0, 0.0), unit);
    case ChiStarProfile::Kind::ETH_gaussian: {
      auto [t, w] = gauss_hermite(order);
      double acc = 0.0;
      for (Index i = 0; i < t.size(); ++i) {
        const double E = std::sqrt(2.0) * profile.s_E() * t(i);
        acc += w(i) * plateau_deficit(J2 * profile(E, h_S), unit);
      }
      return 1.0 - acc / std::sqrt(M_PI);
    }
    default: {
      double acc = 0.0;
      for (int sigma : {1, -1}) {
        auto f = [&](double E) {
          const double e = E + sigma * h_S;
          if (std::abs(e) >= 2.0) return 0.0;
          return profile.state_density(E) * plateau_deficit(J2 * profile(E, sigma * h_S), unit);
        };
        acc += 0.5 * integrate(f, {-2.0, -2.0 + std::abs(h_S), 0.0, 2.0 - std::abs(h_S), 2.0}, {1e-9, 0.0, 4000}).value;
      }
      return 1.0 - acc;
    }
  }
}

double log_decay_slope(const CorrelatorSeries& s, double t_max) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    if (s.times[k] > t_max) continue;
    if (!(s.values[k] > 0.0)) throw NumericalError("correlator is not positive inside the fit range");
    const double y = std::log(s.values[k]);
    n += 1;
    st += s.times[k];
    sy += y;
    stt += s.times[k] * s.times[k];
    sty += s.times[k] * y;
  }
  if (n < 2) throw InvalidArgument("need at least two times in the fit range");
  return (n * sty - st * sy) / (n * stt - st * st);
}

std::vector<double> log_time_grid(double t0, double t1, int n) {
  if (!(t0 > 0.0 && t1 > t0) || n < 2) throw InvalidArgument("bad time grid");
  std::vector<double> t{0.0};
  for (int i = 0; i < n; ++i) t.push_back(t0 * std::pow(t1 / t0, static_cast<double>(i) / (n - 1)));
  return t;
}

}  // namespace partherm
