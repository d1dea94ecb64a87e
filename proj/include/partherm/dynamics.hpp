#pragma once

#include <vector>

#include "partherm/fidelity.hpp"
#include "partherm/types.hpp"

namespace partherm {

struct CorrelatorSeries {
  std::vector<double> times;
  std::vector<double> values;
  double J = 0.0;
  std::uint64_t seed = 0;
};

/// |<E_alpha| sigma^z |E_beta>|^2 for the full system; `z_diag` is sigma^z
/// in the product basis (see spin_z_diagonal).
RMatrix sigma_z_weights(const EigenSystem& full, const RVector& z_diag);

/// C_zz(t) = (1/2d) sum_{alpha beta} cos((E_alpha - E_beta) t) W_alpha beta.
CorrelatorSeries czz_t(const EigenSystem& full, const RMatrix& weights, const std::vector<double>& times);
CorrelatorSeries czz_t(const EigenSystem& full, const RVector& z_diag, const std::vector<double>& times);

struct PlateauResult {
  double value = 0.0;
  Index degenerate_blocks = 0;  ///< groups of levels closer than the gap tolerance
};

/// Diagonal-ensemble value (1/2d) sum_alpha <alpha|sigma^z|alpha>^2, with
/// near-degenerate levels merged into blocks.
PlateauResult czz_infinite_exact(const EigenSystem& full, const RVector& z_diag, double gap_tol = 1e-10);

/// Golden-rule rate (2 pi J^2/d) sum_{a, sigma} v_tilde(E_a, sigma h_S) from
/// the windowed spectral function; empty target windows contribute zero.
double fgr_gamma(const RVector& bath_energies, const RMatrix& v_sq, double J, double h_S, double width = 0.1);

/// Plateau from the susceptibility distribution: average over E and sigma
/// of E[1/(1 + 4 J^2 chi)]. `h_S` only matters for the RM profile.
double czz_infinite_theory(double J, const ChiStarProfile& profile, Family family, double h_S = 0.0,
                           int hermite_order = 48);

/// Least-squares slope of log C against t over t <= t_max.
double log_decay_slope(const CorrelatorSeries& series, double t_max);

/// n log-spaced times in [t0, t1], with t = 0 prepended.
std::vector<double> log_time_grid(double t0, double t1, int n);

}  // namespace partherm
