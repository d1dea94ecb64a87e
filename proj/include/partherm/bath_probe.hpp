#pragma once

#include <string>
#include <vector>

#include "partherm/fidelity.hpp"
#include "partherm/types.hpp"

namespace partherm {

enum class Parity { even, odd, mixed };
Parity parse_parity(const std::string& s);
std::string to_string(Parity p);

/// Kernel variances 2(qq' + pp') and 2(qp' + pq') at x = J^2 chi, x' = J^2 chi'.
double v_even(double x, double xp);
double v_odd(double x, double xp);

/// Density of the normalised off-diagonal element R of the probe coupling,
/// with g = J sqrt(chi*).
double f_od_pdf(double R, double g, Family family, Parity parity, double tol = 1e-9);
double f_od_cdf(double R, double g, Family family, Parity parity, double tol = 1e-9);
/// E[R^2], and E[R^2; |R| < eps].
double f_od_second_moment(double g, Family family, Parity parity, double tol = 1e-10);
double f_od_truncated_second_moment(double eps, double g, Family family, Parity parity, double tol = 1e-10);

/// 2 log of the mean kernel sqrt(pp' + qq') + sqrt(pq' + qp').
double delta_s_theory(double g, Family family, double tol = 1e-11);

/// Mean |V'_ab| over a in the window at E, b in the window at E + omega,
/// accumulated over several window centres. Returns (sum, count).
std::pair<double, long> offdiag_abs_sum(const RVector& energies, const RMatrix& vp_sq, const std::vector<double>& centres,
                                        double omega, double width);

/// 2 log([|V'|] / [|V'|]_{J=0}) from the coupled and decoupled spectra.
double measure_delta_s_matrix_elements(const RVector& coupled_energies, const RMatrix& coupled_vp_sq,
                                       const RVector& baseline_energies, const RMatrix& baseline_vp_sq,
                                       const std::vector<double>& centres, double omega, double width = 0.1);

/// Order-1/2 Renyi entropy of P_i = a_i^2 / sum a^2.
double renyi_half_entropy(const std::vector<double>& abs_values);

/// Second-probe susceptibilities for states [first, last) of the full
/// spectrum and both signs tau, tau = +1 first.
std::vector<ChiSample> chi_prime_samples(const RVector& full_energies, const RMatrix& vp_sq, double h_probe,
                                         Index first, Index last);

/// Probe operator on the 2d-dimensional space as a diagonal: identity on
/// the spin, `bath_diag` on the bath.
RVector lift_to_full(const RVector& bath_diag);

}  // namespace partherm
