#pragma once

#include "partherm/fidelity.hpp"
#include "partherm/types.hpp"

namespace partherm {

struct ResonancePoint {
  double x = 0.0;   ///< J^2 chi
  double p = 0.0;
  double q = 1.0;
  double S = 0.0;
};

/// p = (1 - 1/sqrt(1+4x))/2 for the two-level resonance.
double transition_p(double x);
/// Entropy -p log p - q log q of the resonance; S(0) = 0.
double cat_entropy(double x);
/// dS/dx = log(q/p) (1+4x)^(-3/2).
double cat_entropy_derivative(double x);
ResonancePoint resonance_point(double x);
/// Inverse of cat_entropy on (0, log 2).
double entropy_to_x(double S);

/// Entanglement entropy of the spin for a state on the 2d-dimensional space
/// (spin up first).
double spin_entropy_from_eigenvector(const Eigen::Ref<const CVector>& state, Index d);
double spin_entropy_from_eigenvector(const Eigen::Ref<const RVector>& state, Index d);
/// Spin entropy of every eigenvector of a full-system decomposition.
RVector spin_entropies(const EigenSystem& full);

/// J^2 chi (1 - log J^2 chi).
double perturbative_entropy(double J, double chi);
/// True when J^2 chi exceeds the range where the expansion is trusted.
bool perturbative_flag(double J, double chi);

/// Density of the spin entropy implied by the susceptibility distribution.
double f_ee_pdf(double S, double J, const DistributionModel& dist);

struct EEMoments {
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;
};

EEMoments ee_moments(double J, const DistributionModel& dist);
/// Leading weak-coupling forms of the mean, median and variance.
EEMoments ee_weak_asymptotes(double J, double chi_star, Family family);

/// Integral of S(x) x^(-3/2) and S(x)^2 x^(-3/2) over (0, inf).
double entropy_mean_coefficient();
double entropy_variance_coefficient();
/// chi* E[1/chi] for a family, the strong-coupling constant of the mean.
double strong_coupling_constant(Family family);

}  // namespace partherm
