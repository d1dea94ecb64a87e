#pragma once

#include <vector>

#include "partherm/types.hpp"

namespace partherm {

using DenseMatrix = std::variant<RMatrix, CMatrix>;

/// Wigner semicircle of radius 2 normalised to d states.
struct SemicircleSpec {
  double radius = 2.0;
  double d = 1.0;
  double rho0() const { return d / M_PI; }
  double density(double E) const;
  double cdf(double E) const;   ///< fraction of states below E
};

/// Gaussian random Hermitian matrix (GOE / GUE / GSE). Off-diagonal
/// elements have mean square 1/d, diagonal 2/(beta d). GSE samples are
/// 2d x 2d complex with blocks [[A, B], [-B*, A*]].
HermitianMatrix sample_gre(Index d, DysonClass beta, RngStream& rng);

/// iid draws from the semicircle law by inverse CDF.
std::vector<double> sample_semicircle(Index n, RngStream& rng);

/// Haar-random orthogonal (beta 1), unitary (2) or unitary symplectic (4,
/// 2d x 2d with column d+j the Kramers partner of column j).
DenseMatrix sample_haar(Index d, DysonClass beta, RngStream& rng);

/// H = U diag(Lambda) U^dag with Lambda iid semicircle and U Haar.
HermitianMatrix sample_poisson_bath(Index d, DysonClass beta, RngStream& rng);

/// Same, but with caller-supplied levels.
HermitianMatrix rotate_levels(const std::vector<double>& levels, const DenseMatrix& U);

/// Kramers partner of a 2d-component vector (x; y) -> (-y*; x*).
CVector kramers_partner(const CVector& v);

}  // namespace partherm
