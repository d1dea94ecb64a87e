#pragma once

#include <utility>
#include <vector>

#include "partherm/types.hpp"

namespace partherm {

struct MicroWindow {
  double center = 0.0;
  double width = 0.1;
};

/// Full spectrum and eigenvectors (LAPACK divide and conquer). The argument
/// is taken by value so large callers can move their matrix in.
EigenSystem diagonalize(HermitianMatrix H);

/// Eigenvalues only.
RVector eigenvalues(HermitianMatrix H);

/// Keep one member of every Kramers pair (even indices).
EigenSystem kramers_reduce(const EigenSystem& eig);
RVector kramers_reduce(const RVector& energies);

/// |<a|O|b>|^2 in the eigenbasis.
RMatrix squared_matrix_elements(const EigenSystem& eig, const HermitianMatrix& op);
/// Same for an operator diagonal in the computational basis.
RMatrix squared_matrix_elements(const EigenSystem& eig, const RVector& diag_op);

/// Number of levels per unit energy inside [E - w/2, E + w/2).
double dos_estimate(const RVector& energies, double E, double width = 0.1);

/// Index range [first, last) of levels inside the window.
std::pair<Index, Index> window_range(const RVector& energies, double E, double width);

/// Microcanonical spectral function from precomputed |V_ab|^2:
/// (1/(w N_E)) sum over a in W(E), b in W(E+omega) of |V_ab|^2.
double spectral_function(const RVector& energies, const RMatrix& v_sq, double E, double omega,
                         double width = 0.1);
double spectral_function(const EigenSystem& eig, const HermitianMatrix& V, double E, double omega,
                         double width = 0.1);

/// Central contiguous range of ceil(fraction * dim) indices; ties go low.
std::pair<Index, Index> mid_spectrum_indices(Index dim, double fraction = 0.25);

/// Assignment maximising sum log |<E_perm(alpha)|E0_alpha>|^2.
/// Returns perm with perm[alpha] = column of U matched to column alpha of U0.
std::vector<Index> match_eigenstates(const EigenSystem& unperturbed, const EigenSystem& coupled);
std::vector<Index> match_from_overlaps(const RMatrix& overlap_sq);

/// Minimum-cost perfect assignment of a square cost matrix (row -> column).
std::vector<Index> solve_assignment(const RMatrix& cost);

}  // namespace partherm
