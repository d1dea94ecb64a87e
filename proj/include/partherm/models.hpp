#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "partherm/types.hpp"

namespace partherm {

/// Weakly disordered Ising chain with alternating couplings, open boundaries.
struct IsingBathSpec {
  int L = 10;
  double h = 0.9045;
  double u = 0.8090;
  double Gamma = 0.9950;

  Index dim() const { return Index{1} << L; }
  double field_halfwidth() const;                 ///< u sqrt(3 (1 - Gamma^2))
  double energy_variance() const;                 ///< disorder average of tr H^2 / 2^L
  double energy_variance(const std::vector<double>& fields) const;  ///< exact for given fields
  double probe_field() const;                     ///< sqrt(h^2 + u^2)
  double rho0() const;                            ///< 2^L / sqrt(2 pi s_E^2)
  double gaussian_dos(double E) const;
  void validate() const;
};

std::vector<double> sample_ising_fields(const IsingBathSpec& spec, RngStream& rng);

/// Dense H_B in the sigma^x product basis (site n is bit n-1, bit value 0
/// means sigma^x = +1): bonds and longitudinal fields are diagonal, the
/// transverse field u Gamma flips single bits.
HermitianMatrix build_ising_bath(const IsingBathSpec& spec, const std::vector<double>& fields);
HermitianMatrix build_ising_bath(const IsingBathSpec& spec, RngStream& rng);

/// sigma^x_n (1-based site) in the same basis, as a diagonal.
RVector sigma_x_diagonal(int L, int site);
int mid_chain_site(int L);

enum class CouplingKind { diag_alternating, mid_chain_sigma_x, custom };

CouplingKind parse_coupling_kind(const std::string& s);
std::string to_string(CouplingKind k);

struct CouplingSpec {
  double J = 0.0;
  double J_z = 0.0;
  CouplingKind kind = CouplingKind::diag_alternating;
  double h_S = 0.1;
};

/// Coupling operator V with tr(V V^dag) = d. `dim` is the bath dimension for
/// diag_alternating (V_jj = (-1)^j, j from 1) or the chain length L for
/// mid_chain_sigma_x.
HermitianMatrix build_coupling_operator(CouplingKind kind, Index dim_or_L);
RVector diag_alternating(Index d);

/// Spin tensor bath. Index i < d is (spin up, a = i); i >= d is (down, i - d).
class FullModel {
 public:
  FullModel(HermitianMatrix H_B, HermitianMatrix V, CouplingSpec coupling);

  Index bath_dim() const { return H_B_.dim(); }
  Index dim() const { return 2 * H_B_.dim(); }
  const HermitianMatrix& bath() const { return H_B_; }
  const HermitianMatrix& coupling_operator() const { return V_; }
  const CouplingSpec& coupling() const { return coupling_; }

  HermitianMatrix H0() const;        ///< diag(H_B + h_S/2, H_B - h_S/2)
  HermitianMatrix V_full() const;    ///< [[0, V^dag], [V, 0]]
  HermitianMatrix hamiltonian() const;  ///< H0 + J V_full
  std::pair<int, Index> sector(Index i) const;

 private:
  HermitianMatrix H_B_, V_;
  CouplingSpec coupling_;
};

FullModel assemble_full(HermitianMatrix H_B, HermitianMatrix V, const CouplingSpec& coupling);

/// Eigenstates of H0 built from the bath: index i < d is (up, a = i) with
/// energy E_a + h_S/2, i >= d is (down, i - d) with E_a - h_S/2. Not sorted.
EigenSystem product_eigensystem(const EigenSystem& bath, double h_S);

/// Diagonal of sigma^z_S tensor 1 on the full space.
RVector spin_z_diagonal(Index bath_dim);

/// Warning text when 1/rho0 < h_S < s_E fails; empty when it holds.
std::string hierarchy_warning(double rho0, double h_S, double s_E);

}  // namespace partherm
