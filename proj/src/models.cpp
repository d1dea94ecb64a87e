#include "partherm/models.hpp"

#include <cmath>
#include <sstream>

namespace partherm {

double IsingBathSpec::field_halfwidth() const { return u * std::sqrt(3.0 * (1.0 - Gamma * Gamma)); }

double IsingBathSpec::energy_variance() const { return (L - 1) + L * (h * h + u * u); }

double IsingBathSpec::energy_variance(const std::vector<double>& fields) const {
  double s = (L - 1) + L * u * u * Gamma * Gamma;
  for (double f : fields) s += f * f;
  return s;
}

double IsingBathSpec::probe_field() const { return std::sqrt(h * h + u * u); }

double IsingBathSpec::rho0() const {
  return static_cast<double>(dim()) / std::sqrt(2.0 * M_PI * energy_variance());
}

double IsingBathSpec::gaussian_dos(double E) const {
  return rho0() * std::exp(-E * E / (2.0 * energy_variance()));
}

void IsingBathSpec::validate() const {
  if (L < 2 || L > 14) throw InvalidArgument("Ising chain length must be in [2, 14] (got " + std::to_string(L) + ")");
  if (!(Gamma >= 0.0 && Gamma <= 1.0)) throw InvalidArgument("Gamma must lie in [0, 1]");
}

std::vector<double> sample_ising_fields(const IsingBathSpec& spec, RngStream& rng) {
  spec.validate();
  const double w = spec.field_halfwidth();
  std::vector<double> f(spec.L);
  for (auto& x : f) x = spec.h + w * (2.0 * rng.uniform() - 1.0);
  return f;
}

HermitianMatrix build_ising_bath(const IsingBathSpec& spec, const std::vector<double>& fields) {
  spec.validate();
  if (static_cast<int>(fields.size()) != spec.L) throw InvalidArgument("need one field per site");
  const Index d = spec.dim();
  const int L = spec.L;
  const double t = spec.u * spec.Gamma;
  RMatrix H = RMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    auto x = [&](int n) { return ((i >> (n - 1)) & 1) ? -1.0 : 1.0; };
    double diag = 0.0;
    for (int n = 1; n < L; ++n) diag += ((n % 2) ? -1.0 : 1.0) * x(n) * x(n + 1);
    for (int n = 1; n <= L; ++n) diag += fields[n - 1] * x(n);
    H(i, i) = diag;
    if (t != 0.0) {
      for (int n = 1; n <= L; ++n) H(i ^ (Index{1} << (n - 1)), i) = t;
    }
  }
  return HermitianMatrix(std::move(H));
}

HermitianMatrix build_ising_bath(const IsingBathSpec& spec, RngStream& rng) {
  return build_ising_bath(spec, sample_ising_fields(spec, rng));
}

RVector sigma_x_diagonal(int L, int site) {
  if (site < 1 || site > L) throw InvalidArgument("site out of range");
  const Index d = Index{1} << L;
  RVector v(d);
  for (Index i = 0; i < d; ++i) v(i) = ((i >> (site - 1)) & 1) ? -1.0 : 1.0;
  return v;
}

int mid_chain_site(int L) { return (L + 1) / 2; }

CouplingKind parse_coupling_kind(const std::string& s) {
  if (s == "diag_alternating") return CouplingKind::diag_alternating;
  if (s == "mid_chain_sigma_x") return CouplingKind::mid_chain_sigma_x;
  if (s == "custom") return CouplingKind::custom;
  throw InvalidArgument("unknown coupling kind '" + s + "'");
}

std::string to_string(CouplingKind k) {
  switch (k) {
    case CouplingKind::diag_alternating: return "diag_alternating";
    case CouplingKind::mid_chain_sigma_x: return "mid_chain_sigma_x";
    default: return "custom";
  }
}

RVector diag_alternating(Index d) {
  if (d < 1) throw InvalidArgument("dimension must be positive");
  RVector v(d);
  for (Index j = 1; j <= d; ++j) v(j - 1) = (j % 2) ? -1.0 : 1.0;
  return v;
}

HermitianMatrix build_coupling_operator(CouplingKind kind, Index dim_or_L) {
  switch (kind) {
    case CouplingKind::diag_alternating:
      return HermitianMatrix(RMatrix(diag_alternating(dim_or_L).asDiagonal()));
    case CouplingKind::mid_chain_sigma_x: {
      const int L = static_cast<int>(dim_or_L);
      if (L < 1 || L > 14) throw InvalidArgument("mid_chain_sigma_x needs a chain length in [1, 14]");
      return HermitianMatrix(RMatrix(sigma_x_diagonal(L, mid_chain_site(L)).asDiagonal()));
    }
    default:
      throw InvalidArgument("custom coupling operators must be supplied explicitly");
  }
}

FullModel::FullModel(HermitianMatrix H_B, HermitianMatrix V, CouplingSpec coupling)
    : H_B_(std::move(H_B)), V_(std::move(V)), coupling_(coupling) {
  if (H_B_.dim() != V_.dim()) throw InvalidArgument("bath and coupling dimensions differ");
  if (coupling_.J_z != 0.0) throw InvalidArgument("J_z != 0 is not supported");
  if (coupling_.J < 0.0) throw InvalidArgument("J must be non-negative");
}

namespace {

template <class M>
M block_diag_h0(const M& hb, double h_S) {
  const Index d = hb.rows();
  M h0 = M::Zero(2 * d, 2 * d);
  h0.topLeftCorner(d, d) = hb;
  h0.bottomRightCorner(d, d) = hb;
  h0.diagonal().head(d).array() += 0.5 * h_S;
  h0.diagonal().tail(d).array() -= 0.5 * h_S;
  return h0;
}

}  // namespace

HermitianMatrix FullModel::H0() const {
  if (H_B_.is_real()) return HermitianMatrix(block_diag_h0(H_B_.real(), coupling_.h_S));
  return HermitianMatrix(block_diag_h0(H_B_.complex(), coupling_.h_S));
}

HermitianMatrix FullModel::V_full() const {
  const Index d = bath_dim();
  if (V_.is_real()) {
    RMatrix v = RMatrix::Zero(2 * d, 2 * d);
    v.topRightCorner(d, d) = V_.real().transpose();
    v.bottomLeftCorner(d, d) = V_.real();
    return HermitianMatrix(std::move(v));
  }
  CMatrix v = CMatrix::Zero(2 * d, 2 * d);
  v.topRightCorner(d, d) = V_.complex().adjoint();
  v.bottomLeftCorner(d, d) = V_.complex();
  return HermitianMatrix(std::move(v));
}

HermitianMatrix FullModel::hamiltonian() const {
  const Index d = bath_dim();
  const double J = coupling_.J;
  if (H_B_.is_real() && V_.is_real()) {
    RMatrix h = block_diag_h0(H_B_.real(), coupling_.h_S);
    h.topRightCorner(d, d) = J * V_.real().transpose();
    h.bottomLeftCorner(d, d) = J * V_.real();
    return HermitianMatrix(std::move(h));
  }
  CMatrix h = block_diag_h0(H_B_.to_complex(), coupling_.h_S);
  const CMatrix v = V_.to_complex();
  h.topRightCorner(d, d) = J * v.adjoint();
  h.bottomLeftCorner(d, d) = J * v;
  return HermitianMatrix(std::move(h));
}

std::pair<int, Index> FullModel::sector(Index i) const {
  const Index d = bath_dim();
  if (i < 0 || i >= 2 * d) throw InvalidArgument("index out of range");
  return i < d ? std::make_pair(1, i) : std::make_pair(-1, i - d);
}

FullModel assemble_full(HermitianMatrix H_B, HermitianMatrix V, const CouplingSpec& coupling) {
  return FullModel(std::move(H_B), std::move(V), coupling);
}

EigenSystem product_eigensystem(const EigenSystem& bath, double h_S) {
  const Index d = bath.dim();
  EigenSystem out;
  out.energies.resize(2 * d);
  out.energies.head(d) = bath.energies.array() + 0.5 * h_S;
  out.energies.tail(d) = bath.energies.array() - 0.5 * h_S;
  bath.visit_vectors([&](const auto& U) {
    using M = std::decay_t<decltype(U)>;
    M W = M::Zero(2 * d, 2 * d);
    W.topLeftCorner(d, d) = U;
    W.bottomRightCorner(d, d) = U;
    out.vectors = std::move(W);
  });
  return out;
}

RVector spin_z_diagonal(Index bath_dim) {
  RVector z(2 * bath_dim);
  z.head(bath_dim).setOnes();
  z.tail(bath_dim).setConstant(-1.0);
  return z;
}

std::string hierarchy_warning(double rho0, double h_S, double s_E) {
  if (1.0 / rho0 < h_S && h_S < s_E) return {};
  std::ostringstream os;
  os << "energy hierarchy 1/rho0 < h_S < s_E violated (1/rho0 = " << 1.0 / rho0 << ", h_S = " << h_S
     << ", s_E = " << s_E << ")";
  return os.str();
}

}  // namespace partherm
