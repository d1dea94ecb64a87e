#include "partherm/types.hpp"

#include <cmath>

namespace partherm {

namespace {

// Box-Muller on the engine directly. std::normal_distribution is not
// specified bit-for-bit across standard libraries; this is.
double box_muller(RngStream& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

void HermitianMatrix::check_square() const {
  std::visit(
      [](const auto& m) {
        if (m.rows() != m.cols()) throw InvalidArgument("Hermitian matrix must be square");
      },
      m_);
}

const RMatrix& HermitianMatrix::real() const {
  if (!is_real()) throw InvalidArgument("matrix is stored as complex");
  return std::get<RMatrix>(m_);
}
const CMatrix& HermitianMatrix::complex() const {
  if (is_real()) throw InvalidArgument("matrix is stored as real");
  return std::get<CMatrix>(m_);
}
RMatrix& HermitianMatrix::real() {
  if (!is_real()) throw InvalidArgument("matrix is stored as complex");
  return std::get<RMatrix>(m_);
}
CMatrix& HermitianMatrix::complex() {
  if (is_real()) throw InvalidArgument("matrix is stored as real");
  return std::get<CMatrix>(m_);
}

CMatrix HermitianMatrix::to_complex() const {
  if (is_real()) return std::get<RMatrix>(m_).cast<cdouble>();
  return std::get<CMatrix>(m_);
}

double HermitianMatrix::hermiticity_defect() const {
  return std::visit(
      [](const auto& m) -> double {
        if (m.size() == 0) return 0.0;
        return (m - m.adjoint()).cwiseAbs().maxCoeff();
      },
      m_);
}

double HermitianMatrix::max_abs() const {
  return std::visit([](const auto& m) -> double { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }, m_);
}

cdouble HermitianMatrix::operator()(Index i, Index j) const {
  return std::visit([&](const auto& m) -> cdouble { return cdouble(m(i, j)); }, m_);
}

const RMatrix& EigenSystem::real_vectors() const {
  if (!is_real()) throw InvalidArgument("eigenvectors are complex");
  return std::get<RMatrix>(vectors);
}
const CMatrix& EigenSystem::complex_vectors() const {
  if (is_real()) throw InvalidArgument("eigenvectors are real");
  return std::get<CMatrix>(vectors);
}

CVector EigenSystem::vector(Index k) const {
  return std::visit([&](const auto& v) -> CVector { return v.col(k).template cast<cdouble>(); }, vectors);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

RngStream RngStream::for_realization(std::uint64_t master_seed, std::uint64_t index) {
  return RngStream(splitmix64(splitmix64(master_seed) ^ (index * 0xd1b54a32d192ed03ULL + 1)));
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return box_muller(*this); }

}  // namespace partherm
