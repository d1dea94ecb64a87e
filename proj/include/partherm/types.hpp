#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <variant>

#include "partherm/errors.hpp"

namespace partherm {

using Index = Eigen::Index;
using cdouble = std::complex<double>;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

/// Dyson index of a symmetry class: real (1), complex (2) or quaternionic (4).
class DysonClass {
 public:
  constexpr DysonClass() = default;
  explicit DysonClass(int beta) : beta_(beta) {
    if (beta != 1 && beta != 2 && beta != 4) {
      throw InvalidArgument("Dyson index must be 1, 2 or 4 (got " + std::to_string(beta) + ")");
    }
  }
  constexpr int value() const noexcept { return beta_; }
  constexpr bool is_real() const noexcept { return beta_ == 1; }
  constexpr bool is_quaternionic() const noexcept { return beta_ == 4; }
  friend constexpr bool operator==(DysonClass, DysonClass) = default;

 private:
  int beta_ = 1;
};

/// Dense Hermitian operator stored either as a real symmetric or a complex
/// Hermitian matrix. Real storage is kept whenever possible: the Spin-ETH
/// problems at L = 12 do not fit in memory as complex matrices.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(RMatrix m) : m_(std::move(m)) { check_square(); }
  explicit HermitianMatrix(CMatrix m) : m_(std::move(m)) { check_square(); }

  Index dim() const {
    return std::visit([](const auto& m) { return m.rows(); }, m_);
  }
  bool is_real() const noexcept { return std::holds_alternative<RMatrix>(m_); }

  const RMatrix& real() const;
  const CMatrix& complex() const;
  RMatrix& real();
  CMatrix& complex();
  CMatrix to_complex() const;

  /// max |H_ij - conj(H_ji)|
  double hermiticity_defect() const;
  double max_abs() const;
  cdouble operator()(Index i, Index j) const;

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), m_);
  }
  template <class F>
  decltype(auto) visit(F&& f) {
    return std::visit(std::forward<F>(f), m_);
  }

 private:
  void check_square() const;
  std::variant<RMatrix, CMatrix> m_;
};

/// Eigen-decomposition of a Hermitian operator: ascending energies and
/// orthonormal eigenvectors stored column-wise.
struct EigenSystem {
  RVector energies;
  std::variant<RMatrix, CMatrix> vectors;

  Index dim() const { return energies.size(); }
  bool is_real() const noexcept { return std::holds_alternative<RMatrix>(vectors); }
  const RMatrix& real_vectors() const;
  const CMatrix& complex_vectors() const;
  CVector vector(Index k) const;

  template <class F>
  decltype(auto) visit_vectors(F&& f) const {
    return std::visit(std::forward<F>(f), vectors);
  }
};

/// Seeded pseudo-random stream. One stream per disorder realisation, keyed by
/// (master seed, realisation index), so results do not depend on how
/// realisations are scheduled over workers.
class RngStream {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  explicit RngStream(std::uint64_t seed);
  static RngStream for_realization(std::uint64_t master_seed, std::uint64_t index);

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  double uniform();           ///< U[0, 1)
  double uniform_open();      ///< U(0, 1)
  double normal();            ///< N(0, 1)
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace partherm
