#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "partherm/dynamics.hpp"
#include "partherm/ensembles.hpp"
#include "partherm/models.hpp"
#include "partherm/spectra.hpp"

using namespace partherm;

namespace {

FullModel small_ising(int L, double J, std::uint64_t seed) {
  IsingBathSpec spec;
  spec.L = L;
  RngStream rng(seed);
  CouplingSpec c{J, 0.0, CouplingKind::mid_chain_sigma_x, spec.probe_field()};
  return FullModel(build_ising_bath(spec, rng), build_coupling_operator(c.kind, L), c);
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("decoupled spin keeps its memory") {
    auto model = small_ising(6, 0.0, 1);
    auto full = diagonalize(model.hamiltonian());
    const RVector z = spin_z_diagonal(model.bath_dim());
    auto s = czz_t(full, z, {0.0, 0.5, 3.0, 100.0});
    for (double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(czz_infinite_exact(full, z).value == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("coupled correlator starts at one and stays bounded") {
    auto model = small_ising(6, 0.4, 2);
    auto full = diagonalize(model.hamiltonian());
    const RVector z = spin_z_diagonal(model.bath_dim());
    auto s = czz_t(full, z, log_time_grid(0.01, 1000.0, 60));
    CHECK(s.values[0] == doctest::Approx(1.0).epsilon(1e-10));
    for (double v : s.values) CHECK(std::abs(v) <= 1.0 + 1e-12);
  }

  TEST_CASE("two-level bath against the dense propagator") {
    RngStream rng(3);
    auto hb = sample_gre(2, DysonClass(1), rng);
    auto v = sample_gre(2, DysonClass(1), rng);
    CouplingSpec c{0.7, 0.0, CouplingKind::custom, 0.3};
    FullModel model(hb, v, c);
    const RMatrix H = model.hamiltonian().real();
    auto full = diagonalize(model.hamiltonian());
    const RVector z = spin_z_diagonal(2);
    const std::vector<double> times{0.0, 0.3, 1.7, 6.0, 25.0};
    auto s = czz_t(full, z, times);
    const CMatrix Z = z.cast<cdouble>().asDiagonal();
    for (std::size_t k = 0; k < times.size(); ++k) {
      const CMatrix Ut = (CMatrix(H.cast<cdouble>()) * cdouble(0.0, -times[k])).exp();
      const cdouble tr = (Ut.adjoint() * Z * Ut * Z).trace() / 4.0;
      CHECK(std::abs(tr.imag()) < 1e-12);
      CHECK(s.values[k] == doctest::Approx(tr.real()).epsilon(1e-10));
    }
  }

  TEST_CASE("plateau equals the long-time average") {
    auto model = small_ising(6, 0.3, 4);
    auto full = diagonalize(model.hamiltonian());
    const RVector z = spin_z_diagonal(model.bath_dim());
    auto bath = diagonalize(model.bath());
    const double gamma = fgr_gamma(bath.energies, squared_matrix_elements(bath, model.coupling_operator()), 0.3,
                                   model.coupling().h_S, 0.5);
    REQUIRE(gamma > 0.0);
    std::vector<double> times;
    for (int k = 0; k < 1000; ++k) times.push_back((1e4 + 1e4 * k / 999.0) / gamma);
    auto s = czz_t(full, z, times);
    double avg = 0.0;
    for (double v : s.values) avg += v;
    avg /= s.values.size();
    auto p = czz_infinite_exact(full, z);
    CHECK(p.degenerate_blocks == 0);
    CHECK(avg == doctest::Approx(p.value).epsilon(0.02));
  }

  TEST_CASE("degenerate levels are merged") {
    EigenSystem eig;
    eig.energies = RVector::Zero(2);
    RMatrix U(2, 2);
    U << 1, 1, 1, -1;
    U /= std::sqrt(2.0);
    eig.vectors = U;
    RVector z(2);
    z << 1, -1;
    auto p = czz_infinite_exact(eig, z);
    CHECK(p.degenerate_blocks == 1);
    CHECK(p.value == doctest::Approx(1.0));
    eig.energies << 0.0, 1.0;
    CHECK(czz_infinite_exact(eig, z).value == doctest::Approx(0.0).epsilon(1e-14));
  }

  TEST_CASE("golden-rule rate scaling") {
    auto model = small_ising(8, 0.1, 5);
    auto bath = diagonalize(model.bath());
    RMatrix vsq = squared_matrix_elements(bath, model.coupling_operator());
    const double h = model.coupling().h_S;
    const double g1 = fgr_gamma(bath.energies, vsq, 0.1, h);
    CHECK(g1 > 0.0);
    CHECK(fgr_gamma(bath.energies, vsq, 0.2, h) == doctest::Approx(4.0 * g1).epsilon(1e-12));
    CHECK(fgr_gamma(bath.energies, RMatrix::Zero(256, 256), 0.1, h) == 0.0);
  }

  TEST_CASE("plateau theory limits") {
    auto eth = ChiStarProfile::eth_gaussian(1.0, 5.0);
    CHECK(czz_infinite_theory(0.0, eth, Family::GOE) == 1.0);
    const double J = 1e-5;
    const double slope = (1.0 - czz_infinite_theory(J, eth, Family::GOE)) / J;
    CHECK(slope == doctest::Approx(4 * M_PI / std::sqrt(6.0)).epsilon(0.01));
    const double c0 = 1.0 - czz_infinite_theory(J, ChiStarProfile::constant(1.0), Family::Levy);
    CHECK(c0 / J == doctest::Approx(2 * M_PI).epsilon(0.01));

    double prev = 1.0;
    for (int k = 0; k < 20; ++k) {
      const double Jk = std::pow(10.0, -4.0 + 5.0 * k / 19.0);
      const double c = czz_infinite_theory(Jk, eth, Family::GOE);
      CHECK(c >= 0.0);
      CHECK(c <= prev);
      prev = c;
    }
    CHECK(prev < 0.05);

    auto rm = ChiStarProfile::rm_semicircle(2, 256.0);
    const double crm = czz_infinite_theory(0.05, rm, Family::GUE, 0.1);
    CHECK(crm > 0.0);
    CHECK(crm < 1.0);
  }

  TEST_CASE("log slope fit and time grids") {
    CorrelatorSeries s;
    for (int k = 0; k < 50; ++k) {
      s.times.push_back(0.1 * k);
      s.values.push_back(std::exp(-0.7 * 0.1 * k));
    }
    CHECK(log_decay_slope(s, 2.0) == doctest::Approx(-0.7).epsilon(1e-12));
    auto t = log_time_grid(0.1, 10.0, 3);
    CHECK(t.size() == 4);
    CHECK(t[0] == 0.0);
    CHECK(t[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(log_time_grid(1.0, 0.5, 3), InvalidArgument);
  }
}
