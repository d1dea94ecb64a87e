#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "partherm/models.hpp"
#include "partherm/numerics.hpp"
#include "partherm/spectra.hpp"

using namespace partherm;

TEST_SUITE("models") {
  TEST_CASE("trace of H_B^2 matches the open-chain identity") {
    IsingBathSpec spec;
    spec.L = 12;
    RngStream rng(1);
    auto fields = sample_ising_fields(spec, rng);
    auto H = build_ising_bath(spec, fields);
    const double d = static_cast<double>(spec.dim());
    // Independent count: L-1 bonds of weight 1, fields squared, L flip terms.
    double expected = spec.L - 1;
    for (double f : fields) expected += f * f;
    expected += spec.L * std::pow(spec.u * spec.Gamma, 2);
    CHECK(H.real().squaredNorm() / d == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(H.real().trace()) < 1e-9);

    IsingBathSpec clean = spec;
    clean.Gamma = 1.0;
    auto Hc = build_ising_bath(clean, std::vector<double>(12, clean.h));
    const double s2 = (12 - 1) + 12 * (clean.h * clean.h + clean.u * clean.u);
    CHECK(std::abs(Hc.real().squaredNorm() / d - s2) < 1e-6);
    CHECK(clean.energy_variance() == doctest::Approx(28.6715).epsilon(1e-4));
  }

  TEST_CASE("fields are uniform with the stated mean and spread") {
    IsingBathSpec spec;
    spec.L = 14;
    RngStream rng(3);
    double m = 0.0, v = 0.0, lo = 1e9, hi = -1e9;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
      for (double f : sample_ising_fields(spec, rng)) {
        m += f;
        v += f * f;
        lo = std::min(lo, f);
        hi = std::max(hi, f);
      }
    }
    const double n = reps * 14.0;
    m /= n;
    v = v / n - m * m;
    CHECK(m == doctest::Approx(spec.h).epsilon(1e-3));
    CHECK(v == doctest::Approx(spec.u * spec.u * (1 - spec.Gamma * spec.Gamma)).epsilon(0.02));
    CHECK(hi - lo <= 2 * spec.field_halfwidth());
    CHECK(spec.field_halfwidth() == doctest::Approx(0.14).epsilon(0.02));
  }

  TEST_CASE("single-bond chain") {
    IsingBathSpec spec;
    spec.L = 2;
    spec.u = 0.0;
    auto e = eigenvalues(build_ising_bath(spec, {0.0, 0.0}));
    CHECK(e(0) == doctest::Approx(-1.0));
    CHECK(e(1) == doctest::Approx(-1.0));
    CHECK(e(2) == doctest::Approx(1.0));
    CHECK(e(3) == doctest::Approx(1.0));
    spec.L = 15;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  }

  TEST_CASE("L=10 density of states is Gaussian") {
    IsingBathSpec spec;
    spec.L = 10;
    RngStream rng(5);
    auto fields = sample_ising_fields(spec, rng);
    RVector e = eigenvalues(build_ising_bath(spec, fields));
    const double s = std::sqrt(spec.energy_variance(fields));
    std::vector<double> xs(e.data(), e.data() + e.size());
    const double ks = ks_distance(xs, [s](double x) { return 0.5 * std::erfc(-x / (s * std::sqrt(2.0))); });
    CHECK(ks < 0.02);
  }

  TEST_CASE("L=12 density of states at the centre") {
    IsingBathSpec spec;
    spec.L = 12;
    RngStream rng(6);
    RVector e = eigenvalues(build_ising_bath(spec, rng));
    const double oracle = 4096.0 / std::sqrt(2.0 * M_PI * 28.6715);
    CHECK(dos_estimate(e, 0.0, 0.1) == doctest::Approx(oracle).epsilon(0.1));
    CHECK(spec.rho0() == doctest::Approx(oracle).epsilon(1e-4));
  }

  TEST_CASE("coupling operators") {
    auto v = build_coupling_operator(CouplingKind::diag_alternating, 4);
    RVector expected(4);
    expected << -1, 1, -1, 1;
    CHECK((v.real().diagonal() - expected).norm() == 0.0);
    CHECK(v.real().trace() == 0.0);
    CHECK((v.real() * v.real()).trace() == 4.0);

    CHECK(mid_chain_site(5) == 3);
    auto s = build_coupling_operator(CouplingKind::mid_chain_sigma_x, 5);
    CHECK((s.real() * s.real() - RMatrix::Identity(32, 32)).norm() == 0.0);
    // sigma^x_3 is +1 exactly when bit 2 is clear.
    CHECK(s.real()(0, 0) == 1.0);
    CHECK(s.real()(4, 4) == -1.0);
    CHECK(s.real()(3, 3) == 1.0);

    for (auto* op : {&v, &s}) {
      const RMatrix& m = op->real();
      CHECK(std::abs((m * m.transpose()).trace() / m.rows() - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(build_coupling_operator(CouplingKind::custom, 4), InvalidArgument);
    CHECK(parse_coupling_kind("mid_chain_sigma_x") == CouplingKind::mid_chain_sigma_x);
    CHECK_THROWS_AS(parse_coupling_kind("bogus"), InvalidArgument);
  }

  TEST_CASE("decoupled limit and 2x2 closed form") {
    IsingBathSpec spec;
    spec.L = 6;
    RngStream rng(7);
    auto hb = build_ising_bath(spec, rng);
    RVector eb = eigenvalues(hb);
    CouplingSpec c{0.0, 0.0, CouplingKind::mid_chain_sigma_x, 1.21};
    auto model = assemble_full(hb, build_coupling_operator(c.kind, 6), c);
    RVector e = eigenvalues(model.hamiltonian());
    std::vector<double> expected;
    for (Index a = 0; a < eb.size(); ++a) {
      expected.push_back(eb(a) + 0.605);
      expected.push_back(eb(a) - 0.605);
    }
    std::sort(expected.begin(), expected.end());
    for (Index i = 0; i < e.size(); ++i) CHECK(std::abs(e(i) - expected[i]) < 1e-10);

    RMatrix zero = RMatrix::Zero(1, 1), one = RMatrix::Ones(1, 1);
    auto tiny = assemble_full(HermitianMatrix(zero), HermitianMatrix(one), {0.5, 0.0, CouplingKind::custom, 1.0});
    RMatrix h = tiny.hamiltonian().real();
    RMatrix expect(2, 2);
    expect << 0.5, 0.5, 0.5, -0.5;
    CHECK((h - expect).norm() < 1e-15);
    RVector ev = eigenvalues(tiny.hamiltonian());
    CHECK(ev(0) == doctest::Approx(-std::sqrt(0.5)));
    CHECK(ev(1) == doctest::Approx(std::sqrt(0.5)));
  }

  TEST_CASE("full model structure") {
    IsingBathSpec spec;
    spec.L = 8;
    RngStream rng(8);
    CouplingSpec c{0.1, 0.0, CouplingKind::mid_chain_sigma_x, spec.probe_field()};
    auto model = assemble_full(build_ising_bath(spec, rng), build_coupling_operator(c.kind, 8), c);
    auto H = model.hamiltonian();
    auto H0 = model.H0();
    auto V = model.V_full();
    CHECK(H.hermiticity_defect() < 1e-12);
    CHECK(H.real().trace() == doctest::Approx(H0.real().trace()));
    const Index d = 256;
    CHECK(H0.real().topRightCorner(d, d).norm() == 0.0);
    CHECK(V.real().topLeftCorner(d, d).norm() == 0.0);
    CHECK(V.real().bottomRightCorner(d, d).norm() == 0.0);
    CHECK((H.real() - H0.real() - 0.1 * V.real()).norm() < 1e-14);
    CHECK(model.sector(3) == std::make_pair(1, Index{3}));
    CHECK(model.sector(d + 3) == std::make_pair(-1, Index{3}));

    CouplingSpec bad = c;
    bad.J_z = 0.2;
    CHECK_THROWS_AS(assemble_full(model.bath(), model.coupling_operator(), bad), InvalidArgument);
    CHECK_THROWS_AS(FullModel(model.bath(), HermitianMatrix(RMatrix(RMatrix::Identity(4, 4))), c), InvalidArgument);
  }

  TEST_CASE("energy hierarchy warning") {
    IsingBathSpec spec;
    spec.L = 10;
    CHECK(hierarchy_warning(spec.rho0(), spec.probe_field(), std::sqrt(spec.energy_variance())).empty());
    CHECK_FALSE(hierarchy_warning(spec.rho0(), 100.0, std::sqrt(spec.energy_variance())).empty());
  }
}
