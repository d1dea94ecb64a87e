#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "partherm/ensembles.hpp"
#include "partherm/spectra.hpp"

using namespace partherm;

TEST_SUITE("spectra") {
  TEST_CASE("diagonal matrix") {
    RMatrix h = RMatrix::Zero(3, 3);
    h.diagonal() << 3, 1, 2;
    auto eig = diagonalize(HermitianMatrix(h));
    CHECK(eig.energies(0) == doctest::Approx(1.0));
    CHECK(eig.energies(1) == doctest::Approx(2.0));
    CHECK(eig.energies(2) == doctest::Approx(3.0));
    const RMatrix& v = eig.real_vectors();
    CHECK(std::abs(v(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(v(2, 1)) == doctest::Approx(1.0));
    CHECK(std::abs(v(0, 2)) == doctest::Approx(1.0));
  }

  TEST_CASE("Pauli x") {
    RMatrix h(2, 2);
    h << 0, 1, 1, 0;
    auto eig = diagonalize(HermitianMatrix(h));
    CHECK(eig.energies(0) == doctest::Approx(-1.0));
    CHECK(eig.energies(1) == doctest::Approx(1.0));
    const RMatrix& v = eig.real_vectors();
    CHECK(std::abs(v(0, 0) + v(1, 0)) < 1e-12);
    CHECK(std::abs(v(0, 1) - v(1, 1)) < 1e-12);
    CHECK(std::abs(std::abs(v(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  }

  TEST_CASE("reconstruction of a random complex Hermitian matrix") {
    RngStream rng(6);
    auto h = sample_gre(6, DysonClass(2), rng);
    const CMatrix orig = h.complex();
    auto eig = diagonalize(h);
    const CMatrix& v = eig.complex_vectors();
    CMatrix rec = v * eig.energies.cast<cdouble>().asDiagonal() * v.adjoint();
    CHECK((rec - orig).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((v.adjoint() * v - CMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
    for (Index k = 0; k < 6; ++k) {
      CHECK((orig * v.col(k) - eig.energies(k) * v.col(k)).norm() < 1e-8 * orig.norm());
    }
  }

  TEST_CASE("non-Hermitian input is rejected") {
    RMatrix h(2, 2);
    h << 0, 1, 0.5, 0;
    CHECK_THROWS_AS(diagonalize(HermitianMatrix(h)), NonHermitianError);
  }

  TEST_CASE("density of states") {
    RngStream rng(17);
    const Index d = 2048;
    RVector e = eigenvalues(sample_gre(d, DysonClass(2), rng));
    CHECK(dos_estimate(e, 0.0, 0.1) == doctest::Approx(d / M_PI).epsilon(0.05));

    RVector uniform(100);
    const double s = 0.25;
    for (Index i = 0; i < 100; ++i) uniform(i) = i * s;
    CHECK(dos_estimate(uniform, 10.125, 2.0) == doctest::Approx(1.0 / s).epsilon(1e-14));
    CHECK_THROWS_AS(dos_estimate(uniform, 100.0, 0.1), EmptyWindow);

    // Riemann sum over windows recovers the level count.
    double total = 0.0;
    const double w = 0.1;
    for (double c = -2.5 + w / 2; c < 2.5; c += w) {
      auto [lo, hi] = window_range(e, c, w);
      total += (hi - lo);
    }
    CHECK(total == doctest::Approx(static_cast<double>(d)).epsilon(0.02));
  }

  TEST_CASE("spectral function against brute-force enumeration") {
    RVector e(4);
    e << -0.52, -0.49, 0.48, 0.51;
    RMatrix vsq(4, 4);
    vsq << 0.1, 0.2, 0.3, 0.4, 0.2, 0.5, 0.6, 0.7, 0.3, 0.6, 0.8, 0.9, 0.4, 0.7, 0.9, 1.0;
    const double width = 0.1, E = -0.5, omega = 1.0;
    double brute = 0.0;
    int n_e = 0;
    for (int a = 0; a < 4; ++a) {
      if (std::abs(e(a) - E) >= width / 2) continue;
      ++n_e;
      for (int b = 0; b < 4; ++b)
        if (std::abs(e(b) - E - omega) < width / 2) brute += vsq(a, b);
    }
    brute /= width * n_e;
    CHECK(spectral_function(e, vsq, E, omega, width) == doctest::Approx(brute).epsilon(1e-14));

    RngStream rng(2);
    auto eig = diagonalize(sample_gre(256, DysonClass(1), rng));
    HermitianMatrix id(RMatrix(RMatrix::Identity(256, 256)));
    CHECK(spectral_function(eig, id, 0.0, 0.5, 0.1) < 1e-20);
  }

  TEST_CASE("mid-spectrum selection") {
    auto [a, b] = mid_spectrum_indices(8, 0.25);
    CHECK(a == 3);
    CHECK(b == 5);
    auto [c, d] = mid_spectrum_indices(100, 0.25);
    CHECK(d - c == 25);
    CHECK((c + d - 1) / 2.0 == doctest::Approx(49.0));
    auto [f0, f1] = mid_spectrum_indices(10, 1.0);
    CHECK(f0 == 0);
    CHECK(f1 == 10);
    CHECK_THROWS_AS(mid_spectrum_indices(10, 0.0), InvalidArgument);
  }

  TEST_CASE("eigenstate matching") {
    RngStream rng(4);
    auto u0 = std::get<RMatrix>(sample_haar(5, DysonClass(1), rng));
    EigenSystem e0{RVector::LinSpaced(5, 0, 4), u0};
    auto ident = match_eigenstates(e0, e0);
    for (Index i = 0; i < 5; ++i) CHECK(ident[i] == i);

    RMatrix swapped = u0;
    swapped.col(1).swap(swapped.col(2));
    auto tr = match_eigenstates(e0, EigenSystem{e0.energies, swapped});
    CHECK(tr[1] == 2);
    CHECK(tr[2] == 1);
    CHECK(tr[0] == 0);

    for (int trial = 0; trial < 20; ++trial) {
      auto u1 = std::get<RMatrix>(sample_haar(5, DysonClass(1), rng));
      RMatrix ov = (u0.transpose() * u1).array().square().matrix();
      std::vector<Index> perm(5);
      std::iota(perm.begin(), perm.end(), 0);
      double best = -INFINITY;
      std::vector<Index> best_perm;
      do {
        double s = 0.0;
        for (Index i = 0; i < 5; ++i) s += std::log(ov(i, perm[i]));
        if (s > best) {
          best = s;
          best_perm = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      auto got = match_eigenstates(e0, EigenSystem{e0.energies, u1});
      CHECK(got == best_perm);
    }

    RMatrix zero_row = RMatrix::Identity(3, 3);
    zero_row.row(1).setZero();
    CHECK_THROWS_AS(match_from_overlaps(zero_row), DegenerateOverlap);
  }
}
