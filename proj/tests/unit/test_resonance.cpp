#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "partherm/ensembles.hpp"
#include "partherm/models.hpp"
#include "partherm/numerics.hpp"
#include "partherm/resonance.hpp"
#include "partherm/spectra.hpp"

using namespace partherm;

TEST_SUITE("resonance") {
  TEST_CASE("resonance probabilities and entropy") {
    CHECK(transition_p(0.0) == 0.0);
    CHECK(cat_entropy(0.0) == 0.0);
    CHECK(transition_p(2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(cat_entropy(2.0) == doctest::Approx(std::log(3.0) - 2.0 / 3.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(cat_entropy(1e12) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK_THROWS_AS(transition_p(-1.0), InvalidArgument);
    auto r = resonance_point(0.7);
    CHECK(r.p + r.q == 1.0);
    CHECK(r.p <= 0.5);
    // Small-x behaviour against the expansion x(1 - log x).
    CHECK(cat_entropy(1e-9) == doctest::Approx(1e-9 * (1 + 9 * std::log(10.0))).epsilon(1e-6));
  }

  TEST_CASE("derivative matches finite differences") {
    for (double x : {1e-4, 0.03, 1.0, 40.0}) {
      const double h = 1e-6 * x;
      const double fd = (cat_entropy(x + h) - cat_entropy(x - h)) / (2 * h);
      CHECK(cat_entropy_derivative(x) == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("inverse of S(x) round trips") {
    for (double lx = -6.0; lx <= 6.0; lx += 0.25) {
      const double x = std::pow(10.0, lx);
      const double S = cat_entropy(x);
      const double back = entropy_to_x(S);
      // Near log 2 the inverse is limited by the spacing of doubles around S.
      CHECK(std::abs(cat_entropy(back) - S) <= 2 * std::numeric_limits<double>::epsilon());
      if (x <= 1e4) CHECK(std::abs(back / x - 1.0) < 1e-10);
    }
    CHECK_THROWS_AS(entropy_to_x(0.0), InvalidArgument);
    CHECK_THROWS_AS(entropy_to_x(0.7), InvalidArgument);
  }

  TEST_CASE("spin entropy of simple states") {
    const Index d = 3;
    CVector prod = CVector::Zero(6);
    prod(1) = 1.0;
    CHECK(spin_entropy_from_eigenvector(prod, d) == doctest::Approx(0.0));
    CVector cat = CVector::Zero(6);
    cat(0) = 1.0 / std::sqrt(2.0);
    cat(d + 2) = cdouble(0.0, 1.0 / std::sqrt(2.0));
    CHECK(spin_entropy_from_eigenvector(cat, d) == doctest::Approx(std::log(2.0)));
    RVector mixed = RVector::Zero(6);
    mixed(0) = std::sqrt(2.0 / 3.0);
    mixed(d + 1) = std::sqrt(1.0 / 3.0);
    CHECK(spin_entropy_from_eigenvector(mixed, d) == doctest::Approx(cat_entropy(2.0)).epsilon(1e-12));
    // Same bath state in both sectors: product state in a rotated spin basis.
    RVector rotated = RVector::Zero(6);
    rotated(1) = 0.6;
    rotated(d + 1) = 0.8;
    CHECK(spin_entropy_from_eigenvector(rotated, d) < 1e-7);
    CHECK_THROWS_AS(spin_entropy_from_eigenvector(RVector(RVector::Ones(6)), d), InvalidArgument);
  }

  TEST_CASE("perturbative entropy") {
    CHECK(perturbative_entropy(0.0, 5.0) == 0.0);
    CHECK(perturbative_entropy(1.0, std::exp(-4.0)) == doctest::Approx(0.09158).epsilon(1e-4));
    CHECK_FALSE(perturbative_flag(0.01, 100.0));
    CHECK(perturbative_flag(0.1, 100.0));
  }

  TEST_CASE("perturbative entropy against exact diagonalisation") {
    IsingBathSpec spec;
    spec.L = 8;
    RngStream rng(31);
    auto hb = build_ising_bath(spec, rng);
    const double J = 1e-3, h = spec.probe_field();
    CouplingSpec c{J, 0.0, CouplingKind::mid_chain_sigma_x, h};
    auto V = build_coupling_operator(c.kind, spec.L);
    auto bath = diagonalize(hb);
    RMatrix vsq = squared_matrix_elements(bath, V);
    FullModel model(hb, V, c);
    auto full = diagonalize(model.hamiltonian());
    auto unperturbed = product_eigensystem(bath, h);
    auto perm = match_eigenstates(unperturbed, full);
    RVector S = spin_entropies(full);
    const Index d = spec.dim();
    std::vector<double> rel;
    for (Index i = 0; i < 2 * d; ++i) {
      const int sigma = i < d ? 1 : -1;
      const double chi = chi_alpha(bath.energies, vsq, i % d, sigma * h);
      if (J * J * chi >= 1e-3) continue;
      const double sp = perturbative_entropy(J, chi);
      rel.push_back(std::abs(S(perm[i]) - sp) / sp);
    }
    REQUIRE(rel.size() > 100);
    std::nth_element(rel.begin(), rel.begin() + rel.size() / 2, rel.end());
    CHECK(rel[rel.size() / 2] < 0.05);
  }

  TEST_CASE("f_ee is normalised and has the weak-coupling tail") {
    DistributionModel levy(Family::Levy, 1.0);
    for (double g : {1e-3, 1e-1, 10.0}) {
      // Mass in the x variable: integrand f_ee(S(x)) S'(x).
      auto q = quad_heavy_tail(
          [&](double chi) {
            const double x = g * g * chi;
            const double S = cat_entropy(x);
            if (!(S > 0.0 && S < std::log(2.0))) return 0.0;
            return f_ee_pdf(S, g, levy) * cat_entropy_derivative(x) * g * g;
          },
          1.0, 1e-7);
      CAPTURE(g);
      CHECK(q.value == doctest::Approx(1.0).epsilon(1e-5));
    }
    const double g = 1e-3;
    for (double S : {0.05, 0.2, 0.5}) {
      const double x = entropy_to_x(S);
      const double tail = 1.0 / (std::pow(x, 1.5) * cat_entropy_derivative(x));
      CHECK(f_ee_pdf(S, g, levy) / g == doctest::Approx(tail).epsilon(0.02));
    }
  }

  TEST_CASE("f_ee is bimodal at intermediate coupling") {
    DistributionModel levy(Family::Levy, 1.0);
    const double g = 0.05;
    double fmin = 1e300, smin = 0.0;
    for (double S = 0.1; S <= 0.6; S += 0.005) {
      const double f = f_ee_pdf(S, g, levy);
      if (f < fmin) {
        fmin = f;
        smin = S;
      }
    }
    CHECK(smin > 0.11);
    CHECK(smin < 0.59);
    CHECK(f_ee_pdf(0.69, g, levy) > fmin);
  }

  TEST_CASE("weak-coupling moment coefficients") {
    CHECK(entropy_mean_coefficient() == doctest::Approx(2 * M_PI).epsilon(1e-8));
    CHECK(entropy_variance_coefficient() == doctest::Approx(1.91755).epsilon(1e-5));
    DistributionModel levy(Family::Levy, 1.0);
    const double g = 1e-4;
    auto m = ee_moments(g, levy);
    CHECK(m.mean / g == doctest::Approx(2 * M_PI).epsilon(0.01));
    CHECK(m.variance / g == doctest::Approx(1.91755).epsilon(0.005));
    auto w = ee_weak_asymptotes(g, 1.0, Family::Levy);
    CHECK(w.mean / w.median > 10.0);
    CHECK(m.median == doctest::Approx(w.median).epsilon(1e-3));
    auto z = ee_weak_asymptotes(0.0, 1.0, Family::GUE);
    CHECK(z.mean == 0.0);
    CHECK(z.median == 0.0);
    CHECK(z.variance == 0.0);
  }

  TEST_CASE("mean entropy against Monte Carlo and the strong-coupling limit") {
    DistributionModel goe(Family::GOE, 2.0);
    const double J = 0.1 / std::sqrt(2.0);
    RngStream rng(17);
    auto xs = goe.sample(rng, 1000000);
    double acc = 0.0;
    for (double x : xs) acc += cat_entropy(J * J * x);
    CHECK(ee_moments(J, goe).mean == doctest::Approx(acc / xs.size()).epsilon(5e-3));

    DistributionModel gue(Family::GUE, 1.0);
    const double c_a = strong_coupling_constant(Family::GUE);
    CHECK(c_a > 0.0);
    const double Jl = 30.0;
    const double deficit = std::log(2.0) - ee_moments(Jl, gue).mean;
    CHECK(deficit == doctest::Approx(c_a / (8 * Jl * Jl)).epsilon(0.02));
  }
}
