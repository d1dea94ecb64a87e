#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "partherm/bath_probe.hpp"
#include "partherm/models.hpp"
#include "partherm/numerics.hpp"
#include "partherm/resonance.hpp"
#include "partherm/spectra.hpp"

using namespace partherm;

TEST_SUITE("bath_probe") {
  TEST_CASE("kernel variances") {
    for (double x : {0.0, 1e-3, 0.4, 20.0}) {
      for (double xp : {0.0, 0.1, 5.0}) CHECK(v_even(x, xp) + v_odd(x, xp) == doctest::Approx(2.0).epsilon(1e-14));
    }
    CHECK(v_even(0.0, 0.0) == 2.0);
    CHECK(v_odd(0.0, 0.0) == 0.0);
    CHECK(v_even(1e9, 1e9) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(parse_parity("odd") == Parity::odd);
    CHECK_THROWS_AS(parse_parity("none"), InvalidArgument);
  }

  TEST_CASE("second-moment identities") {
    const double g = 0.3;
    DistributionModel unit(Family::GOE, 1.0);
    // chi and chi' are independent: E[qq' + pp'] = E[q]^2 + E[p]^2.
    const double Ep =
        quad_heavy_tail([&](double c) { return unit.pdf(c) * transition_p(g * g * c); }, 1.0, 1e-12).value;
    const double even = f_od_second_moment(g, Family::GOE, Parity::even);
    CHECK(even == doctest::Approx(2.0 * ((1 - Ep) * (1 - Ep) + Ep * Ep)).epsilon(1e-4));
    const double odd = f_od_second_moment(g, Family::GOE, Parity::odd);
    CHECK(std::abs(even + odd - 2.0) < 1e-8);
    CHECK(f_od_second_moment(g, Family::GOE, Parity::mixed) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("off-diagonal density is normalised") {
    for (double g : {1e-3, 0.3, 30.0}) {
      for (Parity p : {Parity::even, Parity::odd, Parity::mixed}) {
        if (g < 0.01 && p != Parity::even) continue;  // point mass at R = 0, checked through the CDF
        auto q = integrate([&](double R) { return 2.0 * f_od_pdf(R, g, Family::Levy, p, 1e-10); },
                           {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}, {1e-7, 0.0, 400});
        CAPTURE(g);
        CAPTURE(to_string(p));
        CHECK(q.value == doctest::Approx(1.0).epsilon(1e-5));
      }
    }
    CHECK(f_od_cdf(1e3, 1e-3, Family::Levy, Parity::mixed) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f_od_cdf(0.0, 1e-3, Family::Levy, Parity::odd) == doctest::Approx(0.5).epsilon(1e-9));
  }

  TEST_CASE("weak and strong coupling limits") {
    // The odd half is concentrated at R = 0 only once g is well below eps.
    const double g = 1e-6, eps = 1e-3;
    const double mass = 2.0 * f_od_cdf(eps, g, Family::GOE, Parity::mixed) - 1.0;
    CHECK(mass >= 0.49);
    CHECK(2.0 * f_od_cdf(eps, 1e-4, Family::GOE, Parity::mixed) - 1.0 < mass);
    const double rest = (f_od_second_moment(g, Family::GOE, Parity::mixed) -
                         f_od_truncated_second_moment(eps, g, Family::GOE, Parity::mixed)) /
                        (1.0 - mass);
    CHECK(rest == doctest::Approx(2.0).epsilon(0.02));

    double ks = 0.0;
    for (double R = -5.0; R <= 5.0; R += 0.25) {
      ks = std::max(ks, std::abs(f_od_cdf(R, 30.0, Family::GOE, Parity::mixed) - 0.5 * std::erfc(-R / std::sqrt(2.0))));
    }
    CHECK(ks < 0.01);
  }

  TEST_CASE("entropy enhancement theory") {
    CHECK(delta_s_theory(0.0, Family::GOE) == 0.0);
    CHECK(std::abs(delta_s_theory(1e3, Family::GOE) - std::log(2.0)) < 1e-3);
    // Leading log plus a constant linear term; the ratio to the log alone approaches 1 slowly.
    double c_prev = 0.0, r_prev = 0.0;
    for (double g : {1e-5, 1e-6, 1e-8}) {
      const double s = delta_s_theory(g, Family::Levy, 1e-14);
      const double c = s / g + 8.0 * std::log(g);
      const double r = s / (-8 * g * std::log(g));
      if (c_prev != 0.0) CHECK(c == doctest::Approx(c_prev).epsilon(0.01));
      CHECK(r > r_prev);
      CHECK(r < 1.0);
      c_prev = c;
      r_prev = r;
    }
    double prev = 0.0;
    for (int k = 0; k < 30; ++k) {
      const double gk = std::pow(10.0, -4.0 + 6.0 * k / 29.0);
      const double s = delta_s_theory(gk, Family::GOE);
      CHECK(s >= prev - 1e-9);
      CHECK(s <= std::log(2.0) + 1e-9);
      prev = s;
    }
  }

  TEST_CASE("measured enhancement and the Renyi identity") {
    RngStream rng(6);
    std::vector<double> a(500), b(500);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = std::pow(rng.normal(), 3);
    auto unit_rms = [](std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x * x;
      s = std::sqrt(s / v.size());
      for (auto& x : v) x = std::abs(x) / s;
    };
    unit_rms(a);
    unit_rms(b);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ma += a[i];
      mb += b[i];
    }
    CHECK(2.0 * std::log(ma / mb) == doctest::Approx(renyi_half_entropy(a) - renyi_half_entropy(b)).epsilon(1e-12));

    IsingBathSpec spec;
    spec.L = 6;
    RngStream r2(8);
    FullModel model(build_ising_bath(spec, r2), build_coupling_operator(CouplingKind::mid_chain_sigma_x, 6),
                    {0.0, 0.0, CouplingKind::mid_chain_sigma_x, spec.probe_field()});
    auto full = diagonalize(model.hamiltonian());
    const RVector vp = lift_to_full(sigma_x_diagonal(6, mid_chain_site(6) - 1));
    RMatrix w = squared_matrix_elements(full, vp);
    const double h = spec.probe_field();
    CHECK(measure_delta_s_matrix_elements(full.energies, w, full.energies, w, {-1.0, 0.0, 1.0}, h, 1.0) == 0.0);
  }

  TEST_CASE("probe susceptibilities of the decoupled system") {
    IsingBathSpec spec;
    spec.L = 6;
    RngStream rng(9);
    auto hb = build_ising_bath(spec, rng);
    const double h = 0.5 * spec.probe_field();
    FullModel model(hb, build_coupling_operator(CouplingKind::mid_chain_sigma_x, 6),
                    {0.0, 0.0, CouplingKind::mid_chain_sigma_x, spec.probe_field()});
    auto full = diagonalize(model.hamiltonian());
    const RVector vb = sigma_x_diagonal(6, mid_chain_site(6) - 1);
    auto samples = chi_prime_samples(full.energies, squared_matrix_elements(full, lift_to_full(vb)), h, 0, 128);
    CHECK(samples.size() == 256);
    auto bath = diagonalize(hb);
    RMatrix bsq = squared_matrix_elements(bath, vb);
    std::vector<double> got, expect;
    for (const auto& s : samples) got.push_back(s.chi);
    for (int tau : {1, -1}) {
      for (Index a = 0; a < 64; ++a) {
        // Each bath state appears twice in the full spectrum (spin up and down).
        expect.push_back(chi_alpha(bath.energies, bsq, a, tau * h));
        expect.push_back(chi_alpha(bath.energies, bsq, a, tau * h));
      }
    }
    std::sort(got.begin(), got.end());
    std::sort(expect.begin(), expect.end());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-8));
  }
}
