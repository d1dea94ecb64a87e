#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "partherm/bath_probe.hpp"
#include "partherm/dynamics.hpp"
#include "partherm/ensembles.hpp"
#include "partherm/harness.hpp"
#include "partherm/numerics.hpp"
#include "partherm/resonance.hpp"
#include "partherm/spectra.hpp"

namespace partherm {

namespace {

using nlohmann::json;

/// One disorder realization of the bath with everything the theory needs.
struct BathSample {
  int size = 0;
  HermitianMatrix H_B;
  RVector v_diag;          ///< coupling operator (diagonal in the product basis)
  double h_S = 0.0;
  double s_E = 1.0;
  EigenSystem eig;
  RMatrix v_sq;
  ChiStarProfile profile = ChiStarProfile::constant(1.0);
  double chi_star0 = 1.0;  ///< chi*(0, h_S), sets g = J sqrt(chi*_0)
  double v_tilde = 0.0;
  double rho = 0.0;
  std::vector<double> fields;
};

bool is_rm(const ExperimentConfig& c) { return c.bath.kind != BathKind::ising; }

/// Samples and diagonalizes one bath. For the Ising chain the chi* profile is
/// `shared` (the disorder-averaged measurement) when given, else this
/// realization's own measurement.
BathSample sample_bath(const ExperimentConfig& cfg, int size, RngStream& rng, const ChiStarProfile* shared = nullptr) {
  BathSample b;
  b.size = size;
  b.h_S = cfg.h_S(size);
  if (is_rm(cfg)) {
    const DysonClass beta(cfg.bath.beta);
    b.H_B = cfg.bath.kind == BathKind::gre ? sample_gre(size, beta, rng) : sample_poisson_bath(size, beta, rng);
    b.v_diag = diag_alternating(b.H_B.dim());
    b.profile = ChiStarProfile::rm_semicircle(cfg.bath.beta, size);
  } else {
    const IsingBathSpec spec = cfg.bath.ising(size);
    b.fields = sample_ising_fields(spec, rng);
    b.H_B = build_ising_bath(spec, b.fields);
    b.v_diag = sigma_x_diagonal(size, mid_chain_site(size));
    b.s_E = std::sqrt(spec.energy_variance(b.fields));
  }
  b.eig = diagonalize(b.H_B);
  b.v_sq = squared_matrix_elements(b.eig, b.v_diag);
  if (is_rm(cfg)) {
    b.chi_star0 = b.profile(0.0, b.h_S);
  } else {
    b.v_tilde = spectral_function(b.eig.energies, b.v_sq, 0.0, b.h_S, cfg.window);
    b.rho = dos_estimate(b.eig.energies, b.h_S, cfg.window);
    if (!(b.v_tilde > 0.0 && b.rho > 0.0)) throw NumericalError("vanishing spectral function at the band centre");
    b.profile = shared ? *shared : ChiStarProfile::eth_from_measurement(1, b.v_tilde, b.rho, b.s_E);
    b.chi_star0 = b.profile.chi_star0();
  }
  return b;
}

/// Spectral-function measurement of one Ising realization.
struct EthMeasurement {
  double v_tilde = 0.0;
  double rho = 0.0;
  double s_E2 = 0.0;
};

/// chi* profile from the disorder averages [v_tilde], [rho] and [s_E^2].
ChiStarProfile averaged_profile(const std::vector<EthMeasurement>& m) {
  double v = 0.0, rho = 0.0, s2 = 0.0;
  for (const auto& x : m) {
    v += x.v_tilde;
    rho += x.rho;
    s2 += x.s_E2;
  }
  const double n = static_cast<double>(m.size());
  return ChiStarProfile::eth_from_measurement(1, v / n, rho / n, std::sqrt(s2 / n));
}

struct CouplingPoint {
  double J = 0.0;
  double g = 0.0;
};

std::vector<CouplingPoint> coupling_points(const ExperimentConfig& cfg, double chi_star0) {
  std::vector<CouplingPoint> out;
  for (double J : cfg.coupling.J) out.push_back({J, J * std::sqrt(chi_star0)});
  for (double g : cfg.coupling.g) out.push_back({g / std::sqrt(chi_star0), g});
  return out;
}

FullModel full_model(const BathSample& b, double J) {
  return FullModel(b.H_B, HermitianMatrix(RMatrix(b.v_diag.asDiagonal())),
                   CouplingSpec{J, 0.0, CouplingKind::custom, b.h_S});
}

Row base_row(const RngStream& rng, long realization, int size) {
  Row r;
  r.seed = rng.seed();
  r.realization = realization;
  r.L_or_d = size;
  return r;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
  return x;
}

// Per-realization work ------------------------------------------------------

void unit_fs(const ExperimentConfig& cfg, const BathSample& b, Row base, std::vector<Row>& rows) {
  const bool quaternion = is_rm(cfg) && cfg.bath.beta == 4;
  const Index dim = b.eig.dim();
  auto [first, last] = mid_spectrum_indices(dim, cfg.mid_fraction);
  const Index stride = quaternion ? 2 : 1;
  if (quaternion) first -= first % 2;
  for (int sigma : {1, -1}) {
    auto chi = chi_values(b.eig.energies, b.v_sq, sigma * b.h_S, first, last, stride);
    Index k = 0;
    for (Index a = first; a < last; a += stride, ++k) {
      Row r = base;
      r.quantity = "chi";
      r.alpha_sigma = sigma;
      r.alpha_index = static_cast<long>(a / stride);
      r.E0 = b.eig.energies(a);
      r.chi = chi[k];
      r.chi_star = b.profile(b.eig.energies(a), sigma * b.h_S);
      rows.push_back(r);
    }
  }
  if (!is_rm(cfg)) {
    const double two_L = std::ldexp(1.0, b.size);
    Row r = base;
    r.quantity = "chi_star0";
    r.value = b.chi_star0 / two_L;
    r.theory = 0.0052;
    rows.push_back(r);
    r.quantity = "v_tilde";
    r.value = b.v_tilde;
    r.theory.reset();
    rows.push_back(r);
    r.quantity = "rho";
    r.value = b.rho;
    rows.push_back(r);
  }
}

void unit_s_vs_chi(const ExperimentConfig& cfg, const BathSample& b, RngStream& rng, Row base,
                   std::vector<Row>& rows) {
  const double logJ = cfg.log_J_min + (cfg.log_J_max - cfg.log_J_min) * rng.uniform();
  const double J = std::exp(logJ);
  const Index d = b.eig.dim();
  auto full = diagonalize(full_model(b, J).hamiltonian());
  const RVector S = spin_entropies(full);
  const auto perm = match_eigenstates(product_eigensystem(b.eig, b.h_S), full);
  auto [first, last] = mid_spectrum_indices(d, cfg.mid_fraction);
  for (int sigma : {1, -1}) {
    auto chi = chi_values(b.eig.energies, b.v_sq, sigma * b.h_S, first, last);
    for (Index a = first; a < last; ++a) {
      const Index i = sigma == 1 ? a : a + d;
      Row r = base;
      r.quantity = "state";
      r.J = J;
      const double cs = b.profile(b.eig.energies(a), sigma * b.h_S);
      r.g = J * std::sqrt(cs);
      r.alpha_sigma = sigma;
      r.alpha_index = static_cast<long>(a);
      r.E0 = b.eig.energies(a) + 0.5 * sigma * b.h_S;
      r.chi = chi[a - first];
      r.chi_star = cs;
      r.S = S(perm[i]);
      r.S_pert = perturbative_entropy(J, chi[a - first]);
      rows.push_back(r);
    }
  }
}

void unit_ee(const ExperimentConfig& cfg, const BathSample& b, Row base, std::vector<Row>& rows) {
  for (const auto& cp : coupling_points(cfg, b.chi_star0)) {
    auto full = diagonalize(full_model(b, cp.J).hamiltonian());
    const RVector S = spin_entropies(full);
    auto [first, last] = mid_spectrum_indices(full.dim(), cfg.mid_fraction);
    for (Index i = first; i < last; ++i) {
      Row r = base;
      r.quantity = "S";
      r.J = cp.J;
      r.g = cp.g;
      r.alpha_index = static_cast<long>(i);
      r.E0 = full.energies(i);
      r.S = S(i);
      rows.push_back(r);
    }
  }
}

void unit_czz_t(const ExperimentConfig& cfg, const BathSample& b, Row base, std::vector<Row>& rows) {
  const RVector z = spin_z_diagonal(b.eig.dim());
  for (const auto& cp : coupling_points(cfg, b.chi_star0)) {
    const double gamma = fgr_gamma(b.eig.energies, b.v_sq, cp.J, b.h_S, cfg.window);
    Row g = base;
    g.quantity = "gamma";
    g.J = cp.J;
    g.g = cp.g;
    g.value = gamma;
    rows.push_back(g);
    auto scaled = cfg.times.grid();
    std::vector<double> times = scaled;
    if (cfg.times.in_units_of_gamma) {
      if (!(gamma > 0.0)) throw NumericalError("golden-rule rate vanishes; cannot use times in units of 1/gamma");
      for (auto& t : times) t /= gamma;
    }
    auto full = diagonalize(full_model(b, cp.J).hamiltonian());
    auto series = czz_t(full, z, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      Row r = base;
      r.quantity = "czz";
      r.J = cp.J;
      r.g = cp.g;
      r.t = times[k];
      r.czz = series.values[k];
      r.value = cfg.times.in_units_of_gamma ? scaled[k] : times[k] * gamma;
      rows.push_back(r);
    }
  }
}

void unit_czz_inf(const ExperimentConfig& cfg, const BathSample& b, Row base, std::vector<Row>& rows) {
  const RVector z = spin_z_diagonal(b.eig.dim());
  for (const auto& cp : coupling_points(cfg, b.chi_star0)) {
    auto full = diagonalize(full_model(b, cp.J).hamiltonian());
    const auto plateau = czz_infinite_exact(full, z);
    Row r = base;
    r.quantity = "czz_inf";
    r.J = cp.J;
    r.g = cp.g;
    r.value = plateau.value;
    r.theory = czz_infinite_theory(cp.J, b.profile, cfg.family, b.h_S);
    rows.push_back(r);
    Row blocks = r;
    blocks.quantity = "degenerate_blocks";
    blocks.value = static_cast<double>(plateau.degenerate_blocks);
    blocks.theory.reset();
    rows.push_back(blocks);
    auto [first, last] = mid_spectrum_indices(full.dim(), cfg.mid_fraction);
    full.visit_vectors([&](const auto& U) {
      for (Index i = first; i < last; ++i) {
        Row s = base;
        s.quantity = "czz_diag";
        s.J = cp.J;
        s.g = cp.g;
        s.alpha_index = static_cast<long>(i);
        s.E0 = full.energies(i);
        s.czz_diag = U.col(i).cwiseAbs2().dot(z);
        rows.push_back(s);
      }
    });
  }
}

RVector probe_diagonal(const ExperimentConfig& cfg, int L) {
  return lift_to_full(sigma_x_diagonal(L, mid_chain_site(L) + cfg.coupling.probe_site_offset));
}

// Signed probe elements between the windows at E and E + omega.
std::vector<double> window_elements(const EigenSystem& full, const RVector& vp, double E, double omega, double width) {
  auto [a0, a1] = window_range(full.energies, E, width);
  auto [b0, b1] = window_range(full.energies, E + omega, width);
  if (a1 <= a0) throw EmptyWindow(E);
  if (b1 <= b0) throw EmptyWindow(E + omega);
  const RMatrix& U = full.real_vectors();
  const RMatrix M = U.middleCols(a0, a1 - a0).transpose() * vp.asDiagonal() * U.middleCols(b0, b1 - b0);
  return std::vector<double>(M.data(), M.data() + M.size());
}

void unit_f_od(const ExperimentConfig& cfg, const BathSample& b, Row base, std::vector<Row>& rows) {
  const RVector vp = probe_diagonal(cfg, b.size);
  const double omega = cfg.h_probe(b.size);
  const auto decoupled = diagonalize(full_model(b, 0.0).hamiltonian());
  double ms = 0.0;
  long n = 0;
  for (double E : cfg.centres) {
    for (double x : window_elements(decoupled, vp, E, omega, cfg.window)) {
      ms += x * x;
      ++n;
    }
  }
  const double rms0 = std::sqrt(ms / n);
  if (!(rms0 > 0.0)) throw NumericalError("probe matrix elements vanish at zero coupling");
  for (const auto& cp : coupling_points(cfg, b.chi_star0)) {
    const auto full = cp.J == 0.0 ? decoupled : diagonalize(full_model(b, cp.J).hamiltonian());
    for (double E : cfg.centres) {
      for (double x : window_elements(full, vp, E, omega, cfg.window)) {
        Row r = base;
        r.quantity = "R";
        r.J = cp.J;
        r.g = cp.g;
        r.E0 = E;
        r.R = x / rms0;
        rows.push_back(r);
      }
    }
  }
}

void unit_delta_s(const ExperimentConfig& cfg, const BathSample& b, Row base, std::vector<Row>& rows) {
  const RVector vp = probe_diagonal(cfg, b.size);
  const double hp = cfg.h_probe(b.size);
  const auto decoupled = diagonalize(full_model(b, 0.0).hamiltonian());
  const RMatrix w0 = squared_matrix_elements(decoupled, vp);
  auto [first, last] = mid_spectrum_indices(decoupled.dim(), cfg.mid_fraction);
  auto emit_chi = [&](const EigenSystem& full, const RMatrix& w, const CouplingPoint* cp) {
    for (const auto& s : chi_prime_samples(full.energies, w, hp, first, last)) {
      Row r = base;
      r.quantity = cp ? "chi_prime" : "chi_prime_baseline";
      if (cp) {
        r.J = cp->J;
        r.g = cp->g;
      }
      r.alpha_sigma = s.sigma;
      r.alpha_index = static_cast<long>(s.a);
      r.E0 = s.E;
      r.chi = s.chi;
      rows.push_back(r);
    }
  };
  emit_chi(decoupled, w0, nullptr);
  auto [bs, bn] = offdiag_abs_sum(decoupled.energies, w0, cfg.centres, hp, cfg.window);
  for (const auto& cp : coupling_points(cfg, b.chi_star0)) {
    const auto full = cp.J == 0.0 ? decoupled : diagonalize(full_model(b, cp.J).hamiltonian());
    const RMatrix w = cp.J == 0.0 ? w0 : squared_matrix_elements(full, vp);
    auto [cs, cn] = offdiag_abs_sum(full.energies, w, cfg.centres, hp, cfg.window);
    Row r = base;
    r.J = cp.J;
    r.g = cp.g;
    r.quantity = "abs_mean";
    r.value = cs / cn;
    rows.push_back(r);
    r.quantity = "abs_mean_baseline";
    r.value = bs / bn;
    rows.push_back(r);
    r.quantity = "delta_s_matrix";
    r.value = measure_delta_s_matrix_elements(full.energies, w, decoupled.energies, w0, cfg.centres, hp, cfg.window);
    r.theory = delta_s_theory(cp.g, cfg.family);
    rows.push_back(r);
    emit_chi(full, w, &cp);
  }
}

void unit_estimator(const ExperimentConfig& cfg, RngStream& rng, Row base, std::vector<Row>& rows) {
  const DistributionModel model(cfg.family, 1.0);
  Row r = base;
  r.quantity = "log_chi_star_estimate";
  r.value = estimate_log_chi_star(model.sample(rng, cfg.samples));
  r.theory = 0.0;
  rows.push_back(r);
}

// Summaries -------------------------------------------------------------------

struct Stats {
  double mean = 0.0, stderr_ = 0.0, rms = 0.0;
  long n = 0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  s.n = static_cast<long>(v.size());
  if (v.empty()) return s;
  double m = 0.0, m2 = 0.0;
  for (double x : v) {
    m += x;
    m2 += x * x;
  }
  s.mean = m / s.n;
  s.rms = std::sqrt(m2 / s.n);
  const double var = s.n > 1 ? (m2 - s.n * s.mean * s.mean) / (s.n - 1) : 0.0;
  s.stderr_ = std::sqrt(std::max(var, 0.0) / s.n);
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  const auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

/// Rows grouped by (size, coupling value), in first-seen order of a sorted key.
template <class Key, class F>
std::map<Key, std::vector<const Row*>> group(const std::vector<Row>& rows, const std::string& quantity, F key) {
  std::map<Key, std::vector<const Row*>> out;
  for (const Row& r : rows) {
    if (r.quantity == quantity) out[key(r)].push_back(&r);
  }
  return out;
}

using SizeG = std::pair<int, double>;
SizeG size_g(const Row& r) { return {r.L_or_d, r.g.value_or(0.0)}; }

void summarize_fs(const ExperimentConfig& cfg, RunOutput& out) {
  const DistributionModel unit(cfg.family, 1.0);
  json per_size = json::array();
  for (const auto& [size, rs] : group<int>(out.rows, "chi", [](const Row& r) { return r.L_or_d; })) {
    std::vector<double> x;
    for (const Row* r : rs) x.push_back(*r->chi / *r->chi_star);
    json s{{"size", size},
           {"samples", x.size()},
           {"median_chi_over_chi_star", median(x)},
           {"theory_median", unit.median()},
           {"log_chi_star_ratio_estimate", estimate_log_chi_star(x)}};
    if (!is_rm(cfg)) {
      std::vector<double> c0, v, rho;
      for (const Row& r : out.rows) {
        if (r.L_or_d != size) continue;
        if (r.quantity == "chi_star0") c0.push_back(*r.value);
        if (r.quantity == "v_tilde") v.push_back(*r.value);
        if (r.quantity == "rho") rho.push_back(*r.value);
      }
      // c_1 [v_tilde] [rho] / 2^L, with the two relative errors combined.
      const Stats sv = stats(v), sr = stats(rho);
      const double value = c_beta(1) * sv.mean * sr.mean / std::ldexp(1.0, size);
      s["chi_star0_over_2L_mean"] = value;
      s["chi_star0_over_2L_stderr"] = value * std::hypot(sv.stderr_ / sv.mean, sr.stderr_ / sr.mean);
      s["chi_star0_over_2L_per_realization_mean"] = stats(c0).mean;
      s["chi_star0_over_2L_reference"] = 0.0052;
      s["tail_estimate_over_2L"] = std::exp(estimate_log_chi_star(x)) * value;
    }
    per_size.push_back(s);
  }
  out.summary["sizes"] = per_size;
  std::vector<double> xs = log_grid(1e-2, 1e3, std::max(cfg.theory_points, 2)), pdf;
  for (double x : xs) pdf.push_back(unit.pdf(x));
  out.theory["unit_pdf"] = {{"x", xs}, {"pdf", pdf}, {"family", to_string(cfg.family)}};
  out.theory["lower_tail_coefficient"] = unit.lower_tail_coefficient();
}

void summarize_s_vs_chi(RunOutput& out) {
  std::vector<double> rel;
  long flagged = 0, total = 0;
  for (const Row& r : out.rows) {
    if (r.quantity != "state") continue;
    ++total;
    const double x = (*r.J) * (*r.J) * (*r.chi);
    if (perturbative_flag(*r.J, *r.chi)) ++flagged;
    if (x < 1e-3 && *r.S > 0.0) rel.push_back(std::abs(*r.S_pert - *r.S) / *r.S);
  }
  out.summary["states"] = total;
  out.summary["perturbative_flagged"] = flagged;
  out.summary["weak_states"] = rel.size();
  out.summary["median_relative_error_weak"] = median(rel);
  std::vector<double> xs = log_grid(1e-8, 1e4, 200), S;
  for (double x : xs) S.push_back(cat_entropy(x));
  out.theory["S_of_x"] = {{"x", xs}, {"S", S}};
}

void summarize_ee(const ExperimentConfig& cfg, RunOutput& out, bool moments) {
  const DistributionModel unit(cfg.family, 1.0);
  json per = json::array();
  for (const auto& [key, rs] : group<SizeG>(out.rows, "S", size_g)) {
    std::vector<double> s;
    for (const Row* r : rs) s.push_back(*r->S);
    const Stats st = stats(s);
    const EEMoments th = ee_moments(key.second, unit);
    per.push_back({{"size", key.first},
                   {"g", key.second},
                   {"states", st.n},
                   {"mean", st.mean},
                   {"mean_stderr", st.stderr_},
                   {"median", median(s)},
                   {"variance", st.rms * st.rms - st.mean * st.mean},
                   {"theory_mean", th.mean},
                   {"theory_median", th.median},
                   {"theory_variance", th.variance}});
  }
  out.summary["points"] = per;
  if (moments) {
    const auto gs = log_grid(1e-4, 1e2, cfg.theory_points);
    std::vector<double> mean, med, var, amean, amed, avar;
    for (double g : gs) {
      const EEMoments m = ee_moments(g, unit);
      const EEMoments a = ee_weak_asymptotes(g, 1.0, cfg.family);
      mean.push_back(m.mean);
      med.push_back(m.median);
      var.push_back(m.variance);
      amean.push_back(a.mean);
      amed.push_back(a.median);
      avar.push_back(a.variance);
    }
    out.theory["moments"] = {{"g", gs},          {"mean", mean},       {"median", med},
                             {"variance", var},  {"weak_mean", amean}, {"weak_median", amed},
                             {"weak_variance", avar}, {"strong_constant", strong_coupling_constant(cfg.family)}};
  } else {
    json curves = json::array();
    std::vector<double> grid;
    for (int i = 1; i <= cfg.theory_points; ++i) grid.push_back(std::log(2.0) * i / (cfg.theory_points + 1));
    std::vector<double> gs = cfg.coupling.g;
    if (gs.empty()) {
      for (const auto& p : per) gs.push_back(p["g"].get<double>());
    }
    for (double g : gs) {
      if (!(g > 0.0)) continue;
      std::vector<double> pdf;
      for (double S : grid) pdf.push_back(f_ee_pdf(S, g, unit));
      curves.push_back({{"g", g}, {"S", grid}, {"pdf", pdf}});
    }
    out.theory["f_ee"] = curves;
  }
}

void summarize_czz_t(const ExperimentConfig& cfg, RunOutput& out) {
  json per = json::array();
  for (const auto& [key, gr] : group<SizeG>(out.rows, "gamma", size_g)) {
    std::vector<double> gam, gj;
    for (const Row* r : gr) {
      gam.push_back(*r->value);
      gj.push_back(*r->value / ((*r->J) * (*r->J)));
    }
    const Stats sg = stats(gam), sj = stats(gj);
    // Realization average of C on the common grid of scaled times gamma t.
    std::map<double, std::vector<double>> by_tau;
    for (const Row& r : out.rows) {
      if (r.quantity == "czz" && size_g(r) == key) by_tau[cfg.times.in_units_of_gamma ? *r.value : *r.t].push_back(*r.czz);
    }
    CorrelatorSeries avg;
    for (const auto& [tau, v] : by_tau) {
      avg.times.push_back(tau);
      avg.values.push_back(stats(v).mean);
    }
    json p{{"size", key.first},     {"g", key.second},  {"gamma_mean", sg.mean},
           {"gamma_stderr", sg.stderr_}, {"gamma_over_J2", sj.mean}, {"gamma_over_J2_stderr", sj.stderr_},
           {"t", avg.times},        {"czz_mean", avg.values}};
    try {
      if (cfg.times.in_units_of_gamma) {
        p["early_slope_over_gamma"] = log_decay_slope(avg, 0.5);
      } else if (sg.mean > 0.0) {
        p["early_slope_over_gamma"] = log_decay_slope(avg, 0.5 / sg.mean) / sg.mean;
      }
    } catch (const std::exception& e) {
      out.warnings.push_back(std::string("early-time slope: ") + e.what());
    }
    per.push_back(p);
  }
  out.summary["points"] = per;
}

void summarize_czz_inf(const ExperimentConfig& cfg, RunOutput& out) {
  json per = json::array();
  for (const auto& [key, rs] : group<SizeG>(out.rows, "czz_inf", size_g)) {
    std::vector<double> v, th;
    for (const Row* r : rs) {
      v.push_back(*r->value);
      th.push_back(*r->theory);
    }
    const Stats sv = stats(v), st = stats(th);
    per.push_back({{"size", key.first},
                   {"g", key.second},
                   {"plateau_mean", sv.mean},
                   {"plateau_stderr", sv.stderr_},
                   {"theory_mean", st.mean},
                   {"relative_difference", (sv.mean - st.mean) / st.mean}});
  }
  out.summary["points"] = per;
  long blocks = 0;
  for (const Row& r : out.rows) {
    if (r.quantity == "degenerate_blocks") blocks += static_cast<long>(*r.value);
  }
  out.summary["degenerate_blocks"] = blocks;
  const auto gs = log_grid(1e-4, 1e2, cfg.theory_points);
  std::vector<double> c;
  for (double g : gs) c.push_back(czz_infinite_theory(g, ChiStarProfile::constant(1.0), cfg.family));
  out.theory["plateau_constant_profile"] = {{"g", gs}, {"czz_inf", c}};
}

void summarize_f_od(const ExperimentConfig& cfg, RunOutput& out) {
  json per = json::array();
  std::vector<double> gs;
  for (const auto& [key, rs] : group<SizeG>(out.rows, "R", size_g)) {
    std::vector<double> R;
    for (const Row* r : rs) R.push_back(*r->R);
    const Stats s = stats(R);
    long small = 0;
    for (double x : R) small += std::abs(x) < 1e-3;
    const double g = key.second;
    double ks = NAN;
    if (g > 0.0) try {
      // Tabulate F(r) for r >= 0 on a log grid and use R -> -R symmetry.
      std::vector<double> lr, F;
      for (double r : log_grid(1e-8, 40.0, 72)) {
        lr.push_back(std::log(r));
        F.push_back(f_od_cdf(r, g, cfg.family, cfg.parity, 1e-7));
      }
      const double F0 = f_od_cdf(0.0, g, cfg.family, cfg.parity, 1e-7);
      const MonotoneSpline spline(lr, F);
      auto Fpos = [&](double r) {
        if (r <= 1e-8) return r == 0.0 ? F0 : F.front();
        return r >= 40.0 ? 1.0 : spline(std::log(r));
      };
      ks = ks_distance(R, [&](double x) { return x >= 0.0 ? Fpos(x) : 1.0 - Fpos(-x); });
    } catch (const ConvergenceError& e) {
      out.warnings.push_back(std::string("f_od KS distance: ") + e.what());
    }
    per.push_back({{"size", key.first},
                   {"g", g},
                   {"samples", s.n},
                   {"second_moment", s.rms * s.rms},
                   {"fraction_below_1e-3", static_cast<double>(small) / s.n},
                   {"ks_vs_theory", ks}});
    if (std::find(gs.begin(), gs.end(), g) == gs.end()) gs.push_back(g);
  }
  out.summary["points"] = per;
  json curves = json::array();
  std::vector<double> grid;
  for (int i = 0; i < cfg.theory_points; ++i) grid.push_back(-4.0 + 8.0 * i / (cfg.theory_points - 1));
  for (double g : gs) {
    std::vector<double> pdf;
    for (double R : grid) pdf.push_back(f_od_pdf(R, g, cfg.family, cfg.parity, 1e-7));
    curves.push_back({{"g", g},
                      {"R", grid},
                      {"pdf", pdf},
                      {"second_moment", f_od_second_moment(g, cfg.family, cfg.parity)},
                      {"parity", to_string(cfg.parity)}});
  }
  out.theory["f_od"] = curves;
}

void summarize_delta_s(const ExperimentConfig& cfg, RunOutput& out) {
  std::map<int, std::vector<double>> baseline;
  for (const Row& r : out.rows) {
    if (r.quantity == "chi_prime_baseline") baseline[r.L_or_d].push_back(*r.chi);
  }
  auto chi_prime = group<SizeG>(out.rows, "chi_prime", size_g);
  json per = json::array();
  for (const auto& [key, rs] : group<SizeG>(out.rows, "abs_mean", size_g)) {
    std::vector<double> c, b, direct, th;
    for (const Row& r : out.rows) {
      if (size_g(r) != key) continue;
      if (r.quantity == "abs_mean") c.push_back(*r.value);
      if (r.quantity == "abs_mean_baseline") b.push_back(*r.value);
      if (r.quantity == "delta_s_matrix") {
        direct.push_back(*r.value);
        th.push_back(*r.theory);
      }
    }
    json p{{"size", key.first},
           {"g", key.second},
           {"delta_s_matrix", 2.0 * std::log(stats(c).mean / stats(b).mean)},
           {"delta_s_matrix_per_realization_mean", stats(direct).mean},
           {"theory", delta_s_theory(key.second, cfg.family)}};
    std::vector<double> chi;
    for (const Row* r : chi_prime[key]) chi.push_back(*r->chi);
    const auto& base = baseline[key.first];
    if (chi.size() >= 10 && base.size() >= 10) {
      const double l1 = estimate_log_chi_star(chi), l0 = estimate_log_chi_star(base);
      p["delta_s_tail"] = l1 - l0;
      p["log_chi_star_prime"] = l1;
      p["log_chi_star_prime_baseline"] = l0;
    }
    per.push_back(p);
  }
  out.summary["points"] = per;
  const auto gs = log_grid(1e-4, 1e3, cfg.theory_points);
  std::vector<double> ds;
  for (double g : gs) ds.push_back(delta_s_theory(g, cfg.family));
  out.theory["delta_s"] = {{"g", gs}, {"delta_s", ds}};
}

void summarize_estimator(const ExperimentConfig& cfg, RunOutput& out) {
  std::vector<double> e;
  for (const Row& r : out.rows) e.push_back(*r.value);
  const Stats s = stats(e);
  out.summary = {{"datasets", s.n},
                 {"samples_per_dataset", cfg.samples},
                 {"tail_count", default_tail_count(cfg.samples)},
                 {"bias", s.mean},
                 {"rms", s.rms},
                 {"family", to_string(cfg.family)}};
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg, int workers, const ProgressFn& progress) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const long R = cfg.realizations;
  const long units = cfg.experiment == Experiment::estimator_bench ? R : R * static_cast<long>(cfg.bath.sizes.size());
  std::vector<std::vector<Row>> shards(units);
  std::vector<std::string> warnings(units);
  json profiles = json::array();
  std::mutex mu;
  long done = 0;

  // The Ising chi* scale is the disorder average over the realizations of a
  // size. Experiments that need it before the coupled diagonalization measure
  // it in a first pass over the same baths; fs_eth fills it in afterwards.
  const bool ising = !is_rm(cfg) && cfg.experiment != Experiment::estimator_bench;
  const bool prepass = ising && cfg.experiment != Experiment::fs_eth;
  const long total = prepass ? 2 * units : units;
  std::vector<EthMeasurement> measured(ising ? units : 0);
  auto size_of = [&](long u) { return cfg.bath.sizes[cfg.experiment == Experiment::estimator_bench ? 0 : u / R]; };
  auto tick = [&] {
    if (progress) {
      std::lock_guard lock(mu);
      progress(++done, total);
    }
  };
  std::map<int, ChiStarProfile> shared;
  auto average_sizes = [&] {
    for (std::size_t i = 0; i < cfg.bath.sizes.size(); ++i) {
      const auto first = measured.begin() + static_cast<long>(i) * R;
      shared.emplace(cfg.bath.sizes[i], averaged_profile(std::vector<EthMeasurement>(first, first + R)));
    }
  };
  if (prepass) {
    parallel_for(units, workers, [&](long u) {
      RngStream rng = RngStream::for_realization(cfg.master_seed, static_cast<std::uint64_t>(u));
      const BathSample b = sample_bath(cfg, size_of(u), rng);
      measured[u] = {b.v_tilde, b.rho, b.s_E * b.s_E};
      tick();
    });
    average_sizes();
  }

  parallel_for(units, workers, [&](long u) {
    RngStream rng = RngStream::for_realization(cfg.master_seed, static_cast<std::uint64_t>(u));
    const int size = size_of(u);
    Row base = base_row(rng, u, size);
    auto& rows = shards[u];
    if (cfg.experiment == Experiment::estimator_bench) {
      base.L_or_d = static_cast<int>(cfg.samples);
      unit_estimator(cfg, rng, base, rows);
    } else {
      const BathSample b = sample_bath(cfg, size, rng, prepass ? &shared.at(size) : nullptr);
      if (ising) measured[u] = {b.v_tilde, b.rho, b.s_E * b.s_E};
      const double rho0 = is_rm(cfg) ? size / M_PI : cfg.bath.ising(size).rho0();
      warnings[u] = hierarchy_warning(rho0, b.h_S, b.s_E);
      Row chi0 = base;
      chi0.quantity = "chi_star0_theory_axis";
      chi0.value = b.chi_star0;
      rows.push_back(chi0);
      switch (cfg.experiment) {
        case Experiment::fs_rm:
        case Experiment::fs_eth: unit_fs(cfg, b, base, rows); break;
        case Experiment::s_vs_chi: unit_s_vs_chi(cfg, b, rng, base, rows); break;
        case Experiment::ee_dist:
        case Experiment::ee_moments: unit_ee(cfg, b, base, rows); break;
        case Experiment::czz_t: unit_czz_t(cfg, b, base, rows); break;
        case Experiment::czz_inf: unit_czz_inf(cfg, b, base, rows); break;
        case Experiment::f_od: unit_f_od(cfg, b, base, rows); break;
        case Experiment::delta_s: unit_delta_s(cfg, b, base, rows); break;
        default: break;
      }
    }
    tick();
  });

  RunOutput out;
  for (auto& s : shards) {
    std::move(s.begin(), s.end(), std::back_inserter(out.rows));
    s.clear();
  }
  if (ising && !prepass) {
    average_sizes();
    for (Row& r : out.rows) {
      const ChiStarProfile& p = shared.at(r.L_or_d);
      if (r.quantity == "chi") r.chi_star = p(*r.E0, *r.alpha_sigma * cfg.h_S(r.L_or_d));
      if (r.quantity == "chi_star0_theory_axis") r.value = p.chi_star0();
    }
  }
  for (const auto& w : warnings) {
    if (!w.empty() && std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end())
      out.warnings.push_back(w);
  }
  switch (cfg.experiment) {
    case Experiment::fs_rm:
    case Experiment::fs_eth: summarize_fs(cfg, out); break;
    case Experiment::s_vs_chi: summarize_s_vs_chi(out); break;
    case Experiment::ee_dist: summarize_ee(cfg, out, false); break;
    case Experiment::ee_moments: summarize_ee(cfg, out, true); break;
    case Experiment::czz_t: summarize_czz_t(cfg, out); break;
    case Experiment::czz_inf: summarize_czz_inf(cfg, out); break;
    case Experiment::f_od: summarize_f_od(cfg, out); break;
    case Experiment::delta_s: summarize_delta_s(cfg, out); break;
    case Experiment::estimator_bench: summarize_estimator(cfg, out); break;
  }
  if (cfg.experiment != Experiment::estimator_bench) {
    std::map<int, std::vector<double>> c0;
    for (const Row& r : out.rows) {
      if (r.quantity == "chi_star0_theory_axis") c0[r.L_or_d].push_back(*r.value);
    }
    for (const auto& [size, v] : c0) {
      const Stats s = stats(v);
      profiles.push_back({{"size", size},
                          {"h_S", cfg.h_S(size)},
                          {"h_probe", cfg.h_probe(size)},
                          {"chi_star0_mean", s.mean},
                          {"chi_star0_stderr", s.stderr_},
                          {"profile", is_rm(cfg) ? "rm_semicircle" : "eth_gaussian_measured"}});
    }
    out.theory["chi_star_profiles"] = profiles;
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace partherm
