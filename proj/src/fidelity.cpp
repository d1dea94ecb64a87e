#include "partherm/fidelity.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>

#include "partherm/numerics.hpp"

#ifndef PARTHERM_DATA_DIR
#define PARTHERM_DATA_DIR ""
#endif

namespace partherm {

double c_beta(int beta) {
  switch (beta) {
    case 1: return 2.0 / M_PI;
    case 2: return M_PI / 4.0;
    case 4: return 9.0 * M_PI / 32.0;
    default: throw InvalidArgument("Dyson index must be 1, 2 or 4 (got " + std::to_string(beta) + ")");
  }
}

namespace {

inline double resonance_term(double vsq, double gap, Index a, Index b) {
  if (gap == 0.0) throw DegenerateResonance(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  return vsq / (gap * gap);
}

}  // namespace

double chi_alpha(const RVector& energies, const RMatrix& v_sq, Index a, double sigma_h) {
  const Index d = energies.size();
  if (v_sq.rows() != d || v_sq.cols() != d) throw InvalidArgument("|V_ab|^2 must be d x d");
  if (a < 0 || a >= d) throw InvalidArgument("level index out of range");
  double chi = 0.0;
  const double ea = energies(a) + sigma_h;
  for (Index b = 0; b < d; ++b) chi += resonance_term(v_sq(b, a), ea - energies(b), a, b);
  return chi;
}

ChiSample chi_alpha(const EigenSystem& bath, const HermitianMatrix& V, Index a, double sigma_h) {
  const Index d = bath.dim();
  if (V.dim() != d) throw InvalidArgument("coupling and bath dimensions differ");
  if (a < 0 || a >= d) throw InvalidArgument("level index out of range");
  RVector amp_sq(d);
  if (bath.is_real() && V.is_real()) {
    const RMatrix& U = bath.real_vectors();
    amp_sq = (U.transpose() * (V.real() * U.col(a))).array().square();
  } else {
    const CMatrix U = bath.is_real() ? CMatrix(bath.real_vectors().cast<cdouble>()) : bath.complex_vectors();
    amp_sq = (U.adjoint() * (V.to_complex() * U.col(a))).cwiseAbs2();
  }
  ChiSample s;
  s.sigma = sigma_h >= 0 ? 1 : -1;
  s.a = a;
  s.E = bath.energies(a);
  const double ea = s.E + sigma_h;
  for (Index b = 0; b < d; ++b) s.chi += resonance_term(amp_sq(b), ea - bath.energies(b), a, b);
  return s;
}

std::vector<double> chi_values(const RVector& energies, const RMatrix& v_sq, double sigma_h, Index first,
                               Index last, Index stride) {
  const Index d = energies.size();
  if (v_sq.rows() != d || v_sq.cols() != d) throw InvalidArgument("|V_ab|^2 must be d x d");
  if (first < 0 || last > d || first > last || stride < 1) throw InvalidArgument("bad level range");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>((last - first + stride - 1) / stride));
  for (Index a = first; a < last; a += stride) out.push_back(chi_alpha(energies, v_sq, a, sigma_h));
  return out;
}

std::string to_string(Family f) {
  switch (f) {
    case Family::Levy: return "levy";
    case Family::GUE: return "gue";
    case Family::GOE: return "goe";
    default: return "gse";
  }
}

Family parse_family(const std::string& s) {
  if (s == "levy") return Family::Levy;
  if (s == "gue") return Family::GUE;
  if (s == "goe") return Family::GOE;
  if (s == "gse") return Family::GSE;
  throw InvalidArgument("unknown distribution family '" + s + "'");
}

Family gaussian_family(int beta) {
  switch (beta) {
    case 1: return Family::GOE;
    case 2: return Family::GUE;
    case 4: return Family::GSE;
    default: throw InvalidArgument("Dyson index must be 1, 2 or 4");
  }
}

double goe_c2_from_c1(double c1) { return ((M_PI - 2.0) * std::pow(M_PI, 3) - 4.0 * M_PI * c1) / 4.0; }

double gse_c2_from_c1(double c1) { return (81920.0 * M_PI * M_PI - 3456.0 * M_PI * c1) / 729.0; }

FitConstants compiled_constants() {
  FitConstants c;
  c.version = 2;
  c.goe_C1 = 1.8669724494481326;
  c.goe_C2 = goe_c2_from_c1(c.goe_C1);
  c.gse_C1 = 27.79383474509206;
  c.gse_C2 = gse_c2_from_c1(c.gse_C1);
  c.source = "compiled";
  return c;
}

FitConstants load_constants(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ptree_error& e) {
    throw InvalidArgument("cannot read constants file '" + path + "': " + e.what());
  }
  FitConstants c;
  try {
    c.version = pt.get<int>("version");
    c.goe_C1 = pt.get<double>("goe.C1");
    c.goe_C2 = pt.get<double>("goe.C2");
    c.gse_C1 = pt.get<double>("gse.C1");
    c.gse_C2 = pt.get<double>("gse.C2");
  } catch (const boost::property_tree::ptree_error& e) {
    throw InvalidArgument("constants file '" + path + "': " + e.what());
  }
  c.source = path;
  return c;
}

void save_constants(const FitConstants& c, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write '" + path + "'");
  os << std::setprecision(17);
  os << "; fitted susceptibility-distribution constants\n";
  os << "version = " << c.version << "\n\n";
  os << "[goe]\nC1 = " << c.goe_C1 << "\nC2 = " << c.goe_C2 << "\n\n";
  os << "[gse]\nC1 = " << c.gse_C1 << "\nC2 = " << c.gse_C2 << "\n";
}

const FitConstants& default_constants() {
  static const FitConstants c = [] {
    if (const char* env = std::getenv("PARTHERM_CONSTANTS"); env && *env) return load_constants(env);
    const std::string installed = std::string(PARTHERM_DATA_DIR) + "/constants.txt";
    if (!std::string(PARTHERM_DATA_DIR).empty() && std::filesystem::exists(installed)) return load_constants(installed);
    return compiled_constants();
  }();
  return c;
}

DistributionModel::DistributionModel(Family family, double chi_star, const FitConstants& k)
    : family_(family), chi_star_(chi_star) {
  if (!(chi_star > 0.0) || !std::isfinite(chi_star)) throw InvalidArgument("chi* must be positive and finite");
  switch (family) {
    case Family::Levy:
      a_ = M_PI;
      terms_ = {{0.0, 1.0}};
      break;
    case Family::GUE:
      a_ = 4.0 * M_PI;
      terms_ = {{0.0, 1.0}, {1.0, 8.0 * M_PI}};
      break;
    case Family::GOE:
      a_ = std::pow(M_PI, 3) / 4.0;
      terms_ = {{0.0, 1.0}, {0.5, k.goe_C1}, {1.0, k.goe_C2}};
      break;
    case Family::GSE:
      a_ = 64.0 * M_PI / 9.0;
      terms_ = {{0.0, 1.0}, {1.0, k.gse_C1}, {2.0, k.gse_C2}};
      break;
  }
}

DistributionModel DistributionModel::with_scale(double chi_star) const {
  if (!(chi_star > 0.0) || !std::isfinite(chi_star)) throw InvalidArgument("chi* must be positive and finite");
  DistributionModel m = *this;
  m.chi_star_ = chi_star;
  return m;
}

double DistributionModel::unit_pdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  const double ix = 1.0 / x;
  double poly = 0.0;
  for (const auto& [m, c] : terms_) poly += c * std::pow(ix, m);
  return std::exp(-a_ * ix) * std::pow(ix, 1.5) * poly;
}

double DistributionModel::pdf(double chi) const { return unit_pdf(chi / chi_star_) / chi_star_; }

double DistributionModel::log_pdf(double chi) const {
  if (!(chi > 0.0)) throw InvalidArgument("log_pdf needs chi > 0");
  const double ix = chi_star_ / chi;
  double poly = 0.0;
  for (const auto& [m, c] : terms_) poly += c * std::pow(ix, m);
  if (!(poly > 0.0)) return -std::numeric_limits<double>::infinity();
  return -a_ * ix + 1.5 * std::log(ix) + std::log(poly) - std::log(chi_star_);
}

double DistributionModel::s_pdf(double s) const {
  if (s < 0.0) return 0.0;
  double poly = 0.0;
  for (const auto& [m, c] : terms_) poly += c * std::pow(0.5 * s, 2.0 * m);
  return std::exp(-0.25 * a_ * s * s) * poly;
}

double DistributionModel::s_cdf(double s) const {
  if (s <= 0.0) return 0.0;
  const double z = 0.25 * a_ * s * s;
  double acc = 0.0;
  for (const auto& [m, c] : terms_) acc += c * std::pow(a_, -m - 0.5) * boost::math::tgamma_lower(m + 0.5, z);
  return acc;
}

double DistributionModel::cdf(double chi) const {
  if (chi <= 0.0) return 0.0;
  if (!std::isfinite(chi)) return normalization();
  const double z = a_ * chi_star_ / chi;
  double acc = 0.0;
  for (const auto& [m, c] : terms_) acc += c * std::pow(a_, -m - 0.5) * boost::math::tgamma(m + 0.5, z);
  return acc;
}

double DistributionModel::survival(double chi) const {
  if (chi <= 0.0) return normalization();
  return s_cdf(2.0 * std::sqrt(chi_star_ / chi));
}

double DistributionModel::normalization() const {
  double acc = 0.0;
  for (const auto& [m, c] : terms_) acc += c * std::pow(a_, -m - 0.5) * boost::math::tgamma(m + 0.5);
  return acc;
}

double DistributionModel::upper_tail(double chi) const { return std::sqrt(chi_star_ / (chi * chi * chi)); }

std::pair<double, double> DistributionModel::tail_asymptotes(double chi) const {
  return {upper_tail(chi), a_};
}

namespace {

double s_upper(double a) { return std::sqrt(4.0 * 45.0 / a); }

}  // namespace

double DistributionModel::median() const {
  const double half = 0.5 * normalization();
  const double s = find_root([&](double t) { return s_cdf(t) - half; }, 0.0, s_upper(a_));
  return 4.0 * chi_star_ / (s * s);
}

double DistributionModel::chi_typ() const {
  // E log chi = log chi* + E log(4/s^2)
  auto r = integrate([&](double s) { return s_pdf(s) * std::log(4.0 / (s * s)); },
                     {0.0, 1e-6, 0.1, 0.5, 1.0, 2.0, s_upper(a_)}, {1e-13, 0.0, 4000});
  return chi_star_ * std::exp(r.value / normalization());
}

double DistributionModel::inverse_moment() const {
  auto r = integrate([&](double s) { return s_pdf(s) * 0.25 * s * s; }, {0.0, 0.5, 1.0, 2.0, s_upper(a_)},
                     {1e-13, 0.0, 4000});
  return r.value / chi_star_;
}

std::vector<double> DistributionModel::sample(RngStream& rng, Index n) const {
  if (n < 0) throw InvalidArgument("sample count must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (family_ == Family::Levy) {
    for (auto& x : out) {
      const double z = rng.normal();
      x = 2.0 * M_PI * chi_star_ / (z * z);
    }
    return out;
  }
  // Tabulated inverse of the s-CDF, polished with Newton steps.
  const double smax = s_upper(a_);
  const double norm = normalization();
  const int nodes = 4096;
  std::vector<double> g, s;
  g.reserve(nodes + 1);
  s.reserve(nodes + 1);
  for (int i = 0; i <= nodes; ++i) {
    const double t = smax * i / nodes;
    const double G = s_cdf(t) / norm;
    if (!g.empty() && !(G > g.back())) continue;
    g.push_back(G);
    s.push_back(t);
  }
  MonotoneSpline inv(g, s);
  for (auto& x : out) {
    const double u = rng.uniform_open();
    double t = inv(std::min(u, g.back()));
    for (int it = 0; it < 3; ++it) {
      const double p = s_pdf(t) / norm;
      if (!(p > 0.0)) break;
      t = std::clamp(t - (s_cdf(t) / norm - u) / p, 0.0, smax);
    }
    if (!(t > 0.0)) t = std::numeric_limits<double>::min();
    x = 4.0 * chi_star_ / (t * t);
  }
  return out;
}

Index default_tail_count(Index N) {
  const auto m = static_cast<Index>(std::floor(std::pow(static_cast<double>(N), 2.0 / 3.0) / 10.0 + 1e-9));
  return std::max<Index>(m, 1);
}

double estimate_log_chi_star(std::vector<double> samples, Index M) {
  const auto N = static_cast<Index>(samples.size());
  if (N == 0) throw InvalidArgument("no samples");
  if (M <= 0) M = default_tail_count(N);
  if (M > N) throw InvalidArgument("tail count exceeds sample count");
  std::nth_element(samples.begin(), samples.begin() + (M - 1), samples.end(), std::greater<>());
  double acc = 0.0;
  for (Index i = 0; i < M; ++i) {
    if (!(samples[i] > 0.0)) throw InvalidArgument("samples must be positive");
    acc += std::log(samples[i]);
  }
  return acc / M + 2.0 * std::log(static_cast<double>(M) / (2.0 * M_E * N));
}

ChiStarProfile ChiStarProfile::rm_semicircle(int beta, double d) {
  if (!(d > 0.0)) throw InvalidArgument("dimension must be positive");
  ChiStarProfile p;
  p.kind_ = Kind::RM_semicircle;
  p.c_beta_ = partherm::c_beta(beta);
  p.d_ = d;
  p.chi0_ = p.c_beta_ * d / (M_PI * M_PI);
  return p;
}

ChiStarProfile ChiStarProfile::eth_gaussian(double chi_star0, double s_E) {
  if (!(chi_star0 > 0.0) || !(s_E > 0.0)) throw InvalidArgument("chi*_0 and s_E must be positive");
  ChiStarProfile p;
  p.kind_ = Kind::ETH_gaussian;
  p.chi0_ = chi_star0;
  p.s_E_ = s_E;
  return p;
}

ChiStarProfile ChiStarProfile::eth_from_measurement(int beta, double v_tilde, double rho, double s_E) {
  ChiStarProfile p = eth_gaussian(partherm::c_beta(beta) * v_tilde * rho, s_E);
  p.c_beta_ = partherm::c_beta(beta);
  return p;
}

ChiStarProfile ChiStarProfile::constant(double chi_star) {
  if (!(chi_star > 0.0)) throw InvalidArgument("chi* must be positive");
  ChiStarProfile p;
  p.kind_ = Kind::constant;
  p.chi0_ = chi_star;
  return p;
}

double ChiStarProfile::operator()(double E, double omega) const {
  switch (kind_) {
    case Kind::RM_semicircle: {
      const double e = E + omega;
      if (std::abs(e) > 2.0) throw InvalidArgument("energy outside the semicircle band");
      const double rho = d_ / (2.0 * M_PI) * std::sqrt(std::max(0.0, 4.0 - e * e));
      return c_beta_ * rho * rho / d_;
    }
    case Kind::ETH_gaussian:
      return chi0_ * std::exp(-E * E / (2.0 * s_E_ * s_E_));
    default:
      return chi0_;
  }
}

double ChiStarProfile::state_density(double E) const {
  switch (kind_) {
    case Kind::RM_semicircle:
      return std::abs(E) >= 2.0 ? 0.0 : std::sqrt(4.0 - E * E) / (2.0 * M_PI);
    case Kind::ETH_gaussian:
      return std::exp(-E * E / (2.0 * s_E_ * s_E_)) / std::sqrt(2.0 * M_PI * s_E_ * s_E_);
    default:
      throw InvalidArgument("a constant chi* profile carries no density of states");
  }
}

}  // namespace partherm
