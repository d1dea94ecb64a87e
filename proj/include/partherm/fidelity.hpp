#pragma once

#include <string>
#include <utility>
#include <vector>

#include "partherm/types.hpp"

namespace partherm {

struct ChiSample {
  int sigma = 1;        ///< spin sector, +1 or -1
  Index a = 0;          ///< bath eigenstate index
  double chi = 0.0;
  double E = 0.0;       ///< bath energy E_a
};

/// (E|V|)^2 / E|V|^2 for Gaussian real, complex and quaternion elements.
double c_beta(int beta);

/// chi_(sigma,a) = sum_b |V_ab|^2 / (E_a - E_b + sigma h)^2 from precomputed
/// |V_ab|^2; the sum runs over every level b of `energies`.
double chi_alpha(const RVector& energies, const RMatrix& v_sq, Index a, double sigma_h);
ChiSample chi_alpha(const EigenSystem& bath, const HermitianMatrix& V, Index a, double sigma_h);

/// chi for every a in [first, last) in one pass. `stride` > 1 skips Kramers
/// partners (a = first, first + stride, ...).
std::vector<double> chi_values(const RVector& energies, const RMatrix& v_sq, double sigma_h, Index first,
                               Index last, Index stride = 1);

enum class Family { Levy, GUE, GOE, GSE };
std::string to_string(Family f);
Family parse_family(const std::string& s);
/// Family expected for a Gaussian bath of Dyson index beta.
Family gaussian_family(int beta);

/// Fitted constants of the GOE and GSE closed forms, with provenance.
struct FitConstants {
  int version = 0;
  double goe_C1 = 0.0;
  double goe_C2 = 0.0;
  double gse_C1 = 0.0;   ///< coefficient of chi*/chi
  double gse_C2 = 0.0;   ///< coefficient of (chi*/chi)^2
  std::string source;
};

/// C2 that normalises the GOE form for a given C1.
double goe_c2_from_c1(double c1);
/// C2' that normalises the GSE form for a given C1'.
double gse_c2_from_c1(double c1);

FitConstants compiled_constants();
FitConstants load_constants(const std::string& path);
void save_constants(const FitConstants& c, const std::string& path);
/// Constants from $PARTHERM_CONSTANTS, then the installed data file, then
/// the compiled-in values.
const FitConstants& default_constants();

/// Closed-form susceptibility densities. With x = chi/chi*, each family is
/// f(x) = exp(-a/x) sum_m c_m x^(-3/2-m), and pdf(chi) = f(chi/chi*)/chi*.
class DistributionModel {
 public:
  DistributionModel(Family family, double chi_star, const FitConstants& constants = default_constants());

  Family family() const { return family_; }
  double chi_star() const { return chi_star_; }
  DistributionModel with_scale(double chi_star) const;

  double pdf(double chi) const;
  double log_pdf(double chi) const;
  double cdf(double chi) const;
  double survival(double chi) const;
  /// Density at unit scale.
  double unit_pdf(double x) const;
  /// Density of s = 2 sqrt(chi*/chi).
  double s_pdf(double s) const;
  /// P(S <= s) for s = 2 sqrt(chi*/chi).
  double s_cdf(double s) const;

  double normalization() const;             ///< closed-form integral of the pdf
  double lower_tail_coefficient() const { return a_; }
  double upper_tail(double chi) const;      ///< sqrt(chi*/chi^3)
  std::pair<double, double> tail_asymptotes(double chi) const;
  double median() const;
  double chi_typ() const;                   ///< geometric mean by quadrature
  double inverse_moment() const;            ///< E[1/chi] by quadrature

  std::vector<double> sample(RngStream& rng, Index n) const;
  const std::vector<std::pair<double, double>>& terms() const { return terms_; }

 private:
  Family family_;
  double chi_star_;
  double a_ = 0.0;
  std::vector<std::pair<double, double>> terms_;  ///< (m, c_m)
};

/// Tail estimator of log chi* from the M largest samples.
double estimate_log_chi_star(std::vector<double> samples, Index M = 0);
Index default_tail_count(Index N);

/// chi*(E, omega) in one of three parameterisations.
class ChiStarProfile {
 public:
  enum class Kind { RM_semicircle, ETH_gaussian, constant };

  /// c_beta rho(E+omega)^2/d with a radius-2 semicircle of d states.
  static ChiStarProfile rm_semicircle(int beta, double d);
  /// chi*_0 exp(-E^2/(2 s_E^2)); chi*_0 is chi* at the band centre.
  static ChiStarProfile eth_gaussian(double chi_star0, double s_E);
  /// chi*_0 = c_beta v_tilde rho measured at (0, h_S).
  static ChiStarProfile eth_from_measurement(int beta, double v_tilde, double rho, double s_E);
  static ChiStarProfile constant(double chi_star);

  Kind kind() const { return kind_; }
  double operator()(double E, double omega) const;
  /// Normalised density of bath states rho(E)/d.
  double state_density(double E) const;
  double chi_star0() const { return chi0_; }
  double s_E() const { return s_E_; }
  double c_beta() const { return c_beta_; }
  double d() const { return d_; }

 private:
  Kind kind_ = Kind::constant;
  double c_beta_ = 1.0, d_ = 1.0, chi0_ = 1.0, s_E_ = 1.0;
};

}  // namespace partherm
