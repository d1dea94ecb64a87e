#pragma once

#include <boost/property_tree/ptree_fwd.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "partherm/bath_probe.hpp"
#include "partherm/fidelity.hpp"
#include "partherm/models.hpp"

namespace partherm {

inline constexpr int kCsvSchemaVersion = 1;
std::string library_version();

enum class Experiment { fs_rm, fs_eth, s_vs_chi, ee_dist, ee_moments, czz_t, czz_inf, f_od, delta_s, estimator_bench };
Experiment parse_experiment(const std::string& s);
std::string to_string(Experiment e);
const std::vector<std::string>& experiment_names();

enum class BathKind { gre, poisson, ising };
BathKind parse_bath_kind(const std::string& s);
std::string to_string(BathKind k);

struct BathConfig {
  BathKind kind = BathKind::ising;
  int beta = 1;
  std::vector<int> sizes{10};  ///< d for random-matrix baths, L for the Ising chain
  double h = 0.9045;
  double u = 0.8090;
  double Gamma = 0.9950;

  IsingBathSpec ising(int L) const;
};

/// Coupling grid. Exactly one of J and g (= J sqrt(chi*_0)) is non-empty.
/// For the Ising chain chi*_0 is c_1 [v_tilde][rho], disorder-averaged over
/// the realizations of each size.
struct CouplingGrid {
  CouplingKind kind = CouplingKind::mid_chain_sigma_x;
  std::vector<double> J;
  std::vector<double> g;
  std::optional<double> h_S;       ///< default: 0.1 (RM) or sqrt(h^2 + u^2) (Ising)
  std::optional<double> h_probe;   ///< second probe field; default h_S / 2
  int probe_site_offset = -1;      ///< probe sigma^x sits at mid-chain site + offset
};

struct TimeGrid {
  double t0 = 0.01;
  double t1 = 1e3;
  int points = 80;
  bool in_units_of_gamma = false;  ///< times are multiples of 1/gamma
  bool linear = false;             ///< evenly spaced on [0, t1] instead of log-spaced on [t0, t1]

  std::vector<double> grid() const;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::fs_rm;
  BathConfig bath;
  CouplingGrid coupling;
  TimeGrid times;
  long realizations = 10;
  std::uint64_t master_seed = 1;
  double window = 0.1;
  double mid_fraction = 0.25;
  std::vector<double> centres{0.0};  ///< window centres for matrix-element experiments
  Parity parity = Parity::mixed;
  Family family = Family::GOE;       ///< theory family; set from the bath unless given
  double log_J_min = -10.0;          ///< s_vs_chi sweep, natural log
  double log_J_max = 2.0;
  long samples = 100000;             ///< estimator_bench dataset size
  int theory_points = 41;

  double h_S(int size) const;
  double h_probe(int size) const;
  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Build from a parsed INI tree. Unknown keys are errors.
ExperimentConfig parse_config(const boost::property_tree::ptree& tree, Experiment experiment);
ExperimentConfig parse_config_string(const std::string& text, Experiment experiment);
ExperimentConfig load_config(const std::string& path, Experiment experiment);

/// Canonical key = value listing of the effective configuration.
std::string canonical_config(const ExperimentConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const ExperimentConfig& cfg);  ///< 16 hex digits
nlohmann::json to_json(const ExperimentConfig& cfg);

/// One CSV row. Unset optionals are written as empty fields.
struct Row {
  std::uint64_t seed = 0;
  long realization = 0;
  int L_or_d = 0;
  std::string quantity;
  std::optional<double> J, g;
  std::optional<int> alpha_sigma;
  std::optional<long> alpha_index;
  std::optional<double> E0, chi, chi_star, S, S_pert, czz_diag, t, czz, R, value, theory;
};

const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& os, const std::string& config_hash, const std::vector<Row>& rows);

struct RunOutput {
  std::vector<Row> rows;
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json theory = nlohmann::json::object();
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

using ProgressFn = std::function<void(long done, long total)>;

/// Run every realization of the experiment. Realization r uses
/// RngStream::for_realization(master_seed, r) and rows are merged in
/// realization order, so the output does not depend on `workers`.
RunOutput run_experiment(const ExperimentConfig& cfg, int workers = 1, const ProgressFn& progress = {});

nlohmann::json make_manifest(const ExperimentConfig& cfg, const RunOutput& out, int workers);
/// Writes data.csv and manifest.json into `dir`, creating it if needed.
void write_outputs(const std::string& dir, const ExperimentConfig& cfg, const RunOutput& out, int workers);

/// Calls body(i) for i in [0, n) on `workers` threads. The first exception
/// thrown by any call is rethrown after all workers stop.
void parallel_for(long n, int workers, const std::function<void(long)>& body);

}  // namespace partherm
