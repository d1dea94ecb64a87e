#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "partherm/dynamics.hpp"
#include "partherm/harness.hpp"

namespace partherm {

namespace pt = boost::property_tree;

#ifndef PARTHERM_VERSION
#define PARTHERM_VERSION "0.0.0"
#endif

std::string library_version() { return PARTHERM_VERSION; }

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
  static const std::vector<std::pair<Experiment, std::string>> t{
      {Experiment::fs_rm, "fs_rm"},           {Experiment::fs_eth, "fs_eth"},   {Experiment::s_vs_chi, "s_vs_chi"},
      {Experiment::ee_dist, "ee_dist"},       {Experiment::ee_moments, "ee_moments"},
      {Experiment::czz_t, "czz_t"},           {Experiment::czz_inf, "czz_inf"}, {Experiment::f_od, "f_od"},
      {Experiment::delta_s, "delta_s"},       {Experiment::estimator_bench, "estimator_bench"}};
  return t;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

template <class T>
T parse_scalar(const std::string& field, const std::string& text) {
  try {
    std::string t = text;
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
    return boost::lexical_cast<T>(t);
  } catch (const boost::bad_lexical_cast&) {
    throw ConfigError(field, "cannot parse '" + text + "'");
  }
}

template <class T>
std::vector<T> parse_list(const std::string& field, const std::string& text) {
  std::vector<T> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_scalar<T>(field, item));
  }
  if (out.empty()) throw ConfigError(field, "empty list");
  return out;
}

template <class F>
auto wrap(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(field, e.what());
  }
}

bool needs_coupling(Experiment e) {
  return e != Experiment::fs_rm && e != Experiment::fs_eth && e != Experiment::s_vs_chi &&
         e != Experiment::estimator_bench;
}

bool needs_full_model(Experiment e) {
  return e != Experiment::fs_rm && e != Experiment::fs_eth && e != Experiment::estimator_bench;
}

ExperimentConfig defaults_for(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::fs_rm:
      c.bath.kind = BathKind::gre;
      c.bath.beta = 2;
      c.bath.sizes = {1024};
      c.coupling.kind = CouplingKind::diag_alternating;
      c.realizations = 30;
      break;
    case Experiment::fs_eth:
      c.bath.sizes = {8, 10};
      c.realizations = 100;
      break;
    case Experiment::s_vs_chi:
      c.bath.sizes = {8};
      c.realizations = 200;
      break;
    case Experiment::ee_dist:
    case Experiment::ee_moments:
      c.coupling.g = {0.01, 0.03, 0.1, 0.3, 1.0};
      c.realizations = 20;
      break;
    case Experiment::czz_t:
      c.coupling.J = {0.1};
      c.times = {0.01, 3.0, 60, true};
      c.realizations = 10;
      break;
    case Experiment::czz_inf:
      c.coupling.g = {0.01, 0.03, 0.1, 0.3, 1.0};
      c.realizations = 50;
      break;
    case Experiment::f_od:
      c.coupling.g = {0.001, 0.1, 1.0, 30.0};
      c.realizations = 20;
      break;
    case Experiment::delta_s:
      c.coupling.g = {0.0, 0.01, 0.03, 0.1, 0.3, 1.0};
      c.realizations = 50;
      break;
    case Experiment::estimator_bench:
      c.family = Family::Levy;
      c.realizations = 100;
      break;
  }
  return c;
}

using Section = std::map<std::string, std::string>;

Section take_section(const pt::ptree& tree, const std::string& name, const std::set<std::string>& allowed) {
  Section out;
  auto it = tree.find(name);
  if (it == tree.not_found()) return out;
  for (const auto& [key, node] : it->second) {
    if (!allowed.count(key)) throw ConfigError(name + "." + key, "unknown key");
    out[key] = node.get_value<std::string>();
  }
  return out;
}

}  // namespace

Experiment parse_experiment(const std::string& s) {
  for (const auto& [e, name] : experiment_table()) {
    if (name == s) return e;
  }
  throw InvalidArgument("unknown experiment '" + s + "'");
}

std::string to_string(Experiment e) {
  for (const auto& [x, name] : experiment_table()) {
    if (x == e) return name;
  }
  return "unknown";
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& entry : experiment_table()) v.push_back(entry.second);
    return v;
  }();
  return names;
}

BathKind parse_bath_kind(const std::string& s) {
  if (s == "gre") return BathKind::gre;
  if (s == "poisson") return BathKind::poisson;
  if (s == "ising") return BathKind::ising;
  throw InvalidArgument("unknown bath kind '" + s + "' (gre, poisson or ising)");
}

std::string to_string(BathKind k) {
  switch (k) {
    case BathKind::gre: return "gre";
    case BathKind::poisson: return "poisson";
    default: return "ising";
  }
}

IsingBathSpec BathConfig::ising(int L) const {
  IsingBathSpec s;
  s.L = L;
  s.h = h;
  s.u = u;
  s.Gamma = Gamma;
  return s;
}

std::vector<double> TimeGrid::grid() const {
  if (!linear) return log_time_grid(t0, t1, points);
  std::vector<double> t(points + 1);
  for (int i = 0; i <= points; ++i) t[i] = t1 * i / points;
  return t;
}

double ExperimentConfig::h_S(int size) const {
  if (coupling.h_S) return *coupling.h_S;
  return bath.kind == BathKind::ising ? bath.ising(size).probe_field() : 0.1;
}

double ExperimentConfig::h_probe(int size) const {
  return coupling.h_probe ? *coupling.h_probe : 0.5 * h_S(size);
}

void ExperimentConfig::validate() const {
  const bool rm = bath.kind != BathKind::ising;
  if (realizations < 1) throw ConfigError("experiment.realizations", "must be at least 1");
  if (!(window > 0.0)) throw ConfigError("experiment.window", "must be positive");
  if (!(mid_fraction > 0.0 && mid_fraction <= 1.0)) throw ConfigError("experiment.mid_fraction", "must lie in (0, 1]");
  if (centres.empty()) throw ConfigError("experiment.centres", "empty list");
  if (theory_points < 2) throw ConfigError("theory.points", "must be at least 2");
  if (bath.sizes.empty()) throw ConfigError(rm ? "bath.d" : "bath.L", "empty list");
  if (experiment == Experiment::estimator_bench) {
    if (samples < 10) throw ConfigError("estimator.samples", "must be at least 10");
    return;
  }
  if (rm) {
    wrap("bath.beta", [&] { return DysonClass(bath.beta); });
    for (int d : bath.sizes) {
      if (d < 2) throw ConfigError("bath.d", "must be at least 2");
      if (d > 8192) throw ConfigError("bath.d", "must be at most 8192");
    }
    if (coupling.kind != CouplingKind::diag_alternating)
      throw ConfigError("coupling.kind", "random-matrix baths use diag_alternating");
    if (bath.beta == 4 && needs_full_model(experiment))
      throw ConfigError("bath.beta", "the spin-bath experiments support beta 1 or 2 only");
  } else {
    for (int L : bath.sizes) {
      if (L < 2 || L > 13) throw ConfigError("bath.L", "must lie in [2, 13]");
      wrap("bath", [&] {
        bath.ising(L).validate();
        return 0;
      });
    }
    if (coupling.kind != CouplingKind::mid_chain_sigma_x)
      throw ConfigError("coupling.kind", "the Ising bath uses mid_chain_sigma_x");
  }
  if (experiment == Experiment::fs_rm && !rm) throw ConfigError("bath.kind", "fs_rm needs a gre or poisson bath");
  if ((experiment == Experiment::fs_eth || experiment == Experiment::f_od || experiment == Experiment::delta_s) && rm)
    throw ConfigError("bath.kind", to_string(experiment) + " needs the ising bath");
  for (int size : bath.sizes) {
    if (!(h_S(size) > 0.0)) throw ConfigError("coupling.h_S", "must be positive");
  }
  if (needs_coupling(experiment)) {
    if (coupling.J.empty() == coupling.g.empty()) throw ConfigError("coupling.J", "give exactly one of J and g");
    for (double x : coupling.J) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("coupling.J", "must be finite and non-negative");
    }
    for (double x : coupling.g) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("coupling.g", "must be finite and non-negative");
    }
  }
  if (experiment == Experiment::f_od || experiment == Experiment::delta_s) {
    for (int L : bath.sizes) {
      const int site = mid_chain_site(L) + coupling.probe_site_offset;
      if (site < 1 || site > L || site == mid_chain_site(L))
        throw ConfigError("coupling.probe_site_offset", "probe site must be a different site of the chain");
      const double hp = h_probe(L);
      if (!(hp > 0.0)) throw ConfigError("coupling.h_probe", "must be positive");
      if (std::abs(hp - h_S(L)) < 1e-12)
        throw ConfigError("coupling.h_probe", "must differ from h_S (exactly degenerate decoupled pairs)");
    }
  }
  if (experiment == Experiment::s_vs_chi && !(log_J_min < log_J_max))
    throw ConfigError("sweep.log_J_min", "must be below sweep.log_J_max");
  if (experiment == Experiment::czz_t) {
    if (!(times.t0 > 0.0 && times.t1 > times.t0)) throw ConfigError("times.t0", "need 0 < t0 < t1");
    if (times.points < 2) throw ConfigError("times.points", "must be at least 2");
  }
}

ExperimentConfig parse_config(const pt::ptree& tree, Experiment experiment) {
  for (const auto& [name, node] : tree) {
    static const std::set<std::string> sections{"experiment", "bath",      "coupling", "times",
                                                "sweep",      "estimator", "theory"};
    if (!sections.count(name)) {
      throw ConfigError(name, node.empty() ? "top-level keys must live in a section" : "unknown section");
    }
  }
  ExperimentConfig c = defaults_for(experiment);

  auto ex = take_section(tree, "experiment",
                         {"name", "realizations", "seed", "window", "mid_fraction", "centres", "parity"});
  if (ex.count("name") && ex["name"] != to_string(experiment))
    throw ConfigError("experiment.name", "config is for '" + ex["name"] + "', not '" + to_string(experiment) + "'");
  if (ex.count("realizations")) c.realizations = parse_scalar<long>("experiment.realizations", ex["realizations"]);
  if (ex.count("seed")) c.master_seed = parse_scalar<std::uint64_t>("experiment.seed", ex["seed"]);
  if (ex.count("window")) c.window = parse_scalar<double>("experiment.window", ex["window"]);
  if (ex.count("mid_fraction")) c.mid_fraction = parse_scalar<double>("experiment.mid_fraction", ex["mid_fraction"]);
  if (ex.count("centres")) c.centres = parse_list<double>("experiment.centres", ex["centres"]);
  if (ex.count("parity")) c.parity = wrap("experiment.parity", [&] { return parse_parity(ex["parity"]); });

  auto bath = take_section(tree, "bath", {"kind", "beta", "d", "L", "h", "u", "Gamma"});
  if (bath.count("kind")) {
    const BathKind k = wrap("bath.kind", [&] { return parse_bath_kind(bath["kind"]); });
    if (k != c.bath.kind) {
      c.bath.kind = k;
      c.bath.sizes = k == BathKind::ising ? std::vector<int>{10} : std::vector<int>{1024};
      c.coupling.kind = k == BathKind::ising ? CouplingKind::mid_chain_sigma_x : CouplingKind::diag_alternating;
    }
  }
  const bool rm = c.bath.kind != BathKind::ising;
  if (bath.count(rm ? "L" : "d"))
    throw ConfigError(rm ? "bath.L" : "bath.d", "not used by the " + to_string(c.bath.kind) + " bath");
  for (const char* key : {"h", "u", "Gamma"}) {
    if (rm && bath.count(key)) throw ConfigError(std::string("bath.") + key, "only used by the ising bath");
  }
  if (!rm && bath.count("beta")) throw ConfigError("bath.beta", "the ising bath is real (beta 1)");
  if (bath.count("beta")) c.bath.beta = parse_scalar<int>("bath.beta", bath["beta"]);
  if (rm && bath.count("d")) c.bath.sizes = parse_list<int>("bath.d", bath["d"]);
  if (!rm && bath.count("L")) c.bath.sizes = parse_list<int>("bath.L", bath["L"]);
  if (bath.count("h")) c.bath.h = parse_scalar<double>("bath.h", bath["h"]);
  if (bath.count("u")) c.bath.u = parse_scalar<double>("bath.u", bath["u"]);
  if (bath.count("Gamma")) c.bath.Gamma = parse_scalar<double>("bath.Gamma", bath["Gamma"]);
  if (!rm) c.bath.beta = 1;
  if (rm) {
    c.family = c.bath.kind == BathKind::poisson ? Family::Levy
                                                : wrap("bath.beta", [&] { return gaussian_family(c.bath.beta); });
  } else if (experiment != Experiment::estimator_bench) {
    c.family = Family::GOE;
  }

  auto cp = take_section(tree, "coupling", {"kind", "J", "g", "h_S", "h_probe", "probe_site_offset"});
  if (cp.count("kind")) c.coupling.kind = wrap("coupling.kind", [&] { return parse_coupling_kind(cp["kind"]); });
  if (cp.count("J") || cp.count("g")) {
    c.coupling.J.clear();
    c.coupling.g.clear();
  }
  if (cp.count("J")) c.coupling.J = parse_list<double>("coupling.J", cp["J"]);
  if (cp.count("g")) c.coupling.g = parse_list<double>("coupling.g", cp["g"]);
  if (cp.count("h_S")) c.coupling.h_S = parse_scalar<double>("coupling.h_S", cp["h_S"]);
  if (cp.count("h_probe")) c.coupling.h_probe = parse_scalar<double>("coupling.h_probe", cp["h_probe"]);
  if (cp.count("probe_site_offset"))
    c.coupling.probe_site_offset = parse_scalar<int>("coupling.probe_site_offset", cp["probe_site_offset"]);

  auto tm = take_section(tree, "times", {"t0", "t1", "points", "units", "spacing"});
  if (tm.count("t0")) c.times.t0 = parse_scalar<double>("times.t0", tm["t0"]);
  if (tm.count("t1")) c.times.t1 = parse_scalar<double>("times.t1", tm["t1"]);
  if (tm.count("points")) c.times.points = parse_scalar<int>("times.points", tm["points"]);
  if (tm.count("units")) {
    if (tm["units"] == "gamma") {
      c.times.in_units_of_gamma = true;
    } else if (tm["units"] == "absolute") {
      c.times.in_units_of_gamma = false;
    } else {
      throw ConfigError("times.units", "expected gamma or absolute");
    }
  }

  if (tm.count("spacing")) {
    if (tm["spacing"] == "linear") {
      c.times.linear = true;
    } else if (tm["spacing"] == "log") {
      c.times.linear = false;
    } else {
      throw ConfigError("times.spacing", "expected linear or log");
    }
  }

  auto sw = take_section(tree, "sweep", {"log_J_min", "log_J_max"});
  if (sw.count("log_J_min")) c.log_J_min = parse_scalar<double>("sweep.log_J_min", sw["log_J_min"]);
  if (sw.count("log_J_max")) c.log_J_max = parse_scalar<double>("sweep.log_J_max", sw["log_J_max"]);

  auto es = take_section(tree, "estimator", {"samples"});
  if (es.count("samples")) c.samples = parse_scalar<long>("estimator.samples", es["samples"]);

  auto th = take_section(tree, "theory", {"family", "points"});
  if (th.count("family")) c.family = wrap("theory.family", [&] { return parse_family(th["family"]); });
  if (th.count("points")) c.theory_points = parse_scalar<int>("theory.points", th["points"]);

  c.validate();
  return c;
}

ExperimentConfig parse_config_string(const std::string& text, Experiment experiment) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  return parse_config(tree, experiment);
}

ExperimentConfig load_config(const std::string& path, Experiment experiment) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(path + ":" + std::to_string(e.line()), e.message());
  }
  return parse_config(tree, experiment);
}

std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "experiment.name=" << to_string(c.experiment) << "\n"
     << "experiment.realizations=" << c.realizations << "\n"
     << "experiment.seed=" << c.master_seed << "\n"
     << "experiment.window=" << fmt(c.window) << "\n"
     << "experiment.mid_fraction=" << fmt(c.mid_fraction) << "\n"
     << "experiment.centres=" << join(c.centres) << "\n"
     << "experiment.parity=" << to_string(c.parity) << "\n"
     << "bath.kind=" << to_string(c.bath.kind) << "\n"
     << "bath.beta=" << c.bath.beta << "\n"
     << "bath.sizes=" << join(c.bath.sizes) << "\n";
  if (c.bath.kind == BathKind::ising) {
    os << "bath.h=" << fmt(c.bath.h) << "\n"
       << "bath.u=" << fmt(c.bath.u) << "\n"
       << "bath.Gamma=" << fmt(c.bath.Gamma) << "\n";
  }
  os << "coupling.kind=" << to_string(c.coupling.kind) << "\n"
     << "coupling.J=" << join(c.coupling.J) << "\n"
     << "coupling.g=" << join(c.coupling.g) << "\n";
  std::vector<double> hs, hp;
  for (int s : c.bath.sizes) {
    hs.push_back(c.h_S(s));
    hp.push_back(c.h_probe(s));
  }
  os << "coupling.h_S=" << join(hs) << "\n"
     << "coupling.h_probe=" << join(hp) << "\n"
     << "coupling.probe_site_offset=" << c.coupling.probe_site_offset << "\n"
     << "times.t0=" << fmt(c.times.t0) << "\n"
     << "times.t1=" << fmt(c.times.t1) << "\n"
     << "times.points=" << c.times.points << "\n"
     << "times.units=" << (c.times.in_units_of_gamma ? "gamma" : "absolute") << "\n"
     << "times.spacing=" << (c.times.linear ? "linear" : "log") << "\n"
     << "sweep.log_J_min=" << fmt(c.log_J_min) << "\n"
     << "sweep.log_J_max=" << fmt(c.log_J_max) << "\n"
     << "estimator.samples=" << c.samples << "\n"
     << "theory.family=" << to_string(c.family) << "\n"
     << "theory.points=" << c.theory_points << "\n";
  return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
  return buf;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  std::istringstream is(canonical_config(cfg));
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    j[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return j;
}

}  // namespace partherm
