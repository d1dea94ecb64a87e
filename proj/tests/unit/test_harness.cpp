#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "partherm/harness.hpp"

using namespace partherm;

namespace {

std::string csv_of(const ExperimentConfig& cfg, int workers) {
  std::ostringstream os;
  write_csv(os, config_hash(cfg), run_experiment(cfg, workers).rows);
  return os.str();
}

std::string field_of(const std::string& text, Experiment e) {
  try {
    parse_config_string(text, e);
  } catch (const ConfigError& err) {
    return err.field();
  }
  return "";
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config defaults and overrides") {
    auto c = parse_config_string("", Experiment::fs_rm);
    CHECK(c.bath.kind == BathKind::gre);
    CHECK(c.bath.beta == 2);
    CHECK(c.family == Family::GUE);
    CHECK(c.h_S(1024) == 0.1);

    c = parse_config_string("[bath]\nkind = poisson\nbeta = 1\nd = 64, 128\n[experiment]\nseed = 9\n", Experiment::fs_rm);
    CHECK(c.family == Family::Levy);
    CHECK(c.bath.sizes == std::vector<int>{64, 128});
    CHECK(c.master_seed == 9);

    c = parse_config_string("[bath]\nL = 8\n[coupling]\ng = 0.1, 1\n", Experiment::delta_s);
    CHECK(c.family == Family::GOE);
    CHECK(c.h_S(8) == doctest::Approx(IsingBathSpec{}.probe_field()));
    CHECK(c.h_probe(8) == doctest::Approx(0.5 * c.h_S(8)));
    CHECK(c.coupling.g.size() == 2);
    CHECK(c.coupling.J.empty());
  }

  TEST_CASE("config errors name the field") {
    CHECK(field_of("[bath]\nd = 1\n", Experiment::fs_rm) == "bath.d");
    CHECK(field_of("[bath]\nbeta = 3\n", Experiment::fs_rm) == "bath.beta");
    CHECK(field_of("[bath]\nL = 8\n", Experiment::fs_rm) == "bath.L");
    CHECK(field_of("[bath]\ncolour = red\n", Experiment::fs_eth) == "bath.colour");
    CHECK(field_of("[colours]\na = 1\n", Experiment::fs_eth) == "colours");
    CHECK(field_of("[experiment]\nrealizations = 0\n", Experiment::fs_eth) == "experiment.realizations");
    CHECK(field_of("[experiment]\nwindow = abc\n", Experiment::fs_eth) == "experiment.window");
    CHECK(field_of("[experiment]\nname = czz_t\n", Experiment::fs_eth) == "experiment.name");
    CHECK(field_of("[bath]\nL = 20\n", Experiment::fs_eth) == "bath.L");
    CHECK(field_of("[coupling]\nJ = 0.1\ng = 0.2\n", Experiment::czz_inf) == "coupling.J");
    CHECK(field_of("[coupling]\nJ = -1\n", Experiment::czz_inf) == "coupling.J");
    CHECK(field_of("[coupling]\nh_probe = 1.2\nh_S = 1.2\n", Experiment::delta_s) == "coupling.h_probe");
    CHECK(field_of("[coupling]\nprobe_site_offset = 0\n", Experiment::f_od) == "coupling.probe_site_offset");
    CHECK(field_of("[bath]\nkind = gre\n", Experiment::f_od) == "bath.kind");
    CHECK(field_of("[times]\nt0 = 5\nt1 = 1\n", Experiment::czz_t) == "times.t0");
    CHECK(field_of("[sweep]\nlog_J_min = 3\n", Experiment::s_vs_chi) == "sweep.log_J_min");
    CHECK(field_of("[theory]\nfamily = cauchy\n", Experiment::estimator_bench) == "theory.family");
    CHECK(field_of("[experiment]\nparity = both\n", Experiment::f_od) == "experiment.parity");
    CHECK_THROWS_AS(load_config("/nonexistent/partherm.ini", Experiment::fs_rm), ConfigError);
    CHECK_THROWS_AS(parse_experiment("fs_xx"), InvalidArgument);
  }

  TEST_CASE("config hash") {
    auto a = parse_config_string("[experiment]\nseed = 1\n", Experiment::fs_eth);
    auto b = parse_config_string("[experiment]\nseed=1\n\n; comment\n", Experiment::fs_eth);
    auto c = parse_config_string("[experiment]\nseed = 2\n", Experiment::fs_eth);
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(to_json(a)["experiment.seed"] == "1");
  }

  TEST_CASE("runs are reproducible and independent of the worker count") {
    auto cfg = parse_config_string("[experiment]\nrealizations = 3\n[bath]\nd = 64\nbeta = 1\n", Experiment::fs_rm);
    const std::string one = csv_of(cfg, 1);
    CHECK(one == csv_of(cfg, 1));
    CHECK(one == csv_of(cfg, 3));
    cfg.master_seed = 2;
    CHECK(one != csv_of(cfg, 1));
  }

  TEST_CASE("csv schema") {
    auto cfg = parse_config_string("[experiment]\nrealizations = 2\n[bath]\nd = 32\n", Experiment::fs_rm);
    auto out = run_experiment(cfg);
    std::ostringstream os;
    write_csv(os, config_hash(cfg), out.rows);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line.rfind("config_hash,seed,realization,L_or_d,quantity,J,g,alpha_sigma,alpha_index,E0,chi,", 0) == 0);
    long n = 0;
    while (std::getline(is, line)) {
      CHECK(std::count(line.begin(), line.end(), ',') + 1 == static_cast<long>(csv_columns().size()));
      CHECK(line.rfind(config_hash(cfg), 0) == 0);
      ++n;
    }
    CHECK(n == static_cast<long>(out.rows.size()));
    // Two realizations, both signs, ceil(32/4) mid-spectrum states, plus one axis row each.
    CHECK(n == 2 * (2 * 8 + 1));

    auto m = make_manifest(cfg, out, 1);
    CHECK(m["schema_version"] == kCsvSchemaVersion);
    CHECK(m["config_hash"] == config_hash(cfg));
    CHECK(m["constants"].contains("goe_C1"));
    CHECK(m["theory"]["unit_pdf"]["x"].size() == static_cast<std::size_t>(cfg.theory_points));

    const auto dir = std::filesystem::temp_directory_path() / "partherm_harness_test";
    std::filesystem::remove_all(dir);
    write_outputs(dir.string(), cfg, out, 1);
    CHECK(std::filesystem::exists(dir / "data.csv"));
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("parallel_for covers every index and rethrows") {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, 4, [&](long i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(20, 3,
                                 [](long i) {
                                   if (i == 7) throw NumericalError("boom");
                                 }),
                    NumericalError);
  }

  TEST_CASE("spin-bath experiments on a small chain") {
    const std::string base = "[experiment]\nrealizations = 2\nwindow = 0.3\n[bath]\nL = 7\n";
    auto ds = run_experiment(parse_config_string(base + "[coupling]\ng = 0, 0.3\n", Experiment::delta_s));
    const auto& pts = ds.summary["points"];
    REQUIRE(pts.size() == 2);
    CHECK(pts[0]["delta_s_matrix"].get<double>() == 0.0);
    CHECK(pts[0]["delta_s_tail"].get<double>() == 0.0);
    CHECK(pts[1]["delta_s_matrix"].get<double>() > 0.0);

    auto ci = run_experiment(parse_config_string(base + "[coupling]\nJ = 0, 0.2\n", Experiment::czz_inf));
    CHECK(ci.summary["points"][0]["plateau_mean"].get<double>() == doctest::Approx(1.0));
    const double p1 = ci.summary["points"][1]["plateau_mean"].get<double>();
    CHECK(p1 > 0.0);
    CHECK(p1 < 1.0);

    auto est = run_experiment(
        parse_config_string("[experiment]\nrealizations = 4\n[estimator]\nsamples = 2000\n", Experiment::estimator_bench));
    CHECK(est.rows.size() == 4);
    CHECK(est.summary["tail_count"] == default_tail_count(2000));
  }
}
