#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "partherm/harness.hpp"

namespace partherm {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "config_hash", "seed", "realization", "L_or_d", "quantity", "J",   "g", "alpha_sigma", "alpha_index", "E0",
      "chi",         "chi_star", "S",      "S_pert", "czz_diag", "t", "czz", "R",          "value",       "theory"};
  return cols;
}

namespace {

void put(std::ostream& os, const std::optional<double>& x) {
  os << ',';
  if (!x) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *x);
  os << buf;
}

template <class T>
void put_int(std::ostream& os, const std::optional<T>& x) {
  os << ',';
  if (x) os << *x;
}

}  // namespace

void write_csv(std::ostream& os, const std::string& hash, const std::vector<Row>& rows) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const Row& r : rows) {
    os << hash << ',' << r.seed << ',' << r.realization << ',' << r.L_or_d << ',' << r.quantity;
    put(os, r.J);
    put(os, r.g);
    put_int(os, r.alpha_sigma);
    put_int(os, r.alpha_index);
    put(os, r.E0);
    put(os, r.chi);
    put(os, r.chi_star);
    put(os, r.S);
    put(os, r.S_pert);
    put(os, r.czz_diag);
    put(os, r.t);
    put(os, r.czz);
    put(os, r.R);
    put(os, r.value);
    put(os, r.theory);
    os << '\n';
  }
}

nlohmann::json make_manifest(const ExperimentConfig& cfg, const RunOutput& out, int workers) {
  const FitConstants& k = default_constants();
  nlohmann::json m;
  m["schema_version"] = kCsvSchemaVersion;
  m["experiment"] = to_string(cfg.experiment);
  m["partherm_version"] = library_version();
  m["config_hash"] = config_hash(cfg);
  m["config"] = to_json(cfg);
  m["master_seed"] = cfg.master_seed;
  m["realizations"] = cfg.realizations;
  m["workers"] = workers;
  m["wall_seconds"] = out.wall_seconds;
  m["rows"] = out.rows.size();
  m["columns"] = csv_columns();
  m["constants"] = {{"version", k.version},
                    {"source", k.source},
                    {"goe_C1", k.goe_C1},
                    {"goe_C2", k.goe_C2},
                    {"gse_C1", k.gse_C1},
                    {"gse_C2", k.gse_C2},
                    {"goe_C1_reference", 5.29}};
  m["family"] = to_string(cfg.family);
  m["summary"] = out.summary;
  m["theory"] = out.theory;
  m["warnings"] = out.warnings;
  return m;
}

void write_outputs(const std::string& dir, const ExperimentConfig& cfg, const RunOutput& out, int workers) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream csv(fs::path(dir) / "data.csv");
    if (!csv) throw std::runtime_error("cannot write " + (fs::path(dir) / "data.csv").string());
    write_csv(csv, config_hash(cfg), out.rows);
  }
  std::ofstream js(fs::path(dir) / "manifest.json");
  if (!js) throw std::runtime_error("cannot write " + (fs::path(dir) / "manifest.json").string());
  js << make_manifest(cfg, out, workers).dump(2) << '\n';
}

void parallel_for(long n, int workers, const std::function<void(long)>& body) {
  if (workers <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (long i = next++; i < n && !failed; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const int k = static_cast<int>(std::min<long>(workers, n));
  for (int w = 0; w < k; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace partherm
