#pragma once

#include <json.hpp>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraflow/experiment.hpp"
#include "fraflow/flow.hpp"

namespace fraflow::cli {

/// Malformed or unknown configuration; maps to exit code 64.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KernelSpec {
  std::string type = "riemann_liouville";  // riemann_liouville | constant | sampled
  double alpha = 0.5;
  double value = 1.0;
  std::string file;  // sampled: CSV with columns t,k,ell
};

struct FunctionalSpec {
  std::string kind = "quadratic";  // quadratic | power | l1 | box | none
  std::vector<double> center;
  double q = 2.0;
  double scale = 1.0;
  double lower = -1.0, upper = 1.0;
};

inline FunctionalSpec none_functional() {
  FunctionalSpec f;
  f.kind = "none";
  return f;
}

struct AbstractSpec {
  std::vector<double> u0{1.0};
  FunctionalSpec phi1;
  FunctionalSpec phi2 = none_functional();
  std::vector<double> forcing;  // constant in time; empty means zero
};

struct SweepSpec {
  std::vector<double> p, q, alpha, amplitude;
  std::vector<int> points;
  std::vector<std::size_t> steps;
  struct Bisect {
    bool enabled = false;
    double a_lo = 1.0, a_hi = 30.0, ratio = 1.1;
    int budget = 40;
    std::vector<double> alpha;
  } bisect;
};

struct CertifySpec {
  std::string dump;
  bool gronwall = false;
  int per_lemma = 100;
};

struct KernelsSpec {
  std::vector<double> alpha{0.3, 0.5, 0.7, 0.9};
  std::vector<std::size_t> steps{256};  // coarse level; each check also runs at twice the steps
  double tolerance = 1e-2;
  std::vector<int> regularized{4, 16, 64};
};

struct RunConfig {
  std::string mode;
  std::string problem_type = "abstract";  // abstract | plaplace
  AbstractSpec abstract_problem;
  PdeExperiment pde;
  KernelSpec kernel;
  double horizon = 1.0;
  std::size_t steps = 512;
  SolverConfig solver;
  std::string out = "out";
  std::uint64_t seed = 0;
  SweepSpec sweep;
  CertifySpec certify;
  KernelsSpec kernels;
  nlohmann::json source;  // the parsed document
};

/// Validates against the schema in docs/config.schema.json; unknown keys throw.
RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

/// FRAFLOW_PRESET_DIR, else the presets directory of the source tree.
std::string preset_directory();
std::string preset_path(const std::string& name);

SoninePair build_pair(const KernelSpec& k);
FlowProblem build_abstract_problem(const RunConfig& cfg);

}  // namespace fraflow::cli
