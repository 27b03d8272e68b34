#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "activegp/active.hpp"
#include "activegp/io.hpp"
#include "activegp/oracle.hpp"

namespace activegp {

/// Everything a comparison run depends on. Serialized verbatim into the manifest.
struct RunConfig {
  std::uint64_t seed = 1;
  int q = 10;
  int p = 6;
  double lo = -450.0;
  double hi = 450.0;
  ModelVariant variant = ModelVariant::StochasticKriging;
  bool isotropic = false;
  std::optional<double> model_input_sd;  // actuator std the surrogate assumes; defaults to the oracle's
  OracleConfig oracle;                   // q, p, bounds and seed are overwritten from the fields above
  std::optional<std::uint64_t> oracle_seed;  // defaults to a child of `seed`
  std::optional<std::string> oracle_path;    // load a saved oracle instead of building one
  int n_initial = 11;
  int n_pool = 200;
  int n_eval = 200;
  int n_iter = 30;
  double threshold = 0.007;
  int patience = 3;
  Eigen::VectorXd weights;  // empty means uniform
  std::vector<StrategyKind> strategies = all_strategies();
  int restarts = 8;
  OptimizerKind optimizer = OptimizerKind::QuasiNewton;
  bool cv_enabled = true;
  bool cv_refit = true;
  int cv_restarts = 2;
  bool cv_full_restarts = false;
  int lhd_sweeps = 2000;
  bool record_wall_time = false;
  std::string out = "run";
};

/// Missing keys keep their defaults; unknown keys are a ConfigError.
[[nodiscard]] RunConfig config_from_json(const Json& j);
[[nodiscard]] Json config_to_json(const RunConfig& c);
void validate_config(RunConfig& c);  // also normalizes the weights

struct ComparisonSeeds {
  std::uint64_t oracle = 0;
  std::uint64_t initial = 0;
  std::uint64_t pool = 0;
  std::uint64_t eval = 0;
  std::uint64_t observe = 0;
  std::uint64_t fit = 0;
};

[[nodiscard]] ComparisonSeeds comparison_seeds(const RunConfig& c);

struct Comparison {
  RunConfig config;
  ComparisonSeeds seeds;
  OracleSpec oracle;
  ModelSpec spec;
  LoopPools pools;
  std::vector<LoopResult> runs;  // one per configured strategy, same order
  Json manifest;
};

/// Builds oracle and pools, runs every strategy. With `write_files` the bundle goes to c.out.
[[nodiscard]] Comparison run_comparison(RunConfig c, bool write_files);

/// Joins curves on n_samples, one table per metric. `outer` leaves blanks where a curve
/// lacks a sample count instead of failing.
struct MetricTable {
  std::string metric;
  std::string csv;
};
[[nodiscard]] std::vector<MetricTable> compare_curves(const std::vector<LearningCurve>& curves,
                                                      const std::vector<std::string>& names, bool outer);

/// Entry point for the command-line tool. Returns the process exit code:
/// 0 success, 2 configuration error, 3 runtime failure.
int cli_main(int argc, char** argv);

}  // namespace activegp
