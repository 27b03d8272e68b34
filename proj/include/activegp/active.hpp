#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "activegp/eval.hpp"
#include "activegp/gp.hpp"
#include "activegp/oracle.hpp"

namespace activegp {

enum class StrategyKind { VWAL, DOWAL, Random, MaximinDistance, ExpectedImprovement, StaticDOE };

[[nodiscard]] std::string to_string(StrategyKind s);
/// Accepts the names produced by to_string ("vwal", "dowal", "random", "maximin", "ei", "static").
[[nodiscard]] StrategyKind parse_strategy(const std::string& name);
[[nodiscard]] std::vector<StrategyKind> all_strategies();

// Selectors return a row index into `pool`. Ties go to the lowest index. An empty pool
// throws EmptyPool.

/// sum_j W_j Var_j(f) per pool row.
[[nodiscard]] Eigen::VectorXd vwal_scores(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W);
[[nodiscard]] int select_vwal(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W);

/// sum_j W_j det(I_j^{-1}) per pool row, the design augmented by that row. A row whose
/// information cannot be factored scores +inf; if every row does, SingularInformation.
[[nodiscard]] Eigen::VectorXd dowal_scores(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W);
[[nodiscard]] int select_dowal(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W);

[[nodiscard]] int select_random(Eigen::Index pool_size, std::mt19937_64& rng);

/// Pool row farthest (unit-scaled Euclidean) from its nearest training point.
[[nodiscard]] int select_maximin_distance(const DesignMatrix& training, const DesignMatrix& pool,
                                          const Bounds& bounds);

/// Closed-form EI for minimization: (y_min - mu) Phi(z) + s phi(z), z = (y_min - mu) / s.
/// s <= 0 gives max(y_min - mu, 0).
[[nodiscard]] double expected_improvement(double mu, double s, double y_min);

/// EI of the weighted scalarization sum_j W_j Y_j: mean sum_j W_j Yhat_j, variance
/// sum_j W_j^2 Var_j, incumbent the smallest weighted sample mean in the training set.
[[nodiscard]] Eigen::VectorXd ei_scores(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W);
[[nodiscard]] int select_ei(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W);

enum class StopReason { None, Threshold, Budget, PoolExhausted, Error };

[[nodiscard]] std::string to_string(StopReason r);
[[nodiscard]] StopReason parse_stop_reason(const std::string& name);

struct CurveRow {
  int iteration = 0;
  int n_samples = 0;
  StrategyKind strategy = StrategyKind::VWAL;
  int selected_point_id = -1;  // index into the candidate pool; -1 for the initial design and StaticDOE
  double mean_mad = 0.0;
  double max_mad = 0.0;
  double cv_mse = 0.0;  // NaN when not computed
  double fit_loglik = 0.0;
  double wall_ms = 0.0;
  StopReason stop_reason = StopReason::None;  // set on the final row only
};

struct LearningCurve {
  StrategyKind strategy = StrategyKind::VWAL;
  std::vector<CurveRow> rows;
  std::optional<std::string> error;  // set when a fit failed and the curve is partial
};

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::None;
  int streak = 0;  // trailing rows with mean_mad below the threshold
};

/// Stop after `patience` consecutive rows below `threshold`, or once `iteration` reaches
/// `n_iter`. A non-finite threshold disables the threshold test. The threshold test wins
/// when both fire on the same row.
[[nodiscard]] StopDecision check_stop(const LearningCurve& curve, double threshold, int patience, int iteration,
                                      int n_iter);

struct LoopSeeds {
  std::uint64_t observe = 0;   // measurement noise; shared across strategies
  std::uint64_t fit = 0;       // restart designs
  std::uint64_t strategy = 0;  // Random selection and StaticDOE designs
};

struct LoopConfig {
  ModelSpec spec;
  FitOptions fit;
  CvOptions cv;
  bool compute_cv = true;
  int n_iter = 30;
  double threshold = 0.007;
  int patience = 3;
  int lhd_sweeps = 2000;  // StaticDOE designs
  bool record_wall_time = false;
  LoopSeeds seeds;
};

struct LoopPools {
  DesignMatrix initial;     // N_ini x q
  DesignMatrix candidates;  // N_can x q, consumed without replacement
  EvalPool eval;
};

struct LoopResult {
  LearningCurve curve;
  Dataset data;
  Eigen::MatrixXd truth;                     // k x p noise-free responses at data.design
  std::vector<int> consumed;                 // candidate ids in selection order
  std::optional<FittedModel> final_model;    // absent when the first fit failed
  double total_ms = 0.0;
};

/// Noisy observation of candidate `id` (or initial point `id` when `initial`); the stream
/// depends only on the seed and the point, so every strategy sees the same draw.
[[nodiscard]] Eigen::VectorXd observe_point(const OracleSpec& oracle, const ForcePoint& f, std::uint64_t seed,
                                            const std::string& tag);

/// Runs one strategy from the initial design until the stopping rule fires.
[[nodiscard]] LoopResult run_loop(const LoopConfig& cfg, StrategyKind strategy, const OracleSpec& oracle,
                                  const LoopPools& pools);

}  // namespace activegp
