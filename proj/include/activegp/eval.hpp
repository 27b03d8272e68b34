#pragma once

#include <vector>

#include <Eigen/Dense>

#include "activegp/gp.hpp"
#include "activegp/oracle.hpp"

namespace activegp {

struct EvalPool {
  DesignMatrix points;    // N_eva x q
  Eigen::MatrixXd truth;  // N_eva x p, noise-free oracle responses
};

[[nodiscard]] EvalPool make_eval_pool(const OracleSpec& oracle, const DesignMatrix& points);

/// Predictions at every pool point (N_eva x p).
[[nodiscard]] Eigen::MatrixXd predict_all(const FittedModel& m, const DesignMatrix& points);

/// Mean absolute deviation per output over the pool.
[[nodiscard]] Eigen::VectorXd per_output_mad(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth);
[[nodiscard]] Eigen::VectorXd per_output_mad(const FittedModel& m, const EvalPool& ep);

[[nodiscard]] double mean_mad(const FittedModel& m, const EvalPool& ep);
[[nodiscard]] double max_mad(const FittedModel& m, const EvalPool& ep);

struct CvOptions {
  bool refit = true;          // re-estimate hyperparameters in every fold
  int restarts = 2;           // per-fold cap (warm start from the full-data fit + one space-filling start)
  bool full_restarts = false; // use the full-fit restart count instead of the cap
};

struct CvResult {
  double mse = 0.0;  // NaN when no fold succeeded
  int folds = 0;     // folds attempted
  int failed = 0;
  std::vector<int> failed_folds;
};

/// Leave-one-out cross-validation against oracle truth at the training points.
/// `truth` is k x p (noise-free responses at d.design). `full` supplies warm starts (refit)
/// or the frozen hyperparameters (refit = false). Failed folds are excluded and counted;
/// the mean runs over the folds that succeeded.
[[nodiscard]] CvResult cv_mse(const Dataset& d, const ModelSpec& spec, const Eigen::MatrixXd& truth,
                              const FittedModel& full, const FitOptions& fit_opts, const CvOptions& cv_opts = {});

}  // namespace activegp
