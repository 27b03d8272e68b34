#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "activegp/core.hpp"
#include "activegp/kernel.hpp"
#include "activegp/optimize.hpp"

namespace activegp {

enum class OptimizerKind { QuasiNewton, Simplex };

/// Box on the natural (not log) hyperparameters, packed order.
struct HyperparameterBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// theta in [1e-3, 1e3]; tau2 in [1e-8 v, 1e3 v]; sigma2, phi2 in [1e-12, v], with v = var(Ybar_j).
[[nodiscard]] HyperparameterBounds default_hyperparameter_bounds(const ModelSpec& spec, double output_variance);

struct FitOptions {
  int restarts = 8;  // total starting points, warm starts included
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::QuasiNewton;
  MinimizeOptions minimizer;
  /// Optional per-output starting points tried before the space-filling ones.
  std::vector<Hyperparameters> warm_start;
};

struct FitDiagnostics {
  double log_likelihood = 0.0;
  double jitter = 0.0;
  int restarts = 0;
  int failed_restarts = 0;
  int evaluations = 0;
  int fixed_point_sweeps = 0;
  bool fixed_point_converged = true;
  std::vector<double> start_log_likelihoods;  // -inf where a start was infeasible
  HyperparameterBounds bounds;
};

struct OutputModel {
  Eigen::VectorXd S_hat;
  Hyperparameters hp;
  CovarianceBundle bundle;
  Eigen::VectorXd alpha;  // bundle^{-1} (Ybar_j - F S_hat)
  FitDiagnostics diagnostics;
};

struct FittedModel {
  ModelSpec spec;
  Dataset data;
  std::vector<OutputModel> outputs;
  Eigen::MatrixXd unit_design;  // data.design mapped into [0,1]^q

  [[nodiscard]] double total_log_likelihood() const;
};

/// Multivariate-normal log density of the sample means of output j at fixed S.
[[nodiscard]] double log_likelihood(const ModelSpec& spec, const Hyperparameters& hp, const Eigen::VectorXd& S,
                                    const Dataset& d, int j);

/// d(log_likelihood)/d(theta_a) at fixed S, packed order, natural scale.
[[nodiscard]] Eigen::VectorXd log_likelihood_gradient(const ModelSpec& spec, const Hyperparameters& hp,
                                                      const Eigen::VectorXd& S, const Dataset& d, int j);

/// Generalized least squares against an already-factored covariance.
[[nodiscard]] Eigen::VectorXd gls_coefficients(const CovarianceBundle& cov, const DesignMatrix& F,
                                               const Eigen::VectorXd& y);

/// GLS estimate for output j. For the surrogate variant the actuator term depends on S, so
/// the estimate is the fixed point of (assemble covariance at S, re-solve GLS), started
/// from ordinary least squares, at most 5 sweeps, tolerance 1e-8.
[[nodiscard]] Eigen::VectorXd gls_coefficients(const ModelSpec& spec, const Hyperparameters& hp, const Dataset& d,
                                               int j);

/// Profile log-likelihood with S replaced by its GLS estimate.
[[nodiscard]] double profile_log_likelihood(const ModelSpec& spec, const Hyperparameters& hp, const Dataset& d,
                                            int j);

/// Maximum-likelihood fit, each output independently.
[[nodiscard]] FittedModel fit(const ModelSpec& spec, const Dataset& d, const FitOptions& opts = {});

/// Builds the predictor for fixed hyperparameters (S from GLS); no optimization.
[[nodiscard]] FittedModel condition(const ModelSpec& spec, const Dataset& d, const std::vector<Hyperparameters>& hps);

/// BLUP of the latent response at f0, one entry per output.
[[nodiscard]] Eigen::VectorXd predict(const FittedModel& m, const ForcePoint& f0);

/// Prior latent variance minus the explained part, clamped at zero. The prior is tau2 for
/// Kriging and tau2 + phi2 |f0|^2 for the surrogate variant. `clamped` counts outputs that
/// went negative by round-off.
[[nodiscard]] Eigen::VectorXd predict_variance(const FittedModel& m, const ForcePoint& f0, int* clamped = nullptr);

/// Cross-covariance of output j at f0 against the training points.
[[nodiscard]] Eigen::VectorXd model_cross_covariance(const FittedModel& m, int j, const ForcePoint& f0);

}  // namespace activegp
