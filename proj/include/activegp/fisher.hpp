#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "activegp/gp.hpp"

namespace activegp {

/// Information matrix over the packed hyperparameters (tau2, theta_1..theta_m, sigma2[, phi2]).
struct FisherMatrix {
  Eigen::MatrixXd matrix;
  std::vector<std::string> labels;
};

/// The two pieces of the information matrix, kept apart for testing.
struct FisherTerms {
  Eigen::MatrixXd coefficient;  // [dS/da]^T F^T R^{-1} F [dS/db]
  Eigen::MatrixXd trace;        // 1/2 tr(R^{-1} dR/da R^{-1} dR/db)
  Eigen::MatrixXd dS;           // q x n, column a is dS/d(theta_a)
};

/// Information terms for a fixed design, covariance parameters and coefficients.
/// `residual` is Ybar - F S; pass zeros for rows whose response is unobserved.
[[nodiscard]] FisherTerms fisher_terms(const ModelSpec& spec, const Hyperparameters& hp, const Eigen::VectorXd& S,
                                       const Bounds& bounds, const DesignMatrix& F,
                                       const Eigen::VectorXi& replications, const Eigen::VectorXd& residual);

/// Information of output j at the fitted parameters. With `augmented_with` the candidate is
/// appended to the design (one replicate, zero residual) with theta-hat and S-hat held fixed.
[[nodiscard]] FisherMatrix fisher_information(const FittedModel& m, int j,
                                              const std::optional<ForcePoint>& augmented_with = std::nullopt);

/// Scores many single-point augmentations of one fitted output without refactoring.
///
/// The augmented inverse is the base inverse plus a rank-one term (block Schur complement),
/// so each candidate costs O(n k^2) instead of O(n k^3). Agrees with fisher_information
/// to round-off unless the candidate's Schur complement is numerically zero, in which
/// case it falls back to the dense path.
class AugmentedFisher {
 public:
  AugmentedFisher(const FittedModel& m, int j);

  [[nodiscard]] FisherMatrix evaluate(const ForcePoint& candidate) const;

 private:
  const FittedModel* model_;
  int output_;
  CovarianceModel cov_;
  Eigen::MatrixXd Kinv_;
  std::vector<Eigen::MatrixXd> dK_;
  Eigen::MatrixXd base_trace_;  // tr(K^-1 dK_a K^-1 dK_b)
  Eigen::VectorXd resid_;
  Eigen::VectorXd Kinv_resid_;
  Eigen::MatrixXd FtKinvF_;
  double actuator_ = 0.0;
};

/// det(I^{-1}) = exp(-logdet I). Conditioning is judged on the Jacobi-equilibrated matrix; above
/// 1e12 the diagonal is inflated by 1e-10 of itself before factoring. Throws SingularInformation.
[[nodiscard]] double d_optimality_score(const FisherMatrix& fi, bool* regularized = nullptr);

/// log det(I), with the same regularization rule as d_optimality_score.
[[nodiscard]] double information_logdet(const Eigen::MatrixXd& info, bool* regularized = nullptr);

}  // namespace activegp
