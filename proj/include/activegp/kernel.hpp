#pragma once

#include <vector>

#include <Eigen/Dense>

#include "activegp/core.hpp"

namespace activegp {

/// Squared-exponential correlation R(a, b) = exp(-sum_d theta_d (a_d - b_d)^2).
/// A length-one theta is applied isotropically to every coordinate.
struct Correlation {
  Eigen::VectorXd theta;
};

[[nodiscard]] double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Correlation& c);

/// A covariance matrix together with its Cholesky factor.
struct CovarianceBundle {
  Eigen::MatrixXd R;     // the matrix that was factored, jitter included
  Eigen::MatrixXd chol;  // lower triangular, chol * chol^T == R
  double logdet = 0.0;
  double jitter = 0.0;   // diagonal increment that was needed (0 when none)

  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  /// chol^{-1} rhs
  [[nodiscard]] Eigen::MatrixXd whiten(const Eigen::MatrixXd& rhs) const;
  [[nodiscard]] Eigen::MatrixXd inverse() const;
};

/// Cholesky with escalating diagonal jitter: 1e-10 * mean(diag), x10 per retry, up to 1e-4 * mean(diag).
/// Throws Error(NotPositiveDefinite) when even the largest jitter fails.
[[nodiscard]] CovarianceBundle factorize(Eigen::MatrixXd R);

/// Precomputed geometry of one design, reused across many hyperparameter evaluations.
///
/// Kernel distances use the unit-scaled design; the regression/part-uncertainty terms
/// use the raw forces.
class CovarianceModel {
 public:
  CovarianceModel(const ModelSpec& spec, const Bounds& bounds, const DesignMatrix& design,
                  const Eigen::VectorXi& replications);
  CovarianceModel(const ModelSpec& spec, const Dataset& d);

  [[nodiscard]] int size() const { return static_cast<int>(design_.rows()); }
  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] const DesignMatrix& design() const { return design_; }

  [[nodiscard]] Eigen::MatrixXd correlation_matrix(const Eigen::VectorXd& theta) const;

  /// Full covariance of the sample means; `S` only matters for the surrogate variant.
  [[nodiscard]] Eigen::MatrixXd covariance(const Hyperparameters& hp, const Eigen::VectorXd& S) const;
  /// Same, reusing a correlation matrix computed for hp.theta.
  [[nodiscard]] Eigen::MatrixXd covariance(const Hyperparameters& hp, const Eigen::VectorXd& S,
                                           const Eigen::MatrixXd& corr) const;

  [[nodiscard]] Eigen::VectorXd cross(const Hyperparameters& hp, const ForcePoint& f0) const;

  /// Derivative of covariance() with respect to packed parameter `which`.
  [[nodiscard]] Eigen::MatrixXd derivative(const Hyperparameters& hp, int which) const;
  [[nodiscard]] Eigen::MatrixXd derivative(const Hyperparameters& hp, int which, const Eigen::MatrixXd& corr) const;

  /// Squared unit-scale differences per theta component (one k x k matrix each).
  [[nodiscard]] const std::vector<Eigen::MatrixXd>& squared_differences() const { return sqdiff_; }
  /// F F^T on raw forces.
  [[nodiscard]] const Eigen::MatrixXd& gram() const { return gram_; }
  /// 1 / n_t
  [[nodiscard]] const Eigen::VectorXd& noise_scale() const { return inv_reps_; }

 private:
  ModelSpec spec_;
  Bounds bounds_;
  DesignMatrix design_;
  Eigen::MatrixXd unit_;
  Eigen::VectorXd inv_reps_;
  Eigen::MatrixXd gram_;
  std::vector<Eigen::MatrixXd> sqdiff_;
};

/// S^T sigma_F S, the diagonal contribution of actuator uncertainty (surrogate variant).
[[nodiscard]] double actuator_variance(const ModelSpec& spec, const Eigen::VectorXd& S);

[[nodiscard]] CovarianceBundle assemble_covariance(const ModelSpec& spec, const Hyperparameters& hp,
                                                   const Eigen::VectorXd& S, const Dataset& d);

[[nodiscard]] Eigen::VectorXd cross_covariance(const ModelSpec& spec, const Hyperparameters& hp,
                                               const Eigen::VectorXd& S, const Dataset& d, const ForcePoint& f0);

[[nodiscard]] Eigen::MatrixXd covariance_derivative(const ModelSpec& spec, const Hyperparameters& hp,
                                                    const Eigen::VectorXd& S, const Dataset& d, int which);

}  // namespace activegp
