#include "activegp/kernel.hpp"

#include <cmath>

#include "activegp/error.hpp"

namespace activegp {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Correlation& c) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "correlation arguments differ in length");
  if (c.theta.size() != 1 && c.theta.size() != a.size()) {
    throw Error(ErrorCode::DimensionMismatch, "theta must have length 1 or q");
  }
  double s = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += (c.theta.size() == 1 ? c.theta[0] : c.theta[d]) * diff * diff;
  }
  return std::exp(-s);
}

Eigen::VectorXd CovarianceBundle::solve(const Eigen::VectorXd& rhs) const {
  const auto L = chol.triangularView<Eigen::Lower>();
  return L.transpose().solve(L.solve(rhs));
}

Eigen::MatrixXd CovarianceBundle::solve(const Eigen::MatrixXd& rhs) const {
  const auto L = chol.triangularView<Eigen::Lower>();
  return L.transpose().solve(L.solve(rhs));
}

Eigen::MatrixXd CovarianceBundle::whiten(const Eigen::MatrixXd& rhs) const {
  return chol.triangularView<Eigen::Lower>().solve(rhs);
}

Eigen::MatrixXd CovarianceBundle::inverse() const {
  return solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(R.rows(), R.cols())));
}

CovarianceBundle factorize(Eigen::MatrixXd R) {
  if (!R.allFinite()) throw Error(ErrorCode::NotPositiveDefinite, "covariance has non-finite entries");
  const Eigen::Index k = R.rows();
  const double mean_diag = k > 0 ? R.diagonal().mean() : 1.0;
  double jitter = 0.0;
  double next = 1e-10 * mean_diag;
  const double max_jitter = 1e-4 * mean_diag * (1.0 + 1e-9);
  Eigen::LLT<Eigen::MatrixXd> llt;
  while (true) {
    Eigen::MatrixXd trial = R;
    if (jitter > 0.0) trial.diagonal().array() += jitter;
    llt.compute(trial);
    if (llt.info() == Eigen::Success && mean_diag > 0.0) {
      CovarianceBundle b;
      b.chol = llt.matrixL();
      b.logdet = 2.0 * b.chol.diagonal().array().log().sum();
      if (std::isfinite(b.logdet)) {
        b.R = std::move(trial);
        b.jitter = jitter;
        return b;
      }
    }
    if (!(mean_diag > 0.0) || next > max_jitter) break;
    jitter = next;
    next *= 10.0;
  }
  throw Error(ErrorCode::NotPositiveDefinite, "Cholesky failed after maximum jitter");
}

CovarianceModel::CovarianceModel(const ModelSpec& spec, const Bounds& bounds, const DesignMatrix& design,
                                 const Eigen::VectorXi& replications)
    : spec_(spec), bounds_(bounds), design_(design) {
  if (design.cols() != spec.q || bounds.dim() != spec.q) {
    throw Error(ErrorCode::DimensionMismatch, "design/bounds width differs from spec.q");
  }
  if (replications.size() != design.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "replication count per design point required");
  }
  const Eigen::Index k = design.rows();
  unit_ = bounds.to_unit(design);
  inv_reps_ = replications.cast<double>().cwiseInverse();
  gram_ = design * design.transpose();
  const int m = spec.theta_count();
  sqdiff_.assign(m, Eigen::MatrixXd::Zero(k, k));
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      for (int d = 0; d < spec.q; ++d) {
        const double diff = unit_(a, d) - unit_(b, d);
        double& slot = sqdiff_[spec.isotropic ? 0 : d](a, b);
        slot += diff * diff;
      }
      for (int c = 0; c < m; ++c) sqdiff_[c](b, a) = sqdiff_[c](a, b);
    }
  }
}

CovarianceModel::CovarianceModel(const ModelSpec& spec, const Dataset& d)
    : CovarianceModel(spec, d.bounds, d.design, d.replications) {}

Eigen::MatrixXd CovarianceModel::correlation_matrix(const Eigen::VectorXd& theta) const {
  if (theta.size() != static_cast<Eigen::Index>(sqdiff_.size())) {
    throw Error(ErrorCode::DimensionMismatch, "theta length does not match spec");
  }
  const Eigen::Index k = size();
  Eigen::MatrixXd expo = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t c = 0; c < sqdiff_.size(); ++c) expo.noalias() -= theta[c] * sqdiff_[c];
  return expo.array().exp().matrix();
}

Eigen::MatrixXd CovarianceModel::covariance(const Hyperparameters& hp, const Eigen::VectorXd& S) const {
  return covariance(hp, S, correlation_matrix(hp.theta));
}

Eigen::MatrixXd CovarianceModel::covariance(const Hyperparameters& hp, const Eigen::VectorXd& S,
                                            const Eigen::MatrixXd& corr) const {
  Eigen::MatrixXd K = hp.tau2 * corr;
  K.diagonal() += hp.sigma2 * inv_reps_;
  if (spec_.variant == ModelVariant::SurrogateWithUncertainties) {
    if (S.size() != spec_.q) throw Error(ErrorCode::DimensionMismatch, "S must have length q");
    K.noalias() += hp.phi2 * gram_;
    K.diagonal().array() += actuator_variance(spec_, S);
  }
  return K;
}

Eigen::VectorXd CovarianceModel::cross(const Hyperparameters& hp, const ForcePoint& f0) const {
  if (f0.size() != spec_.q) throw Error(ErrorCode::DimensionMismatch, "f0 must have length q");
  const Eigen::VectorXd u0 = bounds_.to_unit(f0);
  const Correlation c{hp.theta};
  const Eigen::Index k = size();
  Eigen::VectorXd out(k);
  for (Eigen::Index t = 0; t < k; ++t) out[t] = hp.tau2 * correlation(u0, unit_.row(t).transpose(), c);
  if (spec_.variant == ModelVariant::SurrogateWithUncertainties) out.noalias() += hp.phi2 * (design_ * f0);
  return out;
}

Eigen::MatrixXd CovarianceModel::derivative(const Hyperparameters& hp, int which) const {
  return derivative(hp, which, correlation_matrix(hp.theta));
}

Eigen::MatrixXd CovarianceModel::derivative(const Hyperparameters& hp, int which, const Eigen::MatrixXd& corr) const {
  const int m = spec_.theta_count();
  if (which < 0 || which >= spec_.parameter_count()) {
    throw Error(ErrorCode::UnknownParameter, "parameter index " + std::to_string(which));
  }
  if (which == 0) return corr;
  if (which <= m) return -hp.tau2 * corr.cwiseProduct(sqdiff_[which - 1]);
  if (which == m + 1) return Eigen::MatrixXd(inv_reps_.asDiagonal());
  return gram_;
}

double actuator_variance(const ModelSpec& spec, const Eigen::VectorXd& S) {
  return S.dot(spec.sigma_F * S);
}

CovarianceBundle assemble_covariance(const ModelSpec& spec, const Hyperparameters& hp, const Eigen::VectorXd& S,
                                     const Dataset& d) {
  validate_hyperparameters(spec, hp);
  return factorize(CovarianceModel(spec, d).covariance(hp, S));
}

Eigen::VectorXd cross_covariance(const ModelSpec& spec, const Hyperparameters& hp, const Eigen::VectorXd& S,
                                 const Dataset& d, const ForcePoint& f0) {
  (void)S;  // the cross term carries no actuator-uncertainty contribution
  validate_hyperparameters(spec, hp);
  return CovarianceModel(spec, d).cross(hp, f0);
}

Eigen::MatrixXd covariance_derivative(const ModelSpec& spec, const Hyperparameters& hp, const Eigen::VectorXd& S,
                                      const Dataset& d, int which) {
  (void)S;
  return CovarianceModel(spec, d).derivative(hp, which);
}

}  // namespace activegp
