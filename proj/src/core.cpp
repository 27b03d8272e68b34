#include "activegp/core.hpp"

#include <cmath>

#include "activegp/error.hpp"

namespace activegp {

Bounds Bounds::uniform(int q, double lo, double hi) {
  return Bounds{Eigen::VectorXd::Constant(q, lo), Eigen::VectorXd::Constant(q, hi)};
}

bool Bounds::contains(const ForcePoint& f, double slack) const {
  if (f.size() != lo.size()) return false;
  for (Eigen::Index d = 0; d < f.size(); ++d) {
    if (!(f[d] >= lo[d] - slack && f[d] <= hi[d] + slack)) return false;
  }
  return true;
}

ForcePoint Bounds::clamp(const ForcePoint& f) const { return f.cwiseMax(lo).cwiseMin(hi); }

Eigen::VectorXd Bounds::to_unit(const ForcePoint& f) const {
  return (f - lo).cwiseQuotient(hi - lo);
}

Eigen::MatrixXd Bounds::to_unit(const DesignMatrix& rows) const {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out.row(i) = to_unit(Eigen::VectorXd(rows.row(i).transpose())).transpose();
  }
  return out;
}

ForcePoint Bounds::from_unit(const Eigen::VectorXd& u) const {
  return lo + u.cwiseProduct(hi - lo);
}

void validate_bounds(const Bounds& b) {
  if (b.lo.size() != b.hi.size() || b.lo.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "bounds lo/hi must have the same nonzero length");
  }
  for (Eigen::Index d = 0; d < b.lo.size(); ++d) {
    if (!std::isfinite(b.lo[d]) || !std::isfinite(b.hi[d])) {
      throw Error(ErrorCode::NonFiniteValue, "bounds must be finite");
    }
    if (!(b.lo[d] < b.hi[d])) {
      throw Error(ErrorCode::InvalidArgument, "bounds require lo < hi in every dimension");
    }
  }
}

std::string to_string(ModelVariant v) {
  return v == ModelVariant::StochasticKriging ? "kriging" : "surrogate";
}

ModelVariant parse_model_variant(const std::string& name) {
  if (name == "kriging" || name == "stochastic_kriging") return ModelVariant::StochasticKriging;
  if (name == "surrogate" || name == "surrogate_with_uncertainties") {
    return ModelVariant::SurrogateWithUncertainties;
  }
  throw Error(ErrorCode::ConfigError, "unknown model variant '" + name + "'");
}

ModelSpec ModelSpec::make(ModelVariant variant, int q, int p) {
  ModelSpec s;
  s.variant = variant;
  s.q = q;
  s.p = p;
  s.sigma_F = Eigen::MatrixXd::Zero(q, q);
  s.weights = Eigen::VectorXd::Constant(p, 1.0 / p);
  return s;
}

int ModelSpec::parameter_count() const {
  return theta_count() + (variant == ModelVariant::StochasticKriging ? 2 : 3);
}

void validate_model_spec(const ModelSpec& spec) {
  if (spec.q < 1 || spec.p < 1) throw Error(ErrorCode::InvalidArgument, "q and p must be positive");
  if (spec.sigma_F.rows() != spec.q || spec.sigma_F.cols() != spec.q) {
    throw Error(ErrorCode::DimensionMismatch, "sigma_F must be q x q");
  }
  if (!spec.sigma_F.allFinite()) throw Error(ErrorCode::NonFiniteValue, "sigma_F has non-finite entries");
  if ((spec.sigma_F - spec.sigma_F.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + spec.sigma_F.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidArgument, "sigma_F must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.sigma_F, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * (1.0 + spec.sigma_F.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidArgument, "sigma_F must be positive semidefinite");
  }
  if (spec.weights.size() != spec.p) throw Error(ErrorCode::DimensionMismatch, "weights must have length p");
  if (!spec.weights.allFinite() || spec.weights.minCoeff() < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
  }
  if (std::abs(spec.weights.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "weights must sum to one");
  }
}

Eigen::VectorXd Hyperparameters::pack(const ModelSpec& spec) const {
  const int m = spec.theta_count();
  if (theta.size() != m) throw Error(ErrorCode::DimensionMismatch, "theta length does not match spec");
  Eigen::VectorXd v(spec.parameter_count());
  v[0] = tau2;
  v.segment(1, m) = theta;
  v[m + 1] = sigma2;
  if (spec.variant == ModelVariant::SurrogateWithUncertainties) v[m + 2] = phi2;
  return v;
}

Hyperparameters Hyperparameters::unpack(const ModelSpec& spec, const Eigen::VectorXd& packed) {
  if (packed.size() != spec.parameter_count()) {
    throw Error(ErrorCode::DimensionMismatch, "packed parameter vector has wrong length");
  }
  const int m = spec.theta_count();
  Hyperparameters hp;
  hp.tau2 = packed[0];
  hp.theta = packed.segment(1, m);
  hp.sigma2 = packed[m + 1];
  hp.phi2 = spec.variant == ModelVariant::SurrogateWithUncertainties ? packed[m + 2] : 0.0;
  return hp;
}

std::vector<std::string> parameter_labels(const ModelSpec& spec) {
  std::vector<std::string> labels{"tau2"};
  for (int d = 0; d < spec.theta_count(); ++d) labels.push_back("theta_" + std::to_string(d + 1));
  labels.emplace_back("sigma2");
  if (spec.variant == ModelVariant::SurrogateWithUncertainties) labels.emplace_back("phi2");
  return labels;
}

void validate_hyperparameters(const ModelSpec& spec, const Hyperparameters& hp) {
  if (hp.theta.size() != spec.theta_count()) {
    throw Error(ErrorCode::DimensionMismatch, "theta length does not match spec");
  }
  if (!std::isfinite(hp.tau2) || !std::isfinite(hp.sigma2) || !std::isfinite(hp.phi2) || !hp.theta.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "hyperparameters must be finite");
  }
  if (!(hp.tau2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be strictly positive");
  if (hp.sigma2 < 0.0 || hp.phi2 < 0.0) throw Error(ErrorCode::InvalidArgument, "variances must be nonnegative");
  if (hp.theta.minCoeff() <= 0.0) throw Error(ErrorCode::InvalidArgument, "theta must be positive");
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.bounds.lo != b.bounds.lo || a.bounds.hi != b.bounds.hi) return false;
  if (a.design.rows() != b.design.rows() || a.design.cols() != b.design.cols() || a.design != b.design) return false;
  if (a.replications != b.replications) return false;
  if (a.responses.size() != b.responses.size()) return false;
  for (std::size_t t = 0; t < a.responses.size(); ++t) {
    if (a.responses[t].rows() != b.responses[t].rows() || a.responses[t].cols() != b.responses[t].cols()) return false;
    if (a.responses[t] != b.responses[t]) return false;
  }
  return a.sample_means.rows() == b.sample_means.rows() && a.sample_means.cols() == b.sample_means.cols() &&
         a.sample_means == b.sample_means;
}

Dataset make_dataset(Bounds bounds, DesignMatrix design, std::vector<Eigen::MatrixXd> responses) {
  if (static_cast<Eigen::Index>(responses.size()) != design.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "one response block per design point required");
  }
  Dataset d;
  d.bounds = std::move(bounds);
  d.design = std::move(design);
  const int k = d.k();
  const Eigen::Index p = k > 0 ? responses.front().cols() : 0;
  d.replications.resize(k);
  d.sample_means.resize(k, p);
  for (int t = 0; t < k; ++t) {
    if (responses[t].cols() != p || responses[t].rows() < 1) {
      throw Error(ErrorCode::DimensionMismatch, "replicate blocks must be n_t x p with n_t >= 1");
    }
    d.replications[t] = static_cast<int>(responses[t].rows());
    d.sample_means.row(t) = responses[t].colwise().mean();
  }
  d.responses = std::move(responses);
  return d;
}

Dataset make_dataset(Bounds bounds, DesignMatrix design, const Eigen::MatrixXd& responses) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(responses.rows());
  for (Eigen::Index t = 0; t < responses.rows(); ++t) blocks.emplace_back(responses.row(t));
  return make_dataset(std::move(bounds), std::move(design), std::move(blocks));
}

Dataset append_point(const Dataset& d, const ForcePoint& f, const Eigen::MatrixXd& replicates) {
  if (f.size() != d.q()) throw Error(ErrorCode::DimensionMismatch, "appended point has wrong length");
  DesignMatrix design(d.k() + 1, d.q());
  design.topRows(d.k()) = d.design;
  design.row(d.k()) = f.transpose();
  auto responses = d.responses;
  responses.push_back(replicates);
  return make_dataset(d.bounds, std::move(design), std::move(responses));
}

Dataset remove_point(const Dataset& d, int t) {
  if (t < 0 || t >= d.k()) throw Error(ErrorCode::InvalidArgument, "point index out of range");
  DesignMatrix design(d.k() - 1, d.q());
  std::vector<Eigen::MatrixXd> responses;
  responses.reserve(d.k() - 1);
  for (int i = 0, r = 0; i < d.k(); ++i) {
    if (i == t) continue;
    design.row(r++) = d.design.row(i);
    responses.push_back(d.responses[i]);
  }
  return make_dataset(d.bounds, std::move(design), std::move(responses));
}

void validate_dataset(const Dataset& d) {
  validate_bounds(d.bounds);
  const int k = d.k();
  if (k < 1) throw Error(ErrorCode::DimensionMismatch, "dataset needs at least one point");
  if (d.q() != d.bounds.dim()) throw Error(ErrorCode::DimensionMismatch, "design width differs from bounds");
  if (d.replications.size() != k || static_cast<int>(d.responses.size()) != k || d.sample_means.rows() != k) {
    throw Error(ErrorCode::DimensionMismatch, "per-point arrays disagree with design row count");
  }
  const Eigen::Index p = d.sample_means.cols();
  if (p < 1) throw Error(ErrorCode::DimensionMismatch, "dataset needs at least one output");
  if (!d.design.allFinite()) throw Error(ErrorCode::NonFiniteValue, "design has non-finite entries");
  for (int t = 0; t < k; ++t) {
    const auto& block = d.responses[t];
    if (d.replications[t] < 1 || block.rows() != d.replications[t] || block.cols() != p) {
      throw Error(ErrorCode::DimensionMismatch, "replicate block " + std::to_string(t) + " has wrong shape");
    }
    if (!block.allFinite() || !d.sample_means.row(t).allFinite()) {
      throw Error(ErrorCode::NonFiniteValue, "responses at point " + std::to_string(t) + " are not finite");
    }
    const Eigen::RowVectorXd mean = block.colwise().mean();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::abs(mean[j] - d.sample_means(t, j)) > 1e-12 * (1.0 + std::abs(mean[j]))) {
        throw Error(ErrorCode::MeanInconsistent,
                    "sample mean at point " + std::to_string(t) + ", output " + std::to_string(j));
      }
    }
    if (!d.bounds.contains(d.design.row(t).transpose())) {
      throw Error(ErrorCode::OutOfBounds, "design point " + std::to_string(t) + " outside bounds");
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if ((d.design.row(a) - d.design.row(b)).cwiseAbs().maxCoeff() <= 1e-9) {
        throw Error(ErrorCode::DuplicatePoint,
                    "points " + std::to_string(a) + " and " + std::to_string(b) + " coincide; use replicates");
      }
    }
  }
}

}  // namespace activegp
