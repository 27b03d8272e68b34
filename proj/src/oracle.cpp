#include "activegp/oracle.hpp"

#include <cmath>

#include "activegp/design.hpp"
#include "activegp/error.hpp"
#include "activegp/kernel.hpp"
#include "activegp/seed.hpp"

namespace activegp {

namespace {

Eigen::MatrixXd anchor_correlation(const Eigen::MatrixXd& unit, const Correlation& c) {
  const Eigen::Index a = unit.rows();
  Eigen::MatrixXd R(a, a);
  for (Eigen::Index i = 0; i < a; ++i) {
    R(i, i) = 1.0;
    for (Eigen::Index t = i + 1; t < a; ++t) {
      R(i, t) = R(t, i) = correlation(unit.row(i).transpose(), unit.row(t).transpose(), c);
    }
  }
  return R;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  // Symmetric square root; tolerates singular (e.g. zero) covariances.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

OracleSpec make_oracle(const OracleConfig& cfg) {
  validate_bounds(cfg.bounds);
  if (cfg.q < 1 || cfg.p < 1 || cfg.bounds.dim() != cfg.q) {
    throw Error(ErrorCode::InvalidArgument, "oracle needs q, p >= 1 and q-dimensional bounds");
  }
  if (!(cfg.tau2 > 0.0) || !(cfg.theta > 0.0) || cfg.anchors < 1 || cfg.noise_fraction < 0.0 || cfg.input_sd < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid oracle configuration");
  }
  OracleSpec o;
  o.q = cfg.q;
  o.p = cfg.p;
  o.bounds = cfg.bounds;
  o.seed = cfg.seed;
  o.gp_enabled = cfg.gp_enabled;
  o.tau2_star = cfg.tau2;
  o.theta_star = Eigen::VectorXd::Constant(cfg.q, cfg.theta);
  o.sigma_F_star = Eigen::MatrixXd::Identity(cfg.q, cfg.q) * cfg.input_sd * cfg.input_sd;

  std::mt19937_64 rng(derive_seed(cfg.seed, "oracle:sensitivity"));
  std::normal_distribution<double> normal(0.0, 1.0);
  o.S_star.resize(cfg.q, cfg.p);
  for (Eigen::Index c = 0; c < o.S_star.cols(); ++c) {
    for (Eigen::Index r = 0; r < o.S_star.rows(); ++r) o.S_star(r, c) = cfg.sensitivity_scale * normal(rng);
  }

  LhdConfig lhd;
  lhd.n = cfg.anchors;
  lhd.q = cfg.q;
  lhd.bounds = cfg.bounds;
  lhd.seed = derive_seed(cfg.seed, "oracle:anchors");
  o.anchors = maximin_lhd(lhd);
  const Eigen::MatrixXd unit = cfg.bounds.to_unit(o.anchors);
  const Eigen::MatrixXd R = anchor_correlation(unit, Correlation{o.theta_star});

  // Draw on a slightly regularized prior, then store the interpolant's own values at the
  // anchors so z*(anchor) reproduces the stored value to round-off.
  Eigen::MatrixXd K = cfg.tau2 * R;
  K.diagonal().array() += 1e-6 * cfg.tau2;
  const Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "oracle anchor covariance");
  std::mt19937_64 draw(derive_seed(cfg.seed, "oracle:gp"));
  Eigen::MatrixXd white(cfg.anchors, cfg.p);
  for (Eigen::Index c = 0; c < white.cols(); ++c) {
    for (Eigen::Index r = 0; r < white.rows(); ++r) white(r, c) = normal(draw);
  }
  const Eigen::MatrixXd raw = llt.matrixL() * white;
  o.anchor_weights = llt.solve(raw);
  o.anchor_values = (cfg.tau2 * R) * o.anchor_weights;
  if (!cfg.gp_enabled) {
    o.anchor_values.setZero();
    o.anchor_weights.setZero();
  }

  // Measurement noise relative to the spread of the noise-free response over the anchors.
  Eigen::MatrixXd truth(cfg.anchors, cfg.p);
  for (Eigen::Index i = 0; i < o.anchors.rows(); ++i) {
    truth.row(i) = (o.anchors.row(i) * o.S_star) + o.anchor_values.row(i);
  }
  o.sigma_eps2_star.resize(cfg.p);
  for (int j = 0; j < cfg.p; ++j) {
    const double mean = truth.col(j).mean();
    const double var = (truth.col(j).array() - mean).square().sum() / std::max<Eigen::Index>(1, truth.rows() - 1);
    o.sigma_eps2_star[j] = cfg.noise_fraction * cfg.noise_fraction * var;
  }
  return o;
}

Eigen::VectorXd oracle_gp_part(const OracleSpec& spec, const ForcePoint& f) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(spec.p);
  if (!spec.gp_enabled) return z;
  const Eigen::VectorXd inv_range = (spec.bounds.hi - spec.bounds.lo).cwiseInverse();
  for (Eigen::Index i = 0; i < spec.anchors.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < f.size(); ++d) {
      const double diff = (f[d] - spec.anchors(i, d)) * inv_range[d];
      s += spec.theta_star[d] * diff * diff;
    }
    z.noalias() += (spec.tau2_star * std::exp(-s)) * spec.anchor_weights.row(i).transpose();
  }
  return z;
}

Eigen::VectorXd oracle_truth(const OracleSpec& spec, const ForcePoint& f) {
  if (f.size() != spec.q) throw Error(ErrorCode::DimensionMismatch, "oracle input has wrong length");
  if (!f.allFinite()) throw Error(ErrorCode::NonFiniteValue, "oracle input is not finite");
  if (!spec.bounds.contains(f, 1e-9)) throw Error(ErrorCode::OutOfBounds, "oracle input outside bounds");
  return spec.S_star.transpose() * f + oracle_gp_part(spec, f);
}

Eigen::VectorXd oracle_observe(const OracleSpec& spec, const ForcePoint& f, std::mt19937_64& rng,
                               ForcePoint* perturbed, bool* clamped) {
  if (f.size() != spec.q) throw Error(ErrorCode::DimensionMismatch, "oracle input has wrong length");
  if (!spec.bounds.contains(f, 1e-9)) throw Error(ErrorCode::OutOfBounds, "oracle input outside bounds");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd white(spec.q);
  for (Eigen::Index d = 0; d < white.size(); ++d) white[d] = normal(rng);
  Eigen::VectorXd eps(spec.p);
  for (Eigen::Index j = 0; j < eps.size(); ++j) eps[j] = normal(rng);

  ForcePoint x = f;
  if (!spec.sigma_F_star.isZero(0.0)) x += psd_factor(spec.sigma_F_star) * white;
  const ForcePoint inside = spec.bounds.clamp(x);
  if (clamped) *clamped = (inside.array() != x.array()).any();
  if (perturbed) *perturbed = inside;
  Eigen::VectorXd y = oracle_truth(spec, inside);
  y.array() += spec.sigma_eps2_star.cwiseSqrt().array() * eps.array();
  return y;
}

Eigen::VectorXd oracle_observe(const OracleSpec& spec, const ForcePoint& f, std::mt19937_64& rng, bool* clamped) {
  return oracle_observe(spec, f, rng, nullptr, clamped);
}

}  // namespace activegp
