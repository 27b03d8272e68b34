#include "activegp/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "activegp/design.hpp"
#include "activegp/error.hpp"
#include "activegp/seed.hpp"

namespace activegp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr int kMaxFixedPointSweeps = 5;
constexpr double kFixedPointTolerance = 1e-8;

Eigen::VectorXd ordinary_least_squares(const DesignMatrix& F, const Eigen::VectorXd& y) {
  if (F.rows() < F.cols()) throw Error(ErrorCode::RankDeficientDesign, "fewer design points than inputs");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(F);
  qr.setThreshold(1e-12);
  if (qr.rank() < F.cols()) throw Error(ErrorCode::RankDeficientDesign, "design matrix is rank deficient");
  return qr.solve(y);
}

struct ProfileState {
  Eigen::VectorXd S;
  CovarianceBundle bundle;
  Eigen::VectorXd alpha;
  double value = 0.0;
  int sweeps = 0;
  bool converged = true;
};

// Profile likelihood of one output over one fixed design; reused across optimizer calls.
class ProfileLikelihood {
 public:
  ProfileLikelihood(const ModelSpec& spec, const Dataset& d, int j)
      : cov_(spec, d), F_(d.design), y_(d.sample_means.col(j)), spec_(spec),
        s_dependent_(spec.variant == ModelVariant::SurrogateWithUncertainties && !spec.sigma_F.isZero(0.0)) {}

  ProfileState evaluate(const Hyperparameters& hp, const Eigen::MatrixXd* corr_in = nullptr) const {
    const Eigen::MatrixXd corr = corr_in ? *corr_in : cov_.correlation_matrix(hp.theta);
    ProfileState st;
    Eigen::VectorXd S = s_dependent_ ? ordinary_least_squares(F_, y_) : Eigen::VectorXd::Zero(spec_.q);
    st.converged = !s_dependent_;
    for (int sweep = 0; sweep < kMaxFixedPointSweeps; ++sweep) {
      st.bundle = factorize(cov_.covariance(hp, S, corr));
      Eigen::VectorXd next = gls_coefficients(st.bundle, F_, y_);
      ++st.sweeps;
      const double change = (next - S).norm();
      S = std::move(next);
      if (!s_dependent_) break;
      if (change <= kFixedPointTolerance * (1.0 + S.norm())) {
        st.converged = true;
        break;
      }
    }
    // The covariance must be the one at the returned S, converged or not.
    if (s_dependent_) st.bundle = factorize(cov_.covariance(hp, S, corr));
    st.S = std::move(S);
    const Eigen::VectorXd resid = y_ - F_ * st.S;
    const Eigen::VectorXd z = st.bundle.whiten(resid);
    st.alpha = st.bundle.chol.triangularView<Eigen::Lower>().transpose().solve(z);
    const auto k = static_cast<double>(y_.size());
    st.value = -0.5 * k * kLog2Pi - 0.5 * st.bundle.logdet - 0.5 * z.squaredNorm();
    return st;
  }

  // Value plus gradient in the packed natural parameters (S held at its profiled value).
  double value_and_gradient(const Hyperparameters& hp, Eigen::VectorXd* grad, ProfileState* out = nullptr) const {
    const Eigen::MatrixXd corr = cov_.correlation_matrix(hp.theta);
    ProfileState st = evaluate(hp, &corr);
    if (grad) {
      const int m = spec_.theta_count();
      // W = alpha alpha^T - K^{-1}; dL/da = 1/2 sum(W .* dK/da)
      Eigen::MatrixXd W = -st.bundle.inverse();
      W.noalias() += st.alpha * st.alpha.transpose();
      grad->resize(spec_.parameter_count());
      const Eigen::MatrixXd WR = W.cwiseProduct(corr);
      (*grad)[0] = 0.5 * WR.sum();
      const auto& sq = cov_.squared_differences();
      for (int c = 0; c < m; ++c) (*grad)[1 + c] = -0.5 * hp.tau2 * WR.cwiseProduct(sq[c]).sum();
      (*grad)[m + 1] = 0.5 * W.diagonal().dot(cov_.noise_scale());
      if (spec_.variant == ModelVariant::SurrogateWithUncertainties) {
        (*grad)[m + 2] = 0.5 * W.cwiseProduct(cov_.gram()).sum();
      }
    }
    const double v = st.value;
    if (out) *out = std::move(st);
    return v;
  }

 private:
  CovarianceModel cov_;
  DesignMatrix F_;
  Eigen::VectorXd y_;
  ModelSpec spec_;
  bool s_dependent_;
};

double sample_variance(const Eigen::VectorXd& y) {
  if (y.size() < 2) return 0.0;
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

Eigen::VectorXd log_clamped(const Eigen::VectorXd& natural, const HyperparameterBounds& b) {
  return natural.cwiseMax(b.lo).cwiseMin(b.hi).array().log().matrix();
}

OutputModel make_output(const ProfileLikelihood& pl, const Hyperparameters& hp) {
  ProfileState st = pl.evaluate(hp);
  OutputModel out;
  out.S_hat = std::move(st.S);
  out.hp = hp;
  out.alpha = std::move(st.alpha);
  out.diagnostics.log_likelihood = st.value;
  out.diagnostics.jitter = st.bundle.jitter;
  out.diagnostics.fixed_point_sweeps = st.sweeps;
  out.diagnostics.fixed_point_converged = st.converged;
  out.bundle = std::move(st.bundle);
  return out;
}

OutputModel fit_output(const ModelSpec& spec, const Dataset& d, int j, const FitOptions& opts) {
  const ProfileLikelihood pl(spec, d, j);
  double v = sample_variance(d.sample_means.col(j));
  if (!(v > 0.0)) v = 1e-12 * (1.0 + d.sample_means.col(j).squaredNorm());
  const HyperparameterBounds box = default_hyperparameter_bounds(spec, v);
  const Eigen::VectorXd lo = box.lo.array().log().matrix();
  const Eigen::VectorXd hi = box.hi.array().log().matrix();
  const int n = spec.parameter_count();

  std::vector<Eigen::VectorXd> starts;
  if (j < static_cast<int>(opts.warm_start.size()) && opts.restarts > 0) {
    starts.push_back(log_clamped(opts.warm_start[j].pack(spec), box));
  }
  const int remaining = opts.restarts - static_cast<int>(starts.size());
  if (remaining > 0) {
    LhdConfig cfg;
    cfg.n = remaining;
    cfg.q = n;
    cfg.bounds = Bounds{lo, hi};
    cfg.seed = derive_seed(opts.seed, "fit:output:" + std::to_string(j));
    cfg.sweeps = 200;
    const DesignMatrix pts = maximin_lhd(cfg);
    for (Eigen::Index r = 0; r < pts.rows(); ++r) starts.emplace_back(pts.row(r).transpose());
  }

  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) -> double {
    const Eigen::VectorXd natural = x.array().exp().matrix();
    const Hyperparameters hp = Hyperparameters::unpack(spec, natural);
    try {
      if (!grad) return -pl.value_and_gradient(hp, nullptr);
      Eigen::VectorXd g;
      const double value = pl.value_and_gradient(hp, &g);
      *grad = -g.cwiseProduct(natural);
      return -value;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FitDiagnostics diag;
  diag.bounds = box;
  double best_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (const Eigen::VectorXd& x0 : starts) {
    const double start_value = objective(x0, nullptr);
    diag.start_log_likelihoods.push_back(-start_value);
    ++diag.evaluations;
    if (!std::isfinite(start_value)) {
      ++diag.failed_restarts;
      continue;
    }
    const MinimizeResult r = opts.optimizer == OptimizerKind::QuasiNewton
                                 ? minimize_box_lbfgs(objective, x0, lo, hi, opts.minimizer)
                                 : minimize_simplex(objective, x0, lo, hi, opts.minimizer);
    diag.evaluations += r.evaluations;
    if (std::isfinite(r.value) && r.value < best_value) {
      best_value = r.value;
      best_x = r.x;
    }
  }
  diag.restarts = static_cast<int>(starts.size());
  if (!std::isfinite(best_value)) {
    throw Error(ErrorCode::OptimizationFailed, "all restarts failed for output " + std::to_string(j));
  }
  OutputModel out = make_output(pl, Hyperparameters::unpack(spec, best_x.array().exp().matrix()));
  diag.log_likelihood = out.diagnostics.log_likelihood;
  diag.jitter = out.diagnostics.jitter;
  diag.fixed_point_sweeps = out.diagnostics.fixed_point_sweeps;
  diag.fixed_point_converged = out.diagnostics.fixed_point_converged;
  out.diagnostics = std::move(diag);
  return out;
}

void check_output_index(const Dataset& d, int j) {
  if (j < 0 || j >= d.p()) throw Error(ErrorCode::DimensionMismatch, "output index out of range");
}

}  // namespace

HyperparameterBounds default_hyperparameter_bounds(const ModelSpec& spec, double v) {
  const int m = spec.theta_count();
  HyperparameterBounds b;
  b.lo.resize(spec.parameter_count());
  b.hi.resize(spec.parameter_count());
  b.lo[0] = 1e-8 * v;
  b.hi[0] = 1e3 * v;
  b.lo.segment(1, m).setConstant(1e-3);
  b.hi.segment(1, m).setConstant(1e3);
  b.lo[m + 1] = 1e-12;
  b.hi[m + 1] = std::max(v, 1e-12 * 10.0);
  if (spec.variant == ModelVariant::SurrogateWithUncertainties) {
    b.lo[m + 2] = 1e-12;
    b.hi[m + 2] = std::max(v, 1e-12 * 10.0);
  }
  return b;
}

double FittedModel::total_log_likelihood() const {
  double s = 0.0;
  for (const auto& o : outputs) s += o.diagnostics.log_likelihood;
  return s;
}

double log_likelihood(const ModelSpec& spec, const Hyperparameters& hp, const Eigen::VectorXd& S, const Dataset& d,
                      int j) {
  check_output_index(d, j);
  const CovarianceBundle cov = assemble_covariance(spec, hp, S, d);
  const Eigen::VectorXd z = cov.whiten(d.sample_means.col(j) - d.design * S);
  return -0.5 * d.k() * kLog2Pi - 0.5 * cov.logdet - 0.5 * z.squaredNorm();
}

Eigen::VectorXd log_likelihood_gradient(const ModelSpec& spec, const Hyperparameters& hp, const Eigen::VectorXd& S,
                                        const Dataset& d, int j) {
  check_output_index(d, j);
  const CovarianceModel model(spec, d);
  const CovarianceBundle cov = factorize(model.covariance(hp, S));
  const Eigen::VectorXd alpha = cov.solve(Eigen::VectorXd(d.sample_means.col(j) - d.design * S));
  const Eigen::MatrixXd Kinv = cov.inverse();
  Eigen::VectorXd g(spec.parameter_count());
  for (int a = 0; a < spec.parameter_count(); ++a) {
    const Eigen::MatrixXd dK = model.derivative(hp, a);
    g[a] = 0.5 * alpha.dot(dK * alpha) - 0.5 * Kinv.cwiseProduct(dK).sum();
  }
  return g;
}

Eigen::VectorXd gls_coefficients(const CovarianceBundle& cov, const DesignMatrix& F, const Eigen::VectorXd& y) {
  if (F.rows() != y.size() || F.rows() != cov.chol.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "GLS operands disagree in row count");
  }
  if (F.rows() < F.cols()) throw Error(ErrorCode::RankDeficientDesign, "fewer design points than inputs");
  const Eigen::MatrixXd B = cov.whiten(F);
  const Eigen::VectorXd z = cov.whiten(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  qr.setThreshold(1e-12);
  if (qr.rank() < F.cols()) throw Error(ErrorCode::RankDeficientDesign, "F^T R^{-1} F is singular");
  return qr.solve(z);
}

Eigen::VectorXd gls_coefficients(const ModelSpec& spec, const Hyperparameters& hp, const Dataset& d, int j) {
  check_output_index(d, j);
  validate_hyperparameters(spec, hp);
  return ProfileLikelihood(spec, d, j).evaluate(hp).S;
}

double profile_log_likelihood(const ModelSpec& spec, const Hyperparameters& hp, const Dataset& d, int j) {
  check_output_index(d, j);
  validate_hyperparameters(spec, hp);
  return ProfileLikelihood(spec, d, j).evaluate(hp).value;
}

FittedModel fit(const ModelSpec& spec, const Dataset& d, const FitOptions& opts) {
  validate_model_spec(spec);
  validate_dataset(d);
  if (d.q() != spec.q || d.p() != spec.p) throw Error(ErrorCode::DimensionMismatch, "dataset does not match spec");
  if (d.k() < spec.q) throw Error(ErrorCode::RankDeficientDesign, "need at least q design points");
  FittedModel m;
  m.spec = spec;
  m.data = d;
  m.unit_design = d.bounds.to_unit(d.design);
  m.outputs.reserve(spec.p);
  for (int j = 0; j < spec.p; ++j) m.outputs.push_back(fit_output(spec, d, j, opts));
  return m;
}

FittedModel condition(const ModelSpec& spec, const Dataset& d, const std::vector<Hyperparameters>& hps) {
  validate_model_spec(spec);
  validate_dataset(d);
  if (static_cast<int>(hps.size()) != spec.p) throw Error(ErrorCode::DimensionMismatch, "one hp set per output");
  FittedModel m;
  m.spec = spec;
  m.data = d;
  m.unit_design = d.bounds.to_unit(d.design);
  for (int j = 0; j < spec.p; ++j) {
    validate_hyperparameters(spec, hps[j]);
    m.outputs.push_back(make_output(ProfileLikelihood(spec, d, j), hps[j]));
  }
  return m;
}

Eigen::VectorXd model_cross_covariance(const FittedModel& m, int j, const ForcePoint& f0) {
  const OutputModel& o = m.outputs.at(j);
  const Eigen::VectorXd u0 = m.data.bounds.to_unit(f0);
  const Correlation c{o.hp.theta};
  const Eigen::Index k = m.unit_design.rows();
  Eigen::VectorXd r(k);
  for (Eigen::Index t = 0; t < k; ++t) r[t] = o.hp.tau2 * correlation(u0, m.unit_design.row(t).transpose(), c);
  if (m.spec.variant == ModelVariant::SurrogateWithUncertainties) r.noalias() += o.hp.phi2 * (m.data.design * f0);
  return r;
}

Eigen::VectorXd predict(const FittedModel& m, const ForcePoint& f0) {
  if (f0.size() != m.spec.q) throw Error(ErrorCode::DimensionMismatch, "prediction point has wrong length");
  Eigen::VectorXd y(m.spec.p);
  for (int j = 0; j < m.spec.p; ++j) {
    const OutputModel& o = m.outputs[j];
    y[j] = f0.dot(o.S_hat) + model_cross_covariance(m, j, f0).dot(o.alpha);
  }
  return y;
}

Eigen::VectorXd predict_variance(const FittedModel& m, const ForcePoint& f0, int* clamped) {
  if (f0.size() != m.spec.q) throw Error(ErrorCode::DimensionMismatch, "prediction point has wrong length");
  Eigen::VectorXd var(m.spec.p);
  int negatives = 0;
  for (int j = 0; j < m.spec.p; ++j) {
    const OutputModel& o = m.outputs[j];
    double prior = o.hp.tau2;
    if (m.spec.variant == ModelVariant::SurrogateWithUncertainties) prior += o.hp.phi2 * f0.squaredNorm();
    const double v = prior - o.bundle.whiten(model_cross_covariance(m, j, f0)).squaredNorm();
    if (v < 0.0) ++negatives;
    var[j] = std::max(v, 0.0);
  }
  if (clamped) *clamped = negatives;
  return var;
}

}  // namespace activegp
