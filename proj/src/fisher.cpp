#include "activegp/fisher.hpp"

#include <cmath>

#include "activegp/error.hpp"

namespace activegp {

namespace {

bool gls_matrix_ok(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  return ldlt.info() == Eigen::Success && ldlt.isPositive() &&
         ldlt.vectorD().minCoeff() > 1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff();
}

}  // namespace

FisherTerms fisher_terms(const ModelSpec& spec, const Hyperparameters& hp, const Eigen::VectorXd& S,
                         const Bounds& bounds, const DesignMatrix& F, const Eigen::VectorXi& replications,
                         const Eigen::VectorXd& residual) {
  if (residual.size() != F.rows()) throw Error(ErrorCode::DimensionMismatch, "residual length differs from design");
  const CovarianceModel model(spec, bounds, F, replications);
  const Eigen::MatrixXd corr = model.correlation_matrix(hp.theta);
  const CovarianceBundle cov = factorize(model.covariance(hp, S, corr));
  const Eigen::MatrixXd Kinv = cov.inverse();
  const int n = spec.parameter_count();
  const Eigen::Index k = F.rows();

  const Eigen::MatrixXd KinvF = Kinv * F;
  const Eigen::MatrixXd A = F.transpose() * KinvF;  // F^T R^{-1} F
  const Eigen::LDLT<Eigen::MatrixXd> A_ldlt(A);
  if (!gls_matrix_ok(A_ldlt)) throw Error(ErrorCode::RankDeficientDesign, "F^T R^{-1} F is singular");
  const Eigen::VectorXd Kinv_r = Kinv * residual;

  std::vector<Eigen::MatrixXd> M(n);  // R^{-1} dR/da
  FisherTerms t;
  t.dS.resize(spec.q, n);
  for (int a = 0; a < n; ++a) {
    const Eigen::MatrixXd dK = model.derivative(hp, a, corr);
    M[a].noalias() = Kinv * dK;
    // dS/da = -(F^T R^-1 F)^-1 F^T R^-1 dR/da R^-1 (Ybar - F S)
    t.dS.col(a) = -A_ldlt.solve(KinvF.transpose() * (dK * Kinv_r));
  }
  t.coefficient = t.dS.transpose() * A * t.dS;
  t.trace.resize(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      // tr(M_a M_b) = sum_ij M_a(i,j) M_b(j,i)
      double tr = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) tr += M[a].row(i).dot(M[b].col(i));
      t.trace(a, b) = t.trace(b, a) = 0.5 * tr;
    }
  }
  return t;
}

FisherMatrix fisher_information(const FittedModel& m, int j, const std::optional<ForcePoint>& augmented_with) {
  const OutputModel& o = m.outputs.at(j);
  const Dataset& d = m.data;
  DesignMatrix F = d.design;
  Eigen::VectorXi reps = d.replications;
  Eigen::VectorXd resid = d.sample_means.col(j) - d.design * o.S_hat;
  if (augmented_with) {
    if (augmented_with->size() != d.q()) throw Error(ErrorCode::DimensionMismatch, "candidate has wrong length");
    const Eigen::Index k = F.rows();
    F.conservativeResize(k + 1, Eigen::NoChange);
    F.row(k) = augmented_with->transpose();
    reps.conservativeResize(k + 1);
    reps[k] = 1;
    resid.conservativeResize(k + 1);
    resid[k] = 0.0;
  }
  const FisherTerms t = fisher_terms(m.spec, o.hp, o.S_hat, d.bounds, F, reps, resid);
  FisherMatrix fi;
  fi.matrix = t.coefficient + t.trace;
  fi.matrix = 0.5 * (fi.matrix + fi.matrix.transpose()).eval();
  fi.labels = parameter_labels(m.spec);
  return fi;
}

double information_logdet(const Eigen::MatrixXd& info, bool* regularized) {
  if (info.rows() != info.cols() || info.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "information matrix must be square and nonempty");
  }
  if (!info.allFinite()) throw Error(ErrorCode::SingularInformation, "information matrix is not finite");
  const Eigen::VectorXd diag = info.diagonal();
  if (diag.minCoeff() <= 0.0) throw Error(ErrorCode::SingularInformation, "nonpositive information diagonal");
  const Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd C = scale.asDiagonal() * info * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  bool reg = false;
  if (!(lo > 0.0) || hi / lo > 1e12) {
    C.diagonal().array() += 1e-10 * C.diagonal().mean();
    reg = true;
  }
  if (regularized) *regularized = reg;
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularInformation, "information matrix not PD");
  const double logdet_c = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  if (!std::isfinite(logdet_c)) throw Error(ErrorCode::SingularInformation, "information matrix not PD");
  return logdet_c + diag.array().log().sum();
}

double d_optimality_score(const FisherMatrix& fi, bool* regularized) {
  return std::exp(-information_logdet(fi.matrix, regularized));
}

AugmentedFisher::AugmentedFisher(const FittedModel& m, int j)
    : model_(&m), output_(j), cov_(m.spec, m.data) {
  const OutputModel& o = m.outputs.at(j);
  const Eigen::MatrixXd corr = cov_.correlation_matrix(o.hp.theta);
  const CovarianceBundle K = factorize(cov_.covariance(o.hp, o.S_hat, corr));
  Kinv_ = K.inverse();
  const int n = m.spec.parameter_count();
  dK_.reserve(n);
  std::vector<Eigen::MatrixXd> M(n);
  for (int a = 0; a < n; ++a) {
    dK_.push_back(cov_.derivative(o.hp, a, corr));
    M[a].noalias() = Kinv_ * dK_[a];
  }
  base_trace_.resize(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double tr = 0.0;
      for (Eigen::Index i = 0; i < Kinv_.rows(); ++i) tr += M[a].row(i).dot(M[b].col(i));
      base_trace_(a, b) = base_trace_(b, a) = tr;
    }
  }
  resid_ = m.data.sample_means.col(j) - m.data.design * o.S_hat;
  Kinv_resid_ = Kinv_ * resid_;
  FtKinvF_ = m.data.design.transpose() * Kinv_ * m.data.design;
  if (m.spec.variant == ModelVariant::SurrogateWithUncertainties) actuator_ = actuator_variance(m.spec, o.S_hat);
}

FisherMatrix AugmentedFisher::evaluate(const ForcePoint& f0) const {
  const FittedModel& m = *model_;
  const OutputModel& o = m.outputs[output_];
  const Hyperparameters& hp = o.hp;
  const bool surrogate = m.spec.variant == ModelVariant::SurrogateWithUncertainties;
  const int n = m.spec.parameter_count();
  const int mth = m.spec.theta_count();
  const DesignMatrix& F = m.data.design;
  const Eigen::Index k = F.rows();
  if (f0.size() != m.spec.q) throw Error(ErrorCode::DimensionMismatch, "candidate has wrong length");

  // New row/column of the covariance and its parameter derivatives.
  const Eigen::VectorXd u0 = m.data.bounds.to_unit(f0);
  Eigen::VectorXd rho(k);
  std::vector<Eigen::VectorXd> sq(mth, Eigen::VectorXd::Zero(k));
  for (Eigen::Index t = 0; t < k; ++t) {
    const Eigen::VectorXd ut = m.unit_design.row(t).transpose();
    double s = 0.0;
    for (int d = 0; d < m.spec.q; ++d) {
      const double diff2 = (u0[d] - ut[d]) * (u0[d] - ut[d]);
      const int c = m.spec.isotropic ? 0 : d;
      sq[c][t] += diff2;
      s += hp.theta[c] * diff2;
    }
    rho[t] = std::exp(-s);
  }
  const Eigen::VectorXd Ff0 = F * f0;
  Eigen::VectorXd c = hp.tau2 * rho;
  double kappa = hp.tau2 + hp.sigma2;
  if (surrogate) {
    c += hp.phi2 * Ff0;
    kappa += hp.phi2 * f0.squaredNorm() + actuator_;
  }
  const Eigen::VectorXd v = Kinv_ * c;
  const double schur = kappa - c.dot(v);
  if (!(schur > 1e-12 * kappa)) return fisher_information(m, output_, f0);
  const double u = 1.0 / schur;

  std::vector<Eigen::VectorXd> d_col(n);
  Eigen::VectorXd d_diag(n);
  d_col[0] = rho;
  d_diag[0] = 1.0;
  for (int a = 1; a <= mth; ++a) {
    d_col[a] = -hp.tau2 * rho.cwiseProduct(sq[a - 1]);
    d_diag[a] = 0.0;
  }
  d_col[mth + 1] = Eigen::VectorXd::Zero(k);
  d_diag[mth + 1] = 1.0;
  if (surrogate) {
    d_col[mth + 2] = Ff0;
    d_diag[mth + 2] = f0.squaredNorm();
  }

  // Trace term: P = blockdiag(K^-1, 0) + u w w^T with w = [v; -1].
  Eigen::MatrixXd g_top(k, n);
  Eigen::VectorXd g_last(n);
  Eigen::VectorXd wAw(n);
  for (int a = 0; a < n; ++a) {
    g_top.col(a) = dK_[a] * v - d_col[a];
    g_last[a] = d_col[a].dot(v) - d_diag[a];
    wAw[a] = v.dot(g_top.col(a)) - g_last[a];
  }
  const Eigen::MatrixXd h_top = Kinv_ * g_top;
  const Eigen::MatrixXd cross = g_top.transpose() * h_top;
  const Eigen::MatrixXd trace = 0.5 * (base_trace_ + 2.0 * u * cross + u * u * wAw * wAw.transpose());

  // Coefficient term with the augmented F' = [F; f0^T] and residual [r; 0].
  const Eigen::VectorXd Ftw = F.transpose() * v - f0;
  const Eigen::MatrixXd A = FtKinvF_ + u * Ftw * Ftw.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> A_ldlt(A);
  if (!gls_matrix_ok(A_ldlt)) throw Error(ErrorCode::RankDeficientDesign, "F^T R^{-1} F is singular");
  const double vr = v.dot(resid_);
  const Eigen::VectorXd beta_top = Kinv_resid_ + u * vr * v;
  const double beta_last = -u * vr;
  Eigen::MatrixXd dS(m.spec.q, n);
  for (int a = 0; a < n; ++a) {
    const Eigen::VectorXd gamma_top = dK_[a] * beta_top + d_col[a] * beta_last;
    const double gamma_last = d_col[a].dot(beta_top) + d_diag[a] * beta_last;
    const double wg = v.dot(gamma_top) - gamma_last;
    const Eigen::VectorXd zeta_top = Kinv_ * gamma_top + (u * wg) * v;
    const double zeta_last = -u * wg;
    dS.col(a) = -A_ldlt.solve(F.transpose() * zeta_top + f0 * zeta_last);
  }

  FisherMatrix fi;
  fi.matrix = dS.transpose() * A * dS + trace;
  fi.matrix = 0.5 * (fi.matrix + fi.matrix.transpose()).eval();
  fi.labels = parameter_labels(m.spec);
  return fi;
}

}  // namespace activegp
