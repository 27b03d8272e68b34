#include "activegp/eval.hpp"

#include <cmath>
#include <limits>

#include "activegp/error.hpp"
#include "activegp/seed.hpp"

namespace activegp {

EvalPool make_eval_pool(const OracleSpec& oracle, const DesignMatrix& points) {
  if (points.rows() < 2) throw Error(ErrorCode::InvalidArgument, "evaluation pool needs at least two points");
  EvalPool ep;
  ep.points = points;
  ep.truth.resize(points.rows(), oracle.p);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    ep.truth.row(i) = oracle_truth(oracle, points.row(i).transpose()).transpose();
  }
  return ep;
}

Eigen::MatrixXd predict_all(const FittedModel& m, const DesignMatrix& points) {
  if (points.cols() != m.spec.q) throw Error(ErrorCode::DimensionMismatch, "points have wrong width");
  Eigen::MatrixXd out(points.rows(), m.spec.p);
  for (Eigen::Index i = 0; i < points.rows(); ++i) out.row(i) = predict(m, points.row(i).transpose()).transpose();
  return out;
}

Eigen::VectorXd per_output_mad(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols() || truth.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and truth tables differ in shape");
  }
  Eigen::VectorXd mad(truth.cols());
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) s += std::abs(predicted(i, j) - truth(i, j));
    mad[j] = s / static_cast<double>(truth.rows());
  }
  return mad;
}

Eigen::VectorXd per_output_mad(const FittedModel& m, const EvalPool& ep) {
  if (ep.truth.cols() != m.spec.p) throw Error(ErrorCode::DimensionMismatch, "pool truth has wrong width");
  return per_output_mad(predict_all(m, ep.points), ep.truth);
}

double mean_mad(const FittedModel& m, const EvalPool& ep) { return per_output_mad(m, ep).mean(); }

double max_mad(const FittedModel& m, const EvalPool& ep) { return per_output_mad(m, ep).maxCoeff(); }

CvResult cv_mse(const Dataset& d, const ModelSpec& spec, const Eigen::MatrixXd& truth, const FittedModel& full,
                const FitOptions& fit_opts, const CvOptions& cv_opts) {
  if (truth.rows() != d.k() || truth.cols() != d.p()) {
    throw Error(ErrorCode::DimensionMismatch, "truth must be k x p");
  }
  std::vector<Hyperparameters> hps;
  for (const auto& o : full.outputs) hps.push_back(o.hp);

  CvResult res;
  double total = 0.0;
  for (int i = 0; i < d.k(); ++i) {
    ++res.folds;
    try {
      const Dataset fold = remove_point(d, i);
      FittedModel m;
      if (cv_opts.refit) {
        FitOptions o = fit_opts;
        o.seed = derive_seed(fit_opts.seed, "cv:fold:" + std::to_string(i));
        if (!cv_opts.full_restarts) o.restarts = cv_opts.restarts;
        o.warm_start = hps;
        m = fit(spec, fold, o);
      } else {
        m = condition(spec, fold, hps);
      }
      const Eigen::VectorXd err = predict(m, d.design.row(i).transpose()) - truth.row(i).transpose();
      total += err.squaredNorm() / static_cast<double>(err.size());
    } catch (const Error&) {
      ++res.failed;
      res.failed_folds.push_back(i);
    }
  }
  const int ok = res.folds - res.failed;
  res.mse = ok > 0 ? total / ok : std::numeric_limits<double>::quiet_NaN();
  return res;
}

}  // namespace activegp
