#include "activegp/active.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "activegp/design.hpp"
#include "activegp/error.hpp"
#include "activegp/fisher.hpp"
#include "activegp/seed.hpp"

namespace activegp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pool(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W) {
  if (pool.rows() == 0) throw Error(ErrorCode::EmptyPool, "candidate pool is empty");
  if (pool.cols() != m.spec.q) throw Error(ErrorCode::DimensionMismatch, "pool has wrong width");
  if (W.size() != m.spec.p) throw Error(ErrorCode::DimensionMismatch, "weights must have p entries");
}

int argmax(const Eigen::VectorXd& s) {
  int best = -1;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (std::isnan(s[i])) continue;
    if (best < 0 || s[i] > s[best]) best = static_cast<int>(i);
  }
  if (best < 0) throw Error(ErrorCode::EmptyPool, "no candidate has a finite score");
  return best;
}

int argmin(const Eigen::VectorXd& s) { return argmax(-s); }

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::VWAL: return "vwal";
    case StrategyKind::DOWAL: return "dowal";
    case StrategyKind::Random: return "random";
    case StrategyKind::MaximinDistance: return "maximin";
    case StrategyKind::ExpectedImprovement: return "ei";
    case StrategyKind::StaticDOE: return "static";
  }
  return "unknown";
}

StrategyKind parse_strategy(const std::string& name) {
  for (StrategyKind s : all_strategies()) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::ConfigError, "unknown strategy '" + name + "'");
}

std::vector<StrategyKind> all_strategies() {
  return {StrategyKind::VWAL,
          StrategyKind::DOWAL,
          StrategyKind::Random,
          StrategyKind::MaximinDistance,
          StrategyKind::ExpectedImprovement,
          StrategyKind::StaticDOE};
}

Eigen::VectorXd vwal_scores(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W) {
  check_pool(m, pool, W);
  Eigen::VectorXd s(pool.rows());
  for (Eigen::Index i = 0; i < pool.rows(); ++i) s[i] = W.dot(predict_variance(m, pool.row(i).transpose()));
  return s;
}

int select_vwal(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W) {
  return argmax(vwal_scores(m, pool, W));
}

Eigen::VectorXd dowal_scores(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W) {
  check_pool(m, pool, W);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(pool.rows());
  std::vector<bool> bad(pool.rows(), false);
  for (int j = 0; j < m.spec.p; ++j) {
    if (W[j] == 0.0) continue;
    const AugmentedFisher af(m, j);
    for (Eigen::Index i = 0; i < pool.rows(); ++i) {
      if (bad[i]) continue;
      try {
        s[i] += W[j] * d_optimality_score(af.evaluate(pool.row(i).transpose()));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularInformation && e.code() != ErrorCode::NotPositiveDefinite) throw;
        bad[i] = true;
      }
    }
  }
  bool any = false;
  for (Eigen::Index i = 0; i < pool.rows(); ++i) {
    if (bad[i]) {
      s[i] = std::numeric_limits<double>::infinity();
    } else {
      any = true;
    }
  }
  if (!any) throw Error(ErrorCode::SingularInformation, "information is singular for every candidate");
  return s;
}

int select_dowal(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W) {
  return argmin(dowal_scores(m, pool, W));
}

int select_random(Eigen::Index pool_size, std::mt19937_64& rng) {
  if (pool_size <= 0) throw Error(ErrorCode::EmptyPool, "candidate pool is empty");
  std::uniform_int_distribution<Eigen::Index> pick(0, pool_size - 1);
  return static_cast<int>(pick(rng));
}

int select_maximin_distance(const DesignMatrix& training, const DesignMatrix& pool, const Bounds& bounds) {
  if (pool.rows() == 0) throw Error(ErrorCode::EmptyPool, "candidate pool is empty");
  if (pool.cols() != bounds.dim() || training.cols() != bounds.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "pool and training widths must match the bounds");
  }
  const Eigen::MatrixXd ut = bounds.to_unit(training);
  const Eigen::MatrixXd up = bounds.to_unit(pool);
  Eigen::VectorXd s(pool.rows());
  for (Eigen::Index i = 0; i < up.rows(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < ut.rows(); ++t) nearest = std::min(nearest, (up.row(i) - ut.row(t)).squaredNorm());
    s[i] = nearest;
  }
  return argmax(s);
}

double expected_improvement(double mu, double s, double y_min) {
  const double gap = y_min - mu;
  if (!(s > 0.0)) return std::max(gap, 0.0);
  const double z = gap / s;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return gap * cdf + s * pdf;
}

Eigen::VectorXd ei_scores(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W) {
  check_pool(m, pool, W);
  const double y_min = (m.data.sample_means * W).minCoeff();
  Eigen::VectorXd s(pool.rows());
  for (Eigen::Index i = 0; i < pool.rows(); ++i) {
    const Eigen::VectorXd f = pool.row(i).transpose();
    const double mu = W.dot(predict(m, f));
    const double var = W.cwiseAbs2().dot(predict_variance(m, f));
    s[i] = expected_improvement(mu, std::sqrt(var), y_min);
  }
  return s;
}

int select_ei(const FittedModel& m, const DesignMatrix& pool, const Eigen::VectorXd& W) {
  return argmax(ei_scores(m, pool, W));
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "";
    case StopReason::Threshold: return "threshold";
    case StopReason::Budget: return "budget";
    case StopReason::PoolExhausted: return "pool_exhausted";
    case StopReason::Error: return "error";
  }
  return "";
}

StopReason parse_stop_reason(const std::string& name) {
  for (StopReason r : {StopReason::None, StopReason::Threshold, StopReason::Budget, StopReason::PoolExhausted,
                       StopReason::Error}) {
    if (to_string(r) == name) return r;
  }
  throw Error(ErrorCode::ConfigError, "unknown stop reason '" + name + "'");
}

StopDecision check_stop(const LearningCurve& curve, double threshold, int patience, int iteration, int n_iter) {
  StopDecision d;
  if (std::isfinite(threshold)) {
    for (auto it = curve.rows.rbegin(); it != curve.rows.rend() && it->mean_mad < threshold; ++it) ++d.streak;
  }
  if (patience >= 1 && d.streak >= patience) {
    d.stop = true;
    d.reason = StopReason::Threshold;
  } else if (iteration >= n_iter) {
    d.stop = true;
    d.reason = StopReason::Budget;
  }
  return d;
}

Eigen::VectorXd observe_point(const OracleSpec& oracle, const ForcePoint& f, std::uint64_t seed,
                              const std::string& tag) {
  std::mt19937_64 rng(derive_seed(seed, tag));
  return oracle_observe(oracle, f, rng);
}

namespace {

class Loop {
 public:
  Loop(const LoopConfig& cfg, StrategyKind strategy, const OracleSpec& oracle, const LoopPools& pools)
      : cfg_(cfg), strategy_(strategy), oracle_(oracle), pools_(pools),
        rng_(derive_seed(cfg.seeds.strategy, "select")) {
    res_.curve.strategy = strategy;
  }

  LoopResult run() {
    const auto t_start = std::chrono::steady_clock::now();
    if (pools_.initial.rows() == 0) throw Error(ErrorCode::ConfigError, "initial design is empty");
    if (pools_.initial.cols() != oracle_.q || pools_.candidates.cols() != oracle_.q) {
      throw Error(ErrorCode::DimensionMismatch, "pool widths must equal q");
    }
    available_.resize(static_cast<std::size_t>(pools_.candidates.rows()));
    for (std::size_t i = 0; i < available_.size(); ++i) available_[i] = static_cast<int>(i);

    set_data(pools_.initial, "initial:");
    int iteration = 0;
    auto t_iter = std::chrono::steady_clock::now();
    if (!step(iteration, -1, t_iter)) return finish(t_start);
    for (;;) {
      const StopDecision dec = check_stop(res_.curve, cfg_.threshold, cfg_.patience, iteration, cfg_.n_iter);
      if (dec.stop) {
        res_.curve.rows.back().stop_reason = dec.reason;
        break;
      }
      t_iter = std::chrono::steady_clock::now();
      int id = -1;
      if (strategy_ == StrategyKind::StaticDOE) {
        const int n = static_cast<int>(pools_.initial.rows()) + iteration + 1;
        LhdConfig lc;
        lc.n = n;
        lc.q = oracle_.q;
        lc.bounds = oracle_.bounds;
        lc.seed = derive_seed(cfg_.seeds.strategy, "static:" + std::to_string(n));
        lc.sweeps = cfg_.lhd_sweeps;
        set_data(maximin_lhd(lc), "static:" + std::to_string(n) + ":");
      } else {
        if (available_.empty()) {
          res_.curve.rows.back().stop_reason = StopReason::PoolExhausted;
          break;
        }
        DesignMatrix pool(static_cast<Eigen::Index>(available_.size()), oracle_.q);
        for (std::size_t i = 0; i < available_.size(); ++i) {
          pool.row(static_cast<Eigen::Index>(i)) = pools_.candidates.row(available_[i]);
        }
        int pick = 0;
        try {
          pick = select(pool);
        } catch (const Error& e) {
          fail(e);
          break;
        }
        id = available_[static_cast<std::size_t>(pick)];
        available_.erase(available_.begin() + pick);
        res_.consumed.push_back(id);
        const ForcePoint f = pools_.candidates.row(id).transpose();
        const Eigen::VectorXd y = observe_point(oracle_, f, cfg_.seeds.observe, "candidate:" + std::to_string(id));
        res_.data = append_point(res_.data, f, y.transpose());
        res_.truth.conservativeResize(res_.truth.rows() + 1, Eigen::NoChange);
        res_.truth.row(res_.truth.rows() - 1) = oracle_truth(oracle_, f).transpose();
      }
      ++iteration;
      if (!step(iteration, id, t_iter)) break;
    }
    return finish(t_start);
  }

 private:
  void set_data(const DesignMatrix& design, const std::string& tag) {
    const Eigen::Index k = design.rows();
    Eigen::MatrixXd y(k, oracle_.p);
    res_.truth.resize(k, oracle_.p);
    for (Eigen::Index t = 0; t < k; ++t) {
      const ForcePoint f = design.row(t).transpose();
      y.row(t) = observe_point(oracle_, f, cfg_.seeds.observe, tag + std::to_string(t)).transpose();
      res_.truth.row(t) = oracle_truth(oracle_, f).transpose();
    }
    res_.data = make_dataset(oracle_.bounds, design, y);
  }

  int select(const DesignMatrix& pool) {
    const FittedModel& m = *res_.final_model;
    const Eigen::VectorXd& W = cfg_.spec.weights;
    switch (strategy_) {
      case StrategyKind::VWAL: return select_vwal(m, pool, W);
      case StrategyKind::DOWAL: return select_dowal(m, pool, W);
      case StrategyKind::Random: return select_random(pool.rows(), rng_);
      case StrategyKind::MaximinDistance: return select_maximin_distance(res_.data.design, pool, oracle_.bounds);
      case StrategyKind::ExpectedImprovement: return select_ei(m, pool, W);
      case StrategyKind::StaticDOE: break;
    }
    throw Error(ErrorCode::InvalidArgument, "strategy has no pool selector");
  }

  // Fit and record one row; false when the fit failed.
  bool step(int iteration, int id, std::chrono::steady_clock::time_point t_iter) {
    CurveRow row;
    row.iteration = iteration;
    row.n_samples = res_.data.k();
    row.strategy = strategy_;
    row.selected_point_id = id;
    try {
      FitOptions fo = cfg_.fit;
      fo.seed = derive_seed(cfg_.seeds.fit, "iteration:" + std::to_string(iteration));
      FittedModel m = fit(cfg_.spec, res_.data, fo);
      const Eigen::VectorXd mad = per_output_mad(m, pools_.eval);
      row.mean_mad = mad.mean();
      row.max_mad = mad.maxCoeff();
      row.fit_loglik = m.total_log_likelihood();
      row.cv_mse = kNaN;
      if (cfg_.compute_cv && res_.data.k() >= cfg_.spec.q + 2) {
        row.cv_mse = cv_mse(res_.data, cfg_.spec, res_.truth, m, fo, cfg_.cv).mse;
      }
      res_.final_model = std::move(m);
    } catch (const Error& e) {
      fail(e);
      return false;
    }
    row.wall_ms = cfg_.record_wall_time ? elapsed_ms(t_iter) : 0.0;
    res_.curve.rows.push_back(row);
    return true;
  }

  void fail(const Error& e) {
    res_.curve.error = e.what();
    if (!res_.curve.rows.empty()) res_.curve.rows.back().stop_reason = StopReason::Error;
  }

  LoopResult finish(std::chrono::steady_clock::time_point t_start) {
    res_.total_ms = elapsed_ms(t_start);
    return std::move(res_);
  }

  const LoopConfig& cfg_;
  StrategyKind strategy_;
  const OracleSpec& oracle_;
  const LoopPools& pools_;
  std::mt19937_64 rng_;
  std::vector<int> available_;
  LoopResult res_;
};

}  // namespace

LoopResult run_loop(const LoopConfig& cfg, StrategyKind strategy, const OracleSpec& oracle, const LoopPools& pools) {
  validate_model_spec(cfg.spec);
  if (cfg.spec.q != oracle.q || cfg.spec.p != oracle.p) {
    throw Error(ErrorCode::DimensionMismatch, "model and oracle dimensions differ");
  }
  if (cfg.n_iter < 0) throw Error(ErrorCode::ConfigError, "n_iter must be nonnegative");
  return Loop(cfg, strategy, oracle, pools).run();
}

}  // namespace activegp
