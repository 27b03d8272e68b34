#include "activegp/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "activegp/error.hpp"

namespace activegp {

namespace {

void check_config(const LhdConfig& cfg) {
  if (cfg.n < 1 || cfg.q < 1) throw Error(ErrorCode::InvalidArgument, "LHD needs n >= 1 and q >= 1");
  if (cfg.bounds.dim() != cfg.q) throw Error(ErrorCode::DimensionMismatch, "LHD bounds must have q entries");
  validate_bounds(cfg.bounds);
  if (cfg.sweeps < 0) throw Error(ErrorCode::InvalidArgument, "sweeps must be nonnegative");
}

Eigen::MatrixXi random_permutations(const LhdConfig& cfg, std::mt19937_64& rng) {
  Eigen::MatrixXi bins(cfg.n, cfg.q);
  std::vector<int> perm(cfg.n);
  for (int c = 0; c < cfg.q; ++c) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int r = 0; r < cfg.n; ++r) bins(r, c) = perm[r];
  }
  return bins;
}

DesignMatrix to_design(const Eigen::MatrixXi& bins, const LhdConfig& cfg) {
  DesignMatrix x(cfg.n, cfg.q);
  for (int r = 0; r < cfg.n; ++r) {
    Eigen::VectorXd u(cfg.q);
    for (int c = 0; c < cfg.q; ++c) u[c] = (bins(r, c) + 0.5) / cfg.n;
    x.row(r) = cfg.bounds.from_unit(u).transpose();
  }
  return x;
}

double sqdist(const Eigen::MatrixXi& bins, int a, int b) {
  // Bin midpoints are evenly spaced, so distances in bin units rank identically to unit-scaled ones.
  double s = 0.0;
  for (Eigen::Index c = 0; c < bins.cols(); ++c) {
    const double d = bins(a, c) - bins(b, c);
    s += d * d;
  }
  return s;
}

}  // namespace

DesignMatrix random_lhd(const LhdConfig& cfg) {
  check_config(cfg);
  std::mt19937_64 rng(cfg.seed);
  return to_design(random_permutations(cfg, rng), cfg);
}

DesignMatrix maximin_lhd(const LhdConfig& cfg) {
  check_config(cfg);
  std::mt19937_64 rng(cfg.seed);
  Eigen::MatrixXi bins = random_permutations(cfg, rng);
  const int n = cfg.n;
  if (n < 3) return to_design(bins, cfg);

  Eigen::MatrixXd d2(n, n);
  for (int a = 0; a < n; ++a) {
    d2(a, a) = std::numeric_limits<double>::infinity();
    for (int b = a + 1; b < n; ++b) d2(a, b) = d2(b, a) = sqdist(bins, a, b);
  }
  auto closest = [&](int& ia, int& ib) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (d2(a, b) < best) {
          best = d2(a, b);
          ia = a;
          ib = b;
        }
      }
    }
    return best;
  };

  int pa = 0;
  int pb = 1;
  double current = closest(pa, pb);
  std::uniform_int_distribution<int> pick_row(0, n - 1);
  std::uniform_int_distribution<int> pick_col(0, cfg.q - 1);
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd save1(n);
  Eigen::VectorXd save2(n);
  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    const int r1 = coin(rng) ? pa : pb;
    int r2 = pick_row(rng);
    if (r2 == r1) r2 = (r2 + 1) % n;
    const int c = pick_col(rng);
    std::swap(bins(r1, c), bins(r2, c));
    save1 = d2.col(r1);
    save2 = d2.col(r2);
    for (int i = 0; i < n; ++i) {
      if (i != r1) d2(i, r1) = d2(r1, i) = sqdist(bins, i, r1);
      if (i != r2) d2(i, r2) = d2(r2, i) = sqdist(bins, i, r2);
    }
    int na = 0;
    int nb = 1;
    const double candidate = closest(na, nb);
    if (candidate > current) {
      current = candidate;
      pa = na;
      pb = nb;
    } else {
      std::swap(bins(r1, c), bins(r2, c));
      d2.col(r1) = save1;
      d2.row(r1) = save1.transpose();
      d2.col(r2) = save2;
      d2.row(r2) = save2.transpose();
    }
  }
  return to_design(bins, cfg);
}

double min_pairwise_distance(const DesignMatrix& rows, const Bounds& bounds) {
  const Eigen::MatrixXd u = bounds.to_unit(rows);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < u.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < u.rows(); ++b) best = std::min(best, (u.row(a) - u.row(b)).squaredNorm());
  }
  return std::sqrt(best);
}

Eigen::MatrixXi bin_indices(const DesignMatrix& rows, const Bounds& bounds) {
  const Eigen::MatrixXd u = bounds.to_unit(rows);
  const auto n = static_cast<int>(rows.rows());
  Eigen::MatrixXi bins(u.rows(), u.cols());
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      bins(r, c) = std::clamp(static_cast<int>(std::floor(u(r, c) * n)), 0, n - 1);
    }
  }
  return bins;
}

bool is_latin(const DesignMatrix& rows, const Bounds& bounds) {
  const Eigen::MatrixXi bins = bin_indices(rows, bounds);
  const auto n = static_cast<int>(rows.rows());
  for (Eigen::Index c = 0; c < bins.cols(); ++c) {
    std::vector<int> seen(n, 0);
    for (int r = 0; r < n; ++r) {
      if (++seen[bins(r, c)] > 1) return false;
    }
  }
  return true;
}

}  // namespace activegp
