#include "activegp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

namespace activegp {

namespace {

Eigen::VectorXd clamp_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Zero on components pinned at a bound with the gradient pushing outward.
Eigen::VectorXd free_mask(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)) mask[i] = 0.0;
  }
  return mask;
}

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<Pair>& pairs, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  if (!pairs.empty()) {
    const auto& last = pairs.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double beta = pairs[i].rho * pairs[i].y.dot(q);
    q += (alpha[i] - beta) * pairs[i].s;
  }
  return -q;
}

}  // namespace

MinimizeResult minimize_box_lbfgs(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi, const MinimizeOptions& opts) {
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  res.x = clamp_box(x0, lo, hi);
  Eigen::VectorXd g(n);
  res.value = f(res.x, &g);
  res.evaluations = 1;
  if (!std::isfinite(res.value) || !g.allFinite()) return res;

  std::deque<Pair> pairs;
  int stalled = 0;
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    const Eigen::VectorXd projected = res.x - clamp_box(res.x - g, lo, hi);
    if (projected.lpNorm<Eigen::Infinity>() <= opts.g_tolerance) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opts.max_evaluations) break;

    const Eigen::VectorXd mask = free_mask(res.x, g, lo, hi);
    const Eigen::VectorXd g_free = g.cwiseProduct(mask);
    Eigen::VectorXd dir = two_loop(pairs, g_free).cwiseProduct(mask);
    if (!(dir.dot(g_free) < -1e-12 * dir.norm() * g_free.norm())) {
      pairs.clear();
      dir = -g_free;
    }
    double step = 1.0;
    if (pairs.empty()) step = std::min(1.0, 1.0 / std::max(dir.lpNorm<Eigen::Infinity>(), 1e-12));

    Eigen::VectorXd x_new;
    Eigen::VectorXd g_new(n);
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40 && res.evaluations < opts.max_evaluations; ++ls) {
      x_new = clamp_box(res.x + step * dir, lo, hi);
      f_new = f(x_new, &g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= res.value + 1e-4 * g.dot(x_new - res.x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (pairs.empty()) break;
      pairs.clear();
      continue;
    }
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      pairs.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
    }
    const double decrease = res.value - f_new;
    res.x = x_new;
    res.value = f_new;
    g = g_new;
    if (decrease <= opts.f_tolerance * (1.0 + std::abs(f_new))) {
      if (++stalled >= 3) {
        res.converged = true;
        break;
      }
    } else {
      stalled = 0;
    }
  }
  return res;
}

MinimizeResult minimize_simplex(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, const MinimizeOptions& opts) {
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x, nullptr);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> vertex(n + 1, clamp_box(x0, lo, hi));
  std::vector<double> value(n + 1);
  value[0] = eval(vertex[0]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = vertex[0];
    const double h = opts.initial_step;
    v[i] = v[i] + h <= hi[i] ? v[i] + h : v[i] - h;
    vertex[i + 1] = clamp_box(v, lo, hi);
    value[i + 1] = eval(vertex[i + 1]);
  }

  std::vector<int> order(n + 1);
  const int budget = std::max(opts.max_evaluations, static_cast<int>(n) + 2);
  while (res.evaluations < budget) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return value[a] < value[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[n - 1];
    ++res.iterations;
    if (std::isfinite(value[worst]) &&
        std::abs(value[worst] - value[best]) <= opts.f_tolerance * (1.0 + std::abs(value[best]))) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += vertex[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = clamp_box(centroid + (centroid - vertex[worst]), lo, hi);
    const double f_r = eval(reflected);
    if (f_r < value[best]) {
      const Eigen::VectorXd expanded = clamp_box(centroid + 2.0 * (centroid - vertex[worst]), lo, hi);
      const double f_e = eval(expanded);
      if (f_e < f_r) {
        vertex[worst] = expanded;
        value[worst] = f_e;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_r;
      }
      continue;
    }
    if (f_r < value[second]) {
      vertex[worst] = reflected;
      value[worst] = f_r;
      continue;
    }
    const bool outside = f_r < value[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (vertex[worst] - centroid));
    const double f_c = eval(contracted);
    if (f_c < std::min(f_r, value[worst])) {
      vertex[worst] = contracted;
      value[worst] = f_c;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      vertex[i] = vertex[best] + 0.5 * (vertex[i] - vertex[best]);
      value[i] = eval(vertex[i]);
    }
  }
  const auto it = std::min_element(value.begin(), value.end());
  res.x = vertex[static_cast<std::size_t>(it - value.begin())];
  res.value = *it;
  return res;
}

}  // namespace activegp
