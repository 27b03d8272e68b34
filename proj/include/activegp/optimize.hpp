#pragma once

#include <functional>

#include <Eigen/Dense>

namespace activegp {

/// Objective to minimize. When `grad` is non-null the callee fills it.
/// Infeasible points return +inf.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct MinimizeOptions {
  int max_iterations = 200;   // quasi-Newton iterations
  int max_evaluations = 4000; // hard cap on objective calls
  double f_tolerance = 1e-9;  // relative decrease treated as stalled
  double g_tolerance = 1e-6;  // projected-gradient infinity norm
  int memory = 8;             // L-BFGS pairs
  double initial_step = 0.5;  // simplex edge length
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

/// Projected limited-memory BFGS on the box [lo, hi] with a backtracking Armijo search
/// along the projection arc. Never returns a point worse than the clamped start.
MinimizeResult minimize_box_lbfgs(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi, const MinimizeOptions& opts = {});

/// Nelder-Mead simplex with vertices clamped into the box. Gradient-free.
MinimizeResult minimize_simplex(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, const MinimizeOptions& opts = {});

}  // namespace activegp
