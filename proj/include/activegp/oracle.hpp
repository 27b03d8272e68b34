#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "activegp/core.hpp"

namespace activegp {

/// Knobs for building a synthetic ground-truth response surface.
struct OracleConfig {
  int q = 10;
  int p = 6;
  Bounds bounds = Bounds::uniform(10);
  std::uint64_t seed = 0;
  double tau2 = 0.01;              // variance of the GP part
  double theta = 0.02;             // correlation decay on unit-scaled inputs, every dimension
  int anchors = 400;               // size of the anchor LHD the GP part is drawn on
  double sensitivity_scale = 1e-4; // std of the entries of the true linear map S*
  double noise_fraction = 0.1;     // measurement noise std as a fraction of response std
  double input_sd = 2.0;           // actuator force noise std (force units), isotropic
  bool gp_enabled = true;
};

/// Fully materialized oracle: everything needed to evaluate truth and draw observations.
struct OracleSpec {
  int q = 0;
  int p = 0;
  Bounds bounds;
  Eigen::MatrixXd S_star;          // q x p
  double tau2_star = 0.0;
  Eigen::VectorXd theta_star;      // length q
  Eigen::MatrixXd anchors;         // A x q raw forces
  Eigen::MatrixXd anchor_values;   // A x p, GP part at the anchors
  Eigen::MatrixXd anchor_weights;  // A x p, interpolation weights
  Eigen::MatrixXd sigma_F_star;    // q x q input-noise covariance
  Eigen::VectorXd sigma_eps2_star; // length p measurement-noise variances
  std::uint64_t seed = 0;
  bool gp_enabled = true;
};

[[nodiscard]] OracleSpec make_oracle(const OracleConfig& cfg);

/// The GP part z*(f) alone.
[[nodiscard]] Eigen::VectorXd oracle_gp_part(const OracleSpec& spec, const ForcePoint& f);

/// Noise-free response f S* + z*(f). Throws OutOfBounds.
[[nodiscard]] Eigen::VectorXd oracle_truth(const OracleSpec& spec, const ForcePoint& f);

/// Truth at a perturbed input plus measurement noise. The perturbed input is clamped into
/// the bounds; `clamped` reports whether that happened.
[[nodiscard]] Eigen::VectorXd oracle_observe(const OracleSpec& spec, const ForcePoint& f, std::mt19937_64& rng,
                                             bool* clamped = nullptr);

/// Same draws as oracle_observe, also returning the perturbed force that was evaluated.
[[nodiscard]] Eigen::VectorXd oracle_observe(const OracleSpec& spec, const ForcePoint& f, std::mt19937_64& rng,
                                             ForcePoint* perturbed, bool* clamped);

}  // namespace activegp
