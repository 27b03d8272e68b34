#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace activegp {

/// One actuator force vector (length q, unscaled force units).
using ForcePoint = Eigen::VectorXd;

/// Stacked design, one ForcePoint per row (k x q).
using DesignMatrix = Eigen::MatrixXd;

/// Axis-aligned box of admissible forces. Kernels see points mapped to [0,1]^q.
struct Bounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Bounds uniform(int q, double lo = -450.0, double hi = 450.0);

  [[nodiscard]] int dim() const { return static_cast<int>(lo.size()); }
  [[nodiscard]] bool contains(const ForcePoint& f, double slack = 0.0) const;
  [[nodiscard]] ForcePoint clamp(const ForcePoint& f) const;
  [[nodiscard]] Eigen::VectorXd to_unit(const ForcePoint& f) const;
  [[nodiscard]] Eigen::MatrixXd to_unit(const DesignMatrix& rows) const;
  [[nodiscard]] ForcePoint from_unit(const Eigen::VectorXd& u) const;
};

void validate_bounds(const Bounds& b);

enum class ModelVariant { StochasticKriging, SurrogateWithUncertainties };

[[nodiscard]] std::string to_string(ModelVariant v);
[[nodiscard]] ModelVariant parse_model_variant(const std::string& name);

struct ModelSpec {
  ModelVariant variant = ModelVariant::StochasticKriging;
  int q = 1;
  int p = 1;
  Eigen::MatrixXd sigma_F;  // q x q actuator-uncertainty covariance
  Eigen::VectorXd weights;  // length p, nonnegative, sums to one
  bool isotropic = false;

  /// Zero actuator covariance, uniform weights.
  static ModelSpec make(ModelVariant variant, int q, int p);

  [[nodiscard]] int theta_count() const { return isotropic ? 1 : q; }
  /// m + 2 for Kriging, m + 3 for the surrogate variant.
  [[nodiscard]] int parameter_count() const;
};

void validate_model_spec(const ModelSpec& spec);

/// Per-output parameter set. Packed order is (tau2, theta_1..theta_m, sigma2[, phi2]).
struct Hyperparameters {
  double tau2 = 1.0;
  Eigen::VectorXd theta;
  double sigma2 = 0.0;
  double phi2 = 0.0;

  [[nodiscard]] Eigen::VectorXd pack(const ModelSpec& spec) const;
  static Hyperparameters unpack(const ModelSpec& spec, const Eigen::VectorXd& packed);
};

[[nodiscard]] std::vector<std::string> parameter_labels(const ModelSpec& spec);
void validate_hyperparameters(const ModelSpec& spec, const Hyperparameters& hp);

struct Dataset {
  Bounds bounds;
  DesignMatrix design;                     // k x q
  Eigen::VectorXi replications;            // n_t
  std::vector<Eigen::MatrixXd> responses;  // per point: n_t x p replicates
  Eigen::MatrixXd sample_means;            // k x p

  [[nodiscard]] int k() const { return static_cast<int>(design.rows()); }
  [[nodiscard]] int q() const { return static_cast<int>(design.cols()); }
  [[nodiscard]] int p() const { return static_cast<int>(sample_means.cols()); }

  friend bool operator==(const Dataset& a, const Dataset& b);
};

/// Builds a dataset and fills the sample means from the replicates.
Dataset make_dataset(Bounds bounds, DesignMatrix design, std::vector<Eigen::MatrixXd> responses);

/// Single-replicate convenience: one response row per design point.
Dataset make_dataset(Bounds bounds, DesignMatrix design, const Eigen::MatrixXd& responses);

Dataset append_point(const Dataset& d, const ForcePoint& f, const Eigen::MatrixXd& replicates);
Dataset remove_point(const Dataset& d, int t);

/// Throws Error(DimensionMismatch | NonFiniteValue | MeanInconsistent | DuplicatePoint | OutOfBounds).
void validate_dataset(const Dataset& d);

}  // namespace activegp
