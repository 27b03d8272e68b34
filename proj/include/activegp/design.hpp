#pragma once

#include <cstdint>

#include "activegp/core.hpp"

namespace activegp {

struct LhdConfig {
  int n = 11;
  int q = 10;
  Bounds bounds = Bounds::uniform(10);
  std::uint64_t seed = 0;
  int sweeps = 2000;
};

/// Maximin Latin hypercube: a random LHD at bin midpoints improved by coordinate swaps
/// that are accepted only when the minimum pairwise distance strictly grows.
[[nodiscard]] DesignMatrix maximin_lhd(const LhdConfig& cfg);

/// The random starting LHD that maximin_lhd improves on (same seed, zero sweeps).
[[nodiscard]] DesignMatrix random_lhd(const LhdConfig& cfg);

/// Minimum pairwise Euclidean distance between rows, measured in unit-scaled coordinates.
/// Returns +inf for fewer than two rows.
[[nodiscard]] double min_pairwise_distance(const DesignMatrix& rows, const Bounds& bounds);

/// Bin index per entry (0..n-1) for an n-row design; used to verify the Latin property.
[[nodiscard]] Eigen::MatrixXi bin_indices(const DesignMatrix& rows, const Bounds& bounds);

[[nodiscard]] bool is_latin(const DesignMatrix& rows, const Bounds& bounds);

}  // namespace activegp
