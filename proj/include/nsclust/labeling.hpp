#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nsclust/optimizer.hpp"

namespace nsclust {

enum class VerdictKind { Main, Boundary, Outlier };

struct PointVerdict {
  VerdictKind kind = VerdictKind::Main;
  /// Main: the cluster. Boundary: the top cluster.
  std::size_t cluster = 0;
  /// Boundary only: the runner-up cluster.
  std::size_t second = 0;
  /// Memberships behind the verdict: {T_top} for Main, {T_top, T_second}
  /// for Boundary, {F, max_j T_ij} for Outlier.
  std::vector<double> top_memberships;

  /// "C<j>", "boundary(<j>,<k>)" or "outlier", with 1-based cluster numbers.
  std::string to_string() const;
};

/// Outlier when F exceeds every main membership; otherwise Boundary when
/// k >= 2 and the two largest main memberships both lie in (t, 1 - t);
/// otherwise Main(argmax).
PointVerdict classify_point(std::span<const double> t_row, double f, double boundary_t);

std::vector<PointVerdict> classify_points(const NsState& state, double boundary_t);

/// Row-wise argmax of the main memberships, ties to the lowest index.
std::vector<int> hard_labels(const Matrix& t_mem);

inline std::vector<int> hard_labels(const NsState& state) { return hard_labels(state.t_mem); }

}  // namespace nsclust
