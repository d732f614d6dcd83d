#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "nsclust/dataset.hpp"

namespace nsclust {

/// Fixed neighbourhood radius.
struct EpsExplicit {
  double value = 0.0;
};

/// Radius taken as the q-quantile of all pairwise distances (i < j), with
/// linear interpolation between order statistics.
struct EpsQuantile {
  double q = 0.1;
};

using EpsPolicy = std::variant<EpsExplicit, EpsQuantile>;

struct CertaintyConfig {
  EpsPolicy eps_policy = EpsQuantile{};
  int tr = 4;
  double alpha = 0.95;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

/// Per-point certainty, each value in [0, 1].
using CertaintyVector = std::vector<double>;

struct CertaintyReport {
  CertaintyVector d;
  std::vector<std::size_t> in_circle;
  double eps = 0.0;
};

/// 1 when a <= b, else 0.
inline int step_indicator(double a, double b) { return a <= b ? 1 : 0; }

/// Number of points within distance eps of point i, counting i itself.
std::size_t in_circle(std::size_t i, const DataSet& ds, double eps);

/// Linear-interpolated quantile of the n(n-1)/2 pairwise distances.
/// Needs n >= 2.
double pairwise_distance_quantile(const DataSet& ds, double q);

double resolve_eps(const DataSet& ds, const CertaintyConfig& cfg);

/// Dense points (InCircle >= tr) get alpha; sparse points get
/// min(InCircle / (n / k), alpha). The result is clamped to [0, 1].
CertaintyReport certainty_report(const DataSet& ds, const CertaintyConfig& cfg, int k);

inline CertaintyVector certainty(const DataSet& ds, const CertaintyConfig& cfg, int k) {
  return certainty_report(ds, cfg, k).d;
}

}  // namespace nsclust
