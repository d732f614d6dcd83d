#include "nsclust/certainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsclust/errors.hpp"

namespace nsclust {

void CertaintyConfig::validate() const {
  if (const auto* e = std::get_if<EpsExplicit>(&eps_policy)) {
    if (!(e->value > 0.0) || !std::isfinite(e->value)) {
      throw InvalidConfig("eps must be positive, got " + std::to_string(e->value));
    }
  } else {
    const double q = std::get<EpsQuantile>(eps_policy).q;
    if (!(q > 0.0 && q < 1.0)) {
      throw InvalidConfig("eps quantile must lie in (0, 1), got " + std::to_string(q));
    }
  }
  if (tr < 1) throw InvalidConfig("tr must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidConfig("alpha must lie in (0, 1]");
}

std::size_t in_circle(std::size_t i, const DataSet& ds, double eps) {
  if (i >= ds.n()) {
    throw IndexOutOfRange("point index " + std::to_string(i) + " outside " +
                          std::to_string(ds.n()) + " points");
  }
  std::size_t count = 0;
  const auto xi = ds.point(i);
  for (std::size_t j = 0; j < ds.n(); ++j) {
    count += static_cast<std::size_t>(
        step_indicator(std::sqrt(squared_distance(xi, ds.point(j))), eps));
  }
  return count;
}

double pairwise_distance_quantile(const DataSet& ds, double q) {
  const std::size_t n = ds.n();
  if (n < 2) throw TooFewPoints("a distance quantile needs at least 2 points");
  std::vector<double> dist;
  dist.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist.push_back(std::sqrt(squared_distance(ds.point(i), ds.point(j))));
    }
  }
  std::sort(dist.begin(), dist.end());
  const double pos = q * static_cast<double>(dist.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, dist.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return dist[lo] + frac * (dist[hi] - dist[lo]);
}

double resolve_eps(const DataSet& ds, const CertaintyConfig& cfg) {
  if (const auto* e = std::get_if<EpsExplicit>(&cfg.eps_policy)) return e->value;
  return pairwise_distance_quantile(ds, std::get<EpsQuantile>(cfg.eps_policy).q);
}

CertaintyReport certainty_report(const DataSet& ds, const CertaintyConfig& cfg, int k) {
  cfg.validate();
  if (k < 1) throw InvalidConfig("k must be at least 1");
  CertaintyReport out;
  out.eps = resolve_eps(ds, cfg);
  const double per_cluster = static_cast<double>(ds.n()) / static_cast<double>(k);
  out.d.resize(ds.n());
  out.in_circle.resize(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const std::size_t count = in_circle(i, ds, out.eps);
    out.in_circle[i] = count;
    double d = count >= static_cast<std::size_t>(cfg.tr)
                   ? cfg.alpha
                   : std::min(static_cast<double>(count) / per_cluster, cfg.alpha);
    out.d[i] = std::clamp(d, 0.0, 1.0);
  }
  return out;
}

}  // namespace nsclust
