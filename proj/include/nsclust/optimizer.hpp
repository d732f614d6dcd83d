#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nsclust/certainty.hpp"
#include "nsclust/dataset.hpp"
#include "nsclust/matrix.hpp"

namespace nsclust {

struct NsConfig {
  int k = 2;
  /// Exponent m on the memberships in the cost.
  double fuzzifier = 2.0;
  double stop_eps = 1e-6;
  int max_iter = 300;
  /// Lower bound on squared point-centroid distances.
  double dist_floor = 1e-12;
  /// Lower bound on the noise coefficient g_i = k - sum_j d_ij^2.
  double noise_floor = 1e-6;
  std::uint64_t seed = 0;
  CertaintyConfig certainty;
  double boundary_t = 0.4;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

struct NsState {
  Matrix t_mem;               // n x k
  std::vector<double> f_mem;  // n
  Matrix centroids;           // k x d
  std::vector<double> cost_history;
  int iterations = 0;
  bool converged = false;

  /// Certainty actually used by the optimizer, after clamping away from 0 and 1.
  CertaintyVector certainty;
  double eps = 0.0;
  /// Number of times a centroid update was skipped (degenerate weight sum, or
  /// the weighted mean left the bounding box of the data).
  std::size_t frozen_centroid_events = 0;
};

/// Squared distances from every point to every centroid, floored at
/// cfg.dist_floor. n x k.
Matrix squared_distances(const DataSet& ds, const Matrix& centroids, double dist_floor);

/// Noise coefficient k - sum_j d_ij^2 before flooring.
double raw_noise_coefficient(std::span<const double> dists_sq);

/// Cost of a state:
///   sum_ij (1-D_i) T_ij^m d_ij^2 + sum_i D_i F_i^m max(k - sum_j d_ij^2, noise_floor).
double cost(const DataSet& ds, const NsState& state, const CertaintyVector& d_vec,
            const NsConfig& cfg);

/// Multiplier that makes the closed-form memberships of one point sum to 1:
/// S^-(m-1) with S = sum_j ((1-D) d_j^2)^-1/(m-1) + (D g)^-1/(m-1).
/// For m = 2 this is 1 / (sum_j 1/((1-D) d_j^2) + 1/(D g)).
///
/// The derivative of the cost with respect to T_ij carries a factor m, so the
/// multiplier of the constrained problem is m times this value (see
/// lagrange_multiplier).
double lambda_for_point(std::span<const double> dists_sq, double g, double d, double m);

inline double lagrange_multiplier(std::span<const double> dists_sq, double g, double d,
                                  double m) {
  return m * lambda_for_point(dists_sq, g, d, m);
}

struct Memberships {
  Matrix t;
  std::vector<double> f;
};

/// Closed-form memberships for fixed centroids. Rows sum to 1.
/// D == 1 gives F = 0 and fuzzy c-means memberships; D == 0 gives F = 1.
Memberships update_memberships(const DataSet& ds, const Matrix& centroids,
                               const CertaintyVector& d_vec, const NsConfig& cfg);

struct CentroidUpdate {
  Matrix centroids;
  std::size_t frozen = 0;
};

/// Signed-weight means
///   C_j = sum_i w_ij X_i / sum_i w_ij,  w_ij = (1-D_i) T_ij^m - a_i D_i F_i^m,
/// where a_i is 1 when the noise coefficient at `previous` is above the floor
/// and 0 otherwise. A centroid whose weight sum is <= noise_floor, or whose
/// new position falls outside the bounding box of the data, keeps its
/// `previous` value.
CentroidUpdate update_centroids(const DataSet& ds, const Matrix& t_mem,
                                const std::vector<double>& f_mem, const CertaintyVector& d_vec,
                                const NsConfig& cfg, const Matrix& previous);

/// Starting centroids: means weighted by D_i T_ij^m.
Matrix initial_centroids(const DataSet& ds, const Matrix& t_mem, const CertaintyVector& d_vec,
                         double m);

struct Gradients {
  Matrix d_t;               // n x k
  std::vector<double> d_f;  // n
  Matrix d_c;               // k x d
};

/// Partial derivatives of cost() at `state`. When `multipliers` is given,
/// multipliers[i] is subtracted from the membership derivatives of point i.
Gradients analytic_gradients(const DataSet& ds, const NsState& state,
                             const CertaintyVector& d_vec, const NsConfig& cfg,
                             const std::optional<std::vector<double>>& multipliers = std::nullopt);

/// Called after every iteration with the state so far.
using FitObserver = std::function<void(const NsState&)>;

/// Alternating optimisation from random memberships.
/// Throws TooFewPoints when n <= k and NonFinite when the cost blows up.
NsState fit(const DataSet& ds, const NsConfig& cfg, const FitObserver& observer = {});

/// As fit, with a caller-supplied certainty vector instead of the density
/// estimate. Values are clamped to [1e-6, 1 - 1e-6].
NsState fit_with_certainty(const DataSet& ds, const NsConfig& cfg, CertaintyVector d_vec,
                           const FitObserver& observer = {});

}  // namespace nsclust
