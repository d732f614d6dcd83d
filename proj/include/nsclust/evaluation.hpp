#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "nsclust/dataset.hpp"
#include "nsclust/matrix.hpp"
#include "nsclust/optimizer.hpp"

namespace nsclust {

using CountMatrix = std::vector<std::vector<long long>>;

/// A one-to-one matching of rows to columns of a count matrix.
struct Assignment {
  /// row -> column, or -1 when the row is left unmatched.
  std::vector<int> row_to_col;
  long long total = 0;
};

/// Exact maximum-weight matching by dynamic programming over subsets of the
/// smaller side. Throws InvalidConfig when the smaller side exceeds 20.
Assignment best_assignment_exhaustive(const CountMatrix& counts);

/// Maximum-weight matching with the O(n^3) Hungarian method (potentials),
/// padded to a square problem.
Assignment best_assignment_hungarian(const CountMatrix& counts);

enum class AssignmentMethod { Auto, Exhaustive, Hungarian };

struct EvalReport {
  double accuracy = 0.0;
  /// Predicted cluster id -> truth class id, for matched clusters.
  std::map<int, int> mapping;
  /// Rows follow sorted distinct predicted ids, columns sorted truth ids.
  CountMatrix confusion;
  std::vector<int> cluster_ids;
  std::vector<int> class_ids;
  std::size_t n_evaluated = 0;
};

/// Accuracy under the best injective mapping of predicted clusters to truth
/// classes. Auto uses the exhaustive path when min(K, L) <= 8.
EvalReport accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                    AssignmentMethod method = AssignmentMethod::Auto);

struct FcmConfig {
  int k = 2;
  double fuzzifier = 2.0;
  double stop_eps = 1e-6;
  int max_iter = 300;
  double dist_floor = 1e-12;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FcmResult {
  Matrix memberships;  // n x k
  Matrix centroids;    // k x d
  std::vector<double> cost_history;
  int iterations = 0;
  bool converged = false;
};

/// Standard fuzzy c-means from random memberships.
FcmResult fcm_fit(const DataSet& ds, const FcmConfig& cfg);

struct SeedRun {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct MethodSummary {
  std::vector<SeedRun> runs;
  double best = 0.0;
  double mean = 0.0;
};

struct Comparison {
  MethodSummary proposed;
  MethodSummary fcm;
};

/// Runs both methods for seeds cfg.seed, cfg.seed + 1, ... and scores the
/// argmax labels against ds.labels(). Throws MissingLabels.
Comparison compare(const DataSet& ds, const NsConfig& ns_cfg, const FcmConfig& fcm_cfg,
                   int n_seeds);

}  // namespace nsclust
