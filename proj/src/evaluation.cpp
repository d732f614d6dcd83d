#include "nsclust/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "nsclust/errors.hpp"
#include "nsclust/labeling.hpp"
#include "nsclust/random.hpp"

namespace nsclust {

namespace {

CountMatrix transpose(const CountMatrix& m) {
  const std::size_t cols = m.empty() ? 0 : m.front().size();
  CountMatrix t(cols, std::vector<long long>(m.size()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c][r] = m[r][c];
  }
  return t;
}

Assignment flip(const Assignment& a, std::size_t rows) {
  Assignment out;
  out.total = a.total;
  out.row_to_col.assign(rows, -1);
  for (std::size_t c = 0; c < a.row_to_col.size(); ++c) {
    if (a.row_to_col[c] >= 0) out.row_to_col[static_cast<std::size_t>(a.row_to_col[c])] = static_cast<int>(c);
  }
  return out;
}

// Rows are the smaller side.
Assignment exhaustive_rows_small(const CountMatrix& m) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m.front().size() : 0;
  const std::size_t states = std::size_t{1} << rows;
  constexpr long long kUnset = std::numeric_limits<long long>::min();
  // best[c][mask]: best total using columns < c with matched rows `mask`.
  std::vector<std::vector<long long>> best(cols + 1, std::vector<long long>(states, kUnset));
  best[0][0] = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t mask = 0; mask < states; ++mask) {
      const long long cur = best[c][mask];
      if (cur == kUnset) continue;
      best[c + 1][mask] = std::max(best[c + 1][mask], cur);
      for (std::size_t r = 0; r < rows; ++r) {
        if (mask & (std::size_t{1} << r)) continue;
        const std::size_t next = mask | (std::size_t{1} << r);
        best[c + 1][next] = std::max(best[c + 1][next], cur + m[r][c]);
      }
    }
  }
  std::size_t arg = 0;
  for (std::size_t mask = 1; mask < states; ++mask) {
    if (best[cols][mask] > best[cols][arg]) arg = mask;
  }
  Assignment out;
  out.total = best[cols][arg];
  out.row_to_col.assign(rows, -1);
  std::size_t mask = arg;
  for (std::size_t c = cols; c-- > 0;) {
    const long long target = best[c + 1][mask];
    if (best[c][mask] == target) continue;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t bit = std::size_t{1} << r;
      if ((mask & bit) && best[c][mask ^ bit] != kUnset && best[c][mask ^ bit] + m[r][c] == target) {
        out.row_to_col[r] = static_cast<int>(c);
        mask ^= bit;
        break;
      }
    }
  }
  return out;
}

}  // namespace

Assignment best_assignment_exhaustive(const CountMatrix& counts) {
  if (counts.empty() || counts.front().empty()) return {std::vector<int>(counts.size(), -1), 0};
  const std::size_t rows = counts.size();
  const std::size_t cols = counts.front().size();
  if (std::min(rows, cols) > 20) throw InvalidConfig("exhaustive matching limited to 20 classes");
  if (rows <= cols) return exhaustive_rows_small(counts);
  return flip(exhaustive_rows_small(transpose(counts)), rows);
}

Assignment best_assignment_hungarian(const CountMatrix& counts) {
  const std::size_t rows = counts.size();
  const std::size_t cols = rows ? counts.front().size() : 0;
  const std::size_t n = std::max(rows, cols);
  Assignment out;
  out.row_to_col.assign(rows, -1);
  if (n == 0) return out;

  long long top = 0;
  for (const auto& r : counts) {
    for (long long v : r) top = std::max(top, v);
  }
  // Minimise top - count; padded cells cost top (count 0).
  auto cost = [&](std::size_t r, std::size_t c) -> long long {
    if (r < rows && c < cols) return top - counts[r][c];
    return top;
  };

  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  // 1-based potentials; p[j] is the row matched to column j, 0 if none.
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<long long> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      long long delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t r = p[j] - 1;
    const std::size_t c = j - 1;
    if (r < rows && c < cols) {
      out.row_to_col[r] = static_cast<int>(c);
      out.total += counts[r][c];
    }
  }
  return out;
}

EvalReport accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                    AssignmentMethod method) {
  if (pred.size() != truth.size()) {
    throw LengthMismatch("prediction has " + std::to_string(pred.size()) + " entries, truth has " +
                         std::to_string(truth.size()));
  }
  if (pred.empty()) throw LengthMismatch("cannot score an empty labelling");

  EvalReport rep;
  const std::set<int> clusters(pred.begin(), pred.end());
  const std::set<int> classes(truth.begin(), truth.end());
  rep.cluster_ids.assign(clusters.begin(), clusters.end());
  rep.class_ids.assign(classes.begin(), classes.end());
  rep.n_evaluated = pred.size();
  rep.confusion.assign(rep.cluster_ids.size(), std::vector<long long>(rep.class_ids.size(), 0));
  auto index_of = [](const std::vector<int>& ids, int v) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), v) - ids.begin());
  };
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++rep.confusion[index_of(rep.cluster_ids, pred[i])][index_of(rep.class_ids, truth[i])];
  }

  if (method == AssignmentMethod::Auto) {
    method = std::min(rep.cluster_ids.size(), rep.class_ids.size()) <= 8
                 ? AssignmentMethod::Exhaustive
                 : AssignmentMethod::Hungarian;
  }
  const Assignment a = method == AssignmentMethod::Exhaustive
                           ? best_assignment_exhaustive(rep.confusion)
                           : best_assignment_hungarian(rep.confusion);
  for (std::size_t r = 0; r < a.row_to_col.size(); ++r) {
    if (a.row_to_col[r] >= 0) {
      rep.mapping[rep.cluster_ids[r]] = rep.class_ids[static_cast<std::size_t>(a.row_to_col[r])];
    }
  }
  rep.accuracy = static_cast<double>(a.total) / static_cast<double>(rep.n_evaluated);
  return rep;
}

void FcmConfig::validate() const {
  if (k < 1) throw InvalidConfig("k must be at least 1");
  if (!(fuzzifier > 1.0)) throw InvalidConfig("fuzzifier must be greater than 1");
  if (!(stop_eps > 0.0)) throw InvalidConfig("stop_eps must be positive");
  if (max_iter < 1) throw InvalidConfig("max_iter must be at least 1");
  if (!(dist_floor > 0.0)) throw InvalidConfig("dist_floor must be positive");
}

namespace {

Matrix fcm_centroids(const DataSet& ds, const Matrix& u, double m) {
  Matrix c(u.cols(), ds.d());
  for (std::size_t j = 0; j < u.cols(); ++j) {
    double den = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      const double w = std::pow(u(i, j), m);
      den += w;
      const auto x = ds.point(i);
      for (std::size_t dim = 0; dim < ds.d(); ++dim) c(j, dim) += w * x[dim];
    }
    for (std::size_t dim = 0; dim < ds.d(); ++dim) c(j, dim) /= den;
  }
  return c;
}

}  // namespace

FcmResult fcm_fit(const DataSet& ds, const FcmConfig& cfg) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(cfg.k);
  if (ds.n() <= k) {
    throw TooFewPoints("need more than k = " + std::to_string(cfg.k) + " points, got " +
                       std::to_string(ds.n()));
  }
  const double m = cfg.fuzzifier;
  const double p = 1.0 / (m - 1.0);
  Rng rng(cfg.seed);
  FcmResult res;
  res.memberships = Matrix(ds.n(), k);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += (res.memberships(i, j) = rng.uniform_positive());
    for (std::size_t j = 0; j < k; ++j) res.memberships(i, j) /= s;
  }
  res.centroids = fcm_centroids(ds, res.memberships, m);

  std::vector<double> lw(k);
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    const Matrix d2 = squared_distances(ds, res.centroids, cfg.dist_floor);
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (std::size_t j = 0; j < k; ++j) lw[j] = -p * std::log(d2(i, j));
      const double top = *std::max_element(lw.begin(), lw.end());
      double s = 0.0;
      for (double v : lw) s += std::exp(v - top);
      for (std::size_t j = 0; j < k; ++j) res.memberships(i, j) = std::exp(lw[j] - top) / s;
    }
    res.centroids = fcm_centroids(ds, res.memberships, m);
    const Matrix d2_new = squared_distances(ds, res.centroids, cfg.dist_floor);
    double j_cost = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (std::size_t j = 0; j < k; ++j) j_cost += std::pow(res.memberships(i, j), m) * d2_new(i, j);
    }
    if (!std::isfinite(j_cost)) throw NonFinite(iter);
    res.cost_history.push_back(j_cost);
    res.iterations = iter;
    const std::size_t h = res.cost_history.size();
    if (h >= 2 && std::abs(res.cost_history[h - 1] - res.cost_history[h - 2]) < cfg.stop_eps) {
      res.converged = true;
      break;
    }
  }
  return res;
}

namespace {

void summarise(MethodSummary& s) {
  double sum = 0.0;
  s.best = 0.0;
  for (const auto& r : s.runs) {
    sum += r.accuracy;
    s.best = std::max(s.best, r.accuracy);
  }
  s.mean = s.runs.empty() ? 0.0 : sum / static_cast<double>(s.runs.size());
}

}  // namespace

Comparison compare(const DataSet& ds, const NsConfig& ns_cfg, const FcmConfig& fcm_cfg,
                   int n_seeds) {
  if (!ds.has_labels()) throw MissingLabels("compare needs a labelled dataset");
  if (n_seeds < 1) throw InvalidConfig("n_seeds must be at least 1");
  const auto& truth = *ds.labels();
  Comparison out;
  for (int s = 0; s < n_seeds; ++s) {
    NsConfig nc = ns_cfg;
    nc.seed = ns_cfg.seed + static_cast<std::uint64_t>(s);
    const NsState st = fit(ds, nc);
    out.proposed.runs.push_back(
        {nc.seed, accuracy(hard_labels(st), truth).accuracy, st.iterations, st.converged});

    FcmConfig fc = fcm_cfg;
    fc.seed = fcm_cfg.seed + static_cast<std::uint64_t>(s);
    const FcmResult fr = fcm_fit(ds, fc);
    out.fcm.runs.push_back(
        {fc.seed, accuracy(hard_labels(fr.memberships), truth).accuracy, fr.iterations,
         fr.converged});
  }
  summarise(out.proposed);
  summarise(out.fcm);
  return out;
}

}  // namespace nsclust
