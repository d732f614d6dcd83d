#include "nsclust/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsclust/errors.hpp"
#include "nsclust/random.hpp"

namespace nsclust {

namespace {

constexpr double kCertaintyClamp = 1e-6;

void check_shapes(const DataSet& ds, const NsState& state, const CertaintyVector& d_vec,
                  const NsConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.k);
  if (state.t_mem.rows() != ds.n() || state.t_mem.cols() != k) {
    throw ShapeMismatch("membership matrix must be n x k");
  }
  if (state.f_mem.size() != ds.n()) throw ShapeMismatch("noise memberships must have n entries");
  if (state.centroids.rows() != k || state.centroids.cols() != ds.d()) {
    throw ShapeMismatch("centroid matrix must be k x d");
  }
  if (d_vec.size() != ds.n()) throw ShapeMismatch("certainty vector must have n entries");
}

void check_coefficient(double v) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw DegenerateWeights("membership coefficient " + std::to_string(v) +
                            " is not a positive finite number");
  }
}

// Log-domain weights -p*log(a_j) for the k main clusters followed by the
// noise cluster, and their log-sum-exp.
struct LogWeights {
  std::vector<double> log_w;
  double log_sum = 0.0;
};

LogWeights log_weights(std::span<const double> dists_sq, double g, double d, double m) {
  const double p = 1.0 / (m - 1.0);
  LogWeights out;
  out.log_w.reserve(dists_sq.size() + 1);
  for (double d2 : dists_sq) {
    const double a = (1.0 - d) * d2;
    check_coefficient(a);
    out.log_w.push_back(-p * std::log(a));
  }
  const double b = d * g;
  check_coefficient(b);
  out.log_w.push_back(-p * std::log(b));
  const double top = *std::max_element(out.log_w.begin(), out.log_w.end());
  double s = 0.0;
  for (double lw : out.log_w) s += std::exp(lw - top);
  out.log_sum = top + std::log(s);
  return out;
}

struct Bounds {
  std::vector<double> lo, hi;
};

Bounds data_bounds(const DataSet& ds) {
  Bounds b{std::vector<double>(ds.d()), std::vector<double>(ds.d())};
  for (std::size_t j = 0; j < ds.d(); ++j) {
    double lo = ds.points()(0, j);
    double hi = lo;
    for (std::size_t i = 1; i < ds.n(); ++i) {
      lo = std::min(lo, ds.points()(i, j));
      hi = std::max(hi, ds.points()(i, j));
    }
    const double margin = 1e-9 * std::max(1.0, hi - lo);
    b.lo[j] = lo - margin;
    b.hi[j] = hi + margin;
  }
  return b;
}

}  // namespace

void NsConfig::validate() const {
  if (k < 1) throw InvalidConfig("k must be at least 1");
  if (!(fuzzifier > 1.0) || !std::isfinite(fuzzifier)) {
    throw InvalidConfig("fuzzifier must be greater than 1");
  }
  if (!(stop_eps > 0.0)) throw InvalidConfig("stop_eps must be positive");
  if (max_iter < 1) throw InvalidConfig("max_iter must be at least 1");
  if (!(dist_floor > 0.0)) throw InvalidConfig("dist_floor must be positive");
  if (!(noise_floor > 0.0)) throw InvalidConfig("noise_floor must be positive");
  if (!(boundary_t > 0.0 && boundary_t < 0.5)) {
    throw InvalidConfig("boundary_t must lie in (0, 0.5)");
  }
  certainty.validate();
}

Matrix squared_distances(const DataSet& ds, const Matrix& centroids, double dist_floor) {
  if (centroids.cols() != ds.d()) throw ShapeMismatch("centroid dimension differs from data");
  Matrix out(ds.n(), centroids.rows());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < centroids.rows(); ++j) {
      out(i, j) = std::max(squared_distance(ds.point(i), centroids.row(j)), dist_floor);
    }
  }
  return out;
}

double raw_noise_coefficient(std::span<const double> dists_sq) {
  double s = 0.0;
  for (double d2 : dists_sq) s += d2;
  return static_cast<double>(dists_sq.size()) - s;
}

double cost(const DataSet& ds, const NsState& state, const CertaintyVector& d_vec,
            const NsConfig& cfg) {
  check_shapes(ds, state, d_vec, cfg);
  const double m = cfg.fuzzifier;
  const Matrix d2 = squared_distances(ds, state.centroids, cfg.dist_floor);
  double main_term = 0.0;
  double noise_term = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto row = d2.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      main_term += (1.0 - d_vec[i]) * std::pow(state.t_mem(i, j), m) * row[j];
    }
    const double g = std::max(raw_noise_coefficient(row), cfg.noise_floor);
    noise_term += d_vec[i] * std::pow(state.f_mem[i], m) * g;
  }
  return main_term + noise_term;
}

double lambda_for_point(std::span<const double> dists_sq, double g, double d, double m) {
  if (!(d > 0.0 && d < 1.0)) {
    throw DegenerateWeights("certainty must lie strictly inside (0, 1) for a finite multiplier");
  }
  if (!(m > 1.0)) throw InvalidConfig("fuzzifier must be greater than 1");
  const LogWeights w = log_weights(dists_sq, g, d, m);
  return std::exp(-(m - 1.0) * w.log_sum);
}

Memberships update_memberships(const DataSet& ds, const Matrix& centroids,
                               const CertaintyVector& d_vec, const NsConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.k);
  if (centroids.rows() != k) throw ShapeMismatch("centroid matrix must have k rows");
  if (d_vec.size() != ds.n()) throw ShapeMismatch("certainty vector must have n entries");
  const double m = cfg.fuzzifier;
  const Matrix d2 = squared_distances(ds, centroids, cfg.dist_floor);

  Memberships out{Matrix(ds.n(), k), std::vector<double>(ds.n(), 0.0)};
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double d = d_vec[i];
    const auto row = d2.row(i);
    if (!(d >= 0.0 && d <= 1.0)) {
      throw DegenerateWeights("certainty " + std::to_string(d) + " outside [0, 1]");
    }
    if (d == 0.0) {
      out.f[i] = 1.0;
      continue;
    }
    if (d == 1.0) {
      // No main-cluster penalty: the noise cluster gets nothing and the
      // main memberships follow fuzzy c-means.
      const double p = 1.0 / (m - 1.0);
      std::vector<double> lw(k);
      for (std::size_t j = 0; j < k; ++j) lw[j] = -p * std::log(row[j]);
      const double top = *std::max_element(lw.begin(), lw.end());
      double s = 0.0;
      for (double v : lw) s += std::exp(v - top);
      for (std::size_t j = 0; j < k; ++j) out.t(i, j) = std::exp(lw[j] - top) / s;
      continue;
    }
    const double g = std::max(raw_noise_coefficient(row), cfg.noise_floor);
    const LogWeights w = log_weights(row, g, d, m);
    double total = 0.0;
    for (std::size_t j = 0; j <= k; ++j) total += std::exp(w.log_w[j] - w.log_sum);
    for (std::size_t j = 0; j < k; ++j) out.t(i, j) = std::exp(w.log_w[j] - w.log_sum) / total;
    out.f[i] = std::exp(w.log_w[k] - w.log_sum) / total;
  }
  return out;
}

CentroidUpdate update_centroids(const DataSet& ds, const Matrix& t_mem,
                                const std::vector<double>& f_mem, const CertaintyVector& d_vec,
                                const NsConfig& cfg, const Matrix& previous) {
  const auto k = static_cast<std::size_t>(cfg.k);
  if (t_mem.rows() != ds.n() || t_mem.cols() != k || f_mem.size() != ds.n() ||
      d_vec.size() != ds.n() || previous.rows() != k || previous.cols() != ds.d()) {
    throw ShapeMismatch("update_centroids: inconsistent shapes");
  }
  const double m = cfg.fuzzifier;
  const Matrix d2 = squared_distances(ds, previous, cfg.dist_floor);
  const Bounds box = data_bounds(ds);

  CentroidUpdate out{previous, 0};
  std::vector<double> noise(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const bool active = raw_noise_coefficient(d2.row(i)) > cfg.noise_floor;
    noise[i] = active ? d_vec[i] * std::pow(f_mem[i], m) : 0.0;
  }
  std::vector<double> acc(ds.d());
  for (std::size_t j = 0; j < k; ++j) {
    std::fill(acc.begin(), acc.end(), 0.0);
    double den = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      const double w = (1.0 - d_vec[i]) * std::pow(t_mem(i, j), m) - noise[i];
      den += w;
      const auto x = ds.point(i);
      for (std::size_t c = 0; c < ds.d(); ++c) acc[c] += w * x[c];
    }
    bool keep = den > cfg.noise_floor;
    if (keep) {
      for (std::size_t c = 0; c < ds.d(); ++c) {
        const double v = acc[c] / den;
        if (!(v >= box.lo[c] && v <= box.hi[c])) {
          keep = false;
          break;
        }
        acc[c] = v;
      }
    }
    if (keep) {
      std::copy(acc.begin(), acc.end(), out.centroids.row(j).begin());
    } else {
      ++out.frozen;
    }
  }
  return out;
}

Matrix initial_centroids(const DataSet& ds, const Matrix& t_mem, const CertaintyVector& d_vec,
                         double m) {
  Matrix out(t_mem.cols(), ds.d());
  for (std::size_t j = 0; j < t_mem.cols(); ++j) {
    double den = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      const double w = d_vec[i] * std::pow(t_mem(i, j), m);
      den += w;
      const auto x = ds.point(i);
      for (std::size_t c = 0; c < ds.d(); ++c) out(j, c) += w * x[c];
    }
    for (std::size_t c = 0; c < ds.d(); ++c) out(j, c) /= den;
  }
  return out;
}

Gradients analytic_gradients(const DataSet& ds, const NsState& state,
                             const CertaintyVector& d_vec, const NsConfig& cfg,
                             const std::optional<std::vector<double>>& multipliers) {
  check_shapes(ds, state, d_vec, cfg);
  if (multipliers && multipliers->size() != ds.n()) {
    throw ShapeMismatch("multiplier vector must have n entries");
  }
  const auto k = static_cast<std::size_t>(cfg.k);
  const double m = cfg.fuzzifier;
  Gradients out{Matrix(ds.n(), k), std::vector<double>(ds.n()), Matrix(k, ds.d())};

  std::vector<double> raw(k);
  std::vector<double> floored(k);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto x = ds.point(i);
    for (std::size_t j = 0; j < k; ++j) {
      raw[j] = squared_distance(x, state.centroids.row(j));
      floored[j] = std::max(raw[j], cfg.dist_floor);
    }
    const double g_raw = raw_noise_coefficient(floored);
    const bool active = g_raw > cfg.noise_floor;
    const double g = active ? g_raw : cfg.noise_floor;
    const double mu = multipliers ? (*multipliers)[i] : 0.0;
    const double di = d_vec[i];
    const double fi = state.f_mem[i];

    for (std::size_t j = 0; j < k; ++j) {
      const double tij = state.t_mem(i, j);
      out.d_t(i, j) = m * (1.0 - di) * std::pow(tij, m - 1.0) * floored[j] - mu;
    }
    out.d_f[i] = m * di * std::pow(fi, m - 1.0) * g - mu;

    const double noise = active ? di * std::pow(fi, m) : 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      // A floored distance is locally constant.
      if (raw[j] < cfg.dist_floor) continue;
      const double w = (1.0 - di) * std::pow(state.t_mem(i, j), m) - noise;
      const auto c = state.centroids.row(j);
      for (std::size_t dim = 0; dim < ds.d(); ++dim) {
        out.d_c(j, dim) += -2.0 * w * (x[dim] - c[dim]);
      }
    }
  }
  return out;
}

NsState fit(const DataSet& ds, const NsConfig& cfg, const FitObserver& observer) {
  cfg.validate();
  if (ds.n() <= static_cast<std::size_t>(cfg.k)) {
    throw TooFewPoints("need more than k = " + std::to_string(cfg.k) + " points, got " +
                       std::to_string(ds.n()));
  }
  const CertaintyReport report = certainty_report(ds, cfg.certainty, cfg.k);
  NsState state = fit_with_certainty(ds, cfg, report.d, observer);
  state.eps = report.eps;
  return state;
}

NsState fit_with_certainty(const DataSet& ds, const NsConfig& cfg, CertaintyVector d_vec,
                           const FitObserver& observer) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(cfg.k);
  if (ds.n() <= k) {
    throw TooFewPoints("need more than k = " + std::to_string(cfg.k) + " points, got " +
                       std::to_string(ds.n()));
  }
  if (d_vec.size() != ds.n()) throw ShapeMismatch("certainty vector must have n entries");
  for (double& d : d_vec) d = std::clamp(d, kCertaintyClamp, 1.0 - kCertaintyClamp);

  NsState state;
  state.certainty = d_vec;
  if (const auto* e = std::get_if<EpsExplicit>(&cfg.certainty.eps_policy)) state.eps = e->value;

  Rng rng(cfg.seed);
  state.t_mem = Matrix(ds.n(), k);
  state.f_mem.assign(ds.n(), 0.0);
  std::vector<double> draw(k + 1);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double s = 0.0;
    for (double& v : draw) s += (v = rng.uniform_positive());
    for (std::size_t j = 0; j < k; ++j) state.t_mem(i, j) = draw[j] / s;
    state.f_mem[i] = draw[k] / s;
  }
  state.centroids = initial_centroids(ds, state.t_mem, d_vec, cfg.fuzzifier);

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    Memberships mem = update_memberships(ds, state.centroids, d_vec, cfg);
    state.t_mem = std::move(mem.t);
    state.f_mem = std::move(mem.f);
    CentroidUpdate cu =
        update_centroids(ds, state.t_mem, state.f_mem, d_vec, cfg, state.centroids);
    state.centroids = std::move(cu.centroids);
    state.frozen_centroid_events += cu.frozen;

    const double n_cost = cost(ds, state, d_vec, cfg);
    if (!std::isfinite(n_cost)) throw NonFinite(iter);
    state.cost_history.push_back(n_cost);
    state.iterations = iter;
    const std::size_t h = state.cost_history.size();
    if (h >= 2 && std::abs(state.cost_history[h - 1] - state.cost_history[h - 2]) < cfg.stop_eps) {
      state.converged = true;
    }
    if (observer) observer(state);
    if (state.converged) break;
  }
  return state;
}

}  // namespace nsclust
