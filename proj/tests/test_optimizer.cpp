#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "nsclust/errors.hpp"
#include "nsclust/evaluation.hpp"
#include "nsclust/labeling.hpp"
#include "nsclust/optimizer.hpp"
#include "oracles.hpp"

using namespace nsclust;

namespace {

NsState make_state(std::vector<std::vector<double>> t, std::vector<double> f,
                   std::vector<std::vector<double>> c) {
  NsState s;
  s.t_mem = Matrix::from_rows(t);
  s.f_mem = std::move(f);
  s.centroids = Matrix::from_rows(c);
  return s;
}

double max_constraint_error(const NsState& s) {
  double worst = 0.0;
  for (std::size_t i = 0; i < s.t_mem.rows(); ++i) {
    double sum = s.f_mem[i];
    for (double v : s.t_mem.row(i)) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

DataSet two_blobs() {
  return DataSet(Matrix::from_rows({{0.10, 0.10}, {0.12, 0.10}, {0.10, 0.12}, {0.12, 0.12},
                                    {0.80, 0.80}, {0.82, 0.80}, {0.80, 0.82}, {0.82, 0.82}}),
                 std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
}

}  // namespace

TEST_CASE("cost examples") {
  NsConfig cfg;
  cfg.k = 1;
  const DataSet one(Matrix::from_rows({{0.3, 0.4}}));
  CHECK(cost(one, make_state({{1.0}}, {0.0}, {{0.3, 0.4}}), {0.5}, cfg) ==
        doctest::Approx(0.5 * 1e-12));

  cfg.k = 2;
  const DataSet origin(Matrix::from_rows({{0.0, 0.0}}));
  CHECK(cost(origin, make_state({{0.0, 0.0}}, {0.0}, {{1, 0}, {0, 1}}), {0.5}, cfg) == 0.0);

  // d^2 = (1, 1), g floored to 1e-6.
  const double n = cost(origin, make_state({{0.4, 0.4}}, {0.2}, {{1, 0}, {0, 1}}), {0.5}, cfg);
  CHECK(n == doctest::Approx(0.5 * (0.16 + 0.16) + 0.5 * 0.04 * 1e-6).epsilon(1e-14));
  CHECK(n == doctest::Approx(0.16).epsilon(1e-6));

  CHECK_THROWS_AS(cost(origin, make_state({{0.4}}, {0.6}, {{1, 0}, {0, 1}}), {0.5}, cfg),
                  ShapeMismatch);
}

TEST_CASE("lambda_for_point examples") {
  const std::vector<double> d2 = {0.5, 0.5};
  const double lam = lambda_for_point(d2, 1.0, 0.95, 2.0);
  CHECK(lam == doctest::Approx(1.0 / (40.0 + 40.0 + 1.0 / 0.95)).epsilon(1e-14));
  CHECK(lam == doctest::Approx(0.012338).epsilon(1e-4));
  CHECK(lambda_for_point(std::vector<double>{1.0}, 1.0, 0.5, 2.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(lambda_for_point(d2, 1.0, 1.0, 2.0), DegenerateWeights);
  CHECK_THROWS_AS(lambda_for_point(std::vector<double>{0.0}, 1.0, 0.5, 2.0), DegenerateWeights);
}

TEST_CASE("lambda matches bisection and yields unit sums") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_positive() * 6);
    std::vector<double> d2(k);
    for (double& v : d2) v = std::exp(6.0 * (rng.uniform_positive() - 0.7));
    const double g = std::exp(4.0 * (rng.uniform_positive() - 0.8));
    const double d = std::clamp(rng.uniform_positive(), 1e-3, 1 - 1e-3);
    const double lam = lambda_for_point(d2, g, d, 2.0);
    CHECK(std::abs(lam - oracle::lambda_bisection(d2, g, d)) <= 1e-10 * lam);
    CHECK(oracle::membership_sum(d2, g, d, lam) == doctest::Approx(1.0).epsilon(1e-12));

    // General m: T_j = (lam / a_j)^(1/(m-1)) and F likewise sum to one.
    const double m = 1.2 + 3.0 * rng.uniform_positive();
    const double lm = lambda_for_point(d2, g, d, m);
    const double p = 1.0 / (m - 1.0);
    double s = std::pow(lm / (d * g), p);
    for (double v : d2) s += std::pow(lm / ((1.0 - d) * v), p);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("update_memberships examples") {
  NsConfig cfg;
  cfg.k = 2;
  const DataSet origin(Matrix::from_rows({{0.0, 0.0}}));

  // Equidistant, d^2 = 0.5 each, g = 1.
  const Memberships eq = update_memberships(origin, Matrix::from_rows({{0.5, 0.5}, {-0.5, -0.5}}),
                                            {0.95}, cfg);
  CHECK(eq.t(0, 0) == doctest::Approx(0.49351).epsilon(1e-4));
  CHECK(eq.t(0, 1) == eq.t(0, 0));
  CHECK(eq.f[0] == doctest::Approx(0.012987).epsilon(1e-4));

  // On a centroid.
  const Memberships on = update_memberships(origin, Matrix::from_rows({{0, 0}, {0.5, 0}}), {0.95}, cfg);
  CHECK(on.t(0, 0) > 0.999);

  // Remote point with low certainty: d^2 = (10, 12), g floored.
  const Memberships far = update_memberships(
      origin, Matrix::from_rows({{3.0, 1.0}, {0.0, std::sqrt(12.0)}}), {0.05}, cfg);
  CHECK(far.f[0] > std::max(far.t(0, 0), far.t(0, 1)));

  // Certainty exactly 1 or 0.
  const Matrix c = Matrix::from_rows({{1.0, 0.0}, {0.0, 2.0}});
  const Memberships full = update_memberships(origin, c, {1.0}, cfg);
  CHECK(full.f[0] == 0.0);
  CHECK(full.t(0, 0) == doctest::Approx(0.8));  // 1/1 : 1/4
  const Memberships none = update_memberships(origin, c, {0.0}, cfg);
  CHECK(none.f[0] == 1.0);
  CHECK(none.t(0, 0) == 0.0);
  CHECK_THROWS_AS(update_memberships(origin, c, {1.5}, cfg), DegenerateWeights);
}

TEST_CASE("membership rows sum to one and are stationary") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    NsConfig cfg;
    cfg.k = 2 + trial % 4;
    cfg.fuzzifier = trial % 2 ? 2.0 : 1.5 + 2.0 * rng.uniform_positive();
    const DataSet ds = oracle::random_blobs(rng, 40, 3, cfg.k, 0.1);
    Matrix c(static_cast<std::size_t>(cfg.k), 3);
    for (double& v : c.data()) v = rng.uniform_positive();
    CertaintyVector d(ds.n());
    for (double& v : d) v = std::clamp(rng.uniform_positive(), 1e-6, 1 - 1e-6);
    const Memberships mem = update_memberships(ds, c, d, cfg);
    NsState st;
    st.t_mem = mem.t;
    st.f_mem = mem.f;
    st.centroids = c;
    CHECK(max_constraint_error(st) < 1e-12);

    const Matrix d2 = squared_distances(ds, c, cfg.dist_floor);
    std::vector<double> mu(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
      const double g = std::max(raw_noise_coefficient(d2.row(i)), cfg.noise_floor);
      mu[i] = lagrange_multiplier(d2.row(i), g, d[i], cfg.fuzzifier);
    }
    const Gradients gr = analytic_gradients(ds, st, d, cfg, mu);
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (double v : gr.d_t.row(i)) CHECK(std::abs(v) < 1e-8 * std::max(1.0, mu[i]));
      CHECK(std::abs(gr.d_f[i]) < 1e-8 * std::max(1.0, mu[i]));
    }
  }
}

TEST_CASE("update_centroids examples") {
  NsConfig cfg;
  cfg.k = 1;
  const DataSet pair(Matrix::from_rows({{0.0, 0.0}, {2.0, 0.0}}));
  const Matrix prev = Matrix::from_rows({{0.5, 0.5}});
  const CentroidUpdate mean = update_centroids(pair, Matrix::from_rows({{0.7}, {0.7}}),
                                               {0.0, 0.0}, {0.4, 0.4}, cfg, prev);
  CHECK(mean.centroids(0, 0) == doctest::Approx(1.0));
  CHECK(mean.centroids(0, 1) == 0.0);
  CHECK(mean.frozen == 0);

  cfg.k = 2;
  const DataSet three(Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}));
  const CentroidUpdate single = update_centroids(
      three, Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}}), {0.0, 0.0, 0.0},
      {0.5, 0.5, 0.5}, cfg, Matrix::from_rows({{0.2, 0.2}, {0.3, 0.3}}));
  CHECK(single.centroids(0, 0) == 1.0);
  CHECK(single.centroids(0, 1) == 0.0);

  // Noise weights dominate: the signed sum is negative and the centroid stays.
  cfg.k = 1;
  const DataSet close(Matrix::from_rows({{0.0, 0.0}, {0.2, 0.0}}));
  const Matrix before = Matrix::from_rows({{0.1, 0.0}});
  const CentroidUpdate frozen = update_centroids(close, Matrix::from_rows({{0.1}, {0.1}}),
                                                 {0.9, 0.9}, {0.9, 0.9}, cfg, before);
  CHECK(frozen.frozen == 1);
  CHECK(frozen.centroids == before);

  // Positive sum but the signed mean lands outside the data: also kept.
  const DataSet line(Matrix::from_rows({{0.0}, {0.5}}));
  const CentroidUpdate outside =
      update_centroids(line, Matrix::from_rows({{1.0}, {0.0}}), {0.0, 1.0}, {0.5, 0.3}, cfg,
                       Matrix::from_rows({{0.25}}));
  CHECK(outside.frozen == 1);
  CHECK(outside.centroids(0, 0) == 0.25);
}

TEST_CASE("zero membership derivative is minus the multiplier") {
  NsConfig cfg;
  const DataSet ds(Matrix::from_rows({{0.0, 0.0}}));
  const NsState st = make_state({{0.0, 1.0}}, {0.0}, {{0.3, 0.0}, {0.0, 0.4}});
  const Gradients g = analytic_gradients(ds, st, {0.5}, cfg, std::vector<double>{0.125});
  CHECK(g.d_t(0, 0) == -0.125);
  CHECK(g.d_f[0] == -0.125);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(31);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    NsConfig cfg;
    cfg.k = 2 + trial % 3;
    cfg.fuzzifier = trial % 2 ? 2.0 : 1.5 + rng.uniform_positive();
    const auto k = static_cast<std::size_t>(cfg.k);
    const DataSet ds = oracle::random_blobs(rng, 12, 2, cfg.k, 0.2);
    NsState st;
    st.t_mem = Matrix(ds.n(), k);
    st.f_mem.resize(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (std::size_t j = 0; j < k; ++j) st.t_mem(i, j) = 0.05 + rng.uniform_positive();
      st.f_mem[i] = 0.05 + rng.uniform_positive();
    }
    st.centroids = Matrix(k, 2);
    for (double& v : st.centroids.data()) v = rng.uniform_positive();
    CertaintyVector d(ds.n());
    for (double& v : d) v = 0.05 + 0.9 * rng.uniform_positive();

    const Gradients g = analytic_gradients(ds, st, d, cfg);
    auto close = [](double a, double fd) {
      return std::abs(a - fd) <= std::max(1e-8, 1e-4 * std::max(std::abs(a), std::abs(fd)));
    };
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double fd = oracle::central_difference(
            ds, st, d, cfg, h, [&](NsState& s, double dv) { s.t_mem(i, j) += dv; });
        CHECK(close(g.d_t(i, j), fd));
      }
      const double fd = oracle::central_difference(ds, st, d, cfg, h,
                                                   [&](NsState& s, double dv) { s.f_mem[i] += dv; });
      CHECK(close(g.d_f[i], fd));
    }
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t c = 0; c < 2; ++c) {
        const double fd = oracle::central_difference(
            ds, st, d, cfg, h, [&](NsState& s, double dv) { s.centroids(j, c) += dv; });
        CHECK(close(g.d_c(j, c), fd));
      }
    }
  }
}

TEST_CASE("fit separates two blobs and is deterministic") {
  const DataSet ds = two_blobs();
  NsConfig cfg;
  cfg.seed = 4;
  const NsState a = fit(ds, cfg);
  const NsState b = fit(ds, cfg);
  CHECK(a.converged);
  CHECK(a.t_mem == b.t_mem);
  CHECK(a.f_mem == b.f_mem);
  CHECK(a.centroids == b.centroids);
  CHECK(a.cost_history == b.cost_history);
  CHECK(accuracy(hard_labels(a), *ds.labels()).accuracy == 1.0);
  const std::size_t h = a.cost_history.size();
  REQUIRE(h >= 2);
  CHECK(std::abs(a.cost_history[h - 1] - a.cost_history[h - 2]) < cfg.stop_eps);
  for (double v : a.cost_history) CHECK(std::isfinite(v));
}

TEST_CASE("fit preconditions and observer") {
  NsConfig cfg;
  cfg.k = 3;
  const DataSet tiny(Matrix::from_rows({{0.0}, {1.0}, {2.0}}));
  CHECK_THROWS_AS(fit(tiny, cfg), TooFewPoints);
  cfg.fuzzifier = 1.0;
  CHECK_THROWS_AS(fit(two_blobs(), cfg), InvalidConfig);

  NsConfig ok;
  ok.stop_eps = 1e-300;
  ok.max_iter = 7;
  int calls = 0;
  const NsState st = fit(two_blobs(), ok, [&](const NsState& s) {
    ++calls;
    CHECK(max_constraint_error(s) < 1e-9);
    CHECK(s.iterations == calls);
  });
  CHECK(calls == 7);
  CHECK(st.iterations == 7);
  CHECK_FALSE(st.converged);
}

TEST_CASE("point order only permutes the update steps") {
  Rng rng(41);
  const DataSet ds = oracle::random_blobs(rng, 30, 2, 3, 0.05);
  std::vector<std::size_t> perm(ds.n());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 7) % perm.size();
  Matrix shuffled(ds.n(), 2);
  CertaintyVector d(ds.n()), dp(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    d[i] = 0.1 + 0.8 * rng.uniform_positive();
  }
  for (std::size_t i = 0; i < ds.n(); ++i) {
    shuffled(i, 0) = ds.points()(perm[i], 0);
    shuffled(i, 1) = ds.points()(perm[i], 1);
    dp[i] = d[perm[i]];
  }
  const DataSet other(shuffled);
  NsConfig cfg;
  cfg.k = 3;
  const Matrix c = Matrix::from_rows({{0.3, 0.3}, {0.5, 0.6}, {0.7, 0.4}});
  const Memberships m1 = update_memberships(ds, c, d, cfg);
  const Memberships m2 = update_memberships(other, c, dp, cfg);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    CHECK(m2.f[i] == m1.f[perm[i]]);
    for (std::size_t j = 0; j < 3; ++j) CHECK(m2.t(i, j) == m1.t(perm[i], j));
  }
  const CentroidUpdate c1 = update_centroids(ds, m1.t, m1.f, d, cfg, c);
  const CentroidUpdate c2 = update_centroids(other, m2.t, m2.f, dp, cfg, c);
  for (std::size_t k = 0; k < c1.centroids.data().size(); ++k) {
    CHECK(c2.centroids.data()[k] == doctest::Approx(c1.centroids.data()[k]).epsilon(1e-12));
  }
}

TEST_CASE("uniform certainty ranks like fuzzy c-means on separated blobs") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const DataSet ds = oracle::random_blobs(rng, 60, 2, 3, 0.01);
    NsConfig cfg;
    cfg.k = 3;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const NsState st = fit_with_certainty(ds, cfg, CertaintyVector(ds.n(), 0.95));
    FcmConfig fc;
    fc.k = 3;
    fc.seed = static_cast<std::uint64_t>(trial);
    const FcmResult fr = fcm_fit(ds, fc);
    const auto a = hard_labels(st);
    const auto b = hard_labels(fr.memberships);
    // Both recover the blobs, hence agree up to relabelling.
    if (accuracy(b, *ds.labels()).accuracy == 1.0) CHECK(accuracy(a, b).accuracy == 1.0);
  }
}
