#include <doctest.h>

#include <random>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"
#include "oracles.hpp"

using namespace driftwatch;
using namespace driftwatch::cluster;

namespace {

Eigen::VectorXd vec(const oracle::Vec& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

oracle::Part part(const Labels& l) { return oracle::Part(l.begin(), l.end()); }

}  // namespace

TEST_CASE("kmeans separates two blobs") {
  const Eigen::VectorXd x = vec({1.0, 1.2, 0.9, 1.1, 10.0, 10.3, 9.8, 10.1});
  const auto fit = kmeans(x, 2, {});
  REQUIRE(fit.clusters.n_clusters == 2);
  Eigen::VectorXd c = fit.clusters.centroids;
  std::sort(c.begin(), c.end());
  CHECK(c[0] == doctest::Approx(1.05));
  CHECK(c[1] == doctest::Approx(10.05));
  CHECK(oracle::canonical(part(fit.clusters.labels)) == oracle::Part{0, 0, 0, 0, 1, 1, 1, 1});
}

TEST_CASE("kmeans inertia never increases") {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto x = vec(oracle::blobs(rng, 60, {0, 4, 9, 15}, 1.5));
    KMeansOptions opts;
    opts.seed = seed;
    const auto fit = kmeans(x, 2 + static_cast<int>(seed % 5), opts);
    for (std::size_t i = 1; i < fit.inertia_trace.size(); ++i)
      CHECK(fit.inertia_trace[i] <= fit.inertia_trace[i - 1] + 1e-9);
  }
}

TEST_CASE("kmeans k = 2 reaches the brute-force optimum on small sets") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> len(2, 10);
  int hits = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    oracle::Vec v(static_cast<std::size_t>(len(rng)));
    for (auto& d : v) d = u(rng);
    KMeansOptions opts;
    opts.seed = static_cast<std::uint64_t>(t);
    const auto fit = kmeans(vec(v), 2, opts);
    hits += std::abs(fit.inertia - oracle::best_two_partition_inertia(v)) <= 1e-9;
  }
  CHECK(hits >= trials * 9 / 10);
}

TEST_CASE("kmeans reported inertia matches its labels") {
  std::mt19937_64 rng(4);
  const auto v = oracle::blobs(rng, 40, {0, 5}, 1.0);
  const auto fit = kmeans(vec(v), 3, {});
  double sse = 0.0;
  for (int c = 0; c < fit.clusters.n_clusters; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (fit.clusters.labels[static_cast<Eigen::Index>(i)] == c) members.push_back(i);
    sse += oracle::sse(v, members);
  }
  CHECK(fit.inertia == doctest::Approx(sse).epsilon(1e-12));
}

TEST_CASE("kmeans degenerate inputs") {
  CHECK_THROWS_AS(kmeans(vec({1, 2}), 3, {}), PreconditionError);
  CHECK_THROWS_AS(kmeans(vec({1, 2}), 0, {}), PreconditionError);
  const auto same = kmeans(vec({3, 3, 3, 3}), 2, {});
  CHECK(same.clusters.n_clusters == 1);
  CHECK(same.inertia == 0.0);
}

TEST_CASE("silhouette agrees with the member-list oracle") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> k_of(2, 4);
  for (int t = 0; t < 100; ++t) {
    const auto v = oracle::blobs(rng, 30, {0, 3, 7}, 1.0);
    const int k = k_of(rng);
    std::uniform_int_distribution<int> lab(0, k - 1);
    Labels l(30);
    for (auto& x : l) x = lab(rng);
    if (l.maxCoeff() == l.minCoeff()) continue;
    CHECK(silhouette(vec(v), l) == doctest::Approx(oracle::silhouette(v, part(l))).epsilon(1e-12));
  }
}

TEST_CASE("silhouette hand example") {
  // Two tight pairs: the outer points have a = 1, b = 10.5; the inner ones a = 1, b = 9.5.
  const Eigen::VectorXd x = vec({0, 1, 10, 11});
  Labels l(4);
  l << 0, 0, 1, 1;
  CHECK(silhouette(x, l) == doctest::Approx((9.5 / 10.5 + 8.5 / 9.5) / 2).epsilon(1e-14));
  Labels one = Labels::Zero(4);
  CHECK_THROWS_AS(silhouette(x, one), PreconditionError);
}

TEST_CASE("best_k_silhouette finds the blob count") {
  std::mt19937_64 rng(6);
  for (int k = 2; k <= 4; ++k) {
    oracle::Vec centres;
    for (int c = 0; c < k; ++c) centres.push_back(100.0 * c);
    const auto v = oracle::blobs(rng, 80, centres, 2.0);
    CHECK(best_k_silhouette(vec(v), 2, 8, 0) == k);
  }
  CHECK(best_k_silhouette(vec({5, 5, 5}), 2, 8, 0) == 1);
  CHECK(best_k_silhouette(vec({5, 6, 5}), 2, 8, 0) == 2);
  CHECK(best_k_silhouette(vec({7}), 2, 8, 0) == 1);
}

TEST_CASE("restarts never raise the final inertia") {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto v = oracle::blobs(rng, 25, {0, 4, 9}, 1.0);
    KMeansOptions one;
    one.seed = seed;
    one.n_init = 1;
    KMeansOptions many = one;
    many.n_init = 10;
    CHECK(kmeans(vec(v), 3, many).inertia <= kmeans(vec(v), 3, one).inertia);
  }
  KMeansOptions bad;
  bad.n_init = 0;
  CHECK_THROWS_AS(kmeans(vec({1, 2, 3}), 2, bad), PreconditionError);
}
