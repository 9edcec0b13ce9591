#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mmorder/genealogy.hpp"
#include "mmorder/order.hpp"
#include "mmorder/stats.hpp"

#include <cmath>

using namespace mmorder;

TEST_CASE("moran with one individual is a unit point") {
  auto out = simulate_moran({1, 1, 1.0, 5.0});
  REQUIRE(out.spaces.size() == 1);
  CHECK(out.spaces[0].size() == 1);
  CHECK(out.spaces[0].mass(0) == doctest::Approx(1.0));
}

TEST_CASE("moran without resampling leaves everyone at distance 2t") {
  auto out = simulate_moran({3, 4, 0.0, 2.5});
  const auto& x = out.spaces[0];
  REQUIRE(x.size() == 4);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      if (i != j) CHECK(x.dist(i, j) == doctest::Approx(5.0));
}

TEST_CASE("seeded moran run re-verifies and matches its pinned regression") {
  auto out = simulate_moran({42, 5, 1.0, 10.0});
  const auto& x = out.spaces[0];
  auto rep = validate(x);
  CHECK(rep.valid());
  CHECK(rep.ultrametric);
  CHECK(x.total_mass() == doctest::Approx(1.0));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < x.size(); ++j) CHECK(x.dist(i, j) <= 20.0 + 1e-12);
  CHECK(out.meta.fields.at("events") == "211");
  CHECK(x.dist(0, 1) == 0.7149210757992428);
  CHECK(x.dist(2, 4) == 0.15771677979592269);
  CHECK(x.dist(0, 2) == 0.78732698768677878);
}

TEST_CASE("identical configs produce byte-identical outputs") {
  auto a = simulate_moran({99, 6, 0.7, 4.0});
  auto b = simulate_moran({99, 6, 0.7, 4.0});
  CHECK(a.spaces[0] == b.spaces[0]);
  auto c1 = simulate_coupled_coalescent_trees({5, 5, 1.0, 2.0, 3.0});
  auto c2 = simulate_coupled_coalescent_trees({5, 5, 1.0, 2.0, 3.0});
  CHECK(c1.spaces[0] == c2.spaces[0]);
  CHECK(c1.spaces[1] == c2.spaces[1]);
}

TEST_CASE("coalescent with no extra rate gives identical trees") {
  auto out = simulate_coupled_coalescent_trees({11, 5, 1.3, 0.0, std::nullopt});
  CHECK(out.spaces[0] == out.spaces[1]);
}

TEST_CASE("two-lineage coupled coalescent obeys the exact rate scaling") {
  auto out = simulate_coupled_coalescent_trees({7, 2, 1.0, 1.0, std::nullopt});
  CHECK(out.spaces[0].dist(0, 1) == 0.5 * out.spaces[1].dist(0, 1));
  CHECK(out.spaces[0].dist(0, 1) == 1.1770940577026403);  // pinned for the seed
}

TEST_CASE("fast tree distances are the slow ones scaled, exactly, before capping") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto out = simulate_coupled_coalescent_trees({seed, 6, 1.0, 2.0, std::nullopt});
    const auto& fast = out.spaces[0];
    const auto& slow = out.spaces[1];
    double ratio = 1.0 / 3.0;
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) CHECK(fast.dist(i, j) == slow.dist(i, j) * ratio);
  }
}

TEST_CASE("coupled coalescent supports the identity sub-isometry fast <= slow") {
  OrderOptions opt;
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto out = simulate_coupled_coalescent_trees({seed, 6, 1.0, 1.0, 4.0});
    const auto& fast = out.spaces[0];
    const auto& slow = out.spaces[1];
    auto repf = validate(fast);
    auto reps = validate(slow);
    CHECK(repf.valid());
    CHECK(repf.ultrametric);
    CHECK(reps.valid());
    CHECK(reps.ultrametric);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) CHECK(fast.dist(i, j) <= slow.dist(i, j) + 1e-15);
    auto dec = le_metric(fast, slow, opt);
    CHECK(dec.verdict);
    CHECK(verify_witness(fast, slow, *dec.witness, opt.tol));
  }
}

TEST_CASE("er family endpoints: complete graph and empty graph") {
  auto out = simulate_er_family({17, 5, {1.0, 0.0}});
  REQUIRE(out.spaces.size() == 2);
  const auto& complete = out.spaces[0];
  const auto& empty = out.spaces[1];
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) {
      if (i == j) continue;
      CHECK(complete.dist(i, j) == 1.0);
      CHECK(empty.dist(i, j) == 5.0);
    }
  CHECK(complete.mass(0) == doctest::Approx(0.2));
}

TEST_CASE("er distances shrink pointwise as p grows on shared uniforms") {
  OrderOptions opt;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto out = simulate_er_family({seed, 6, {0.7, 0.3}});
    const auto& dense = out.spaces[0];
    const auto& sparse = out.spaces[1];
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) CHECK(dense.dist(i, j) <= sparse.dist(i, j));
    auto dec = le_metric(dense, sparse, opt);
    CHECK(dec.verdict);
  }
}

TEST_CASE("gw with equal criticalities yields identical spaces") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto out = simulate_coupled_gw({seed, 1.0, 1.0, 10, 3});
    CHECK(out.spaces[0] == out.spaces[1]);
  }
}

TEST_CASE("gw subtree: b1 survivors embed into b2 survivors") {
  OrderOptions opt;
  opt.unlimited = true;  // survivor counts can exceed the default guardrail
  int non_extinct = 0;
  for (std::uint64_t seed = 0; seed < 40 && non_extinct < 12; ++seed) {
    auto out = simulate_coupled_gw({seed, 0.0, 1.0, 10, 4});
    bool ex1 = out.meta.fields.at("extinct_b1") == "true";
    bool ex2 = out.meta.fields.at("extinct_b2") == "true";
    if (ex2) CHECK(ex1);  // subtree of an extinct tree is extinct
    if (ex2) continue;
    ++non_extinct;
    if (out.spaces[0].size() + out.spaces[1].size() > 30) continue;  // keep the search cheap
    auto dec = le_measure(out.spaces[0], out.spaces[1], opt);
    CHECK(dec.verdict);
    if (dec.witness) CHECK(verify_witness(out.spaces[0], out.spaces[1], *dec.witness, opt.tol));
  }
  CHECK(non_extinct > 0);
}

TEST_CASE("gw outputs are ultrametric forests with mass survivors/scale") {
  auto out = simulate_coupled_gw({123, 0.5, 1.5, 10, 4});
  for (const auto& x : out.spaces) {
    auto rep = validate(x);
    CHECK(rep.valid());
    if (x.size() > 0) CHECK(rep.ultrametric);
    CHECK(x.total_mass() == doctest::Approx(static_cast<double>(x.size()) / 10.0));
  }
}

TEST_CASE("stationary pair distance sampler matches Exp(gamma) moments") {
  auto s1 = sample_stationary_pair_distance(1.0, 100000, 5);
  double mean = 0.0;
  for (double v : s1) mean += v;
  mean /= static_cast<double>(s1.size());
  double se = 1.0 / std::sqrt(static_cast<double>(s1.size()));  // sd of Exp(1) is 1
  CHECK(std::abs(mean - 1.0) <= 3 * se);

  auto s2 = sample_stationary_pair_distance(2.0, 100000, 5);
  double mean2 = 0.0;
  for (double v : s2) mean2 += v;
  mean2 /= static_cast<double>(s2.size());
  CHECK(std::abs(mean2 - 0.5) <= 3 * se);

  // E[e^{-lambda R}] = gamma / (gamma + lambda) at gamma = lambda = 1.
  double lap = 0.0;
  for (double v : s1) lap += std::exp(-v);
  lap /= static_cast<double>(s1.size());
  CHECK(std::abs(lap - 0.5) <= 3 * 0.3 / std::sqrt(static_cast<double>(s1.size())));
}

TEST_CASE("moran pairwise distance at stationarity has the Exp(gamma) tail") {
  const int runs = 10000;
  std::vector<double> dist;
  dist.reserve(runs);
  for (int r = 0; r < runs; ++r) {
    auto out = simulate_moran({static_cast<std::uint64_t>(r) + 1000, 2, 1.0, 15.0});
    const auto& x = out.spaces[0];
    dist.push_back(x.size() == 2 ? x.dist(0, 1) : 0.0);
  }
  for (double q : {0.5, 1.0, 2.0}) {
    double tail = 0.0;
    for (double v : dist)
      if (v > q) tail += 1.0;
    tail /= runs;
    double p = std::exp(-q);
    double se = std::sqrt(p * (1 - p) / runs);
    CHECK(std::abs(tail - p) <= 3 * se);
  }
}

TEST_CASE("coalescent-derived pair distances agree with the direct sampler") {
  auto direct = sample_stationary_pair_distance(1.0, 4000, 9);
  auto derived = coalescent_pair_distance(1.0, 4000, 10);
  auto fwd = test_first_order_dominance_1d(direct, derived, 0.05, 300, 3);
  auto bwd = test_first_order_dominance_1d(derived, direct, 0.05, 300, 4);
  CHECK(fwd.accepted);
  CHECK(bwd.accepted);
}

TEST_CASE("simulator parameter validation") {
  CHECK_THROWS(simulate_moran({0, 0, 1.0, 1.0}));
  CHECK_THROWS(simulate_coupled_coalescent_trees({0, 3, 0.0, 1.0, std::nullopt}));
  CHECK_THROWS(simulate_er_family({0, 3, {1.5}}));
  CHECK_THROWS(simulate_coupled_gw({0, 2.0, 1.0, 10, 3}));
  CHECK_THROWS(sample_stationary_pair_distance(0.0, 10, 1));
}
