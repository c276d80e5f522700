#include <doctest.h>
#include <stdexcept>

#include <cmath>
#include <random>

#include "dss/env.hpp"

using namespace dss;

namespace {

DemandTrace make_trace(std::vector<double> demands, RanId id = RanId::A) {
  DemandTrace t;
  t.ran_id = id;
  t.demands = std::move(demands);
  return t;
}

// Independent check of the oracle: exhaustive search over a uniform grid of
// the constraint line.
double grid_search_min_j(double d_a, double d_b, const RewardParams& params,
                         int points) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= points; ++i) {
    const double n_a = params.n_r * double(i) / double(points);
    best = std::min(best,
                    compute_imbalance({n_a, params.n_r - n_a}, d_a, d_b, params));
  }
  return best;
}

}  // namespace

TEST_CASE("build_observation with no history") {
  const auto a = make_trace({1, 2, 3, 4, 5, 7});
  const auto b = make_trace({9, 8, 7, 6, 5, 3}, RanId::B);
  const auto obs = build_observation(a, b, 5, 0);
  REQUIRE(obs.pairs.size() == 1);
  CHECK(obs.pairs[0] == std::pair{7.0, 3.0});
}

TEST_CASE("build_observation pads missing history with the earliest pair") {
  const auto a = make_trace({7, 1});
  const auto b = make_trace({3, 2}, RanId::B);
  const auto obs = build_observation(a, b, 0, 2);
  REQUIRE(obs.pairs.size() == 3);
  for (const auto& p : obs.pairs) CHECK(p == std::pair{7.0, 3.0});
}

TEST_CASE("build_observation index arithmetic") {
  const auto a = make_trace({4, 5});
  const auto b = make_trace({2, 6}, RanId::B);
  const auto obs = build_observation(a, b, 1, 1);
  REQUIRE(obs.pairs.size() == 2);
  CHECK(obs.pairs[0] == std::pair{5.0, 6.0});
  CHECK(obs.pairs[1] == std::pair{4.0, 2.0});
}

TEST_CASE("build_observation rejects out-of-range t") {
  const auto a = make_trace({1});
  CHECK_THROWS_AS(build_observation(a, a, 1, 0), std::out_of_range);
}

TEST_CASE("imbalance examples") {
  RewardParams p;
  p.zeta = 0.5;
  p.n_r = 20;
  CHECK(compute_imbalance({10, 10}, 10, 10, p) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(compute_imbalance({12, 8}, 10, 10, p) == doctest::Approx(0.04).epsilon(1e-12));
  p.zeta = 1.0;
  CHECK(compute_imbalance({8, 7}, 10, 5, p) == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("zero demand is absorbed by the epsilon guard") {
  RewardParams p;
  const double j = compute_imbalance({50, 50}, 0.0, 0.0, p);
  CHECK(std::isfinite(j));
  CHECK(j >= 0.0);
}

TEST_CASE("reward examples") {
  RewardParams p;
  p.zeta = 0.3;
  CHECK(compute_reward(0.0, p) == 0.0);
  p.zeta = 0.0;
  CHECK(compute_reward(0.25, p) == doctest::Approx(-0.25).epsilon(1e-12));
  p.zeta = 0.5;
  CHECK(compute_reward(0.04, p) == doctest::Approx(-0.06).epsilon(1e-12));
}

TEST_CASE("plain reward form drops the zeta scaling") {
  RewardParams p;
  p.zeta = 0.5;
  p.reward_form = RewardForm::plain;
  CHECK(compute_reward(0.04, p) == doctest::Approx(-0.04).epsilon(1e-12));
}

TEST_CASE("step bundles observation, imbalance, and reward") {
  RewardParams p;
  p.zeta = 0.5;
  p.n_r = 20;
  const auto a = make_trace({10});
  const auto b = make_trace({10}, RanId::B);
  SUBCASE("exact allocation gives zero reward") {
    const auto r = step(0, {10, 10}, a, b, p, 0);
    CHECK(r.reward == 0.0);
  }
  SUBCASE("worked example") {
    const auto r = step(0, {12, 8}, a, b, p, 0);
    CHECK(r.imbalance == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(r.reward == doctest::Approx(-0.06).epsilon(1e-12));
  }
  SUBCASE("purity: same inputs give identical results") {
    const auto r1 = step(0, {12, 8}, a, b, p, 0);
    const auto r2 = step(0, {12, 8}, a, b, p, 0);
    CHECK(r1.imbalance == r2.imbalance);
    CHECK(r1.reward == r2.reward);
    CHECK(r1.observation.pairs == r2.observation.pairs);
  }
}

TEST_CASE("reward is proportional to imbalance for fixed zeta") {
  RewardParams p;
  p.zeta = 0.7;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const double j = dist(rng);
    CHECK(compute_reward(j, p) == doctest::Approx(-(1.0 + p.zeta) * j).epsilon(1e-15));
  }
}

TEST_CASE("optimal allocation satisfies exactly satisfiable demands") {
  RewardParams p;
  p.zeta = 0.5;
  p.n_r = 30;
  const auto alloc = optimal_allocation(12, 18, p);
  CHECK(alloc.n_a == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(alloc.n_b == doctest::Approx(18.0).epsilon(1e-12));
}

TEST_CASE("optimal allocation symmetric case") {
  RewardParams p;
  p.zeta = 0.5;
  p.n_r = 30;
  const auto alloc = optimal_allocation(10, 10, p);
  CHECK(alloc.n_a == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(alloc.n_b == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("zeta=1 gives RAN_A its demand, remainder to RAN_B") {
  RewardParams p;
  p.zeta = 1.0;
  p.n_r = 30;
  const auto alloc = optimal_allocation(10, 10, p);
  CHECK(alloc.n_a == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(alloc.n_b == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("oracle beats a 1000-point grid search on random instances") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> zeta(0.0, 1.0);
  std::uniform_real_distribution<double> demand(0.0, 80.0);
  std::uniform_real_distribution<double> pool(20.0, 150.0);
  for (int i = 0; i < 200; ++i) {
    RewardParams p;
    p.zeta = zeta(rng);
    p.n_r = pool(rng);
    const double d_a = demand(rng), d_b = demand(rng);
    const auto alloc = optimal_allocation(d_a, d_b, p);
    CHECK(alloc.n_a + alloc.n_b == doctest::Approx(p.n_r).epsilon(1e-12));
    CHECK(alloc.n_a >= 0.0);
    const double j_opt = compute_imbalance(alloc, d_a, d_b, p);
    const double j_grid = grid_search_min_j(d_a, d_b, p, 1000);
    CHECK(j_opt <= j_grid + 1e-9);
  }
}

TEST_CASE("raising zeta never worsens RAN_A at the oracle allocation") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> demand(1.0, 80.0);
  for (int i = 0; i < 100; ++i) {
    RewardParams p;
    p.n_r = 100;
    const double d_a = demand(rng), d_b = demand(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double z : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      p.zeta = z;
      const auto alloc = optimal_allocation(d_a, d_b, p);
      const double da = std::max(d_a, p.epsilon_demand);
      const double fa = (alloc.n_a - da) / da;
      const double err_a = fa * fa;
      CHECK(err_a <= prev + 1e-12);
      prev = err_a;
    }
  }
}

TEST_CASE("J is invariant under A<->B swap with zeta <-> 1-zeta") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(0.0, 50.0);
  std::uniform_real_distribution<double> zdist(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    RewardParams p, q;
    p.n_r = q.n_r = 100;
    p.zeta = zdist(rng);
    q.zeta = 1.0 - p.zeta;
    const double d_a = dist(rng), d_b = dist(rng);
    const double n_a = dist(rng);
    const double j1 = compute_imbalance({n_a, p.n_r - n_a}, d_a, d_b, p);
    const double j2 = compute_imbalance({p.n_r - n_a, n_a}, d_b, d_a, q);
    CHECK(j1 == doctest::Approx(j2).epsilon(1e-12));
  }
}

TEST_CASE("J is strictly convex along the constraint line") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> dist(1.0, 60.0);
  std::uniform_real_distribution<double> zdist(0.01, 0.99);
  for (int i = 0; i < 100; ++i) {
    RewardParams p;
    p.n_r = 100;
    p.zeta = zdist(rng);
    const double d_a = dist(rng), d_b = dist(rng);
    const double n0 = dist(rng), h = 1.0;
    auto j = [&](double n_a) {
      return compute_imbalance({n_a, p.n_r - n_a}, d_a, d_b, p);
    };
    CHECK(j(n0 - h) + j(n0 + h) - 2.0 * j(n0) > 0.0);
  }
}

TEST_CASE("quasi-static allocation from training peaks") {
  RewardParams p;
  p.n_r = 100;
  SUBCASE("peaks fit: RAN_A gets its peak, remainder to RAN_B") {
    const auto alloc = quasi_static_allocation(make_trace({10, 40, 20}),
                                               make_trace({50, 30, 10}, RanId::B), p);
    CHECK(alloc.n_a == doctest::Approx(40.0));
    CHECK(alloc.n_b == doctest::Approx(60.0));
  }
  SUBCASE("peaks overflow: proportional fallback") {
    const auto alloc = quasi_static_allocation(make_trace({80, 10}),
                                               make_trace({80, 20}, RanId::B), p);
    CHECK(alloc.n_a == doctest::Approx(50.0));
    CHECK(alloc.n_b == doctest::Approx(50.0));
  }
  SUBCASE("constant traces with exact pool give zero J everywhere") {
    p.n_r = 70;
    const auto a = make_trace({30, 30, 30});
    const auto b = make_trace({40, 40, 40}, RanId::B);
    const auto alloc = quasi_static_allocation(a, b, p);
    for (std::size_t t = 0; t < a.size(); ++t)
      CHECK(compute_imbalance(alloc, a.demands[t], b.demands[t], p) ==
            doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("empty trace is an error") {
    DemandTrace empty;
    CHECK_THROWS_AS(quasi_static_allocation(empty, empty, p), std::invalid_argument);
  }
}
