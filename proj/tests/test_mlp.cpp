#include <doctest.h>

#include <cmath>
#include <random>

#include "dss/mlp.hpp"

using namespace dss;

TEST_CASE("forward matches a hand-computed tiny network") {
  // 1 -> 1 linear: y = w*x + b
  Mlp net({1, 1}, OutputActivation::linear);
  net.params() = {2.0, 0.5};
  CHECK(net.forward({3.0})[0] == doctest::Approx(6.5));
}

TEST_CASE("sigmoid output squashes to (0,1)") {
  Mlp net({2, 1}, OutputActivation::sigmoid);
  net.params() = {0.0, 0.0, 0.0};  // pre-activation 0 -> 0.5
  CHECK(net.forward({4.0, -1.0})[0] == doctest::Approx(0.5));
}

TEST_CASE("parameter gradients match central finite differences") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp net({3, 4, 1}, trial % 2 == 0 ? OutputActivation::linear
                                      : OutputActivation::sigmoid);
    net.init_uniform(rng);
    std::uniform_real_distribution<double> xdist(-1.0, 1.0);
    std::vector<double> x{xdist(rng), xdist(rng), xdist(rng)};

    Mlp::Cache cache;
    net.forward(x, &cache);
    std::vector<double> grad(net.params().size(), 0.0);
    std::vector<double> input_grad;
    net.backward(cache, {1.0}, grad, &input_grad);

    const double h = 1e-6;
    for (std::size_t i = 0; i < net.params().size(); ++i) {
      const double orig = net.params()[i];
      net.params()[i] = orig + h;
      const double yp = net.forward(x)[0];
      net.params()[i] = orig - h;
      const double ym = net.forward(x)[0];
      net.params()[i] = orig;
      const double fd = (yp - ym) / (2.0 * h);
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::vector<double> xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (net.forward(xp)[0] - net.forward(xm)[0]) / (2.0 * h);
      CHECK(input_grad[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("Adam with zero learning rate leaves parameters unchanged") {
  Mlp net({2, 2, 1}, OutputActivation::linear);
  std::mt19937_64 rng(1);
  net.init_uniform(rng);
  const auto before = net.params();
  Adam opt(net.params().size(), 0.0);
  std::vector<double> grad(net.params().size(), 1.0);
  opt.step(net.params(), grad);
  CHECK(net.params() == before);
}

TEST_CASE("soft update arithmetic") {
  std::vector<double> target{0.0};
  std::vector<double> online{1.0};
  SUBCASE("tau=1 copies online into target") {
    soft_update(target, online, 1.0);
    CHECK(target[0] == 1.0);
  }
  SUBCASE("tau=0.01 moves 1% of the way") {
    soft_update(target, online, 0.01);
    CHECK(target[0] == doctest::Approx(0.01).epsilon(1e-15));
  }
}

TEST_CASE("finite() flags NaN weights") {
  Mlp net({1, 1}, OutputActivation::linear);
  CHECK(net.finite());
  net.params()[0] = std::nan("");
  CHECK(!net.finite());
}
