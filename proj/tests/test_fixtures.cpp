#include <cmath>
#include <random>

#include "doctest.h"
#include "relumip/bounds.hpp"
#include "relumip/errors.hpp"
#include "relumip/fixtures.hpp"
#include "test_util.hpp"

using namespace relumip;

TEST_CASE("uniform draws come from the top 53 bits") {
  std::mt19937_64 rng;  // default seed 5489
  rng.discard(9999);
  // The 10000th output of a default-constructed mt19937_64 is fixed by the standard.
  const double want = double(9981545732273789042ULL >> 11) * 0x1.0p-53;
  CHECK(uniform01(rng) == want);
  std::mt19937_64 r2(7);
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform01(r2);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("weights are drawn row-major, then biases, layer by layer") {
  const Network net = gen_network(FixtureSpec{42, {2, 3, 1}, 0.5, {-1, 1}});
  std::mt19937_64 rng(42);
  auto draw = [&] { return 0.5 * (2.0 * uniform01(rng) - 1.0); };
  for (std::size_t l = 1; l <= 2; ++l) {
    const auto& d = std::get<DenseLayer>(net.layer(l));
    for (std::size_t r = 0; r < d.inputs(); ++r)
      for (std::size_t c = 0; c < d.outputs(); ++c) CHECK(d.weights(r, c) == draw());
    for (double b : d.bias) CHECK(b == draw());
    CHECK(d.activation == (l == 1 ? Activation::Relu : Activation::Linear));
  }
  CHECK(net.input_box()[1].lo == -1.0);
}

TEST_CASE("generation is reproducible") {
  const FixtureSpec a{9, {4, 5, 3}, 1.0, {0, 1}};
  CHECK(network_to_string(gen_network(a)) == network_to_string(gen_network(a)));
  FixtureSpec b = a;
  b.seed = 10;
  CHECK(network_to_string(gen_network(a)) != network_to_string(gen_network(b)));
  CHECK(network_to_string(large_attack_fixture().net) == network_to_string(large_attack_fixture().net));
  CHECK(dataset_to_string(random_separable(kSeparableSeed, 8, 2)) ==
        dataset_to_string(random_separable(kSeparableSeed, 8, 2)));
}

TEST_CASE("zero scale gives an all-zero network") {
  const Network net = gen_network(FixtureSpec{3, {3, 2, 2}, 0.0, {0, 1}});
  for (std::size_t l = 1; l <= 2; ++l) {
    const auto& d = std::get<DenseLayer>(net.layer(l));
    for (double w : d.weights.data()) CHECK(w == 0.0);
    for (double b : d.bias) CHECK(b == 0.0);
  }
}

TEST_CASE("attack fixtures are well formed") {
  const auto small = small_attack_fixtures();
  CHECK(small.size() == std::size(kSmallNetSeeds));
  for (const AttackFixture& f : small) {
    CHECK_NOTHROW(f.spec.validate(f.net));
    const auto logits = forward(f.net, f.spec.reference).output();
    CHECK(argmax(logits) == f.spec.true_class);
    for (std::size_t j = 0; j < logits.size(); ++j)
      if (j != f.spec.true_class) CHECK(logits[j] <= logits[f.spec.target_class()]);
  }
  const AttackFixture big = large_attack_fixture();
  CHECK(big.net.input_dim() == 16);
  CHECK(big.net.num_layers() == 4);
  CHECK(big.spec.true_class == 0);
  CHECK(big.spec.target_class() == 5);
  CHECK(argmax(forward(big.net, big.spec.reference).output()) == 0);
}

TEST_CASE("tightening fixture") {
  const Network net = tightening_fixture();
  const auto acts = forward(net, std::vector<double>{0.5, -0.5});
  CHECK(acts.output()[0] == doctest::Approx(1.0));
  CHECK(bounds_interval_bunel(net).at(2, 0).pre.hi == doctest::Approx(4.0));
}

TEST_CASE("corner enumeration equals interval bounds on the first layer") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Network net = tu::random_net(900 + seed, {4, 6, 2}, {-1, 2});
    const auto corners = corner_enumeration_bounds(net);
    const BoundSet b = bounds_interval_bunel(net);
    REQUIRE(corners.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(corners[i].lo == doctest::Approx(b.at(1, i).pre.lo).epsilon(1e-12));
      CHECK(corners[i].hi == doctest::Approx(b.at(1, i).pre.hi).epsilon(1e-12));
    }
  }
}

TEST_CASE("corner enumeration edge cases") {
  const Network one(1, {{-2, 3}}, {tu::dense({{-1.5}}, {0.5})});
  const auto c = corner_enumeration_bounds(one);
  CHECK(c[0].lo == doctest::Approx(-4.0));
  CHECK(c[0].hi == doctest::Approx(3.5));
  const Network flat(2, {{1, 1}, {2, 2}}, {tu::dense({{1}, {1}}, {0})});
  const auto f = corner_enumeration_bounds(flat);
  CHECK(f[0].lo == doctest::Approx(3.0));
  CHECK(f[0].hi == doctest::Approx(3.0));
  const Network wide(13, std::vector<Interval>(13, {0, 1}),
                     {tu::dense(std::vector<std::vector<double>>(13, std::vector<double>(1, 1.0)), {0})});
  CHECK_THROWS(corner_enumeration_bounds(wide));
}

TEST_CASE("weight searches") {
  CHECK(ternary_weight_search({2, 2, 1}, xor4(), 1, Loss::Hinge).best_loss == doctest::Approx(0.0));
  CHECK(lattice_weight_search({2, 2, 1}, xor4(), Loss::L1).best_loss == doctest::Approx(0.0));
  const Dataset empty;
  CHECK(ternary_weight_search({2, 2, 1}, empty, 1, Loss::L1).best_loss == 0.0);
  const Dataset single{{{0.3, -0.2}}, {1}};
  // Binarized outputs move in steps of 2/3 here, so an L1 target of 1 is missed by 1/3.
  CHECK(ternary_weight_search({2, 2, 1}, single, 1, Loss::L1).best_loss == doctest::Approx(1.0 / 3.0));
  CHECK(ternary_weight_search({2, 2, 1}, single, 1, Loss::Hinge).best_loss == doctest::Approx(0.0));
  CHECK(lattice_weight_search({2, 2, 1}, single, Loss::L1).best_loss == doctest::Approx(0.0));
  // 3^11 assignments for 11 weights.
  const Dataset three{{{0.3, -0.2, 0.1}}, {0}};
  CHECK(ternary_weight_search({3, 2, 1}, three, 1, Loss::Hinge).assignments == 177147);
  CHECK_THROWS(ternary_weight_search({3, 3, 1}, xor4(), 1, Loss::L1));
  CHECK_THROWS(lattice_weight_search({2, 3, 1}, xor4(), Loss::L1));
}
