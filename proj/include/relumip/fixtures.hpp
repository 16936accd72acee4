#ifndef RELUMIP_FIXTURES_HPP_
#define RELUMIP_FIXTURES_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "relumip/adversarial.hpp"
#include "relumip/network.hpp"
#include "relumip/training.hpp"

namespace relumip {

// Seeds used by the acceptance suite. Changing them changes every fixture.
// The first ten seeds from 1000 up whose runner-up class is reachable inside [0, 1]^4.
inline constexpr std::uint64_t kSmallNetSeeds[] = {1000, 1003, 1005, 1007, 1008, 1009, 1014, 1015, 1017, 1024};
inline constexpr std::uint64_t kFuzzNetSeed = 2000;      // bound fuzz nets use kFuzzNetSeed + k
// The first seed from 3000 up where class 5 is reachable from the reference.
inline constexpr std::uint64_t kLargeAttackSeed = 3002;
inline constexpr std::uint64_t kSeparableSeed = 4000;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

struct FixtureSpec {
  std::uint64_t seed = 0;
  std::vector<std::size_t> sizes;  // n0, ..., nL
  double weight_scale = 1.0;
  Interval input{0.0, 1.0};
};

/// Hidden layers ReLU, last layer linear. Weights and biases uniform in [-scale, scale],
/// drawn layer by layer, weights (row-major) before biases.
Network gen_network(const FixtureSpec& spec);

/// The four points of {0,1}^2 labelled by exclusive or.
Dataset xor4();
/// Points uniform in [-1, 1]^dim labelled by the side of a random hyperplane through the origin.
Dataset random_separable(std::uint64_t seed, std::size_t n, std::size_t dim);

struct AttackFixture {
  Network net;
  AttackSpec spec;
};

/// 4-5-5-3 net from one seed: weights in [-1, 1], inputs in [0, 1]^4. The reference input is drawn
/// from a second stream; the true class is its forward argmax and the target the runner-up class.
AttackFixture small_attack_fixture(std::uint64_t seed);
/// One fixture per entry of kSmallNetSeeds.
std::vector<AttackFixture> small_attack_fixtures();
/// 16 inputs, ReLU hidden layers of 12, 8 and 4 units, 10 linear logits. The reference is the
/// first draw the network classifies as 0; the target is 5.
AttackFixture large_attack_fixture();
/// A 2-2-1 net whose output range the interval rules overestimate and the LP tightens.
Network tightening_fixture();

// ---- independent oracles (no solver, no encodings) ----

/// Exact layer-1 pre-activation ranges by enumerating the corners of the input box (<= 12 inputs).
std::vector<Interval> corner_enumeration_bounds(const Network& net);

struct WeightSearchResult {
  double best_loss = 0.0;
  std::vector<double> weights;  // per layer, per output unit: bias then input weights
  std::uint64_t assignments = 0;
};

/// Binarized semantics: weights P * {-1, 0, 1}, hidden sign (sign(0) = +1),
/// output 2 / (P (n + 1)) times the weighted sum. At most 12 weights.
WeightSearchResult ternary_weight_search(const std::vector<std::size_t>& arch, const Dataset& data, int P,
                                         Loss loss);
/// Binary-step semantics: weights on {-1, -0.5, 0, 0.5, 1}, hidden step (step(0) = 1), linear output.
/// At most 9 weights.
WeightSearchResult lattice_weight_search(const std::vector<std::size_t>& arch, const Dataset& data, Loss loss);

}  // namespace relumip

#endif  // RELUMIP_FIXTURES_HPP_
