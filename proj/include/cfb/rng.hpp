#pragma once

// Counter-based random streams.
// - Every stream is keyed by (master seed, round, purpose tag); draws are a
//   stateless mix of (key, counter), so any stream can be re-opened later and
//   reproduces the same values. This is what makes traces replayable and the
//   pathwise-regret comparator well defined: the reward stream of an arm at a
//   round yields the same value whether or not the arm was played.
// - Mixing is the SplitMix64 finalizer; adequate statistical quality for
//   simulation at this scale and exactly reproducible across platforms.

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cfb {

namespace detail {
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Purpose tags separate the independent substreams of one round.
namespace purpose {
inline constexpr std::uint64_t context = 1ull << 56;
inline constexpr std::uint64_t agent = 2ull << 56;
// One independent reward substream per arm.
inline constexpr std::uint64_t reward_arm(std::uint64_t arm) {
  return (3ull << 56) | arm;
}
}  // namespace purpose

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t round, std::uint64_t tag)
      : key_(detail::mix64(detail::mix64(detail::mix64(master_seed) ^ round) ^
                           tag)) {}

  std::uint64_t next_u64() { return detail::mix64(key_ ^ detail::mix64(++counter_)); }

  // Uniform double in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Categorical draw matching the given probabilities (cumulative walk; any
// remainder from floating summation goes to the last outcome).
inline int categorical(RngStream& rng, const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("categorical: empty support");
  const double u = rng.next_uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace cfb
