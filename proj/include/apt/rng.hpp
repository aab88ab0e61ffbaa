#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace apt {

// Every random stream in the project is a std::mt19937_64 engine (its output
// sequence is fixed by the C++ standard). Engines are seeded with a 64-bit
// value obtained by folding a master seed and a path of stream tags through
// the SplitMix64 finalizer; integer and real draws are derived from raw engine
// output with the explicit formulas below, never with <random> distributions,
// whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, tag0, tag1, ...).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next() { return engine_(); }

  // (next() >> 11) * 2^-53, in [0, 1).
  double uniform();

  // Uniform on [0, n) via Lemire's multiply-shift with rejection. n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

// Stream tags used with Rng::derive.
namespace stream {
inline constexpr std::uint64_t init = 0x1001;
inline constexpr std::uint64_t candidates = 0x1002;
inline constexpr std::uint64_t epoch_order = 0x1003;
inline constexpr std::uint64_t uncertainty = 0x1004;
inline constexpr std::uint64_t fisher = 0x1005;
inline constexpr std::uint64_t selector = 0x1006;
inline constexpr std::uint64_t baseline_order = 0x1007;
inline constexpr std::uint64_t probe_split = 0x1008;
inline constexpr std::uint64_t embed = 0x1009;
inline constexpr std::uint64_t tracking = 0x100a;
}  // namespace stream

}  // namespace apt
