#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>

namespace navrl {

// Why an episode ended. Running means it has not ended yet.
enum class TerminalCause { Running, Goal, Collision, Idle };

constexpr std::string_view to_string(TerminalCause cause) {
  switch (cause) {
    case TerminalCause::Running: return "running";
    case TerminalCause::Goal: return "goal";
    case TerminalCause::Collision: return "collision";
    case TerminalCause::Idle: return "idle";
  }
  return "?";
}

// Deterministic RNG stream. All draws are derived from the raw mt19937_64
// output so results do not depend on the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Independent sub-stream of a master seed.
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    gen_.seed(seq);
  }

  std::uint64_t raw() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in {0, ..., n-1}, unbiased.
  int uniform_int(int n) {
    assert(n > 0);
    const auto range = static_cast<std::uint64_t>(n);
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() / range * range;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<int>(x % range);
  }

 private:
  std::mt19937_64 gen_;
};

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

}  // namespace navrl
