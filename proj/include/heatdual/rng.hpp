#ifndef HEATDUAL_RNG_HPP
#define HEATDUAL_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>

namespace heatdual {

/// 64-bit avalanche mix (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Seed for stream `index` of a run seeded with `seed`; distinct indices give
/// unrelated engine states.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

/// Random source used by every simulator. The engine is std::mt19937_64,
/// whose output sequence is fixed by the standard; the variate transforms
/// below are implemented here rather than taken from <random>, whose
/// distribution algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng for_stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(derive_stream_seed(seed, index));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0,1).
  double uniform_open();
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

  double normal();
  double exponential(double rate);
  double gamma(double shape);
  double beta(double a, double b);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace heatdual

#endif  // HEATDUAL_RNG_HPP
