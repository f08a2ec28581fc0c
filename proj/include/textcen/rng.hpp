#pragma once

#include <cstdint>
#include <random>

namespace textcen {

/// Seeded generator with independent numbered streams.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq with the words
/// (seed lo, seed hi, stream lo, stream hi); both are fully specified by the
/// standard, and uniform() converts the top 53 bits directly, so sequences are
/// identical on every conforming platform.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace textcen
