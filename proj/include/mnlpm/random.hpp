#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mnlpm {

/// Derives the seed of child stream `stream` from a parent seed.
///
/// seed' = splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019)).
/// Folds, K-scan cells and chains each take their own child stream, so
/// results do not depend on scheduling order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** engine seeded through splitmix64. Satisfies
/// UniformRandomBitGenerator so it can drive <random> distributions; the
/// four state words are exposed for checkpointing.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Independent generator for child stream `stream` of this generator's seed.
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }
  std::uint64_t seed() const { return seed_; }

  double uniform();  // [0, 1)
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape);  // unit rate
  double inverse_gamma(double shape, double rate) { return rate / gamma(shape); }
  bool bernoulli(double p) { return uniform() < p; }

  std::array<std::uint64_t, 4> state() const { return s_; }
  void set_state(const std::array<std::uint64_t, 4>& s) { s_ = s; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_;
};

}  // namespace mnlpm
