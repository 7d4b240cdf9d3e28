#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace flexlp {

/// splitmix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic random stream.
///
/// Streams are splittable: `substream({rep, horizon, chain})` hashes the parent
/// seed together with the path, so every (replication, horizon, draw) job can
/// own an independent generator and results do not depend on scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  RngStream substream(std::initializer_list<std::uint64_t> path) const;

  /// Raw 64-bit output, e.g. to seed a child stream owned by another object.
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  /// Gamma(shape, scale = 1).
  double gamma(double shape);
  /// Uniform on {0, ..., n - 1}; n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace flexlp
