#include "flexlp/rng.hpp"

#include <stdexcept>

namespace flexlp {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(mix64(seed)),
                    static_cast<std::uint32_t>(mix64(seed) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seeded_engine(seed)) {}

RngStream RngStream::substream(std::initializer_list<std::uint64_t> path) const {
  std::uint64_t h = mix64(seed_ ^ 0x6a09e667f3bcc908ULL);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x3c6ef372fe94f82bULL));
  return RngStream(h);
}

double RngStream::uniform() {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double u = 0.0;
  do {
    u = dist(engine_);
  } while (u <= 0.0);
  return u;
}

double RngStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::index: empty range");
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace flexlp
