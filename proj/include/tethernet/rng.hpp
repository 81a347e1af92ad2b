#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tethernet {

// splitmix64, used to decorrelate seed material before it reaches the engine.
// Feeding small consecutive integers straight into mt19937_64 produces
// correlated low-order state; one splitmix pass fixes that.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d4a2ca9f1a59ddull;
  return z ^ (z >> 31);
}

// Deterministic stream: every consumer builds its generator from
// (root_seed, stream_index) so episode k draws identical numbers no matter
// which worker runs it or in what order.
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(uint64_t root_seed, uint64_t stream) {
    uint64_t s = root_seed;
    const uint64_t a = splitmix64(s);
    s ^= stream * 0x9e3779b97f4a7c15ull + 0x365d3c8e9a11ull;
    const uint64_t b = splitmix64(s);
    std::seed_seq seq{uint32_t(a), uint32_t(a >> 32), uint32_t(b), uint32_t(b >> 32),
                      uint32_t(stream), uint32_t(stream >> 32)};
    engine_.seed(seq);
  }

  double uniform() {  // [0, 1)
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  // Box-Muller, no cached spare: one normal costs two uniforms. The spare
  // would make draw order depend on call history, which breaks replaying
  // sub-streams.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

  uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tethernet
