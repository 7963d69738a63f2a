#include "sparsebandit/rng.hpp"

#include <cmath>

namespace sparsebandit {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t stream_label(std::string_view tag, std::uint64_t a, std::uint64_t b) {
  // FNV-1a over the tag bytes, then mix in the numeric arguments.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  for (std::uint64_t v : {a, b}) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  // Seed the 256-bit state from a splitmix64 chain over (seed, stream_id);
  // splitmix64 is full-period so even (0, 0) yields a well-mixed state.
  std::uint64_t sm = seed;
  sm ^= 0x6a09e667f3bcc908ULL;  // decorrelate seed=0 from the raw chain
  (void)splitmix64(sm);
  sm += stream_id * 0x9e3779b97f4a7c15ULL;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
  // Box-Muller; u1 = 1 - uniform() is in (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * M_PI * u2);
}

double RngStream::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

std::uint64_t RngStream::uniform_int(std::uint64_t bound) {
  if (bound == 0) return 0;
  // Rejection sampling: discard draws above the largest multiple of bound.
  const std::uint64_t threshold = (0ULL - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

int RngStream::sign() { return (next_u64() >> 63) ? 1 : -1; }

RngStream RngStream::substream(std::uint64_t label) const {
  return RngStream(seed_, stream_label("substream", stream_id_, label));
}

}  // namespace sparsebandit
