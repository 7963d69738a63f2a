#pragma once
// ===========================================================================
// Deterministic random number generation.
//
// RngStream wraps xoshiro256++ seeded by a splitmix64 chain over
// (seed, stream_id).  The same (seed, stream_id) pair always produces the
// same sequence on every platform — the simulation harness relies on this
// for bit-identical reruns — and distinct stream ids give statistically
// independent streams, which lets the harness hand each (replication,
// horizon) pair its own stream regardless of execution order.
// ===========================================================================

#include <cstdint>
#include <string_view>

namespace sparsebandit {

// Stable 64-bit hash (FNV-1a) used to derive stream ids from labels like
// ("run", replication, horizon).  Kept here so every module derives ids the
// same way.
std::uint64_t stream_label(std::string_view tag, std::uint64_t a = 0,
                           std::uint64_t b = 0);

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  // Raw 64-bit output (xoshiro256++).
  std::uint64_t next_u64();

  // Uniform double in [0, 1): top 53 bits of next_u64().
  double uniform();
  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (no caching of the second deviate, so the
  // draw count per call is deterministic).
  double normal();
  double normal(double mean, double stddev);
  // Uniform integer in [0, bound) without modulo bias (rejection sampling).
  std::uint64_t uniform_int(std::uint64_t bound);
  // Fair +1/-1 sign.
  int sign();

  // A derived, independent stream (for splitting work deterministically).
  RngStream substream(std::uint64_t label) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

}  // namespace sparsebandit
