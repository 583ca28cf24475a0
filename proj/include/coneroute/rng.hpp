#pragma once

#include <cstdint>
#include <initializer_list>

namespace coneroute {

// Counter-based splittable generator. A stream is a 64-bit key; outputs are a
// SplitMix64-style finalizer applied to (key, counter). derive() mixes tags
// into the key to produce independent child streams, so a substream is fully
// determined by (seed, tag path) and never by how many draws other streams
// made. Simulations key channel randomness by (seed, node, slot), which keeps
// channel outcomes identical across policies for paired comparisons.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x43a0d2c6f1f3d8a1ull)) {}

  Rng derive(std::uint64_t tag) const {
    Rng child(*this);
    child.key_ = mix(key_ ^ mix(tag + 0x9e3779b97f4a7c15ull));
    child.ctr_ = 0;
    return child;
  }

  Rng derive(std::initializer_list<std::uint64_t> tags) const {
    Rng child(*this);
    for (std::uint64_t t : tags) child = child.derive(t);
    return child;
  }

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}; n >= 1. Rejection-free multiply-shift is biased
  // by at most n/2^64, negligible for simulation use.
  std::uint32_t next_below(std::uint32_t n) {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// Fixed tags naming the purpose of derived substreams.
namespace stream {
inline constexpr std::uint64_t channel = 1;   // forwarder-set draws, per (node, slot)
inline constexpr std::uint64_t arrival = 2;   // exogenous arrivals, per (node, slot)
inline constexpr std::uint64_t tiebreak = 3;  // cross-transmitter tie-break draws
inline constexpr std::uint64_t drift = 4;     // one-step Monte Carlo drift samples
inline constexpr std::uint64_t sweep = 5;     // sweep grid-point seeds
}  // namespace stream

}  // namespace coneroute
