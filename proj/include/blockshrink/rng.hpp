#pragma once

#include <cstdint>
#include <random>

namespace blockshrink {

// A value-type handle for a reproducible random sequence.  Replicate i of a
// Monte Carlo run always draws from split_stream(root, i), so results do not
// depend on how replicates are scheduled across workers.
struct RandomStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const RandomStream& a, const RandomStream& b) {
    return a.seed == b.seed && a.stream_id == b.stream_id;
  }
};

// splitmix64 finalizer; used as a mixing function for stream derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline RandomStream split_stream(const RandomStream& s, std::uint64_t index) {
  RandomStream out;
  out.seed = s.seed;
  out.stream_id = splitmix64(s.stream_id ^ splitmix64(index ^ 0xd1b54a32d192ed03ULL));
  return out;
}

inline std::mt19937_64 make_engine(const RandomStream& s) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(s.seed),
      static_cast<std::uint32_t>(s.seed >> 32),
      static_cast<std::uint32_t>(splitmix64(s.stream_id)),
      static_cast<std::uint32_t>(splitmix64(s.stream_id) >> 32),
      static_cast<std::uint32_t>(splitmix64(s.stream_id ^ s.seed)),
      static_cast<std::uint32_t>(splitmix64(s.stream_id ^ s.seed) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace blockshrink
