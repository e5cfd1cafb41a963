// Seeded random streams and the substream contract.
//
// Every Monte Carlo task in this project draws from a stream derived
// deterministically from (master seed, task index...), so ensembles are
// reproducible and order-independent regardless of thread count.
// Scheme identifier: "splitmix64-v1" (echoed into run records).

#pragma once

#include <cstdint>

namespace rwre {

inline constexpr char kSubstreamScheme[] = "splitmix64-v1";

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Combines words into a stream seed. Order-sensitive.
constexpr std::uint64_t seed_for(std::uint64_t master, std::uint64_t a) {
    return mix64(mix64(master + kGolden) ^ (a + kGolden));
}
constexpr std::uint64_t seed_for(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
    return mix64(seed_for(master, a) ^ (b + kGolden));
}
constexpr std::uint64_t seed_for(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b, std::uint64_t c) {
    return mix64(seed_for(master, a, b) ^ (c + kGolden));
}

// Maps signed site indices to distinct codes for per-site hashing.
constexpr std::uint64_t zigzag(std::int64_t x) {
    return (static_cast<std::uint64_t>(x) << 1) ^
           static_cast<std::uint64_t>(x >> 63);
}

constexpr double unit_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

// Counter-free SplitMix64 stream.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    double next_unit() { return unit_from_bits(next_u64()); }

    // Uniform integer in [0, n), n > 0. Rejection-free modulo with 64-bit
    // multiply-shift (Lemire).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

  private:
    std::uint64_t state_;
};

}  // namespace rwre
