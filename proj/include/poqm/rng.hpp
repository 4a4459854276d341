#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace poqm {

// splitmix64 finalizer; used to spread user seeds and derive substreams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic random source. Every probabilistic operation in the library
/// takes an Rng parameter explicitly; identical seeds give identical
/// outcomes, bit for bit. Independent substreams (per trial, per role) are
/// derived with child(), so parallel trials never share a stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : base_(seed), eng_(mix64(seed)) {}

    /// Independent stream derived from this rng's seed and a stream index.
    Rng child(std::uint64_t stream) const {
        return Rng(mix64(base_ ^ mix64(stream + 0x6a09e667f3bcc909ull)));
    }

    std::uint64_t seed() const { return base_; }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, m). m must be positive.
    std::uint64_t below(std::uint64_t m) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(eng_()) * m) >> 64);
    }

    int bit() { return static_cast<int>(eng_() >> 63); }

    /// Uniform n-character '0'/'1' string.
    std::string bits(int n) {
        std::string s(static_cast<std::size_t>(n), '0');
        for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = bit() ? '1' : '0';
        return s;
    }

  private:
    std::uint64_t base_;
    std::mt19937_64 eng_;
};

}  // namespace poqm
