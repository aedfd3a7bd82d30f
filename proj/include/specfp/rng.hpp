#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace specfp {

/// Deterministic random stream with cheap, order-independent substream derivation.
///
/// Uses splitmix64 throughout so results are bit-identical across platforms
/// (the standard <random> distributions are implementation-defined).
/// `fork` derives a child stream from the parent's *identity*, not its current
/// state, so forking is unaffected by how many values were already drawn.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

    /// Child stream keyed by an integer salt.
    RngStream fork(std::uint64_t salt) const;
    /// Child stream keyed by a label (e.g. a spot id).
    RngStream fork(std::string_view label) const;

    std::uint64_t next_u64();

    /// Uniform double in [0,1) with 53 random bits.
    double next_double();

    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller. Two uniforms per draw.
    double normal();

    /// Unbiased uniform index in [0,n). n must be >= 1.
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

} // namespace specfp
