#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace bfmcmc {

// Counter-based generator (Philox 4x32, 10 rounds). The 64-bit seed is the
// key; the 64-bit stream id occupies the upper counter words, so distinct
// stream ids own disjoint counter blocks and yield independent sequences.
// Each stream addresses 2^64 blocks of four 32-bit words.
//
// A stream is single-owner: one chain (or one worker) per stream, with
// parallelism obtained by giving each worker its own stream id.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), block_(0), have_(0) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    // Next raw 32-bit word.
    std::uint32_t next_u32() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]; safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    // Standard normal draw (ziggurat, exact).
    double normal();

    // Derive a deterministically related but independent stream, e.g. for
    // per-step scratch Monte Carlo inside a sequential chain.
    RngStream substream(std::uint64_t tag) const {
        return RngStream(seed_, mix(stream_id_, tag));
    }

    // Philox 4x32-10 block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& ctr,
                                                   const std::array<std::uint32_t, 2>& key) {
        std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
        std::uint32_t k0 = key[0], k1 = key[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return {c0, c1, c2, c3};
    }

private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
        const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                                  static_cast<std::uint32_t>(seed_ >> 32)};
        const auto out = philox4x32(ctr, key);
        buf_[0] = out[0];
        buf_[1] = out[1];
        buf_[2] = out[2];
        buf_[3] = out[3];
        ++block_;
        have_ = 4;
    }

    // splitmix64 finalizer over both words; substream derivation only.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_;
    std::uint32_t buf_[4];
    int have_;
};

// Bernoulli(p) as a single uniform comparison. p must lie in [0,1].
inline bool draw_bernoulli(RngStream& rng, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("draw_bernoulli: p outside [0,1]");
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return rng.uniform() < p;
}

inline double draw_uniform(RngStream& rng) { return rng.uniform(); }

}  // namespace bfmcmc
