#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <random>

#include "triqmc/util.hpp"

namespace triqmc {

// mt19937_64 wrapped so uniforms are generated identically on every platform.
// std::uniform_real_distribution is not bit-specified, so we build doubles
// from raw engine output ourselves. One Rng per chain; streams derived from
// (seed, stream_id) never collide in practice (splitmix64 mixing).
class Rng {
  public:
    Rng() : gen_(0x2545F4914F6CDD1DULL) {}
    explicit Rng(uint64_t seed) : gen_(seed) {}

    static Rng stream(uint64_t seed, uint64_t stream_id) {
        uint64_t s = splitmix64(seed ^ splitmix64(0x9e3779b97f4a7c15ULL * (stream_id + 1)));
        return Rng(s);
    }

    // uniform in [0,1), 53-bit resolution
    double u01() { return (gen_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) {
        // rejection-free modulo bias is ~2^-64 * n; irrelevant for n < 2^40
        return gen_() % n;
    }

    bool coin() { return gen_() & 1ULL; }
    uint64_t raw() { return gen_(); }

    friend std::ostream& operator<<(std::ostream& os, const Rng& r) { return os << r.gen_; }
    friend std::istream& operator>>(std::istream& is, Rng& r) { return is >> r.gen_; }

  private:
    std::mt19937_64 gen_;
};

}  // namespace triqmc
