#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace rffw {

// splitmix64. Standard library distributions are implementation-defined, so
// everything that must be reproducible bit-for-bit draws through this.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, one variate per call; u1 shifted away from 0 so log() is safe
    double normal() {
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // [0, n). Modulo bias is irrelevant at the n used here (n << 2^64).
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

private:
    uint64_t state_;
};

// Deterministic stream derivation: hash the parts into one seed.
inline uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> parts) {
    uint64_t z = base;
    for (uint64_t p : parts) {
        z ^= p + 0x9e3779b97f4a7c15ULL + (z << 6) + (z >> 2);
        Rng mix(z);
        z = mix.next_u64();
    }
    return z;
}

inline uint64_t derive_seed(uint64_t base, uint64_t a) { return derive_seed(base, {a}); }
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b) { return derive_seed(base, {a, b}); }
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b, uint64_t c) {
    return derive_seed(base, {a, b, c});
}

inline uint64_t fnv1a(const char* s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s; ++s) {
        h ^= static_cast<unsigned char>(*s);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace rffw
