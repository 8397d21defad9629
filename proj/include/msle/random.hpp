#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace msle {

// splitmix64 step; used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic per-stream seed: replica/link/sample seeds are all derived
// from a master seed this way so runs are reproducible regardless of
// evaluation order.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0xda942042e4dd58b5ULL + 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x2545f4914f6cdd1dULL);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t s1, std::uint64_t s2) {
    return mix_seed(mix_seed(master, s1), s2);
}

// mt19937_64 has a standardized output sequence, but the standard library
// distributions do not, so uniforms and normals are produced by hand to keep
// results byte-identical across compilers.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // uniform on (0,1); never returns 0 or 1
    double uniform() {
        double u = ((eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
        return u;
    }

    // unbiased integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    // standard normal via Box-Muller, one spare cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace msle
