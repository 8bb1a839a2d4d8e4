#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace meshpde {

/// Seeded RNG with a fully specified uniform mapping. std::mt19937_64 is
/// bit-reproducible by the standard, but the std distributions are not, so
/// every draw goes through explicit bit manipulation here.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // rejection against the largest multiple of n to avoid modulo bias
        const uint64_t limit = n * (UINT64_MAX / n);
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    static Rng deserialize(const std::string& text) {
        Rng r(0);
        std::istringstream is(text);
        is >> r.engine_;
        return r;
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 mix, used to derive independent per-task seeds from a master seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace meshpde
