#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace leakscan {

/// Deterministic 64-bit generator (splitmix64). Every randomized stage of the
/// toolkit draws from one of these so results are byte-identical across runs,
/// platforms, and standard-library versions; std::shuffle and
/// std::uniform_*_distribution are implementation-defined and never used.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be nonzero. Unbiased via rejection.
    uint64_t below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Fisher-Yates; the draw sequence is pinned by this implementation.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

/// Derives an independent sub-stream seed from a base seed and a stream tag,
/// e.g. derive_seed(seed, "folds/mixed"). FNV-1a over the tag, mixed through
/// splitmix so related tags do not produce related streams.
uint64_t derive_seed(uint64_t base, std::string_view stream);

} // namespace leakscan
