// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace ifsem {

// mt19937_64 with hand-written distributions. The standard pins down the
// engine bit-for-bit but not the distributions, so uniform/normal/bounded-int
// are implemented here to keep seeded runs reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n < 2) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; second value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double theta = 2.0 * M_PI * uniform01();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Index drawn from an unnormalized nonnegative weight vector.
    template <typename Container>
    std::size_t categorical(const Container& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform01() * total;
        std::size_t last = 0;
        std::size_t i = 0;
        for (double w : weights) {
            if (w > 0.0) {
                if (u < w) return i;
                u -= w;
                last = i;
            }
            ++i;
        }
        return last;  // fell off the end due to rounding
    }

    /// Child stream derived from the original seed and a position index.
    /// Independent of how many values were drawn from this stream.
    Rng spawn(std::uint64_t index) const { return Rng(mix(seed_ ^ (0x9e3779b97f4a7c15ULL * (index + 1)))); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// n distinct indices from [0, total), uniform without replacement
/// (partial Fisher-Yates order).
inline std::vector<std::size_t> sample_indices(std::size_t total, std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (n > total) n = total;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + rng.below(total - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

}  // namespace ifsem
