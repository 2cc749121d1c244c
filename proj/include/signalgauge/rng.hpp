#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sg {

// Seedable 64-bit generator with fully specified output. std::mt19937_64 is
// bit-identical across platforms; the scaling helpers below avoid
// std::uniform_*_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1) with 53 random bits
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    float next_float() { return static_cast<float>(next_double()); }

    // unbiased uniform integer in [0, bound) via rejection sampling
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    // Fisher-Yates shuffle
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace sg
