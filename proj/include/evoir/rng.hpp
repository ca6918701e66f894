#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace evoir {

// Deterministic random stream (xoshiro256** seeded through splitmix64).
// std::uniform_*_distribution is implementation-defined, so every draw the
// search makes goes through this class to keep runs reproducible across
// hosts and standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : state_)
            word = splitmix64(x);
    }

    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform integer in [0, bound). bound must be > 0.
    uint64_t below(uint64_t bound) {
        // Rejection sampling over the top bits; unbiased and portable.
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold)
                return r % bound;
        }
    }

    size_t index(size_t size) { return static_cast<size_t>(below(static_cast<uint64_t>(size))); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    float uniform_float() { return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f; }

    bool chance(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[index(v.size())];
    }

    // Child stream derived from this stream's seed material plus a label.
    // Used to hand each individual an independent, reproducible stream.
    static Rng stream(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
        uint64_t x = master;
        uint64_t h = splitmix64(x);
        x = h ^ (a * 0x9e3779b97f4a7c15ULL + 0x1234567);
        h = splitmix64(x);
        x = h ^ (b * 0xd1b54a32d192ed03ULL + 0x89abcdef);
        h = splitmix64(x);
        x = h ^ (c * 0x2545f4914f6cdd1dULL + 0x13579bdf);
        return Rng(splitmix64(x));
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4] = {};
};

} // namespace evoir
