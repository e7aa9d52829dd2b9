#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace promptforge {

// Deterministic generator with a fully specified algorithm (splitmix64).
// Standard <random> engines are portable but the distributions are not,
// and seeded runs must produce identical artifacts everywhere.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound must be > 0.
    uint64_t below(uint64_t bound) {
        // multiply-shift with rejection to remove bias
        uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // k distinct indices drawn from [0, n), in draw order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        std::vector<size_t> pool(n);
        for (size_t i = 0; i < n; ++i) pool[i] = i;
        shuffle(pool);
        pool.resize(k < n ? k : n);
        return pool;
    }

  private:
    uint64_t state_;
};

// Stable sub-seed derivation so independent stages draw from disjoint streams.
inline uint64_t derive_seed(uint64_t seed, std::string_view tag, uint64_t index = 0) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    Rng mixer(seed ^ h ^ (index * 0x9e3779b97f4a7c15ULL));
    return mixer.next();
}

}  // namespace promptforge
