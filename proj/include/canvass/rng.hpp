#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace canvass {

// Deterministic RNG helpers. mt19937_64 output is pinned by the
// standard; the draw helpers below avoid std::uniform_int_distribution,
// whose mapping is implementation-defined, so identical seeds give
// identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound) by rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        for (;;) {
            std::uint64_t value = engine_();
            if (value < limit) return value % bound;
        }
    }

    std::uint64_t in_range(std::uint64_t lo, std::uint64_t hi) {  // inclusive
        return lo + below(hi - lo + 1);
    }

    double unit() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Picks an index from cumulative-free weights (sum need not be 1).
    std::size_t weighted(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        double draw = unit() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            draw -= weights[i];
            if (draw < 0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Uniform sample of `k` distinct indices from [0, n), in selection order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> picked;
        picked.reserve(k);
        for (std::size_t i = 0; i < k && i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
            picked.push_back(pool[i]);
        }
        return picked;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace canvass
