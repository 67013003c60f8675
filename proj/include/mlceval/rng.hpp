#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mlceval {

// Deterministic random source shared by the generators and the splitter.
//
// The engine is std::mt19937_64, whose output sequence is fully specified by
// the standard, and all derived draws (bounded integers, unit doubles,
// shuffles) are implemented here rather than with std:: distributions, whose
// results vary across standard libraries. Identical seeds therefore produce
// identical artifacts on every platform.
class DeterministicRng {
public:
    // Identity recorded in manifests so artifacts state how they were drawn.
    static constexpr const char* kId = "mt19937_64-fy/1";

    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound); rejection sampling, no modulo bias.
    std::uint64_t next_below(std::uint64_t bound);

    // Uniform double in [0, 1) with 53 significant bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_unit() < p; }

    // Fisher–Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Stable sub-seed derivation (splitmix64 over the parts), so independent
// streams (per repeat, per stage) are reproducible from one master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t part0, std::uint64_t part1 = 0);

}  // namespace mlceval
