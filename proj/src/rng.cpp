#include "mlceval/rng.hpp"

namespace mlceval {

std::uint64_t DeterministicRng::next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t part0, std::uint64_t part1) {
    std::uint64_t state = seed;
    std::uint64_t out = splitmix64(state);
    state ^= part0;
    out ^= splitmix64(state);
    state ^= part1;
    out ^= splitmix64(state);
    return out;
}

}  // namespace mlceval
