#pragma once

#include <cstdint>
#include <random>

namespace cran {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to decorrelate seeds derived from small counters.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Per-trial stream: mixes (master seed, sweep index, trial index) so that
// parallel trials are reproducible and order-independent.
inline Rng make_trial_rng(std::uint64_t master_seed, std::uint64_t sweep_index,
                          std::uint64_t trial_index) {
    std::uint64_t s = mix64(master_seed);
    s = mix64(s ^ (0x5851f42d4c957f2dULL * (sweep_index + 1)));
    s = mix64(s ^ (0x14057b7ef767814fULL * (trial_index + 1)));
    return Rng(s);
}

}  // namespace cran
