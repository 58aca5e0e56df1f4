// common.hpp — scalar aliases, shared tolerances, and seeded RNG derivation.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace vtamp {

using Real = double;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Tolerance tiers. Unitarity and orthonormality checks get 1e-9; state
// equality after long operator compositions gets 1e-8; exact algebraic
// identities (phase composition, block recombination) get 1e-10.
namespace tol {
inline constexpr double unitary = 1e-9;
inline constexpr double state_eq = 1e-8;
inline constexpr double algebraic = 1e-10;
inline constexpr double dist_sum = 1e-12;
}  // namespace tol

inline bool nearly_equal(double a, double b, double t) noexcept {
    return std::abs(a - b) <= t;
}

[[noreturn]] inline void fail(const std::string& msg) {
    throw std::invalid_argument(msg);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

// Deterministic stream splitting: derive independent child seeds from a base
// seed and a stream index (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(mix_seed(seed, stream));
}

}  // namespace vtamp
