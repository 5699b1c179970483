#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lunarlab {

/// Engine used everywhere randomness is consumed. Callers own their engines.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
/// Used instead of std::uniform_real_distribution so sequences do not depend
/// on the standard library implementation.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Index in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
    return i < n ? i : n - 1;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the i-th independent stream (episode, trial, worker) of a run.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ (stream * 0xd1b54a32d192ed03ULL));
}

inline std::string save_rng(const Rng& rng) {
    std::ostringstream out;
    out << rng;
    return out.str();
}

inline Rng load_rng(const std::string& text) {
    Rng rng;
    std::istringstream in(text);
    in >> rng;
    if (in.fail()) throw std::invalid_argument("load_rng: malformed generator state");
    return rng;
}

}  // namespace lunarlab
