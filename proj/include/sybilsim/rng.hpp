#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace sybilsim {

using Rng = std::mt19937_64;

// Independent stream per (base seed, tags...) so paired runs share traces.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::vector<std::uint32_t> words;
    words.push_back(static_cast<std::uint32_t>(base));
    words.push_back(static_cast<std::uint32_t>(base >> 32));
    for (auto t : tags) {
        words.push_back(static_cast<std::uint32_t>(t));
        words.push_back(static_cast<std::uint32_t>(t >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace sybilsim
