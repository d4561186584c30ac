#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <random>
#include <vector>

#include "sybilsim/error.hpp"
#include "sybilsim/rng.hpp"
#include "sybilsim/togcom.hpp"

namespace sybilsim {

struct HeuristicConfig {
    bool h1_enabled = false;
    bool h2_enabled = false;
    double h3_accuracy = 0.0;  // 0 disables the classifier
    double h2_margin = 1.0 / 60.0;
    double c_je_high = 160.0;  // upper estimator bracket used for the good-join credit

    bool any() const { return h1_enabled || h2_enabled || h3_accuracy > 0; }
    void check() const {
        if (!(h3_accuracy >= 0 && h3_accuracy <= 1)) throw ConfigError("h3_accuracy must lie in [0, 1]");
        if (!(h2_margin >= 0 && h2_margin < 1.0 / 6.0)) throw ConfigError("h2_margin must lie in [0, 1/6)");
        if (!(c_je_high > 0)) throw ConfigError("h2 c_je_high must be positive");
    }
};

inline std::uint64_t h1_symmetric_difference(const SystemState& state) { return state.h1_new + state.h1_left; }

inline bool h1_purge_due(const SystemState& state) {
    return 11 * h1_symmetric_difference(state) >= state.s_prev;
}

// Set form, for arbitrary sorted ID lists.
template <class T>
bool h1_purge_due(const std::vector<T>& s_cur, const std::vector<T>& s_prev) {
    std::vector<T> a = s_cur, b = s_prev, diff;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
    return 11 * diff.size() >= b.size();
}

inline std::uint64_t h2_possibly_bad(const SystemState& state, double t, double c_je_high) {
    double elapsed = std::max(0.0, t - state.iter_start);
    double credit = std::floor(elapsed * state.jg_iter / c_je_high);
    if (credit >= double(state.n_a)) return 0;
    return state.n_a - static_cast<std::uint64_t>(credit);
}

inline double h2_bad_upper_bound(const SystemState& state, double t, double c_je_high) {
    auto s = state.size();
    if (s == 0) return 0.0;
    return double(state.carried_bad_upper + h2_possibly_bad(state, t, c_je_high)) / double(s);
}

inline bool h2_purge_due(double bound, double margin) { return bound + margin >= 1.0 / 6.0; }

enum class Admission { Admit, Reject };

inline Admission h3_admit(bool is_good, double accuracy, Rng& rng) {
    if (accuracy <= 0) return Admission::Admit;
    bool correct = std::bernoulli_distribution(accuracy)(rng);
    return correct == is_good ? Admission::Admit : Admission::Reject;
}

}  // namespace sybilsim
