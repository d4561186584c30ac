#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sybilsim/epochs.hpp"
#include "sybilsim/error.hpp"
#include "sybilsim/rng.hpp"
#include "sybilsim/trace.hpp"

namespace sybilsim {

struct AssumptionConstants {
    double a1_low = 1, a1_high = 1, a2_low = 1, a2_high = 1;
    double c_je_low = 0, c_je_high = 0, d1 = 0, d2 = 0;

    // Measured extremes are widened to straddle 1 before deriving.
    static AssumptionConstants derive(double a1l, double a1h, double a2l, double a2h) {
        AssumptionConstants c;
        c.a1_low = std::min(1.0, a1l);
        c.a1_high = std::max(1.0, a1h);
        c.a2_low = std::min(1.0, a2l);
        c.a2_high = std::max(1.0, a2h);
        c.c_je_low = (5.0 / 6.0) * c.a1_low * c.a1_low * c.a2_low / c.a1_high;
        c.c_je_high = 5.0 * c.a1_high * c.a1_high * c.a2_high / c.a1_low;
        c.d1 = std::sqrt(2.0 * c.c_je_high);
        c.d2 = 12.0 / 11.0 + c.a1_high * c.a2_high / (11.0 * c.c_je_low);
        return c;
    }
};

inline std::pair<double, double> measure_a1(const EpochAnalysis& ep) {
    if (ep.size() < 2) throw InsufficientData("A1 needs at least two epochs");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t j = 1; j < ep.size(); ++j) {
        if (!(ep.rates[j - 1] > 0)) continue;
        double r = ep.rates[j] / ep.rates[j - 1];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    if (!std::isfinite(lo)) throw InsufficientData("A1 needs epochs with positive join rates");
    return {lo, hi};
}

struct A2Options {
    double resolution = 1.0;         // seconds added to every window span
    std::size_t exact_limit = 2000;  // exhaustive pair enumeration up to this many joins
    std::size_t short_windows = 64;  // above it: every window of up to this many consecutive joins
    std::size_t random_pairs = 10000;
    std::uint64_t seed = 0x6132;
};

struct A2Result {
    double low = 1.0;
    double high = 1.0;
    std::size_t skipped = 0;
    std::vector<std::string> warnings;
};

// Good join times (t > 0) of every completed epoch.
inline std::vector<std::vector<double>> epoch_join_times(const ChurnTrace& trace, const EpochAnalysis& ep) {
    std::vector<std::vector<double>> out(ep.size());
    std::size_t j = 0;
    for (const auto& e : trace.events) {
        if (e.kind != TraceKind::Join || e.time == 0.0) continue;
        while (j < ep.size() && e.time > ep.boundaries[j]) ++j;
        if (j == ep.size()) break;
        out[j].push_back(e.time);
    }
    return out;
}

inline A2Result measure_a2(const ChurnTrace& trace, const EpochAnalysis& ep, const A2Options& opt = {}) {
    if (ep.size() < 1) throw InsufficientData("A2 needs at least one epoch");
    A2Result res;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto rate = [&](const std::vector<double>& t, std::size_t i, std::size_t k) {
        return double(k - i + 1) / (t[k] - t[i] + opt.resolution);
    };
    Rng rng(opt.seed);
    auto times = epoch_join_times(trace, ep);
    for (std::size_t j = 0; j < times.size(); ++j) {
        const auto& t = times[j];
        double rho = ep.rates[j];
        if (t.size() < 2 || !(rho > 0)) {
            ++res.skipped;
            res.warnings.push_back("epoch " + std::to_string(j) + " has fewer than two joins");
            continue;
        }
        double elo = std::numeric_limits<double>::infinity(), ehi = -elo;
        auto see = [&](double r) {
            elo = std::min(elo, r);
            ehi = std::max(ehi, r);
        };
        const auto n = t.size();
        if (n <= opt.exact_limit) {
            for (std::size_t i = 0; i + 1 < n; ++i)
                for (std::size_t k = i + 1; k < n; ++k) see(rate(t, i, k));
        } else {
            for (std::size_t i = 0; i + 1 < n; ++i)
                for (std::size_t k = i + 1; k < n && k <= i + opt.short_windows; ++k) see(rate(t, i, k));
            see(rate(t, 0, n - 1));
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (std::size_t r = 0; r < opt.random_pairs; ++r) {
                auto a = pick(rng), b = pick(rng);
                if (a == b) continue;
                if (a > b) std::swap(a, b);
                see(rate(t, a, b));
            }
        }
        lo = std::min(lo, elo / rho);
        hi = std::max(hi, ehi / rho);
    }
    if (!std::isfinite(lo)) throw InsufficientData("A2 found no epoch with two joins");
    res.low = lo;
    res.high = hi;
    return res;
}

inline AssumptionConstants measure_constants(const ChurnTrace& trace, const EpochAnalysis& ep, const A2Options& opt = {}) {
    auto [a1l, a1h] = measure_a1(ep);
    auto a2 = measure_a2(trace, ep, opt);
    return AssumptionConstants::derive(a1l, a1h, a2.low, a2.high);
}

}  // namespace sybilsim
