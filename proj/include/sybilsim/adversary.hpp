#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "sybilsim/error.hpp"

namespace sybilsim {

enum class Strategy { GreedyUniform, Burst };

struct AdversaryConfig {
    double rate_T = 0.0;
    Strategy strategy = Strategy::GreedyUniform;
    bool pays_purge = false;
    double burst_period = 10.0;

    void check() const {
        if (!(rate_T >= 0) || !std::isfinite(rate_T)) throw ConfigError("adversary rate must be finite and >= 0");
        if (strategy == Strategy::Burst && !(burst_period > 0)) throw ConfigError("burst period must be positive");
    }
};

struct AdversaryLedger {
    double rate_T = 0.0;
    std::uint64_t budget_spent = 0;
    std::uint64_t bad_live = 0;

    double budget_accrued(double t) const { return rate_T * t; }
    bool affords(double t, std::uint64_t price) const {
        return rate_T * t >= static_cast<double>(budget_spent + price);
    }
    std::uint64_t available(double t) const {
        double a = std::floor(rate_T * t) - static_cast<double>(budget_spent);
        return a > 0 ? static_cast<std::uint64_t>(a) : 0;
    }

    // Earliest time at which the accrued budget covers `price` more units.
    double time_affordable(std::uint64_t price) const {
        if (rate_T <= 0) return std::numeric_limits<double>::infinity();
        double need = static_cast<double>(budget_spent + price);
        double t = need / rate_T;
        while (rate_T * t < need) t = std::nextafter(t, std::numeric_limits<double>::infinity());
        for (double prev = std::nextafter(t, 0.0); t > 0 && rate_T * prev >= need; prev = std::nextafter(t, 0.0)) t = prev;
        return t;
    }
};

// Largest k with k*base + k(k+1)/2 <= budget: the j-th joiner of a batch
// landing in a window already holding `base` joins pays base + j.
inline std::uint64_t burst_batch_size(std::uint64_t budget, std::uint64_t base = 0) {
    double b = static_cast<double>(base) + 0.5;
    auto k = static_cast<std::uint64_t>(std::max(0.0, std::floor(-b + std::sqrt(b * b + 2.0 * static_cast<double>(budget)))));
    auto cost = [base](std::uint64_t n) { return n * base + n * (n + 1) / 2; };
    while (k > 0 && cost(k) > budget) --k;
    while (cost(k + 1) <= budget) ++k;
    return k;
}

// PriceFn provides price_at(t) and time_price_at_most(p, t): the earliest
// time >= t at which the entrance price is at most p, assuming no further
// events. The price is non-increasing between events.
template <class PriceFn>
double greedy_search_time(const AdversaryLedger& ledger, const PriceFn& price, double t) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (ledger.rate_T <= 0) return inf;
    auto now_price = price.price_at(t);
    if (ledger.affords(t, now_price)) return t;
    auto at = [&](std::uint64_t p) {
        return std::max({t, ledger.time_affordable(p), price.time_price_at_most(p, t)});
    };
    // smallest p whose budget time is not earlier than its price time
    std::uint64_t lo = 1, hi = now_price;
    while (lo < hi) {
        auto mid = lo + (hi - lo) / 2;
        if (ledger.time_affordable(mid) >= price.time_price_at_most(mid, t))
            hi = mid;
        else
            lo = mid + 1;
    }
    double best = at(lo);
    if (lo > 1) best = std::min(best, at(lo - 1));
    return best;
}

// Price functions that can walk their own drop times provide
// earliest_affordable(ledger, t) with the same result as the search.
template <class PriceFn>
double greedy_next_time(const AdversaryLedger& ledger, const PriceFn& price, double t) {
    if constexpr (requires { price.earliest_affordable(ledger, t); }) {
        if (ledger.rate_T <= 0) return std::numeric_limits<double>::infinity();
        return price.earliest_affordable(ledger, t);
    } else {
        return greedy_search_time(ledger, price, t);
    }
}

template <class PriceFn>
std::optional<double> next_injection(const AdversaryConfig& config, const AdversaryLedger& ledger,
                                     const PriceFn& price, double t) {
    if (config.rate_T <= 0) return std::nullopt;
    if (config.strategy == Strategy::GreedyUniform) {
        double next = greedy_next_time(ledger, price, t);
        if (!std::isfinite(next)) return std::nullopt;
        return next;
    }
    // Burst: inject back-to-back at each multiple of the period while affordable.
    double k = std::ceil(t / config.burst_period);
    double b = k * config.burst_period;
    if (b == t && t > 0 && ledger.affords(t, price.price_at(t))) return t;
    if (b <= t) b = (k + 1) * config.burst_period;
    return b;
}

// Bad IDs the adversary keeps through a purge, oldest first, at one unit each.
inline std::uint64_t purge_response(const AdversaryLedger& ledger, const AdversaryConfig& config,
                                    std::uint64_t bad_live, double t) {
    if (!config.pays_purge || bad_live == 0) return 0;
    return std::min(bad_live, ledger.available(t));
}

}  // namespace sybilsim
