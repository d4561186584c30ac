#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "sybilsim/adversary.hpp"
#include "sybilsim/error.hpp"
#include "sybilsim/togcom.hpp"

namespace sybilsim {

inline std::uint64_t ccom_entrance() { return 1; }

struct GMComState {
    double jg_estimate = 0.0;
    bool failure_mode = false;
    double measured_iter_rate = 0.0;
    double failure_factor = 10.0;
};

inline std::uint64_t price_from_ratio(double ratio) {
    constexpr double cap = 4.0e18;
    if (!(ratio > 1)) return 1;
    return static_cast<std::uint64_t>(std::ceil(std::min(ratio, cap)));
}

inline std::uint64_t gmcom_entrance(const GMComState& gm) {
    if (gm.failure_mode || !(gm.jg_estimate > 0)) return 1;
    if (!std::isfinite(gm.measured_iter_rate)) return 1;
    return price_from_ratio(gm.measured_iter_rate / gm.jg_estimate);
}

// Rate the iteration would show if one more ID joined at t.
inline double gmcom_rate_with_joiner(const SystemState& state, double t) {
    double elapsed = t - state.iter_start;
    if (!(elapsed > 0)) return std::numeric_limits<double>::infinity();
    return double(state.n_a + 1) / elapsed;
}

inline std::uint64_t gmcom_price_at(const GMComState& gm, const SystemState& state, double t) {
    GMComState probe = gm;
    probe.measured_iter_rate = gmcom_rate_with_joiner(state, t);
    return gmcom_entrance(probe);
}

// After a join: refresh the measured rate and switch to failure mode when the
// iteration's rate runs far above the estimate. Failure mode is permanent.
inline void gmcom_estimator_update(GMComState& gm, const SystemState& state, double t) {
    double elapsed = t - state.iter_start;
    gm.measured_iter_rate = elapsed > 0 ? double(state.n_a) / elapsed : std::numeric_limits<double>::infinity();
    if (!(gm.jg_estimate > 0) || gm.measured_iter_rate > gm.failure_factor * gm.jg_estimate) gm.failure_mode = true;
}

// At a purge the estimate becomes the closed iteration's total join rate.
inline void gmcom_roll_iteration(GMComState& gm, std::uint64_t joins, double length) {
    if (length > 0) gm.jg_estimate = double(joins) / length;
    gm.measured_iter_rate = 0.0;
}

struct SybilControlCharges {
    std::uint64_t alg = 0;
    std::uint64_t adv = 0;
    std::uint64_t bad_kept = 0;
};

// One test round: every live good ID solves a test puzzle; bad IDs survive
// only if the adversary pays for them.
inline SybilControlCharges sybilcontrol_step(std::uint64_t good_live, std::uint64_t bad_live, std::uint64_t test_cost,
                                             const AdversaryLedger& adv, const AdversaryConfig& config, double t) {
    SybilControlCharges c;
    c.alg = good_live * test_cost;
    if (config.pays_purge && test_cost > 0) {
        c.bad_kept = std::min(bad_live, adv.available(t) / test_cost);
        c.adv = c.bad_kept * test_cost;
    }
    return c;
}

struct RempParams {
    double T_max = 1e4;
    double W = 1.0;
    double alpha = 1.0 / 18.0;
    double N = 0.0;

    bool valid(double T) const { return T <= T_max; }
};

inline double remp_spend_rate(double alpha, double T_max) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("REMP alpha must lie in (0, 1)");
    if (!(T_max > 0)) throw DomainError("REMP T_max must be positive");
    return (1.0 - alpha) * T_max / alpha;
}

}  // namespace sybilsim
