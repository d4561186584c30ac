#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sybilsim/error.hpp"
#include "sybilsim/rng.hpp"
#include "sybilsim/togcom.hpp"

namespace sybilsim {

struct BootstrapConfig {
    std::size_t n0 = 1000;
    double initial_bad_fraction = 0.0;
    double jg0 = 0.0;  // 0 means n0 / warmup_seconds
    double warmup_seconds = 100.0;

    double initial_estimate() const { return jg0 > 0 ? jg0 : double(n0) / warmup_seconds; }
};

struct Bootstrapped {
    SystemState state;
    EstimatorState est;
};

// Fabricates the postcondition of the one-shot ID generation phase: n0 good
// IDs, optionally up to an alpha share of bad IDs, a committee and J~G_0.
inline Bootstrapped bootstrap(std::size_t n0, double alpha, double c_comm, double jg0, Rng& rng,
                              double initial_bad_fraction = 0.0, const std::vector<std::uint32_t>* good_ids = nullptr) {
    if (n0 < 1) throw ConfigError("bootstrap needs n0 >= 1");
    if (!(jg0 > 0)) throw ConfigError("bootstrap needs a positive initial join-rate estimate");
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(initial_bad_fraction >= 0 && initial_bad_fraction <= alpha))
        throw ConfigError("initial bad fraction must lie in [0, alpha]");
    if (!(c_comm > 0)) throw ConfigError("c_comm must be positive");
    if (good_ids && good_ids->size() != n0) throw ConfigError("initial good id list does not match n0");

    Bootstrapped b;
    auto& s = b.state;
    auto& est = b.est;
    s.n0 = n0;
    s.c_comm = c_comm;
    s.alpha = alpha;

    est.jg_hat = jg0;
    est.stamp = 1;
    for (std::size_t i = 0; i < n0; ++i) {
        auto id = good_ids ? (*good_ids)[i] : static_cast<std::uint32_t>(i);
        s.ensure_id(id);
        if (s.good_pos[id] != SystemState::npos) throw ConfigError("duplicate initial good id");
        s.good_pos[id] = static_cast<std::uint32_t>(s.live_good.size());
        s.live_good.push_back(id);
        s.good_join_iter[id] = 0;
        s.good_est_stamp[id] = est.stamp;
    }
    s.bad.add_bulk(static_cast<std::uint64_t>(std::floor(initial_bad_fraction * double(n0))));
    est.bad_boundary = s.bad.next_seq();

    s.iteration = 1;
    s.s_prev = s.size();
    s.carried_bad_upper = static_cast<std::uint64_t>(std::floor(alpha * double(s.size())));
    latch_iteration(s, est, 0.0);
    s.committee = select_committee(s, rng);
    return b;
}

}  // namespace sybilsim
