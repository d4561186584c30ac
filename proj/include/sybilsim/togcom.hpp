#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "sybilsim/error.hpp"
#include "sybilsim/membership.hpp"
#include "sybilsim/rng.hpp"

namespace sybilsim {

struct IterationRecord {
    std::uint64_t iteration = 1;
    std::uint64_t repeat = 1;  // identical consecutive iterations folded into one row
    double start = 0.0;
    double length = 0.0;
    std::uint64_t alg_entrance = 0;
    std::uint64_t alg_purge = 0;
    std::uint64_t adv_entrance = 0;
    std::uint64_t adv_purge = 0;
    std::uint64_t good_joins = 0;
    std::uint64_t bad_joins = 0;
    std::uint64_t rejected_good = 0;
    std::uint64_t rejected_bad = 0;
    std::uint64_t departures = 0;
    std::uint64_t s_prev = 0;  // |S_{i-1}|
    std::uint64_t s_end = 0;   // |S_i| after the closing purge
    double jg = 0.0;           // estimate in force during the iteration
    bool closed = false;       // ended by a purge
};

struct CostLedger {
    std::uint64_t alg_entrance = 0;
    std::uint64_t alg_purge = 0;
    std::uint64_t adv_entrance = 0;
    std::uint64_t adv_purge = 0;
    std::vector<IterationRecord> rows;
    IterationRecord open;

    std::uint64_t alg_total() const { return alg_entrance + alg_purge; }
    std::uint64_t adv_total() const { return adv_entrance + adv_purge; }

    void entrance(bool good, std::uint64_t units) {
        if (good) {
            alg_entrance += units;
            open.alg_entrance += units;
        } else {
            adv_entrance += units;
            open.adv_entrance += units;
        }
    }

    void purge(bool good, std::uint64_t units) {
        if (good) {
            alg_purge += units;
            open.alg_purge += units;
        } else {
            adv_purge += units;
            open.adv_purge += units;
        }
    }
};

struct EstimatorInterval {
    double start;
    double end;
};

struct EstimatorState {
    double jg_hat = 0.0;
    double l_est = 0.0;  // 0 until the first interval completes
    double last_change = 0.0;
    // S_est membership: good IDs stamped with `stamp`, bad IDs below `bad_boundary`.
    std::uint32_t stamp = 1;
    std::uint64_t bad_boundary = 0;
    std::uint64_t new_count = 0;  // |S_cur - S_est|
    std::vector<EstimatorInterval> intervals;
};

struct SystemState {
    // live good IDs, dense with swap-remove
    std::vector<std::uint32_t> live_good;
    std::vector<std::uint32_t> good_pos;
    std::vector<std::uint64_t> good_join_iter;
    std::vector<std::uint32_t> good_est_stamp;
    BadPopulation bad;

    std::size_t n0 = 1;
    double c_comm = 3.0;
    double alpha = 1.0 / 18.0;

    std::uint64_t iteration = 1;
    double iter_start = 0.0;
    std::uint64_t s_prev = 0;
    std::uint64_t n_a = 0;
    std::uint64_t n_d = 0;

    // entrance window
    JoinWindow join_log;
    bool uses_window = true;
    bool truncate_window = false;
    std::size_t iter_first_idx = 0;
    double jg_iter = 0.0;  // estimate latched at the start of the iteration
    double retention = 0.0;

    std::vector<Member> committee;

    // symmetric difference with S_prev, split into IDs new since the purge
    // and members of S_prev that left
    std::uint64_t h1_new = 0;
    std::uint64_t h1_left = 0;
    std::uint64_t carried_bad_upper = 0;

    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

    std::uint64_t size() const { return live_good.size() + bad.count(); }
    std::uint64_t good_count() const { return live_good.size(); }
    std::uint64_t bad_count() const { return bad.count(); }
    double bad_fraction() const { return size() ? double(bad.count()) / double(size()) : 0.0; }

    void ensure_id(std::uint32_t id) {
        if (id >= good_pos.size()) {
            std::size_t n = std::max<std::size_t>(id + 1, good_pos.size() * 2);
            good_pos.resize(n, npos);
            good_join_iter.resize(n, 0);
            good_est_stamp.resize(n, 0);
        }
    }

    bool good_live(std::uint32_t id) const { return id < good_pos.size() && good_pos[id] != npos; }

    Member member_at(std::uint64_t k) const {
        if (k < live_good.size()) return {false, live_good[k]};
        return {true, bad.nth(k - live_good.size())};
    }
};

inline std::size_t committee_size(std::uint64_t s, std::size_t n0, double c_comm) {
    double target = std::ceil(c_comm * std::log(static_cast<double>(n0)));
    auto k = static_cast<std::uint64_t>(std::max(1.0, target));
    return static_cast<std::size_t>(std::min(s, k));
}

// Uniform subset without replacement (Floyd's algorithm).
inline std::vector<Member> select_committee(const SystemState& state, Rng& rng) {
    auto n = state.size();
    if (n == 0) return {};
    auto k = committee_size(n, state.n0, state.c_comm);
    std::vector<std::uint64_t> picks;
    picks.reserve(k);
    for (auto j = n - k; j < n; ++j) {
        auto r = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
        if (std::find(picks.begin(), picks.end(), r) != picks.end()) r = j;
        picks.push_back(r);
    }
    std::vector<Member> out;
    out.reserve(k);
    for (auto p : picks) out.push_back(state.member_at(p));
    return out;
}

inline std::uint64_t committee_bad(const std::vector<Member>& committee) {
    return static_cast<std::uint64_t>(std::count_if(committee.begin(), committee.end(), [](const Member& m) { return m.bad; }));
}

// First window index counted by the entrance price at time t.
inline std::size_t window_first(SystemState& state, double t) {
    if (!(state.jg_iter > 0)) throw DomainError("entrance price needs a positive join-rate estimate");
    auto total = state.join_log.end_index();
    auto first = total - state.join_log.count_after(t - 1.0 / state.jg_iter);
    if (state.truncate_window) first = std::max(first, state.iter_first_idx);
    return first;
}

// Count of join requests in (t - 1/jg, t], plus the joiner.
inline std::uint64_t entrance_difficulty(SystemState& state, double t) {
    return 1 + (state.join_log.end_index() - window_first(state, t));
}

// Entrance price as seen by the adversary: window requests from index
// `first` on, each leaving the window w seconds after it arrived.
struct WindowPrice {
    const JoinWindow* log;
    std::size_t first;
    double w;

    std::uint64_t price_at(double) const { return 1 + (log->end_index() - first); }

    // Earliest x with log[i] <= x - w, i.e. the instant request i stops counting.
    double exit_time(std::size_t i) const {
        double e = log->at(i);
        double x = e + w;
        while (!(e <= x - w)) x = std::nextafter(x, std::numeric_limits<double>::infinity());
        return x;
    }

    double time_price_at_most(std::uint64_t p, double t) const {
        if (p == 0) return std::numeric_limits<double>::infinity();
        std::uint64_t c = log->end_index() - first;
        if (c + 1 <= p) return t;
        return std::max(t, exit_time(first + (c - (p - 1)) - 1));
    }

    // Walks window exits forward until the budget covers the price.
    template <class Ledger>
    double earliest_affordable(const Ledger& ledger, double t) const {
        std::size_t k = first, end = log->end_index();
        for (;;) {
            double tb = std::max(t, ledger.time_affordable(1 + (end - k)));
            if (k == end) return tb;
            double te = exit_time(k);
            if (tb < te) return tb;
            t = te;
            ++k;
        }
    }
};

inline bool purge_due(const SystemState& state) {
    return 11 * (state.n_a + state.n_d) >= state.s_prev;
}

inline bool estimator_update(SystemState& state, EstimatorState& est, double t) {
    auto s = state.size();
    if (est.new_count == 0 || 5 * est.new_count < 3 * s) return false;
    double l = t - est.last_change;
    if (l > 0) {
        est.l_est = l;
        est.jg_hat = double(s) / l;
        est.intervals.push_back({est.last_change, t});
    }
    ++est.stamp;
    for (auto id : state.live_good) state.good_est_stamp[id] = est.stamp;
    est.bad_boundary = state.bad.next_seq();
    est.new_count = 0;
    est.last_change = t;
    return true;
}

// Books the entrance charge for a join request and logs it for pricing.
inline void charge_request(SystemState& state, CostLedger& ledger, bool good, std::uint64_t price, double t) {
    ledger.entrance(good, price);
    if (state.uses_window) {
        state.join_log.push(t);
        if (state.retention > 0) state.join_log.drop_through(t - state.retention);
    }
}

inline void admit_good(SystemState& state, EstimatorState& est, CostLedger& ledger, std::uint32_t id) {
    state.ensure_id(id);
    if (state.good_pos[id] != SystemState::npos) throw ValidationError("duplicate live join of good id " + std::to_string(id));
    state.good_pos[id] = static_cast<std::uint32_t>(state.live_good.size());
    state.live_good.push_back(id);
    state.good_join_iter[id] = state.iteration;
    state.good_est_stamp[id] = 0;
    ++state.n_a;
    ++state.h1_new;
    ++est.new_count;
    ++ledger.open.good_joins;
}

inline std::uint64_t admit_bad(SystemState& state, EstimatorState& est, CostLedger& ledger, std::uint64_t n = 1) {
    auto first = state.bad.next_seq();
    state.bad.add_bulk(n);
    state.n_a += n;
    state.h1_new += n;
    est.new_count += n;
    ledger.open.bad_joins += n;
    return first;
}

inline std::uint64_t on_join(SystemState& state, EstimatorState& est, CostLedger& ledger, Member m, double t) {
    if (!m.bad) {
        if (state.good_live(static_cast<std::uint32_t>(m.key)))
            throw ValidationError("duplicate live join of good id " + std::to_string(m.key));
    }
    auto price = entrance_difficulty(state, t);
    charge_request(state, ledger, !m.bad, price, t);
    if (m.bad)
        admit_bad(state, est, ledger);
    else
        admit_good(state, est, ledger, static_cast<std::uint32_t>(m.key));
    return price;
}

inline void on_depart(SystemState& state, EstimatorState& est, CostLedger& ledger, std::uint32_t id) {
    if (!state.good_live(id)) throw ValidationError("depart of good id " + std::to_string(id) + " that is not live");
    auto p = state.good_pos[id];
    auto last = state.live_good.back();
    state.live_good[p] = last;
    state.good_pos[last] = p;
    state.live_good.pop_back();
    state.good_pos[id] = SystemState::npos;
    ++state.n_d;
    ++ledger.open.departures;
    if (state.good_join_iter[id] == state.iteration)
        --state.h1_new;
    else
        ++state.h1_left;
    if (state.good_est_stamp[id] != est.stamp) --est.new_count;
}

// Adds latched-estimate bookkeeping for a fresh iteration.
inline void latch_iteration(SystemState& state, const EstimatorState& est, double t) {
    state.iter_start = t;
    state.jg_iter = est.jg_hat;
    if (state.jg_iter > 0) state.retention = std::max(state.retention, 1.0 / state.jg_iter);
    state.iter_first_idx = state.join_log.end_index();
}

inline void open_row(SystemState& state, CostLedger& ledger) {
    ledger.open = IterationRecord{};
    ledger.open.iteration = state.iteration;
    ledger.open.start = state.iter_start;
    ledger.open.s_prev = state.s_prev;
    ledger.open.jg = state.jg_iter;
}

// Every good ID solves a 1-hard puzzle; the adversary keeps `retain_bad` of
// its oldest IDs by paying for them.
inline void execute_purge(SystemState& state, EstimatorState& est, CostLedger& ledger, std::uint64_t retain_bad,
                          Rng& rng, double t) {
    retain_bad = std::min(retain_bad, state.bad.count());
    ledger.purge(true, state.good_count());
    ledger.purge(false, retain_bad);

    auto before = state.bad.count_at_least(est.bad_boundary);
    state.bad.retain_oldest(retain_bad);
    est.new_count -= before - state.bad.count_at_least(est.bad_boundary);

    ledger.open.length = t - ledger.open.start;
    ledger.open.s_end = state.size();
    ledger.open.closed = true;
    ledger.rows.push_back(ledger.open);

    state.s_prev = state.size();
    ++state.iteration;
    state.n_a = state.n_d = 0;
    state.h1_new = state.h1_left = 0;
    state.carried_bad_upper = static_cast<std::uint64_t>(std::floor(state.alpha * double(state.size())));
    latch_iteration(state, est, t);
    state.committee = select_committee(state, rng);
    open_row(state, ledger);
    estimator_update(state, est, t);
}

}  // namespace sybilsim
