#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "sybilsim/adversary.hpp"
#include "sybilsim/baselines.hpp"
#include "sybilsim/error.hpp"
#include "sybilsim/format.hpp"
#include "sybilsim/heuristics.hpp"
#include "sybilsim/initialization.hpp"
#include "sybilsim/rng.hpp"
#include "sybilsim/togcom.hpp"
#include "sybilsim/trace.hpp"

namespace sybilsim {

enum class DefenseKind { ToGCom, CCom, GMCom, SybilControl, Remp, TGCH, TGCHSF };

struct DefenseConfig {
    DefenseKind kind = DefenseKind::ToGCom;
    double c_comm = 3.0;
    double warmup_seconds = 100.0;
    double jg0 = 0.0;  // 0 means n0 / warmup_seconds
    bool truncate_window = false;
    double failure_factor = 10.0;
    double test_period = 5.0;
    std::uint64_t test_cost = 1;
    double remp_t_max = 1e4;
    HeuristicConfig heuristics;
};

// Applies a selector such as "tgch_sf98" or "remp-1e7" to a defense config.
inline DefenseConfig with_defense(DefenseConfig d, const std::string& name) {
    auto set_heur = [&](bool h1, bool h2, double acc) {
        d.heuristics.h1_enabled = h1;
        d.heuristics.h2_enabled = h2;
        d.heuristics.h3_accuracy = acc;
    };
    if (name == "togcom") {
        d.kind = DefenseKind::ToGCom;
    } else if (name == "ccom") {
        d.kind = DefenseKind::CCom;
    } else if (name == "gmcom") {
        d.kind = DefenseKind::GMCom;
    } else if (name == "sybilcontrol") {
        d.kind = DefenseKind::SybilControl;
    } else if (name == "remp" || name.rfind("remp-", 0) == 0) {
        d.kind = DefenseKind::Remp;
        if (name.size() > 5) {
            double tmax;
            if (!parse_double(std::string_view(name).substr(5), tmax) || !(tmax > 0))
                throw ConfigError("bad REMP selector '" + name + "'");
            d.remp_t_max = tmax;
        }
    } else if (name == "tgch") {
        d.kind = DefenseKind::TGCH;
        set_heur(true, true, 0.0);
    } else if (name == "tgch_sf") {
        d.kind = DefenseKind::TGCHSF;
        set_heur(true, true, d.heuristics.h3_accuracy > 0 ? d.heuristics.h3_accuracy : 0.98);
    } else if (name == "tgch_sf92" || name == "tgch_sf98") {
        d.kind = DefenseKind::TGCHSF;
        set_heur(true, true, name == "tgch_sf92" ? 0.92 : 0.98);
    } else {
        throw ConfigError("unknown defense selector '" + name + "'");
    }
    return d;
}

inline std::string defense_name(const DefenseConfig& d) {
    switch (d.kind) {
        case DefenseKind::ToGCom: return "togcom";
        case DefenseKind::CCom: return "ccom";
        case DefenseKind::GMCom: return "gmcom";
        case DefenseKind::SybilControl: return "sybilcontrol";
        case DefenseKind::Remp: return "remp-" + fmt_num(d.remp_t_max);
        case DefenseKind::TGCH: return "tgch";
        case DefenseKind::TGCHSF:
            return d.heuristics.h3_accuracy == 0.92 ? "tgch_sf92"
                   : d.heuristics.h3_accuracy == 0.98 ? "tgch_sf98"
                                                      : "tgch_sf";
    }
    return "?";
}

struct SimConfig {
    double alpha = 1.0 / 18.0;
    double t_end = 2000.0;
    std::uint64_t seed = 1;
    DefenseConfig defense;
    std::size_t n0 = 0;  // initial good population when the trace has no time-0 joins
    double initial_bad_fraction = 0.0;
    double sample_interval = 1.0;
    bool sample_purges = true;

    bool theorem2_applicable() const { return alpha <= 1.0 / 18.0; }
};

enum class EventKind : std::uint8_t { JoinGood, JoinBad, Depart, PeriodicTick, Sample };

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::JoinGood;
    std::uint32_t id = 0;
};

inline bool event_before(const Event& a, const Event& b) {
    return a.time < b.time || (a.time == b.time && a.seq < b.seq);
}

// Sequence ranges: trace events use their index, then ticks, adversary
// injections and samples, so that at equal times trace events come first.
inline constexpr std::uint64_t kTickSeq = std::uint64_t{1} << 61;
inline constexpr std::uint64_t kAdversarySeq = std::uint64_t{1} << 62;
inline constexpr std::uint64_t kSampleSeq = std::uint64_t{1} << 63;

class EventQueue {
public:
    void push(const Event& e) { heap_.push(e); }
    bool empty() const { return heap_.empty(); }
    const Event& top() const { return heap_.top(); }
    Event pop() {
        auto e = heap_.top();
        heap_.pop();
        return e;
    }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const { return event_before(b, a); }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
};

struct SampleRow {
    double time;
    std::uint64_t n_system;
    double bad_fraction;
    double jg_estimate;
    double alg_spend_rate;
    double adv_spend_rate;
};

struct InvariantLog {
    std::uint64_t population_checks = 0;
    std::uint64_t population_violations = 0;
    double max_bad_fraction = 0.0;
    double first_violation_time = -1.0;
    std::uint64_t committee_checks = 0;
    std::uint64_t committee_violations = 0;
};

struct SimResult {
    CostLedger ledger;
    InvariantLog invariants;
    std::vector<SampleRow> timeseries;
    std::vector<EstimatorInterval> intervals;
    double duration = 0.0;
    bool valid = true;
    std::string invalid_reason;
    std::uint64_t good_joins = 0;
    std::uint64_t bad_joins = 0;
    std::uint64_t rejected_good = 0;
    std::uint64_t rejected_bad = 0;
    std::uint64_t departures = 0;
    std::uint64_t purges = 0;
    std::uint64_t h2_bound_violations = 0;
    std::uint64_t n0 = 0;

    double alg_rate() const { return duration > 0 ? double(ledger.alg_total()) / duration : 0.0; }
    double adv_rate() const { return duration > 0 ? double(ledger.adv_total()) / duration : 0.0; }
    double good_join_rate() const { return duration > 0 ? double(good_joins + rejected_good) / duration : 0.0; }
};

class Simulation {
public:
    Simulation(const SimConfig& cfg, const ChurnTrace& trace, const AdversaryConfig& adversary)
        : cfg_(cfg), trace_(trace), advcfg_(adversary), rng_(derive_seed(cfg.seed, {0x656e67696e65})) {
        check_config();
        adv_.rate_T = adversary.rate_T;
        kind_ = cfg.defense.kind;
        heur_ = cfg.defense.heuristics;

        std::vector<std::uint32_t> initial;
        while (trace_pos_ < trace.events.size() && trace.events[trace_pos_].time == 0.0 &&
               trace.events[trace_pos_].kind == TraceKind::Join)
            initial.push_back(trace.events[trace_pos_++].id);
        std::size_t n0 = initial.size();
        if (n0 == 0) {
            n0 = cfg.n0;
            if (n0 < 1) throw ConfigError("n0 must be at least 1");
            for (std::size_t i = 0; i < n0; ++i) initial.push_back(trace.id_count + static_cast<std::uint32_t>(i));
        } else if (cfg.n0 != 0 && cfg.n0 != n0) {
            throw ConfigError("n0 disagrees with the trace's time-0 population");
        }
        double jg0 = cfg.defense.jg0 > 0 ? cfg.defense.jg0 : double(n0) / cfg.defense.warmup_seconds;
        auto boot = bootstrap(n0, cfg.alpha, cfg.defense.c_comm, jg0, rng_, cfg.initial_bad_fraction, &initial);
        st_ = std::move(boot.state);
        est_ = std::move(boot.est);
        st_.uses_window = togcom_priced();
        st_.truncate_window = cfg.defense.truncate_window;
        rejected_.assign(trace.id_count, false);
        gm_.jg_estimate = jg0;
        gm_.failure_factor = cfg.defense.failure_factor;
        open_row(st_, ledger_);
        res_.n0 = n0;

        if (kind_ == DefenseKind::SybilControl) queue_.push({cfg.defense.test_period, kTickSeq, EventKind::PeriodicTick, 0});
        if (cfg.sample_interval > 0) queue_.push({cfg.sample_interval, kSampleSeq, EventKind::Sample, 0});
        check_population(0.0);
        check_committee();
    }

    // Extra events for hand-built scenarios.
    void schedule(const Event& e) {
        if (e.kind == EventKind::JoinGood || e.kind == EventKind::Depart) {
            if (e.id >= rejected_.size()) rejected_.resize(e.id + 1, false);
        }
        queue_.push(e);
    }

    double now() const { return now_; }
    const SystemState& state() const { return st_; }
    const EstimatorState& estimator() const { return est_; }
    const CostLedger& ledger() const { return ledger_; }
    const AdversaryLedger& adversary_ledger() const { return adv_; }
    const GMComState& gmcom() const { return gm_; }
    bool stopped() const { return stopped_; }

    // Dispatches one event; nullopt once nothing is left before t_end.
    std::optional<Event> step() {
        while (!stopped_) {
            auto q = peek_queue();
            double ta = adversary_time();
            bool adv_first = std::isfinite(ta) && (!q || ta < q->time || (ta == q->time && q->seq > kAdversarySeq));
            if (adv_first) {
                if (ta > cfg_.t_end) return std::nullopt;
                if (bulk_eligible()) {
                    double lim = cfg_.t_end;
                    bool inclusive = true;
                    if (q && q->time <= lim) {
                        lim = q->time;
                        inclusive = q->seq > kAdversarySeq;
                    }
                    bulk_adversary(lim, inclusive);
                    return Event{now_, kAdversarySeq + adv_count_, EventKind::JoinBad, 0};
                }
                if (inject_bad(ta)) return Event{ta, kAdversarySeq + adv_count_, EventKind::JoinBad, 0};
                continue;
            }
            if (!q) return std::nullopt;
            if (q->time > cfg_.t_end) return std::nullopt;
            auto e = pop_queue();
            dispatch(e);
            return e;
        }
        return std::nullopt;
    }

    SimResult run() {
        while (step()) {
        }
        return finish();
    }

    SimResult finish() {
        double end = stopped_ ? now_ : cfg_.t_end;
        if (!stopped_ && cfg_.sample_interval > 0) {
            // trailing sample rows up to t_end
            while (!queue_.empty() && queue_.top().kind == EventKind::Sample && queue_.top().time <= end) dispatch(queue_.pop());
        }
        ledger_.open.length = end - ledger_.open.start;
        ledger_.open.s_end = st_.size();
        ledger_.open.closed = false;
        ledger_.rows.push_back(ledger_.open);
        res_.ledger = std::move(ledger_);
        res_.intervals = est_.intervals;
        res_.duration = end;
        return std::move(res_);
    }

private:
    bool togcom_priced() const {
        return kind_ == DefenseKind::ToGCom || kind_ == DefenseKind::TGCH || kind_ == DefenseKind::TGCHSF;
    }

    void check_config() const {
        if (cfg_.defense.kind == DefenseKind::Remp)
            throw ConfigError("remp is evaluated in closed form; use remp_spend_rate");
        if (!(cfg_.t_end >= 0)) throw ConfigError("t_end must be non-negative");
        if (!(cfg_.alpha > 0 && cfg_.alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
        if (!(cfg_.defense.warmup_seconds > 0)) throw ConfigError("warmup_seconds must be positive");
        if (!(cfg_.defense.test_period > 0)) throw ConfigError("test period must be positive");
        if (!(cfg_.defense.failure_factor > 0)) throw ConfigError("failure_factor must be positive");
        cfg_.defense.heuristics.check();
        advcfg_.check();
    }

    std::optional<Event> peek_queue() const {
        std::optional<Event> best;
        if (trace_pos_ < trace_.events.size()) {
            const auto& te = trace_.events[trace_pos_];
            best = Event{te.time, trace_pos_, te.kind == TraceKind::Join ? EventKind::JoinGood : EventKind::Depart, te.id};
        }
        if (!queue_.empty() && (!best || event_before(queue_.top(), *best))) best = queue_.top();
        return best;
    }

    Event pop_queue() {
        if (trace_pos_ < trace_.events.size()) {
            const auto& te = trace_.events[trace_pos_];
            Event e{te.time, trace_pos_, te.kind == TraceKind::Join ? EventKind::JoinGood : EventKind::Depart, te.id};
            if (queue_.empty() || event_before(e, queue_.top())) {
                ++trace_pos_;
                return e;
            }
        }
        return queue_.pop();
    }

    // --- pricing -----------------------------------------------------------

    std::uint64_t current_price(double t) {
        switch (kind_) {
            case DefenseKind::ToGCom:
            case DefenseKind::TGCH:
            case DefenseKind::TGCHSF: return entrance_difficulty(st_, t);
            case DefenseKind::GMCom: return gmcom_price_at(gm_, st_, t);
            default: return ccom_entrance();
        }
    }

    struct GMComPrice {
        const GMComState* gm;
        const SystemState* st;
        std::uint64_t price_at(double t) const {
            if (gm->failure_mode || !(gm->jg_estimate > 0)) return 1;
            if (!(t > st->iter_start)) return std::numeric_limits<std::uint64_t>::max() / 4;
            return gmcom_price_at(*gm, *st, t);
        }
        double time_price_at_most(std::uint64_t p, double t) const {
            if (gm->failure_mode || !(gm->jg_estimate > 0)) return t;
            double x = st->iter_start + double(st->n_a + 1) / (double(p) * gm->jg_estimate);
            x = std::max(x, std::nextafter(st->iter_start, std::numeric_limits<double>::infinity()));
            while (price_at(x) > p) x = std::nextafter(x, std::numeric_limits<double>::infinity());
            return std::max(t, x);
        }
    };

    struct UnitPrice {
        std::uint64_t price_at(double) const { return 1; }
        double time_price_at_most(std::uint64_t, double t) const { return t; }
    };

    double adversary_time() {
        if (adv_cached_) return adv_next_;
        adv_cached_ = true;
        std::optional<double> next;
        if (togcom_priced()) {
            WindowPrice p{&st_.join_log, window_first(st_, now_), 1.0 / st_.jg_iter};
            next = next_injection(advcfg_, adv_, p, now_);
        } else if (kind_ == DefenseKind::GMCom) {
            next = next_injection(advcfg_, adv_, GMComPrice{&gm_, &st_}, now_);
        } else {
            next = next_injection(advcfg_, adv_, UnitPrice{}, now_);
        }
        adv_next_ = next ? *next : std::numeric_limits<double>::infinity();
        return adv_next_;
    }

    // --- event handling ----------------------------------------------------

    void advance(double t) {
        if (t < now_) throw ValidationError("event time moves the clock backwards");
        now_ = t;
    }

    bool inject_bad(double t) {
        advance(t);
        adv_cached_ = false;
        auto price = current_price(t);
        if (!adv_.affords(t, price)) return false;
        ++adv_count_;
        adv_.budget_spent += price;
        charge_request(st_, ledger_, false, price, t);
        bool admitted = heur_.h3_accuracy <= 0 || h3_admit(false, heur_.h3_accuracy, rng_) == Admission::Admit;
        if (admitted) {
            admit_bad(st_, est_, ledger_);
            ++res_.bad_joins;
        } else {
            ++ledger_.open.rejected_bad;
            ++res_.rejected_bad;
        }
        after_change(t, admitted);
        return true;
    }

    void dispatch(const Event& e) {
        advance(e.time);
        switch (e.kind) {
            case EventKind::JoinGood: {
                adv_cached_ = false;
                auto price = current_price(e.time);
                charge_request(st_, ledger_, true, price, e.time);
                bool admitted = heur_.h3_accuracy <= 0 || h3_admit(true, heur_.h3_accuracy, rng_) == Admission::Admit;
                if (admitted) {
                    admit_good(st_, est_, ledger_, e.id);
                    ++res_.good_joins;
                } else {
                    if (e.id >= rejected_.size()) rejected_.resize(e.id + 1, false);
                    rejected_[e.id] = true;
                    ++ledger_.open.rejected_good;
                    ++res_.rejected_good;
                }
                after_change(e.time, admitted);
                break;
            }
            case EventKind::JoinBad: {
                adv_cached_ = false;
                auto price = current_price(e.time);
                adv_.budget_spent += price;
                charge_request(st_, ledger_, false, price, e.time);
                admit_bad(st_, est_, ledger_);
                ++res_.bad_joins;
                after_change(e.time, true);
                break;
            }
            case EventKind::Depart: {
                if (e.id < rejected_.size() && rejected_[e.id]) break;
                adv_cached_ = false;
                on_depart(st_, est_, ledger_, e.id);
                ++res_.departures;
                after_change(e.time, false);
                break;
            }
            case EventKind::PeriodicTick: {
                adv_cached_ = false;
                periodic_test(e.time);
                queue_.push({e.time + cfg_.defense.test_period, e.seq + 1, EventKind::PeriodicTick, 0});
                break;
            }
            case EventKind::Sample: {
                sample(e.time);
                ++sample_index_;
                queue_.push({double(sample_index_ + 1) * cfg_.sample_interval, e.seq + 1, EventKind::Sample, 0});
                break;
            }
        }
    }

    bool purge_wanted(double t) const {
        if (kind_ == DefenseKind::SybilControl) return false;
        bool base = heur_.h1_enabled ? h1_purge_due(st_) : purge_due(st_);
        if (!heur_.h2_enabled) return base;
        bool risk = h2_purge_due(h2_bad_upper_bound(st_, t, heur_.c_je_high), heur_.h2_margin);
        return (base && risk) || risk;
    }

    void after_change(double t, bool joined) {
        if (joined && kind_ == DefenseKind::GMCom && !gm_.failure_mode) gmcom_estimator_update(gm_, st_, t);
        estimator_update(st_, est_, t);
        check_population(t);
        if (heur_.h2_enabled && st_.size() > 0) {
            // ground-truth soundness of the H2 bound
            if (h2_bad_upper_bound(st_, t, heur_.c_je_high) * double(st_.size()) < double(st_.bad_count()))
                ++res_.h2_bound_violations;
        }
        if (kind_ == DefenseKind::SybilControl) check_sybilcontrol(t);
        if (purge_wanted(t)) do_purge(t);
    }

    void do_purge(double t) {
        auto keep = purge_response(adv_, advcfg_, st_.bad_count(), t);
        adv_.budget_spent += keep;
        if (kind_ == DefenseKind::GMCom) gmcom_roll_iteration(gm_, st_.n_a, t - st_.iter_start);
        execute_purge(st_, est_, ledger_, keep, rng_, t);
        ++res_.purges;
        check_committee();
        if (cfg_.sample_purges) sample(t);
    }

    void periodic_test(double t) {
        auto c = sybilcontrol_step(st_.good_count(), st_.bad_count(), cfg_.defense.test_cost, adv_, advcfg_, t);
        ledger_.purge(true, c.alg);
        ledger_.purge(false, c.adv);
        adv_.budget_spent += c.adv;
        auto before = st_.bad.count_at_least(est_.bad_boundary);
        st_.bad.retain_oldest(c.bad_kept);
        est_.new_count -= before - st_.bad.count_at_least(est_.bad_boundary);
        estimator_update(st_, est_, t);
    }

    void check_population(double t) {
        auto& inv = res_.invariants;
        ++inv.population_checks;
        double f = st_.bad_fraction();
        inv.max_bad_fraction = std::max(inv.max_bad_fraction, f);
        if (6 * st_.bad_count() >= st_.size() && st_.bad_count() > 0) {
            ++inv.population_violations;
            if (inv.first_violation_time < 0) inv.first_violation_time = t;
        }
    }

    void check_committee() {
        ++res_.invariants.committee_checks;
        if (2 * committee_bad(st_.committee) >= st_.committee.size() && !st_.committee.empty())
            ++res_.invariants.committee_violations;
    }

    void check_sybilcontrol(double t) {
        if (st_.bad_count() > 0 && 2 * st_.bad_count() >= st_.size()) {
            res_.valid = false;
            res_.invalid_reason = "bad fraction reached 1/2";
            stopped_ = true;
            now_ = t;
        }
    }

    void sample(double t) {
        SampleRow row{t,
                      st_.size(),
                      st_.bad_fraction(),
                      est_.jg_hat,
                      t > 0 ? double(ledger_.alg_total()) / t : 0.0,
                      t > 0 ? double(ledger_.adv_total()) / t : 0.0};
        auto& ts = res_.timeseries;
        if (!ts.empty() && ts.back().time >= t)
            ts.back() = row;
        else
            ts.push_back(row);
    }

    // --- closed-form path for unit entrance prices --------------------------

    bool bulk_eligible() const {
        bool unit = kind_ == DefenseKind::CCom || kind_ == DefenseKind::SybilControl ||
                    (kind_ == DefenseKind::GMCom && gm_.failure_mode);
        return unit && !heur_.any() && advcfg_.strategy == Strategy::GreedyUniform && adv_.rate_T > 0;
    }

    double join_time(std::uint64_t k) const { return std::max(now_, adv_.time_affordable(k)); }

    // Joins k = 1.. land at max(now, time the budget covers k more units).
    std::uint64_t joins_before(double lim, bool inclusive) const {
        auto ok = [&](std::uint64_t k) {
            double tk = join_time(k);
            return inclusive ? tk <= lim : tk < lim;
        };
        double x = adv_.rate_T * lim - double(adv_.budget_spent);
        if (x < 1) return ok(1) ? 1 : 0;
        auto k = static_cast<std::uint64_t>(std::min(x, 9.0e15));
        while (k > 0 && !ok(k)) --k;
        while (ok(k + 1)) ++k;
        return k;
    }

    void bulk_adversary(double lim, bool inclusive) {
        adv_cached_ = false;
        while (!stopped_) {
            auto n = joins_before(lim, inclusive);
            if (n == 0) break;
            auto size = st_.size();
            auto bad = st_.bad_count();
            std::uint64_t chunk = n;
            if (kind_ != DefenseKind::SybilControl) {
                auto need = (st_.s_prev + 10) / 11;
                auto done = st_.n_a + st_.n_d;
                chunk = std::min<std::uint64_t>(chunk, need > done ? need - done : 1);
            } else {
                chunk = std::min<std::uint64_t>(chunk, size > 2 * bad ? size - 2 * bad : 1);
            }
            if (3 * size > 5 * est_.new_count) {
                auto gap = 3 * size - 5 * est_.new_count;
                chunk = std::min<std::uint64_t>(chunk, (gap + 1) / 2);
            }
            chunk = std::max<std::uint64_t>(chunk, 1);
            count_violations(size, bad, chunk);

            now_ = join_time(chunk);
            adv_.budget_spent += chunk;
            ledger_.entrance(false, chunk);
            admit_bad(st_, est_, ledger_, chunk);
            adv_count_ += chunk;
            res_.bad_joins += chunk;
            estimator_update(st_, est_, now_);
            auto& inv = res_.invariants;
            inv.max_bad_fraction = std::max(inv.max_bad_fraction, st_.bad_fraction());
            if (kind_ == DefenseKind::SybilControl) {
                check_sybilcontrol(now_);
                continue;
            }
            if (purge_due(st_)) {
                auto keep = purge_response(adv_, advcfg_, st_.bad_count(), now_);
                adv_.budget_spent += keep;
                if (kind_ == DefenseKind::GMCom) gmcom_roll_iteration(gm_, st_.n_a, now_ - st_.iter_start);
                execute_purge(st_, est_, ledger_, keep, rng_, now_);
                ++res_.purges;
                check_committee();
                skip_cycles(lim, inclusive);
            }
        }
    }

    // Population checks for `chunk` bad joins starting from (size, bad).
    void count_violations(std::uint64_t size, std::uint64_t bad, std::uint64_t chunk) {
        auto& inv = res_.invariants;
        inv.population_checks += chunk;
        // first k with 6(bad + k) >= size + k
        std::uint64_t first = 1;
        if (size > 6 * bad) first = std::max<std::uint64_t>(1, (size - 6 * bad + 4) / 5);
        if (chunk >= first) {
            inv.population_violations += chunk - first + 1;
            if (inv.first_violation_time < 0) inv.first_violation_time = join_time(first);
        }
    }

    // Folds whole purge cycles of m bad joins into one ledger row.
    void skip_cycles(double lim, bool inclusive) {
        if (st_.bad_count() != 0 || st_.n_a != 0 || st_.n_d != 0) return;
        if (!(adv_.time_affordable(1) > now_)) return;
        auto g = st_.good_count();
        auto m = std::max<std::uint64_t>(1, (st_.s_prev + 10) / 11);
        if (5 * (est_.new_count + m) >= 3 * (g + m)) return;
        auto fits = [&](std::uint64_t q) {
            double tq = adv_.time_affordable(q * m);
            return inclusive ? tq <= lim : tq < lim;
        };
        double x = (adv_.rate_T * lim - double(adv_.budget_spent)) / double(m);
        if (x < 2) return;
        auto q = static_cast<std::uint64_t>(std::min(x, 9.0e15 / double(m)));
        while (q > 0 && !fits(q)) --q;
        if (q < 1) return;

        IterationRecord row;
        row.iteration = st_.iteration;
        row.repeat = q;
        row.start = now_;
        double end = adv_.time_affordable(q * m);
        row.length = (end - now_) / double(q);
        row.alg_purge = g;
        row.adv_entrance = m;
        row.bad_joins = m;
        row.s_prev = st_.s_prev;
        row.s_end = g;
        row.jg = st_.jg_iter;
        row.closed = true;

        {
            auto& inv = res_.invariants;
            std::uint64_t first = std::max<std::uint64_t>(1, (g + 4) / 5);
            std::uint64_t per = m >= first ? m - first + 1 : 0;
            inv.population_checks += q * m;
            inv.population_violations += q * per;
            if (per > 0 && inv.first_violation_time < 0) inv.first_violation_time = now_;
        }
        res_.invariants.max_bad_fraction = std::max(res_.invariants.max_bad_fraction, double(m) / double(g + m));

        ledger_.adv_entrance += q * m;
        ledger_.alg_purge += q * g;
        ledger_.rows.push_back(row);
        adv_.budget_spent += q * m;
        adv_count_ += q * m;
        res_.bad_joins += q * m;
        res_.purges += q;
        st_.bad.add_bulk(q * m);
        st_.bad.retain_oldest(0);
        st_.iteration += q;
        now_ = end;
        if (kind_ == DefenseKind::GMCom) gmcom_roll_iteration(gm_, m, row.length);
        latch_iteration(st_, est_, now_);
        st_.committee = select_committee(st_, rng_);
        res_.invariants.committee_checks += q;
        open_row(st_, ledger_);
    }

    SimConfig cfg_;
    const ChurnTrace& trace_;
    AdversaryConfig advcfg_;
    DefenseKind kind_;
    HeuristicConfig heur_;
    Rng rng_;
    SystemState st_;
    EstimatorState est_;
    CostLedger ledger_;
    GMComState gm_;
    AdversaryLedger adv_;
    EventQueue queue_;
    std::size_t trace_pos_ = 0;
    std::vector<bool> rejected_;
    double now_ = 0.0;
    bool stopped_ = false;
    bool adv_cached_ = false;
    double adv_next_ = 0.0;
    std::uint64_t adv_count_ = 0;
    std::uint64_t sample_index_ = 0;
    SimResult res_;
};

inline SimResult run(const SimConfig& config, const ChurnTrace& trace, const AdversaryConfig& adversary) {
    Simulation sim(config, trace, adversary);
    return sim.run();
}

inline void write_timeseries_csv(const SimResult& r, std::ostream& out) {
    out << "time,n_system,bad_fraction,jg_estimate,alg_spend_rate,adv_spend_rate\n";
    for (const auto& s : r.timeseries)
        out << fmt_num(s.time) << ',' << s.n_system << ',' << fmt_num(s.bad_fraction) << ',' << fmt_num(s.jg_estimate)
            << ',' << fmt_num(s.alg_spend_rate) << ',' << fmt_num(s.adv_spend_rate) << '\n';
}

// One line per ledger row; `repeat` consecutive identical iterations share a
// line, each with the listed length and charges.
inline void write_ledger_csv(const SimResult& r, std::ostream& out) {
    out << "iteration,repeat,start,length,alg_entrance,alg_purge,adv_entrance,adv_purge,good_joins,bad_joins,s_prev,"
           "s_end,closed\n";
    for (const auto& row : r.ledger.rows)
        out << row.iteration << ',' << row.repeat << ',' << fmt_num(row.start) << ',' << fmt_num(row.length) << ','
            << row.alg_entrance << ',' << row.alg_purge << ',' << row.adv_entrance << ',' << row.adv_purge << ','
            << row.good_joins << ',' << row.bad_joins << ',' << row.s_prev << ',' << row.s_end << ','
            << (row.closed ? 1 : 0) << '\n';
}

inline std::string timeseries_csv(const SimResult& r) {
    std::ostringstream out;
    write_timeseries_csv(r, out);
    return out.str();
}

inline std::string ledger_csv(const SimResult& r) {
    std::ostringstream out;
    write_ledger_csv(r, out);
    return out.str();
}

}  // namespace sybilsim
