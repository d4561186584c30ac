#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sybilsim/assumptions.hpp"
#include "sybilsim/engine.hpp"
#include "sybilsim/epochs.hpp"
#include "sybilsim/error.hpp"

namespace sybilsim {

struct CheckReport {
    std::uint64_t checked = 0;
    std::uint64_t failed = 0;
    double min_ratio = std::numeric_limits<double>::infinity();  // bound / value, > 1 means slack
    std::vector<std::uint64_t> failures;  // first few failing iteration or window indices

    bool pass() const { return failed == 0; }

    void record(bool ok, double ratio, std::uint64_t where, std::uint64_t count = 1) {
        checked += count;
        min_ratio = std::min(min_ratio, ratio);
        if (!ok) {
            failed += count;
            if (failures.size() < 16) failures.push_back(where);
        }
    }

    void merge(const CheckReport& o) {
        checked += o.checked;
        failed += o.failed;
        min_ratio = std::min(min_ratio, o.min_ratio);
        for (auto f : o.failures)
            if (failures.size() < 16) failures.push_back(f);
    }
};

inline double safe_ratio(double bound, double value) {
    if (value <= 0) return std::numeric_limits<double>::infinity();
    return bound / value;
}

// Estimator bracket on explicit series (estimate vs ground-truth rate).
inline CheckReport check_theorem1(const std::vector<double>& jg, const std::vector<double>& truth,
                                  const AssumptionConstants& ac) {
    CheckReport r;
    for (std::size_t i = 0; i < jg.size(); ++i) {
        double lo = ac.c_je_low * truth[i], hi = ac.c_je_high * truth[i];
        bool ok = jg[i] >= lo && jg[i] <= hi;
        double ratio = std::min(safe_ratio(jg[i], lo), safe_ratio(hi, jg[i]));
        r.record(ok, ratio, i + 1);
    }
    return r;
}

// J^G_i is the time-weighted epoch rate over the iteration.
inline CheckReport check_theorem1(const SimResult& run, const EpochAnalysis& ep, const AssumptionConstants& ac) {
    CheckReport r;
    for (const auto& row : run.ledger.rows) {
        double span = row.length * double(row.repeat);
        double truth = ep.mean_rate(row.start, row.start + span);
        double lo = ac.c_je_low * truth, hi = ac.c_je_high * truth;
        bool ok = row.jg >= lo && row.jg <= hi;
        r.record(ok, std::min(safe_ratio(row.jg, lo), safe_ratio(hi, row.jg)), row.iteration, row.repeat);
    }
    return r;
}

inline double theorem2_bound(const AssumptionConstants& ac, double T, double JG) {
    return 11.0 * ac.d2 * (ac.d1 * std::sqrt(2.0 * T * (ac.c_je_high * JG + 1.0)) + JG);
}

inline CheckReport check_theorem2(double A, double T, double JG, const AssumptionConstants& ac) {
    CheckReport r;
    double bound = theorem2_bound(ac, T, JG);
    r.record(A <= bound, safe_ratio(bound, A), 0);
    return r;
}

inline CheckReport check_theorem2(const SimResult& run, const AssumptionConstants& ac) {
    return check_theorem2(run.alg_rate(), run.adv_rate(), run.good_join_rate(), ac);
}

// Unit-free form of the per-iteration bad-join bound: B^2 <= 2 C (jg * l + 1).
inline bool joinbad_holds(std::uint64_t bad_joins, std::uint64_t adv_entrance, double jg, double length) {
    double b = double(bad_joins);
    return b * b <= 2.0 * double(adv_entrance) * (jg * length + 1.0);
}

inline CheckReport check_lemma_joinbad(const SimResult& run) {
    CheckReport r;
    for (const auto& row : run.ledger.rows) {
        double b = double(row.bad_joins);
        double bound = 2.0 * double(row.adv_entrance) * (row.jg * row.length + 1.0);
        r.record(joinbad_holds(row.bad_joins, row.adv_entrance, row.jg, row.length), safe_ratio(bound, b * b),
                 row.iteration, row.repeat);
    }
    return r;
}

// A_i * l_i <= d2 |S_{i-1}| for i > 1.
inline CheckReport check_lemma_algcost(const SimResult& run, const AssumptionConstants& ac) {
    CheckReport r;
    for (const auto& row : run.ledger.rows) {
        auto first = row.iteration;
        auto repeat = row.repeat;
        if (first == 1) {
            if (repeat == 1) continue;
            ++first;
            --repeat;
        }
        double cost = double(row.alg_entrance + row.alg_purge);
        double bound = ac.d2 * double(row.s_prev);
        r.record(cost <= bound, safe_ratio(bound, cost), first, repeat);
    }
    return r;
}

struct IterationWindow {
    std::uint64_t first;  // iteration index, >= 2
    std::uint64_t last;
};

// Prefix sums over expanded iterations, for window queries.
class IterationIndex {
public:
    explicit IterationIndex(const std::vector<IterationRecord>& rows) : rows_(rows) {
        Sums acc{};
        for (const auto& row : rows) {
            begin_.push_back(acc);
            acc.alg += double(row.alg_entrance + row.alg_purge) * double(row.repeat);
            acc.adv += double(row.adv_entrance + row.adv_purge) * double(row.repeat);
            acc.good += double(row.good_joins + row.rejected_good) * double(row.repeat);
            acc.length += row.length * double(row.repeat);
        }
        begin_.push_back(acc);
        if (!rows.empty()) count_ = rows.back().iteration + rows.back().repeat - 1;
    }

    std::uint64_t count() const { return count_; }

    struct Sums {
        double alg = 0, adv = 0, good = 0, length = 0;
    };

    // Sums over iterations 1..x.
    Sums through(std::uint64_t x) const {
        if (x == 0) return {};
        auto k = row_of(x);
        const auto& row = rows_[k];
        double n = double(x - row.iteration + 1);
        Sums s = begin_[k];
        s.alg += double(row.alg_entrance + row.alg_purge) * n;
        s.adv += double(row.adv_entrance + row.adv_purge) * n;
        s.good += double(row.good_joins + row.rejected_good) * n;
        s.length += row.length * n;
        return s;
    }

    std::uint64_t s_prev(std::uint64_t x) const { return rows_[row_of(x)].s_prev; }
    std::uint64_t s_end(std::uint64_t x) const {
        const auto& row = rows_[row_of(x)];
        return x + 1 < row.iteration + row.repeat ? row.s_prev : row.s_end;
    }

private:
    std::size_t row_of(std::uint64_t x) const {
        auto it = std::upper_bound(rows_.begin(), rows_.end(), x,
                                   [](std::uint64_t v, const IterationRecord& r) { return v < r.iteration; });
        return static_cast<std::size_t>(it - rows_.begin()) - 1;
    }

    const std::vector<IterationRecord>& rows_;
    std::vector<Sums> begin_;
    std::uint64_t count_ = 0;
};

// Singles, aligned dyadic blocks and the whole run, all starting after iteration 1.
inline std::vector<IterationWindow> corollary_windows(std::uint64_t iterations, std::size_t per_level_cap = 1 << 20) {
    std::vector<IterationWindow> w;
    if (iterations < 2) return w;
    for (std::uint64_t len = 1; len <= iterations - 1; len *= 2) {
        std::uint64_t blocks = (iterations - 1) / len;
        std::uint64_t stride = std::max<std::uint64_t>(1, blocks / per_level_cap);
        for (std::uint64_t b = 0; b < blocks; b += stride) w.push_back({2 + b * len, 1 + (b + 1) * len});
    }
    w.push_back({2, iterations});
    return w;
}

// Window totals, not rates. Summing the unit-free joinBad bound over the
// window leaves one "+1" per iteration, so the count of iterations takes the
// place of the window length under the square root.
inline bool corollary_holds(const AssumptionConstants& ac, double alg, double adv, double good, double iterations,
                            double delta, double* ratio = nullptr) {
    double bound = 11.0 * ac.d2 * (2.0 * delta + ac.d1 * std::sqrt(2.0 * adv * (ac.c_je_high * good + iterations)) + good);
    if (ratio) *ratio = safe_ratio(bound, alg);
    return alg <= bound;
}

inline CheckReport check_corollary_windows(const SimResult& run, const AssumptionConstants& ac,
                                           const std::vector<IterationWindow>& windows) {
    IterationIndex idx(run.ledger.rows);
    CheckReport r;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        const auto& w = windows[k];
        if (w.first < 2) throw DomainError("corollary windows must start after iteration 1");
        if (w.last < w.first || w.last > idx.count()) throw DomainError("corollary window out of range");
        auto a = idx.through(w.first - 1), b = idx.through(w.last);
        double length = b.length - a.length;
        if (!(length > 0)) continue;
        double sx = double(idx.s_prev(w.first)), sy = double(idx.s_end(w.last));
        double delta = std::max(0.0, sx - sy);
        double ratio;
        double iterations = double(w.last - w.first + 1);
        bool ok = corollary_holds(ac, b.alg - a.alg, b.adv - a.adv, b.good - a.good, iterations, delta, &ratio);
        r.record(ok, ratio, k);
    }
    return r;
}

// Every completed estimator interval (a, b] meets at most two epochs
// (e_{j-1}, e_j] and never covers one from before its start to after its end.
inline CheckReport check_interval_epochs(const std::vector<EstimatorInterval>& intervals, const EpochAnalysis& ep) {
    CheckReport r;
    const auto& bd = ep.boundaries;
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        double a = intervals[k].start, b = intervals[k].end;
        // epochs j with start_j < b and end_j > a; the unfinished tail counts as an epoch
        auto first = static_cast<std::size_t>(std::upper_bound(bd.begin(), bd.end(), a) - bd.begin());
        auto last = static_cast<std::size_t>(std::lower_bound(bd.begin(), bd.end(), b) - bd.begin());
        std::size_t touched = last - first + 1;
        bool contains = false;
        for (std::size_t j = first; j < last && j < bd.size(); ++j)
            if (a <= ep.start(j) && bd[j] < b) contains = true;
        bool ok = touched <= 2 && !contains;
        r.record(ok, ok ? 1.0 : 0.0, k);
    }
    return r;
}

inline CheckReport check_interval_epochs(const SimResult& run, const EpochAnalysis& ep) {
    return check_interval_epochs(run.intervals, ep);
}

}  // namespace sybilsim
