#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "sybilsim/trace.hpp"

namespace sybilsim {

struct EpochAnalysis {
    std::vector<double> boundaries;                    // end time of epoch j
    std::vector<double> rates;                         // good joins / epoch length
    std::vector<std::uint64_t> joins;                  // good joins inside epoch j
    std::vector<std::vector<std::uint32_t>> good_sets; // G_j at each boundary (optional)
    // Unfinished epoch after the last boundary.
    double tail_end = 0.0;
    std::uint64_t tail_joins = 0;
    std::vector<std::string> warnings;

    std::size_t size() const { return boundaries.size(); }
    double start(std::size_t j) const { return j == 0 ? 0.0 : boundaries[j - 1]; }
    double last_boundary() const { return boundaries.empty() ? 0.0 : boundaries.back(); }

    double tail_rate() const {
        double len = tail_end - last_boundary();
        if (len > 0 && tail_joins > 0) return tail_joins / len;
        return rates.empty() ? 0.0 : rates.back();
    }

    // Epoch j covers (start(j), boundaries[j]]; times past the last boundary use the tail.
    double rate_at(double t) const {
        auto it = std::lower_bound(boundaries.begin(), boundaries.end(), t);
        if (it == boundaries.end()) return tail_rate();
        return rates[static_cast<std::size_t>(it - boundaries.begin())];
    }

    // Time-weighted mean of rho over [a, b]; rho(a) when a == b.
    double mean_rate(double a, double b) const {
        if (!(b > a)) return rate_at(a);
        double acc = 0.0;
        double cur = a;
        auto j = static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), a) - boundaries.begin());
        while (cur < b) {
            double end = j < boundaries.size() ? std::min(b, boundaries[j]) : b;
            double r = j < rates.size() ? rates[j] : tail_rate();
            acc += r * (end - cur);
            cur = end;
            ++j;
        }
        return acc / (b - a);
    }
};

// Online detector: an epoch closes at the first event where the good IDs that
// were not present at the previous boundary make up at least 3/4 of the
// current good set. Time-0 joins form G_0.
class EpochTracker {
public:
    explicit EpochTracker(bool keep_sets = false) : keep_sets_(keep_sets) {}

    bool apply(const TraceEvent& e) {
        if (e.id >= pos_.size()) {
            pos_.resize(e.id + 1, npos);
            stamp_.resize(e.id + 1, 0);
        }
        if (e.kind == TraceKind::Join) {
            pos_[e.id] = live_.size();
            live_.push_back(e.id);
            if (e.time == 0.0) {
                stamp_[e.id] = gen_;
            } else {
                stamp_[e.id] = 0;
                ++new_count_;
                ++joins_;
            }
        } else {
            auto p = pos_[e.id];
            if (p == npos) return false;
            live_[p] = live_.back();
            pos_[live_[p]] = p;
            live_.pop_back();
            pos_[e.id] = npos;
            if (stamp_[e.id] != gen_) --new_count_;
        }
        last_time_ = e.time;
        if (e.time > out_.last_boundary() && new_count_ > 0 && 4 * new_count_ >= 3 * live_.size()) {
            close(e.time);
            return true;
        }
        return false;
    }

    std::size_t epochs() const { return out_.size(); }
    std::size_t live() const { return live_.size(); }

    EpochAnalysis finish(double t_end) {
        out_.tail_end = std::max(t_end, last_time_);
        out_.tail_joins = joins_;
        return out_;
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    void close(double t) {
        double len = t - out_.last_boundary();
        out_.boundaries.push_back(t);
        out_.rates.push_back(joins_ / len);
        out_.joins.push_back(joins_);
        ++gen_;
        for (auto id : live_) stamp_[id] = gen_;
        if (keep_sets_) {
            auto snap = live_;
            std::sort(snap.begin(), snap.end());
            out_.good_sets.push_back(std::move(snap));
        }
        new_count_ = 0;
        joins_ = 0;
    }

    bool keep_sets_;
    std::vector<std::uint32_t> live_;
    std::vector<std::size_t> pos_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t gen_ = 1;
    std::size_t new_count_ = 0;
    std::uint64_t joins_ = 0;
    double last_time_ = 0.0;
    EpochAnalysis out_;
};

inline EpochAnalysis detect_epochs(const ChurnTrace& trace, bool keep_sets = true) {
    EpochTracker tracker(keep_sets);
    for (const auto& e : trace.events) tracker.apply(e);
    auto ep = tracker.finish(trace.events.empty() ? 0.0 : trace.events.back().time);
    if (ep.size() == 0) ep.warnings.push_back("trace too short for one epoch");
    return ep;
}

}  // namespace sybilsim
