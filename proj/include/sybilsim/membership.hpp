#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

namespace sybilsim {

// A live ID. Good IDs are keyed by their trace id, bad IDs by injection sequence.
struct Member {
    bool bad = false;
    std::uint64_t key = 0;
    friend bool operator==(const Member&, const Member&) = default;
};

// Live bad IDs as join-ordered runs of sequence numbers. The adversary only
// ever keeps its oldest IDs, so runs stay few.
class BadPopulation {
public:
    std::uint64_t add() {
        auto seq = next_++;
        if (!runs_.empty() && runs_.back().second == seq)
            ++runs_.back().second;
        else
            runs_.emplace_back(seq, seq + 1);
        ++count_;
        return seq;
    }

    void add_bulk(std::uint64_t n) {
        if (n == 0) return;
        auto seq = next_;
        next_ += n;
        if (!runs_.empty() && runs_.back().second == seq)
            runs_.back().second += n;
        else
            runs_.emplace_back(seq, seq + n);
        count_ += n;
    }

    std::uint64_t count() const { return count_; }
    std::uint64_t next_seq() const { return next_; }

    std::uint64_t count_at_least(std::uint64_t seq) const {
        std::uint64_t n = 0;
        for (auto it = runs_.rbegin(); it != runs_.rend(); ++it) {
            if (it->second <= seq) break;
            n += it->second - std::max(it->first, seq);
        }
        return n;
    }

    void retain_oldest(std::uint64_t keep) {
        if (keep >= count_) return;
        std::uint64_t seen = 0;
        std::size_t i = 0;
        for (; i < runs_.size() && seen < keep; ++i) {
            auto len = runs_[i].second - runs_[i].first;
            if (seen + len > keep) {
                runs_[i].second = runs_[i].first + (keep - seen);
                seen = keep;
                ++i;
                break;
            }
            seen += len;
        }
        runs_.resize(i);
        count_ = keep;
    }

    // k-th oldest live bad ID (0-based).
    std::uint64_t nth(std::uint64_t k) const {
        for (const auto& r : runs_) {
            auto len = r.second - r.first;
            if (k < len) return r.first + k;
            k -= len;
        }
        return next_;
    }

    bool contains(std::uint64_t seq) const {
        for (const auto& r : runs_)
            if (seq >= r.first && seq < r.second) return true;
        return false;
    }

private:
    std::deque<std::pair<std::uint64_t, std::uint64_t>> runs_;
    std::uint64_t count_ = 0;
    std::uint64_t next_ = 0;
};

// Sorted join-request timestamps used for entrance pricing. Entries older
// than the retention horizon are dropped.
class JoinWindow {
public:
    void push(double t) { t_.push_back(t); }

    std::size_t size() const { return t_.size() - head_; }
    bool empty() const { return size() == 0; }

    // Index of the first retained entry strictly greater than x.
    std::size_t first_after(double x) const {
        return static_cast<std::size_t>(std::upper_bound(t_.begin() + head_, t_.end(), x) - t_.begin());
    }

    // Index of the first retained entry >= x.
    std::size_t first_at_or_after(double x) const {
        return static_cast<std::size_t>(std::lower_bound(t_.begin() + head_, t_.end(), x) - t_.begin());
    }

    // Number of entries e with e > x, with a cursor that only moves forward
    // while x is non-decreasing.
    std::size_t count_after(double x) {
        if (cursor_ < head_) cursor_ = head_;
        if (cursor_ > head_ && t_[cursor_ - 1] > x) {
            cursor_ = first_after(x);
        } else {
            while (cursor_ < t_.size() && t_[cursor_] <= x) ++cursor_;
        }
        return t_.size() - cursor_;
    }

    double at(std::size_t idx) const { return t_[idx]; }
    std::size_t end_index() const { return t_.size(); }

    void drop_through(double x) {
        while (head_ < t_.size() && t_[head_] <= x) ++head_;
        if (head_ > 4096 && head_ * 2 > t_.size()) {
            t_.erase(t_.begin(), t_.begin() + static_cast<std::ptrdiff_t>(head_));
            cursor_ = cursor_ > head_ ? cursor_ - head_ : 0;
            head_ = 0;
        }
    }

    void clear() {
        t_.clear();
        head_ = cursor_ = 0;
    }

private:
    std::vector<double> t_;
    std::size_t head_ = 0;
    std::size_t cursor_ = 0;
};

}  // namespace sybilsim
