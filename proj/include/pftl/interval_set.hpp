#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

namespace pftl {

/// A real interval with independently open or closed endpoints. Degenerate [x,x] is allowed.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool loClosed = true;
    bool hiClosed = true;

    static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
    static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
    static Interval rightOpen(double lo, double hi) { return {lo, hi, true, false}; }
    static Interval leftOpen(double lo, double hi) { return {lo, hi, false, true}; }
    static Interval point(double x) { return {x, x, true, true}; }

    bool empty() const noexcept { return lo > hi || (lo == hi && !(loClosed && hiClosed)); }
    double length() const noexcept { return empty() ? 0.0 : hi - lo; }
    bool contains(double t) const noexcept {
        return (loClosed ? t >= lo : t > lo) && (hiClosed ? t <= hi : t < hi);
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval intersect(const Interval& a, const Interval& b) {
    Interval out;
    if (a.lo > b.lo) {
        out.lo = a.lo;
        out.loClosed = a.loClosed;
    } else if (b.lo > a.lo) {
        out.lo = b.lo;
        out.loClosed = b.loClosed;
    } else {
        out.lo = a.lo;
        out.loClosed = a.loClosed && b.loClosed;
    }
    if (a.hi < b.hi) {
        out.hi = a.hi;
        out.hiClosed = a.hiClosed;
    } else if (b.hi < a.hi) {
        out.hi = b.hi;
        out.hiClosed = b.hiClosed;
    } else {
        out.hi = a.hi;
        out.hiClosed = a.hiClosed && b.hiClosed;
    }
    return out;
}

inline std::string toString(const Interval& iv) {
    return (iv.loClosed ? "[" : "(") + std::to_string(iv.lo) + "," + std::to_string(iv.hi) + (iv.hiClosed ? "]" : ")");
}

/// Ordered, pairwise disjoint, maximally merged list of nonempty intervals. Two neighbours
/// sharing an endpoint never both contain it (otherwise they would have been merged).
class IntervalSet {
public:
    IntervalSet() = default;

    /// Builds the canonical form of an arbitrary list of intervals.
    static IntervalSet fromIntervals(std::vector<Interval> parts) {
        std::erase_if(parts, [](const Interval& iv) { return iv.empty(); });
        std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
            if (a.lo != b.lo) return a.lo < b.lo;
            return a.loClosed && !b.loClosed;
        });
        IntervalSet out;
        for (const auto& iv : parts) {
            if (out.parts_.empty()) {
                out.parts_.push_back(iv);
                continue;
            }
            Interval& last = out.parts_.back();
            const bool touches = iv.lo < last.hi || (iv.lo == last.hi && (iv.loClosed || last.hiClosed));
            if (!touches) {
                out.parts_.push_back(iv);
                continue;
            }
            if (iv.hi > last.hi) {
                last.hi = iv.hi;
                last.hiClosed = iv.hiClosed;
            } else if (iv.hi == last.hi) {
                last.hiClosed = last.hiClosed || iv.hiClosed;
            }
        }
        return out;
    }

    static IntervalSet single(const Interval& iv) { return fromIntervals({iv}); }

    const std::vector<Interval>& intervals() const noexcept { return parts_; }
    bool empty() const noexcept { return parts_.empty(); }
    std::size_t size() const noexcept { return parts_.size(); }

    bool contains(double t) const {
        // Only the last interval starting at or before t can contain it.
        auto it = std::upper_bound(parts_.begin(), parts_.end(), t, [](double x, const Interval& iv) { return x < iv.lo; });
        return it != parts_.begin() && std::prev(it)->contains(t);
    }

    double measure() const {
        double m = 0.0;
        for (const auto& iv : parts_) m += iv.length();
        return m;
    }

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
    std::vector<Interval> parts_;
};

inline std::string toString(const IntervalSet& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ", ";
        out += toString(s.intervals()[i]);
    }
    return out + "}";
}

inline std::ostream& operator<<(std::ostream& os, const IntervalSet& s) { return os << toString(s); }

inline IntervalSet unite(const IntervalSet& a, const IntervalSet& b) {
    std::vector<Interval> parts = a.intervals();
    parts.insert(parts.end(), b.intervals().begin(), b.intervals().end());
    return IntervalSet::fromIntervals(std::move(parts));
}

/// Restriction of s to the window [lo, hi].
inline IntervalSet clip(const IntervalSet& s, double lo, double hi) {
    std::vector<Interval> parts;
    const auto window = Interval::closed(lo, hi);
    for (const auto& iv : s.intervals()) parts.push_back(intersect(iv, window));
    return IntervalSet::fromIntervals(std::move(parts));
}

/// Complement of s inside [0, horizon]; endpoint openness is flipped exactly.
inline IntervalSet satint_not(const IntervalSet& s, double horizon) {
    std::vector<Interval> parts;
    double cursor = 0.0;
    bool cursorClosed = true;
    const auto inside = clip(s, 0.0, horizon);
    for (const auto& iv : inside.intervals()) {
        parts.push_back({cursor, iv.lo, cursorClosed, !iv.loClosed});
        cursor = iv.hi;
        cursorClosed = !iv.hiClosed;
    }
    parts.push_back({cursor, horizon, cursorClosed, true});
    return IntervalSet::fromIntervals(std::move(parts));
}

/// Pairwise intersection of two canonical sets, by a linear merge.
inline IntervalSet satint_and(const IntervalSet& a, const IntervalSet& b) {
    std::vector<Interval> parts;
    const auto& x = a.intervals();
    const auto& y = b.intervals();
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        const auto iv = intersect(x[i], y[j]);
        if (!iv.empty()) parts.push_back(iv);
        // Advance whichever interval ends first.
        const bool xEndsFirst = x[i].hi < y[j].hi || (x[i].hi == y[j].hi && !x[i].hiClosed);
        if (xEndsFirst) ++i;
        else ++j;
    }
    return IntervalSet::fromIntervals(std::move(parts));
}

/// Lebesgue measure of s ∩ (window + t).
inline double measure_window(const IntervalSet& s, const Interval& window, double t) {
    const double lo = window.lo + t;
    const double hi = window.hi + t;
    double m = 0.0;
    for (const auto& iv : s.intervals()) {
        if (iv.lo >= hi) break;
        const double a = std::max(iv.lo, lo);
        const double b = std::min(iv.hi, hi);
        if (b > a) m += b - a;
    }
    return m;
}

/// Cumulative-measure index over a canonical set: window measures in O(log n).
class MeasureIndex {
public:
    explicit MeasureIndex(const IntervalSet& s) : parts_(&s.intervals()) {
        prefix_.reserve(parts_->size() + 1);
        prefix_.push_back(0.0);
        for (const auto& iv : *parts_) prefix_.push_back(prefix_.back() + iv.length());
    }

    /// Measure of s ∩ (-inf, x].
    double upTo(double x) const {
        const auto it = std::upper_bound(parts_->begin(), parts_->end(), x,
                                         [](double v, const Interval& iv) { return v < iv.lo; });
        const auto k = static_cast<std::size_t>(it - parts_->begin());
        if (k == 0) return 0.0;
        const auto& last = (*parts_)[k - 1];
        return prefix_[k - 1] + std::min(x, last.hi) - last.lo;
    }

    /// Lebesgue measure of s ∩ (window + t).
    double window(const Interval& w, double t) const {
        const double m = upTo(w.hi + t) - upTo(w.lo + t);
        return m > 0.0 ? m : 0.0;
    }

private:
    const std::vector<Interval>* parts_;
    std::vector<double> prefix_;
};

/// Number of points of s inside the closed window [lo, hi], assuming s meets it in a
/// set of measure zero (isolated points only).
inline std::size_t countPointsIn(const IntervalSet& s, double lo, double hi) {
    std::size_t count = 0;
    const auto window = Interval::closed(lo, hi);
    for (const auto& iv : s.intervals()) {
        if (iv.lo > hi) break;
        if (!intersect(iv, window).empty()) ++count;
    }
    return count;
}

}  // namespace pftl
