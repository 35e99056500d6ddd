#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pftl/errors.hpp"
#include "pftl/formula.hpp"
#include "pftl/interval_set.hpp"
#include "pftl/model.hpp"
#include "pftl/simulation.hpp"

namespace pftl {

/// Segments whose state satisfies the predicate, as [start, end) clipped to [0, kTotal].
/// A segment running past kTotal keeps kTotal itself, so the last state is visible there.
template <typename State, typename Pred>
IntervalSet satint_atomic(const BasicTimedPath<State>& path, Pred&& holds, double kTotal) {
    std::vector<Interval> parts;
    double start = 0.0;
    for (const auto& seg : path.segments) {
        if (start > kTotal) break;
        const double end = start + seg.duration;
        if (holds(seg.state)) {
            if (end > kTotal) parts.push_back(Interval::closed(start, kTotal));
            else parts.push_back(Interval::rightOpen(start, end));
        }
        start = end;
    }
    return IntervalSet::fromIntervals(std::move(parts));
}

inline IntervalSet satint_atomic(const TimedPath& path, const std::vector<LabelSet>& labels, std::string_view atom,
                                 double kTotal) {
    return satint_atomic(path, [&](StateId s) { return hasLabel(labels[s.index], atom); }, kTotal);
}

/// psi1 U^I psi2 over [0, kTotal]. For every psi1 interval I_i and psi2 interval J_j the
/// witnesses t' lie in Y = (I_i ∪ {sup I_i}) ∩ J_j, and the start points form the Minkowski
/// difference X = Y - I, restricted to I_i ∪ {inf I_i}.
inline IntervalSet satint_until(const IntervalSet& s1, const IntervalSet& s2, const TimeInterval& window,
                                double kTotal) {
    normalize_interval(window, Timebase::Continuous);  // validates; openness is kept as written
    const TimeInterval& I = window;
    if (!I.bounded()) throw FormulaError("statistical until needs a bounded interval");
    std::vector<Interval> parts;
    const auto& js = s2.intervals();
    for (const auto& ii : s1.intervals()) {
        const Interval closure = {ii.lo, ii.hi, ii.loClosed, true};
        const Interval starts = {ii.lo, ii.hi, true, ii.hiClosed};
        // Only psi2 intervals overlapping [inf I_i, sup I_i] can give a Y.
        auto it = std::lower_bound(js.begin(), js.end(), ii.lo, [](const Interval& j, double x) { return j.hi < x; });
        for (; it != js.end() && it->lo <= ii.hi; ++it) {
            const Interval y = intersect(closure, *it);
            if (y.empty()) continue;
            const Interval x = {y.lo - I.hi, y.hi - I.lo, y.loClosed && I.hiClosed, y.hiClosed && I.loClosed};
            const Interval r = intersect(x, starts);
            if (!r.empty()) parts.push_back(r);
        }
    }
    if (I.contains(0.0)) parts.insert(parts.end(), js.begin(), js.end());
    return clip(IntervalSet::fromIntervals(std::move(parts)), 0.0, kTotal);
}

namespace detail {

inline IntervalSet shiftLeft(const IntervalSet& s, double by, double kTotal) {
    std::vector<Interval> parts;
    parts.reserve(s.size());
    for (auto iv : s.intervals()) {
        iv.lo -= by;
        iv.hi -= by;
        parts.push_back(iv);
    }
    return clip(IntervalSet::fromIntervals(std::move(parts)), 0.0, kTotal);
}

/// Measures equal within this relative slack count as equal when comparing f against q.
inline constexpr double kMeasureSlack = 1e-12;

/// Whether the measure ratio l12 / l2 (l2 > 0) obeys the bound.
inline bool ratioObeys(double l12, double l2, Comparator cmp, const Bound& q, double scale) {
    const double diff = l12 - q.value() * l2;
    if (std::abs(diff) <= kMeasureSlack * std::max(1.0, scale)) return compare(0.0, cmp, 0.0);
    return compare(diff, cmp, 0.0);
}

}  // namespace detail

/// Q^I_{cmp q}<psi1 | psi2> over [0, kTotal], given SatInt(psi1 ∧ psi2) and SatInt(psi2).
inline IntervalSet satint_q(const IntervalSet& s12, const IntervalSet& s2, Comparator cmp, const Bound& q,
                            const TimeInterval& window, double kTotal) {
    const TimeInterval I = normalize_interval(window, Timebase::Continuous);
    if (!I.bounded()) throw FormulaError("statistical frequency operator needs a bounded interval");

    if (I.hi == 0.0) {
        // A point window is a conditional on the current instant.
        std::vector<Interval> parts = satint_not(s2, kTotal).intervals();
        if (q.countSatisfies(1, cmp, 1)) parts.insert(parts.end(), s12.intervals().begin(), s12.intervals().end());
        if (q.countSatisfies(0, cmp, 1)) {
            const auto rest = satint_and(s2, satint_not(s12, kTotal));
            parts.insert(parts.end(), rest.intervals().begin(), rest.intervals().end());
        }
        return IntervalSet::fromIntervals(std::move(parts));
    }
    if (I.lo > 0.0) {
        const auto inner = satint_q(s12, s2, cmp, q, TimeInterval::closed(0.0, I.hi - I.lo), kTotal);
        return detail::shiftLeft(inner, I.lo, kTotal);
    }

    const double k = I.hi;
    const double domainEnd = kTotal - k;
    if (domainEnd < 0.0) return {};

    std::vector<double> points = {0.0, domainEnd};
    for (const auto* s : {&s12, &s2}) {
        for (const auto& iv : s->intervals()) {
            for (double p : {iv.lo - k, iv.lo, iv.hi - k, iv.hi}) {
                if (p >= 0.0 && p <= domainEnd) points.push_back(p);
            }
        }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    const MeasureIndex m12(s12);
    const MeasureIndex m2(s2);
    const Interval w = Interval::closed(0.0, k);

    // f at a single instant, including the finite-point branch; no psi2 point at all counts as true.
    const double zeroMeasure = detail::kMeasureSlack * std::max(1.0, k);
    auto holdsAt = [&](double t, double l12, double l2) {
        if (l2 > zeroMeasure) return detail::ratioObeys(l12, l2, cmp, q, k);
        const auto c2 = countPointsIn(s2, t, t + k);
        if (c2 == 0) return true;
        const auto c12 = countPointsIn(s12, t, t + k);
        return q.countSatisfies(static_cast<std::int64_t>(c12), cmp, static_cast<std::int64_t>(c2));
    };

    std::vector<Interval> parts;
    std::vector<double> l12(points.size()), l2(points.size());
    std::vector<bool> verdict(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        l12[i] = m12.window(w, points[i]);
        l2[i] = m2.window(w, points[i]);
        verdict[i] = holdsAt(points[i], l12[i], l2[i]);
        if (verdict[i]) parts.push_back(Interval::point(points[i]));
    }

    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double a0 = points[i], a1 = points[i + 1];
        const Interval gap = Interval::open(a0, a1);
        const bool zero0 = l2[i] <= zeroMeasure, zero1 = l2[i + 1] <= zeroMeasure;
        if (zero0 && zero1) {
            // Only isolated psi2 points can be in the window; their count is constant on the gap.
            const double mid = 0.5 * (a0 + a1);
            if (holdsAt(mid, 0.0, 0.0)) parts.push_back(gap);
            continue;
        }
        if (zero0 || zero1) {
            // The window measures grow from (or shrink to) zero linearly, so their ratio is fixed.
            const std::size_t e = zero0 ? i + 1 : i;
            if (detail::ratioObeys(l12[e], l2[e], cmp, q, k)) parts.push_back(gap);
            continue;
        }
        const bool v0 = detail::ratioObeys(l12[i], l2[i], cmp, q, k);
        const bool v1 = detail::ratioObeys(l12[i + 1], l2[i + 1], cmp, q, k);
        if (v0 && v1) {
            parts.push_back(gap);
            continue;
        }
        if (!v0 && !v1) continue;
        // f is monotone on the gap and crosses q once.
        const double a = (l12[i + 1] - l12[i]) / (a1 - a0);
        const double b = (l2[i + 1] - l2[i]) / (a1 - a0);
        const double qv = q.value();
        const double den = a - qv * b;
        if (den == 0.0) {
            if (v0) parts.push_back(gap);
            continue;
        }
        const double cross = std::clamp(a0 + (qv * l2[i] - l12[i]) / den, a0, a1);
        if (v0) parts.push_back({a0, cross, false, !isStrict(cmp)});
        else parts.push_back({cross, a1, !isStrict(cmp), false});
    }
    return IntervalSet::fromIntervals(std::move(parts));
}

// ---------------------------------------------------------------------------

namespace detail {

template <typename State, typename Labeler>
IntervalSet satintOf(const BasicTimedPath<State>& path, const Formula& f, double kTotal, Labeler& labeler) {
    switch (f.kind) {
        case NodeKind::True: return IntervalSet::single(Interval::closed(0.0, kTotal));
        case NodeKind::Atom:
            return satint_atomic(path, [&](const State& s) { return labeler(s, f.atom); }, kTotal);
        case NodeKind::Not: return satint_not(satintOf(path, *f.left, kTotal, labeler), kTotal);
        case NodeKind::And:
            return satint_and(satintOf(path, *f.left, kTotal, labeler), satintOf(path, *f.right, kTotal, labeler));
        case NodeKind::Until:
            return satint_until(satintOf(path, *f.left, kTotal, labeler), satintOf(path, *f.right, kTotal, labeler),
                                f.interval, kTotal);
        case NodeKind::Freq: {
            const auto s2 = satintOf(path, *f.right, kTotal, labeler);
            const auto s12 = satint_and(satintOf(path, *f.left, kTotal, labeler), s2);
            return satint_q(s12, s2, f.cmp, f.bound, f.interval, kTotal);
        }
        case NodeKind::Next: throw FragmentError("X is not supported on continuous-time paths by the statistical engine");
        case NodeKind::Prob: throw FragmentError("nested P is not supported by the statistical engine");
    }
    return {};
}

}  // namespace detail

/// SatInt of a bounded path formula along a timed path, over [0, kTotal].
template <typename State, typename Labeler>
IntervalSet satint(const BasicTimedPath<State>& path, const Formula& psi, double kTotal, Labeler labeler) {
    return detail::satintOf(path, psi, kTotal, labeler);
}

inline IntervalSet satint(const TimedPath& path, const Formula& psi, double kTotal,
                          const std::vector<LabelSet>& labels) {
    return satint(path, psi, kTotal, [&](StateId s, std::string_view a) { return hasLabel(labels[s.index], a); });
}

template <typename State, typename Labeler>
bool check_path_timed(const BasicTimedPath<State>& path, const Formula& psi, double kTotal, Labeler labeler) {
    return satint(path, psi, kTotal, std::move(labeler)).contains(0.0);
}

inline bool check_path_timed(const TimedPath& path, const Formula& psi, double kTotal,
                             const std::vector<LabelSet>& labels) {
    return satint(path, psi, kTotal, labels).contains(0.0);
}

// ---------------------------------------------------------------------------
// Discrete time: one boolean per position 0..n-1, with prefix sums for windows.

namespace detail {

using Bits = std::vector<std::uint8_t>;

inline std::vector<std::uint32_t> prefixCounts(const Bits& b) {
    std::vector<std::uint32_t> c(b.size() + 1, 0);
    for (std::size_t i = 0; i < b.size(); ++i) c[i + 1] = c[i] + b[i];
    return c;
}

template <typename State, typename Labeler>
Bits discreteSat(const BasicDiscretePath<State>& path, const Formula& f, Labeler& labeler) {
    const std::size_t n = path.states.size();
    switch (f.kind) {
        case NodeKind::True: return Bits(n, 1);
        case NodeKind::Atom: {
            Bits out(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = labeler(path.states[i], f.atom) ? 1 : 0;
            return out;
        }
        case NodeKind::Not: {
            auto out = discreteSat(path, *f.left, labeler);
            for (auto& b : out) b = b ? 0 : 1;
            return out;
        }
        case NodeKind::And: {
            auto out = discreteSat(path, *f.left, labeler);
            const auto r = discreteSat(path, *f.right, labeler);
            for (std::size_t i = 0; i < n; ++i) out[i] = out[i] & r[i];
            return out;
        }
        case NodeKind::Next: {
            const auto inner = discreteSat(path, *f.left, labeler);
            Bits out(n, 0);
            for (std::size_t i = 0; i + 1 < n; ++i) out[i] = inner[i + 1];
            return out;
        }
        case NodeKind::Until: {
            const auto iv = normalize_interval(f.interval, Timebase::Discrete);
            if (!iv.bounded()) throw FormulaError("statistical until needs a bounded interval");
            const auto lo = static_cast<std::size_t>(iv.lo), hi = static_cast<std::size_t>(iv.hi);
            const auto s1 = discreteSat(path, *f.left, labeler);
            const auto c2 = prefixCounts(discreteSat(path, *f.right, labeler));
            // firstFail[i]: first position >= i where psi1 fails (n if none).
            std::vector<std::size_t> firstFail(n + 1, n);
            for (std::size_t i = n; i-- > 0;) firstFail[i] = s1[i] ? firstFail[i + 1] : i;
            Bits out(n, 0);
            for (std::size_t t = 0; t < n; ++t) {
                // Witness i in [t+lo, t+hi] with psi1 on [t, i).
                const std::size_t from = t + lo;
                const std::size_t to = std::min({t + hi, firstFail[t], n - 1});
                if (from <= to && c2[to + 1] > c2[from]) out[t] = 1;
            }
            return out;
        }
        case NodeKind::Freq: {
            const auto iv = normalize_interval(f.interval, Timebase::Discrete);
            if (!iv.bounded()) throw FormulaError("statistical frequency operator needs a bounded interval");
            const auto lo = static_cast<std::size_t>(iv.lo), hi = static_cast<std::size_t>(iv.hi);
            const auto s2 = discreteSat(path, *f.right, labeler);
            auto s12 = discreteSat(path, *f.left, labeler);
            for (std::size_t i = 0; i < n; ++i) s12[i] &= s2[i];
            const auto c2 = prefixCounts(s2);
            const auto c12 = prefixCounts(s12);
            Bits out(n, 0);
            for (std::size_t t = 0; t < n; ++t) {
                const std::size_t from = std::min(t + lo, n);
                const std::size_t to = std::min(t + hi + 1, n);
                const auto i = from < to ? c2[to] - c2[from] : 0;
                const auto j = from < to ? c12[to] - c12[from] : 0;
                out[t] = (i == 0 || f.bound.countSatisfies(j, f.cmp, i)) ? 1 : 0;
            }
            return out;
        }
        case NodeKind::Prob: throw FragmentError("nested P is not supported by the statistical engine");
    }
    return {};
}

}  // namespace detail

/// Truth of a bounded path formula on a discrete path prefix of length >= total_bound + 1.
template <typename State, typename Labeler>
bool check_path_discrete(const BasicDiscretePath<State>& path, const Formula& psi, Labeler labeler) {
    if (path.states.empty()) throw ModelError("empty path");
    return detail::discreteSat(path, psi, labeler)[0] != 0;
}

inline bool check_path_discrete(const DiscretePath& path, const Formula& psi, const std::vector<LabelSet>& labels) {
    return check_path_discrete(path, psi, [&](StateId s, std::string_view a) { return hasLabel(labels[s.index], a); });
}

}  // namespace pftl
