#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <system_error>

#include "pftl/errors.hpp"

namespace pftl {

enum class Comparator { Less, LessEq, Greater, GreaterEq };

inline constexpr bool isStrict(Comparator c) { return c == Comparator::Less || c == Comparator::Greater; }
inline constexpr bool isUpperBound(Comparator c) { return c == Comparator::Less || c == Comparator::LessEq; }

template <typename T>
constexpr bool compare(const T& lhs, Comparator c, const T& rhs) {
    switch (c) {
        case Comparator::Less: return lhs < rhs;
        case Comparator::LessEq: return lhs <= rhs;
        case Comparator::Greater: return lhs > rhs;
        case Comparator::GreaterEq: return lhs >= rhs;
    }
    return false;
}

inline constexpr std::string_view toString(Comparator c) {
    switch (c) {
        case Comparator::Less: return "<";
        case Comparator::LessEq: return "<=";
        case Comparator::Greater: return ">";
        case Comparator::GreaterEq: return ">=";
    }
    return "?";
}

/// A probability or frequency bound in [0,1], kept both as a double and as the exact decimal
/// fraction numerator/denominator it was written as (denominator a power of ten).
class Bound {
public:
    Bound() = default;

    /// Parses a plain decimal literal such as "0.8", "1" or ".25".
    static Bound fromDecimal(std::string_view text) {
        std::int64_t num = 0;
        std::int64_t den = 1;
        bool seenDot = false;
        bool seenDigit = false;
        for (char ch : text) {
            if (ch == '.') {
                if (seenDot) throw FormulaError("malformed decimal '" + std::string(text) + "'");
                seenDot = true;
                continue;
            }
            if (ch < '0' || ch > '9') throw FormulaError("malformed decimal '" + std::string(text) + "'");
            seenDigit = true;
            if (num > (INT64_MAX - 9) / 10 || (seenDot && den > INT64_MAX / 10)) {
                throw FormulaError("decimal '" + std::string(text) + "' has too many digits");
            }
            num = num * 10 + (ch - '0');
            if (seenDot) den *= 10;
        }
        if (!seenDigit) throw FormulaError("malformed decimal '" + std::string(text) + "'");
        Bound b;
        b.num_ = num;
        b.den_ = den;
        b.reduce();
        return b;
    }

    /// Uses the shortest decimal representation that round-trips the double.
    static Bound fromDouble(double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw FormulaError("bound " + std::to_string(v) + " outside [0,1]");
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
        return fromDecimal(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
    }

    double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::int64_t numerator() const noexcept { return num_; }
    std::int64_t denominator() const noexcept { return den_; }

    /// Exact test of  count ⋈ total * bound  over the integers.
    bool countSatisfies(std::int64_t count, Comparator c, std::int64_t total) const {
        const __int128 lhs = static_cast<__int128>(count) * den_;
        const __int128 rhs = static_cast<__int128>(total) * num_;
        return compare(lhs, c, rhs);
    }

    std::string toString() const {
        std::string whole = std::to_string(num_ / den_);
        if (den_ == 1) return whole;
        std::string frac = std::to_string(num_ % den_);
        std::size_t digits = 0;
        for (auto d = den_; d > 1; d /= 10) ++digits;
        frac.insert(0, digits - frac.size(), '0');
        while (!frac.empty() && frac.back() == '0') frac.pop_back();
        return whole + "." + frac;
    }

    friend bool operator==(const Bound& a, const Bound& b) { return a.num_ == b.num_ && a.den_ == b.den_; }

private:
    void reduce() {
        while (den_ > 1 && num_ % 10 == 0) {
            num_ /= 10;
            den_ /= 10;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct TimeInterval {
    double lo = 0.0;
    double hi = kInfinity;
    bool loClosed = true;
    bool hiClosed = false;

    static TimeInterval closed(double lo, double hi) { return {lo, hi, true, std::isfinite(hi)}; }
    static TimeInterval unbounded(double lo = 0.0) { return {lo, kInfinity, true, false}; }

    bool bounded() const noexcept { return std::isfinite(hi); }
    bool contains(double t) const noexcept {
        const bool aboveLo = loClosed ? t >= lo : t > lo;
        const bool belowHi = hiClosed ? t <= hi : t < hi;
        return aboveLo && belowHi;
    }

    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

enum class Timebase { Discrete, Continuous };

/// Discrete intervals become [k,k'] or [k,inf); continuous bounded intervals become
/// [inf I, sup I]. A point interval must contain its point.
inline TimeInterval normalize_interval(const TimeInterval& iv, Timebase tb) {
    if (!(iv.lo >= 0.0) || !std::isfinite(iv.lo)) throw FormulaError("interval lower bound must be finite and >= 0");
    if (iv.hi < iv.lo) throw FormulaError("interval upper bound below lower bound");
    if (tb == Timebase::Discrete) {
        const double lo = iv.loClosed ? std::ceil(iv.lo) : std::floor(iv.lo) + 1.0;
        if (!iv.bounded()) return TimeInterval::unbounded(lo);
        const double hi = iv.hiClosed ? std::floor(iv.hi) : std::ceil(iv.hi) - 1.0;
        if (hi < lo) throw FormulaError("interval contains no integer time point");
        return TimeInterval::closed(lo, hi);
    }
    if (!iv.bounded()) return TimeInterval::unbounded(iv.lo);
    if (iv.lo == iv.hi && !(iv.loClosed && iv.hiClosed)) throw FormulaError("interval is empty");
    return TimeInterval::closed(iv.lo, iv.hi);
}

// ---------------------------------------------------------------------------

enum class NodeKind { True, Atom, Not, And, Prob, Next, Until, Freq };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// One node of the formula tree. Which fields are meaningful depends on `kind`:
/// Atom uses `atom`; Not/Next/Prob use `left`; And/Until use both children; Prob uses
/// `cmp`/`bound`; Until and Freq use `interval`; Freq stores the conditional pair as
/// left = numerator formula, right = condition.
struct Formula {
    NodeKind kind = NodeKind::True;
    std::string atom;
    Comparator cmp = Comparator::GreaterEq;
    Bound bound;
    TimeInterval interval;
    FormulaPtr left;
    FormulaPtr right;
};

inline bool operator==(const Formula& a, const Formula& b);

inline bool sameTree(const FormulaPtr& a, const FormulaPtr& b) {
    if (!a || !b) return !a && !b;
    return *a == *b;
}

inline bool operator==(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::True: return true;
        case NodeKind::Atom: return a.atom == b.atom;
        case NodeKind::Not:
        case NodeKind::Next: return sameTree(a.left, b.left);
        case NodeKind::And: return sameTree(a.left, b.left) && sameTree(a.right, b.right);
        case NodeKind::Prob: return a.cmp == b.cmp && a.bound == b.bound && sameTree(a.left, b.left);
        case NodeKind::Until: return a.interval == b.interval && sameTree(a.left, b.left) && sameTree(a.right, b.right);
        case NodeKind::Freq:
            return a.cmp == b.cmp && a.bound == b.bound && a.interval == b.interval && sameTree(a.left, b.left) &&
                   sameTree(a.right, b.right);
    }
    return false;
}

namespace make {

inline FormulaPtr top() { return std::make_shared<const Formula>(Formula{.kind = NodeKind::True}); }
inline FormulaPtr atom(std::string name) {
    return std::make_shared<const Formula>(Formula{.kind = NodeKind::Atom, .atom = std::move(name)});
}
inline FormulaPtr negate(FormulaPtr f) {
    return std::make_shared<const Formula>(Formula{.kind = NodeKind::Not, .left = std::move(f)});
}
inline FormulaPtr conj(FormulaPtr a, FormulaPtr b) {
    return std::make_shared<const Formula>(Formula{.kind = NodeKind::And, .left = std::move(a), .right = std::move(b)});
}
inline FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return negate(conj(negate(std::move(a)), negate(std::move(b)))); }
inline FormulaPtr implies(FormulaPtr a, FormulaPtr b) { return disj(negate(std::move(a)), std::move(b)); }
inline FormulaPtr prob(Comparator c, Bound p, FormulaPtr body) {
    return std::make_shared<const Formula>(Formula{.kind = NodeKind::Prob, .cmp = c, .bound = p, .left = std::move(body)});
}
inline FormulaPtr next(FormulaPtr f) {
    return std::make_shared<const Formula>(Formula{.kind = NodeKind::Next, .left = std::move(f)});
}
inline FormulaPtr until(FormulaPtr a, TimeInterval iv, FormulaPtr b) {
    return std::make_shared<const Formula>(
        Formula{.kind = NodeKind::Until, .interval = iv, .left = std::move(a), .right = std::move(b)});
}
inline FormulaPtr eventually(TimeInterval iv, FormulaPtr f) { return until(top(), iv, std::move(f)); }
inline FormulaPtr globally(TimeInterval iv, FormulaPtr f) { return negate(eventually(iv, negate(std::move(f)))); }
inline FormulaPtr freq(Comparator c, Bound q, TimeInterval iv, FormulaPtr body, FormulaPtr condition = top()) {
    return std::make_shared<const Formula>(Formula{.kind = NodeKind::Freq,
                                                   .cmp = c,
                                                   .bound = q,
                                                   .interval = iv,
                                                   .left = std::move(body),
                                                   .right = std::move(condition)});
}

}  // namespace make

/// True when no path operator occurs outside a P operator.
inline bool isStateFormula(const Formula& f) {
    switch (f.kind) {
        case NodeKind::True:
        case NodeKind::Atom:
        case NodeKind::Prob: return true;
        case NodeKind::Not: return isStateFormula(*f.left);
        case NodeKind::And: return isStateFormula(*f.left) && isStateFormula(*f.right);
        default: return false;
    }
}

// ---------------------------------------------------------------------------
// Printing in the concrete syntax accepted by parse_formula.

inline std::string formatNumber(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, static_cast<std::size_t>(res.ptr - buf)};
}

inline std::string toString(const TimeInterval& iv) {
    std::string out = iv.loClosed ? "[" : "(";
    out += formatNumber(iv.lo) + "," + formatNumber(iv.hi);
    out += (iv.hiClosed && iv.bounded()) ? "]" : ")";
    return out;
}

inline std::string toString(const Formula& f) {
    auto wrap = [](const Formula& g) {
        switch (g.kind) {
            case NodeKind::True:
            case NodeKind::Atom:
            case NodeKind::Prob:
            case NodeKind::Freq:
            case NodeKind::And:
            case NodeKind::Until: return toString(g);
            default: return "(" + toString(g) + ")";
        }
    };
    switch (f.kind) {
        case NodeKind::True: return "true";
        case NodeKind::Atom: return f.atom;
        case NodeKind::Not: return "!" + wrap(*f.left);
        case NodeKind::Next: return "X " + wrap(*f.left);
        case NodeKind::And: return "(" + toString(*f.left) + " & " + toString(*f.right) + ")";
        case NodeKind::Until:
            return "(" + wrap(*f.left) + " U" + toString(f.interval) + " " + wrap(*f.right) + ")";
        case NodeKind::Prob:
            return "P" + std::string(toString(f.cmp)) + f.bound.toString() + " [ " + toString(*f.left) + " ]";
        case NodeKind::Freq:
            return "Q" + std::string(toString(f.cmp)) + f.bound.toString() + toString(f.interval) + " (" +
                   wrap(*f.left) + " | " + toString(*f.right) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Fragments.

enum class FragmentTag { CtlLike, BoundedLtlLike, Neither };

inline std::string_view toString(FragmentTag t) {
    switch (t) {
        case FragmentTag::CtlLike: return "CTL_LIKE";
        case FragmentTag::BoundedLtlLike: return "BOUNDED_LTL_LIKE";
        case FragmentTag::Neither: return "NEITHER";
    }
    return "?";
}

namespace detail {

bool isCtlState(const Formula& f);

/// Path bodies of P accepted by the numerical engine: X phi, phi U phi, Q<phi|phi>, and
/// negations of those (Prob(!psi) = 1 - Prob(psi)), with state-formula operands.
inline bool isCtlPath(const Formula& f) {
    switch (f.kind) {
        case NodeKind::Next: return isCtlState(*f.left);
        case NodeKind::Until:
        case NodeKind::Freq: return isCtlState(*f.left) && isCtlState(*f.right);
        case NodeKind::Not: return isCtlPath(*f.left);
        default: return false;
    }
}

inline bool isCtlState(const Formula& f) {
    switch (f.kind) {
        case NodeKind::True:
        case NodeKind::Atom: return true;
        case NodeKind::Not: return isCtlState(*f.left);
        case NodeKind::And: return isCtlState(*f.left) && isCtlState(*f.right);
        case NodeKind::Prob: return isCtlPath(*f.left);
        default: return false;
    }
}

inline bool isBoundedLtlPath(const Formula& f) {
    switch (f.kind) {
        case NodeKind::True:
        case NodeKind::Atom: return true;
        case NodeKind::Not: return isBoundedLtlPath(*f.left);
        case NodeKind::And: return isBoundedLtlPath(*f.left) && isBoundedLtlPath(*f.right);
        case NodeKind::Until:
        case NodeKind::Freq: return f.interval.bounded() && isBoundedLtlPath(*f.left) && isBoundedLtlPath(*f.right);
        default: return false;
    }
}

}  // namespace detail

inline bool in_ctl_fragment(const Formula& f) { return detail::isCtlState(f); }

/// A single outermost P with 0 < p < 1 over a bounded path formula without X or nested P.
inline bool in_bounded_ltl_fragment(const Formula& f) {
    if (f.kind != NodeKind::Prob) return false;
    const double p = f.bound.value();
    return p > 0.0 && p < 1.0 && detail::isBoundedLtlPath(*f.left);
}

/// The two fragments overlap (e.g. P>=0.5 [ a U[0,2] b ]); the overlap is tagged CTL_LIKE.
inline FragmentTag classify_fragment(const Formula& f) {
    if (in_ctl_fragment(f)) return FragmentTag::CtlLike;
    if (in_bounded_ltl_fragment(f)) return FragmentTag::BoundedLtlLike;
    return FragmentTag::Neither;
}

/// Horizon beyond which the truth of a bounded path formula no longer depends on the path.
inline double total_bound(const Formula& f, Timebase tb = Timebase::Continuous) {
    auto sup = [&](const TimeInterval& iv) {
        if (!iv.bounded()) throw FormulaError("unbounded interval " + toString(iv) + " has no finite horizon");
        return tb == Timebase::Discrete ? normalize_interval(iv, tb).hi : iv.hi;
    };
    switch (f.kind) {
        case NodeKind::True:
        case NodeKind::Atom: return 0.0;
        case NodeKind::Not: return total_bound(*f.left, tb);
        case NodeKind::And: return std::max(total_bound(*f.left, tb), total_bound(*f.right, tb));
        case NodeKind::Next: return 1.0 + total_bound(*f.left, tb);
        case NodeKind::Until:
        case NodeKind::Freq: return sup(f.interval) + std::max(total_bound(*f.left, tb), total_bound(*f.right, tb));
        case NodeKind::Prob: throw FormulaError("nested P operator has no path horizon");
    }
    return 0.0;
}

}  // namespace pftl
