#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pftl/formula.hpp"
#include "pftl/model.hpp"
#include "pftl/state_set.hpp"

namespace pftl {

/// How a state contributes to the frequency counts of <phi1 | phi2>.
enum class CountClass : std::uint8_t {
    Neither,   // outside Sat(phi2)
    OnlyCond,  // Sat(phi2) \ Sat(phi1): bumps i
    Both,      // Sat(phi1) ∩ Sat(phi2): bumps i and j
};

inline std::vector<CountClass> classifyStates(const SatSet& sat1, const SatSet& sat2) {
    std::vector<CountClass> out(sat2.size(), CountClass::Neither);
    for (std::size_t s = 0; s < out.size(); ++s) {
        if (sat2.contains(s)) out[s] = sat1.contains(s) ? CountClass::Both : CountClass::OnlyCond;
    }
    return out;
}

/// Probability vectors indexed by (j, i) for 0 <= j <= i <= maxCount, one entry per state.
/// Used for both the window counts v^h and the first-entry counts u^h; only one h-layer is
/// held at a time.
class CountTable {
public:
    CountTable() = default;
    CountTable(std::size_t numStates, std::size_t horizon, std::size_t maxCount)
        : numStates_(numStates),
          horizon_(horizon),
          maxCount_(maxCount),
          data_(pairIndex(0, maxCount + 1) * numStates, 0.0) {}

    std::size_t numStates() const noexcept { return numStates_; }
    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t maxCount() const noexcept { return maxCount_; }

    std::span<double> vec(std::size_t j, std::size_t i) {
        return {data_.data() + pairIndex(j, i) * numStates_, numStates_};
    }
    std::span<const double> vec(std::size_t j, std::size_t i) const {
        return {data_.data() + pairIndex(j, i) * numStates_, numStates_};
    }

    /// v[j][i][s]; zero outside the stored range.
    double at(std::size_t j, std::size_t i, std::size_t s) const {
        if (j > i || i > maxCount_) return 0.0;
        return data_[pairIndex(j, i) * numStates_ + s];
    }

    /// Sum over all (j, i) of a per-pair weight times the pair's vector.
    template <typename Weight>
    std::vector<double> weightedSum(Weight&& weight) const {
        std::vector<double> out(numStates_, 0.0);
        for (std::size_t i = 0; i <= maxCount_; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double w = weight(j, i);
                if (w == 0.0) continue;
                const auto v = vec(j, i);
                for (std::size_t s = 0; s < numStates_; ++s) out[s] += w * v[s];
            }
        }
        return out;
    }

    /// Sum of the pairs whose frequency j/i obeys the bound, with i = 0 always accepted.
    std::vector<double> acceptingSum(Comparator cmp, const Bound& q) const {
        return weightedSum([&](std::size_t j, std::size_t i) {
            return (i == 0 || q.countSatisfies(static_cast<std::int64_t>(j), cmp, static_cast<std::int64_t>(i))) ? 1.0
                                                                                                                   : 0.0;
        });
    }

    std::vector<double> totalMass() const {
        return weightedSum([](std::size_t, std::size_t) { return 1.0; });
    }

private:
    static std::size_t pairIndex(std::size_t j, std::size_t i) { return i * (i + 1) / 2 + j; }

    std::size_t numStates_ = 0;
    std::size_t horizon_ = 0;
    std::size_t maxCount_ = 0;
    std::vector<double> data_;
};

/// Base layer h = 0 of the window-count table.
inline CountTable initialWindowLayer(const std::vector<CountClass>& classes) {
    CountTable t(classes.size(), 0, 1);
    for (std::size_t s = 0; s < classes.size(); ++s) {
        switch (classes[s]) {
            case CountClass::Neither: t.vec(0, 0)[s] = 1.0; break;
            case CountClass::OnlyCond: t.vec(0, 1)[s] = 1.0; break;
            case CountClass::Both: t.vec(1, 1)[s] = 1.0; break;
        }
    }
    return t;
}

/// One step of the count recurrence: layer h from layer h-1. States with active[s] == false
/// get zero vectors (used for the first-entry table, where only non-BSCC states move).
inline CountTable stepCountTable(const Dtmc& m, const CountTable& prev, const std::vector<CountClass>& classes,
                                 const std::vector<bool>* active = nullptr) {
    const std::size_t n = m.numStates;
    CountTable next(n, prev.horizon() + 1, prev.maxCount() + 1);
    for (std::size_t s = 0; s < n; ++s) {
        if (active && !(*active)[s]) continue;
        const auto& row = m.rows[s];
        const std::size_t di = classes[s] == CountClass::Neither ? 0 : 1;
        const std::size_t dj = classes[s] == CountClass::Both ? 1 : 0;
        for (std::size_t i = 0; i <= prev.maxCount(); ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const auto v = prev.vec(j, i);
                double acc = 0.0;
                for (const auto& t : row) acc += t.value * v[t.target.index];
                if (acc != 0.0) next.vec(j + dj, i + di)[s] = acc;
            }
        }
    }
    return next;
}

/// v^h: probability that the h-step path from each state visits Sat(phi2) i times and
/// Sat(phi1) ∩ Sat(phi2) j times, counting positions 0..h.
inline CountTable compute_vtable(const Dtmc& m, const SatSet& sat1, const SatSet& sat2, std::size_t h) {
    const auto classes = classifyStates(sat1, sat2);
    auto table = initialWindowLayer(classes);
    for (std::size_t step = 0; step < h; ++step) table = stepCountTable(m, table, classes);
    return table;
}

// ---------------------------------------------------------------------------

/// Exact binomial tail: probability that the fraction of Exp-distributed sojourns spent in
/// j out of i counted states obeys the bound. q = 0 and q = 1 reduce to the sure outcomes.
inline double binom_bound(Comparator cmp, double q, std::size_t j, std::size_t i) {
    if (i == 0) return 1.0;
    if (j == i) return compare(1.0, cmp, q) ? 1.0 : 0.0;
    if (j == 0) return compare(0.0, cmp, q) ? 1.0 : 0.0;
    const std::size_t n = i - 1;
    auto pmf = [&](std::size_t l) {
        if (q <= 0.0) return l == 0 ? 1.0 : 0.0;
        if (q >= 1.0) return l == n ? 1.0 : 0.0;
        const double dn = static_cast<double>(n), dl = static_cast<double>(l);
        return std::exp(std::lgamma(dn + 1.0) - std::lgamma(dl + 1.0) - std::lgamma(dn - dl + 1.0) + dl * std::log(q) +
                        (dn - dl) * std::log1p(-q));
    };
    double sum = 0.0;
    if (isUpperBound(cmp)) {
        for (std::size_t l = j; l <= n; ++l) sum += pmf(l);
    } else {
        for (std::size_t l = 0; l < j; ++l) sum += pmf(l);
    }
    return std::min(sum, 1.0);
}

/// binom_bound for every 0 <= j <= i <= maxCount, filled lazily row by row.
class BinomialBoundTable {
public:
    BinomialBoundTable(Comparator cmp, const Bound& q) : cmp_(cmp), q_(q.value()), exactQ_(q) {}

    double operator()(std::size_t j, std::size_t i) {
        while (rows_.size() <= i) addRow();
        return rows_[i][j];
    }

private:
    void addRow() {
        const std::size_t i = rows_.size();
        std::vector<double> row(i + 1, 0.0);
        if (i == 0) {
            row[0] = 1.0;
        } else {
            const std::size_t n = i - 1;
            std::vector<double> pmf(n + 1, 0.0);
            if (q_ <= 0.0) {
                pmf[0] = 1.0;
            } else if (q_ >= 1.0) {
                pmf[n] = 1.0;
            } else {
                const double dn = static_cast<double>(n);
                for (std::size_t l = 0; l <= n; ++l) {
                    const double dl = static_cast<double>(l);
                    pmf[l] = std::exp(std::lgamma(dn + 1.0) - std::lgamma(dl + 1.0) - std::lgamma(dn - dl + 1.0) +
                                      dl * std::log(q_) + (dn - dl) * std::log1p(-q_));
                }
            }
            // below[j] = sum_{l<j} pmf[l]
            std::vector<double> below(n + 2, 0.0);
            for (std::size_t l = 0; l <= n; ++l) below[l + 1] = below[l] + pmf[l];
            double total = 0.0;
            for (double x : pmf) total += x;
            for (std::size_t j = 0; j <= i; ++j) {
                if (j == i) {
                    row[j] = exactQ_.countSatisfies(1, cmp_, 1) ? 1.0 : 0.0;
                } else if (j == 0) {
                    row[j] = exactQ_.countSatisfies(0, cmp_, 1) ? 1.0 : 0.0;
                } else if (isUpperBound(cmp_)) {
                    row[j] = std::min(1.0, total - below[j]);
                } else {
                    row[j] = std::min(1.0, below[j]);
                }
            }
        }
        rows_.push_back(std::move(row));
    }

    Comparator cmp_;
    double q_;
    Bound exactQ_;
    std::vector<std::vector<double>> rows_;
};

}  // namespace pftl
