#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pftl/count_table.hpp"
#include "pftl/errors.hpp"
#include "pftl/formula.hpp"
#include "pftl/graph.hpp"
#include "pftl/linalg.hpp"
#include "pftl/model.hpp"
#include "pftl/poisson.hpp"
#include "pftl/state_set.hpp"

namespace pftl {

struct NumericalOptions {
    /// Bound on every truncation: Poisson tails and the residual non-BSCC mass.
    double epsilon = 1e-10;
    std::size_t maxIterations = 100000;
    /// Uniformization rate for CTMCs; the maximum exit rate when unset.
    std::optional<double> uniformizationRate;
};

/// Probabilities closer than this to a threshold are treated as equal to it.
inline constexpr double kComparisonTolerance = 1e-9;

/// x ⋈ threshold, with |x - threshold| <= tolerance counted as equality.
inline bool compareWithTolerance(double x, Comparator c, double threshold) {
    if (std::abs(x - threshold) <= kComparisonTolerance) return !isStrict(c);
    return compare(x, c, threshold);
}

inline void clampProbabilities(std::vector<double>& v) {
    for (double& x : v) x = std::clamp(x, 0.0, 1.0);
}

inline std::vector<double> indicator(const SatSet& s) {
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s.contains(i) ? 1.0 : 0.0;
    return v;
}

// ---------------------------------------------------------------------------
// Next and until (standard PCTL / CSL procedures).

inline std::vector<double> prob_next(const Dtmc& m, const SatSet& sat) {
    std::vector<double> out(m.numStates);
    multiply(m, indicator(sat), out);
    clampProbabilities(out);
    return out;
}

/// Next over the embedded jump chain; an absorbing state never leaves, so X fails there.
inline std::vector<double> prob_next(const Ctmc& m, const SatSet& sat) {
    std::vector<double> out(m.numStates, 0.0);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (m.exitRates[s] <= 0.0) continue;
        double acc = 0.0;
        for (const auto& t : m.rows[s]) {
            if (sat.contains(t.target)) acc += t.value;
        }
        out[s] = acc / m.exitRates[s];
    }
    clampProbabilities(out);
    return out;
}

/// Probability of phi1 U phi2 with no time bound, via graph precomputation and a linear solve.
inline std::vector<double> unboundedUntil(const Dtmc& m, const SatSet& sat1, const SatSet& sat2) {
    const std::size_t n = m.numStates;
    std::vector<std::vector<std::uint32_t>> pred(n);
    for (std::size_t s = 0; s < n; ++s) {
        for (const auto& t : m.rows[s]) {
            if (t.value > 0.0) pred[t.target.index].push_back(static_cast<std::uint32_t>(s));
        }
    }
    std::vector<bool> canReach(n, false);
    std::vector<std::uint32_t> work;
    for (std::size_t s = 0; s < n; ++s) {
        if (sat2.contains(s)) {
            canReach[s] = true;
            work.push_back(static_cast<std::uint32_t>(s));
        }
    }
    while (!work.empty()) {
        const auto t = work.back();
        work.pop_back();
        for (auto s : pred[t]) {
            if (!canReach[s] && sat1.contains(s)) {
                canReach[s] = true;
                work.push_back(s);
            }
        }
    }

    std::vector<double> out(n, 0.0);
    std::vector<std::size_t> maybe;
    std::vector<std::ptrdiff_t> local(n, -1);
    for (std::size_t s = 0; s < n; ++s) {
        if (sat2.contains(s)) out[s] = 1.0;
        else if (canReach[s]) {
            local[s] = static_cast<std::ptrdiff_t>(maybe.size());
            maybe.push_back(s);
        }
    }
    if (maybe.empty()) return out;
    const auto k = static_cast<Eigen::Index>(maybe.size());
    linalg::Matrix a = linalg::Matrix::Identity(k, k);
    linalg::Vector b = linalg::Vector::Zero(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        for (const auto& t : m.rows[maybe[static_cast<std::size_t>(r)]]) {
            if (sat2.contains(t.target)) b(r) += t.value;
            else if (local[t.target.index] >= 0) a(r, local[t.target.index]) -= t.value;
        }
    }
    const auto x = linalg::solve(a, b, "unbounded until");
    for (std::size_t r = 0; r < maybe.size(); ++r) out[maybe[r]] = x[r];
    return out;
}

/// phi1 U^I phi2 on a DTMC. The interval is normalized to [k,k'] or [k,inf).
inline std::vector<double> prob_until(const Dtmc& m, const TimeInterval& interval, const SatSet& sat1,
                                      const SatSet& sat2) {
    const auto iv = normalize_interval(interval, Timebase::Discrete);
    const auto k = static_cast<std::size_t>(iv.lo);
    std::vector<double> y;
    if (iv.bounded()) {
        const auto window = static_cast<std::size_t>(iv.hi) - k;
        y = indicator(sat2);
        std::vector<double> next(m.numStates);
        for (std::size_t step = 0; step < window; ++step) {
            multiply(m, y, next);
            for (std::size_t s = 0; s < m.numStates; ++s) {
                y[s] = sat2.contains(s) ? 1.0 : (sat1.contains(s) ? next[s] : 0.0);
            }
        }
    } else {
        y = unboundedUntil(m, sat1, sat2);
    }
    std::vector<double> next(m.numStates);
    for (std::size_t step = 0; step < k; ++step) {
        multiply(m, y, next);
        for (std::size_t s = 0; s < m.numStates; ++s) y[s] = sat1.contains(s) ? next[s] : 0.0;
    }
    clampProbabilities(y);
    return y;
}

/// phi1 U^I phi2 on a CTMC by uniformization. The interval is treated as [inf I, sup I].
inline std::vector<double> prob_until(const Ctmc& c, const TimeInterval& interval, const SatSet& sat1,
                                      const SatSet& sat2, const NumericalOptions& opts = {}) {
    const auto iv = normalize_interval(interval, Timebase::Continuous);
    const auto u = uniformize(c, opts.uniformizationRate);
    const std::size_t n = c.numStates;
    std::vector<double> y;
    if (iv.bounded()) {
        std::vector<bool> stop(n);
        for (std::size_t s = 0; s < n; ++s) stop[s] = !sat1.contains(s) || sat2.contains(s);
        const auto absorbing = makeAbsorbing(u.dtmc, stop);
        y = transientOnUniformized(absorbing, u.rate, iv.hi - iv.lo, indicator(sat2), opts.epsilon);
    } else {
        y = unboundedUntil(u.dtmc, sat1, sat2);
    }
    if (iv.lo > 0.0) {
        for (std::size_t s = 0; s < n; ++s) {
            if (!sat1.contains(s)) y[s] = 0.0;
        }
        std::vector<bool> stop(n);
        for (std::size_t s = 0; s < n; ++s) stop[s] = !sat1.contains(s);
        const auto absorbing = makeAbsorbing(u.dtmc, stop);
        y = transientOnUniformized(absorbing, u.rate, iv.lo, y, opts.epsilon);
    }
    clampProbabilities(y);
    return y;
}

// ---------------------------------------------------------------------------
// Frequency operator, bounded window.

/// P^k · sum over accepting (j,i) of v^{k'-k}_{j,i}.
inline std::vector<double> prob_q_bounded_dtmc(const Dtmc& m, Comparator cmp, const Bound& q,
                                               const TimeInterval& interval, const SatSet& sat1, const SatSet& sat2) {
    const auto iv = normalize_interval(interval, Timebase::Discrete);
    if (!iv.bounded()) throw FormulaError("bounded frequency check needs a bounded interval");
    const auto k = static_cast<std::size_t>(iv.lo);
    const auto window = static_cast<std::size_t>(iv.hi) - k;
    const auto table = compute_vtable(m, sat1, sat2, window);
    auto x = applyPower(m, table.acceptingSum(cmp, q), k);
    clampProbabilities(x);
    return x;
}

/// Pi_k · sum_h rho(h; lambda (k'-k)) sum_{j,i} v^h_{j,i} B(j,i) on the uniformized chain.
inline std::vector<double> prob_q_bounded_ctmc(const Ctmc& c, Comparator cmp, const Bound& q,
                                               const TimeInterval& interval, const SatSet& sat1, const SatSet& sat2,
                                               const NumericalOptions& opts = {}) {
    const auto iv = normalize_interval(interval, Timebase::Continuous);
    if (!iv.bounded()) throw FormulaError("bounded frequency check needs a bounded interval");
    const auto u = uniformize(c, opts.uniformizationRate);
    const auto classes = classifyStates(sat1, sat2);
    BinomialBoundTable bounds(cmp, q);
    auto weightB = [&](std::size_t j, std::size_t i) { return bounds(j, i); };

    auto layer = initialWindowLayer(classes);
    std::vector<double> x;
    if (iv.lo == iv.hi) {
        x = layer.weightedSum(weightB);
    } else {
        const auto pw = poisson_truncate(u.rate * (iv.hi - iv.lo), opts.epsilon);
        x.assign(c.numStates, 0.0);
        for (std::size_t h = 0;; ++h) {
            if (h >= pw.left) {
                const double w = pw.weight(h);
                const auto contribution = layer.weightedSum(weightB);
                for (std::size_t s = 0; s < x.size(); ++s) x[s] += w * contribution[s];
            }
            if (h == pw.right) break;
            layer = stepCountTable(u.dtmc, layer, classes);
        }
    }
    x = transientOnUniformized(u.dtmc, u.rate, iv.lo, x, opts.epsilon);
    clampProbabilities(x);
    return x;
}

// ---------------------------------------------------------------------------
// Frequency operator, unbounded window.

/// Stationary distribution of the chain restricted to the BSCC `states` (in that order).
inline std::vector<double> limit_distribution(const Dtmc& m, const std::vector<StateId>& states) {
    const auto k = static_cast<Eigen::Index>(states.size());
    if (k == 0) return {};
    std::unordered_map<std::uint32_t, Eigen::Index> local;
    for (Eigen::Index r = 0; r < k; ++r) local.emplace(states[static_cast<std::size_t>(r)].index, r);
    // (P_B - I)^T pi = 0 with the last equation replaced by sum(pi) = 1.
    linalg::Matrix a = linalg::Matrix::Zero(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
        a(r, r) -= 1.0;
        for (const auto& t : m.rows[states[static_cast<std::size_t>(r)].index]) {
            const auto it = local.find(t.target.index);
            if (it != local.end()) a(it->second, r) += t.value;
        }
    }
    a.row(k - 1).setOnes();
    linalg::Vector b = linalg::Vector::Zero(k);
    b(k - 1) = 1.0;
    auto pi = linalg::solve(a, b, "limit distribution");
    for (double& x : pi) x = std::max(x, 0.0);
    return pi;
}

/// BSCC structure with limit distributions and acceptance flags for <phi1 | phi2> ⋈ q.
struct BsccAnalysis {
    BsccDecomposition partition;
    std::vector<std::vector<double>> limits;  // per BSCC, aligned with partition.bsccs[i]
    std::vector<bool> containsCondition;      // B_i ∩ Sat(phi2) != ∅
    std::vector<bool> accepting;              // r_{B_i} = 1
    std::vector<double> reachA;               // r_A, aligned with partition.nonBscc
};

/// Long-run frequency of Sat(phi1) among Sat(phi2) inside one BSCC.
inline double bsccFrequency(const std::vector<StateId>& states, const std::vector<double>& pi, const SatSet& sat1,
                            const SatSet& sat2) {
    double both = 0.0, cond = 0.0;
    for (std::size_t r = 0; r < states.size(); ++r) {
        if (!sat2.contains(states[r])) continue;
        cond += pi[r];
        if (sat1.contains(states[r])) both += pi[r];
    }
    return cond > 0.0 ? both / cond : 0.0;
}

/// Solves (P_A - I) r_A = -sum_i P_{A B_i} r_{B_i}.
inline std::vector<double> reach_solve(const Dtmc& m, const BsccDecomposition& partition,
                                       const std::vector<bool>& acceptingBscc) {
    const auto& a = partition.nonBscc;
    const auto k = static_cast<Eigen::Index>(a.size());
    if (k == 0) return {};
    std::vector<std::ptrdiff_t> local(m.numStates, -1);
    for (Eigen::Index r = 0; r < k; ++r) local[a[static_cast<std::size_t>(r)].index] = r;
    std::vector<double> rB(m.numStates, 0.0);
    for (std::size_t i = 0; i < partition.bsccs.size(); ++i) {
        if (!acceptingBscc[i]) continue;
        for (auto s : partition.bsccs[i]) rB[s.index] = 1.0;
    }
    linalg::Matrix mat = -linalg::Matrix::Identity(k, k);
    linalg::Vector rhs = linalg::Vector::Zero(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        for (const auto& t : m.rows[a[static_cast<std::size_t>(r)].index]) {
            if (local[t.target.index] >= 0) mat(r, local[t.target.index]) += t.value;
            else rhs(r) -= t.value * rB[t.target.index];
        }
    }
    auto x = linalg::solve(mat, rhs, "BSCC reachability");
    for (double& v : x) v = std::clamp(v, 0.0, 1.0);
    return x;
}

inline BsccAnalysis analyzeBsccs(const Dtmc& m, Comparator cmp, const Bound& q, const SatSet& sat1,
                                 const SatSet& sat2) {
    BsccAnalysis out;
    out.partition = bscc_decompose(m);
    for (const auto& b : out.partition.bsccs) {
        auto pi = limit_distribution(m, b);
        bool hasCond = false;
        for (auto s : b) hasCond = hasCond || sat2.contains(s);
        const bool accept = hasCond && compareWithTolerance(bsccFrequency(b, pi, sat1, sat2), cmp, q.value());
        out.limits.push_back(std::move(pi));
        out.containsCondition.push_back(hasCond);
        out.accepting.push_back(accept);
    }
    out.reachA = reach_solve(m, out.partition, out.accepting);
    return out;
}

/// Stacked vector [r_A; r_B1; ...; r_Bn] in state order.
inline std::vector<double> stackedReach(const BsccAnalysis& a, std::size_t n) {
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 0; i < a.partition.nonBscc.size(); ++i) r[a.partition.nonBscc[i].index] = a.reachA[i];
    for (std::size_t b = 0; b < a.partition.bsccs.size(); ++b) {
        if (!a.accepting[b]) continue;
        for (auto s : a.partition.bsccs[b]) r[s.index] = 1.0;
    }
    return r;
}

/// Membership masks for the first-entry table: A (non-BSCC) and the target T, the union of
/// BSCCs without any Sat(phi2) state.
struct FirstEntrySets {
    std::vector<bool> transient;
    std::vector<bool> target;
};

inline FirstEntrySets firstEntrySets(const BsccAnalysis& a, std::size_t n) {
    FirstEntrySets out{std::vector<bool>(n, false), std::vector<bool>(n, false)};
    for (auto s : a.partition.nonBscc) out.transient[s.index] = true;
    for (std::size_t b = 0; b < a.partition.bsccs.size(); ++b) {
        if (a.containsCondition[b]) continue;
        for (auto s : a.partition.bsccs[b]) out.target[s.index] = true;
    }
    return out;
}

/// u^h for a given h: probability of first entering the condition-free BSCCs at step h having
/// counted i condition states and j numerator states on the way.
inline CountTable compute_utable(const Dtmc& m, const SatSet& sat1, const SatSet& sat2, const BsccDecomposition& partition,
                                 std::size_t h) {
    std::vector<bool> transient(m.numStates, false), target(m.numStates, false);
    for (auto s : partition.nonBscc) transient[s.index] = true;
    for (const auto& b : partition.bsccs) {
        const bool free = std::none_of(b.begin(), b.end(), [&](StateId s) { return sat2.contains(s); });
        if (free) {
            for (auto s : b) target[s.index] = true;
        }
    }
    const auto classes = classifyStates(sat1, sat2);
    CountTable layer(m.numStates, 0, 0);
    for (std::size_t s = 0; s < m.numStates; ++s) layer.vec(0, 0)[s] = target[s] ? 1.0 : 0.0;
    for (std::size_t step = 0; step < h; ++step) layer = stepCountTable(m, layer, classes, &transient);
    return layer;
}

namespace detail {

/// r + sum_h sum_{j,i} weight(j,i) u^h_{j,i}, stopping once the mass left in A is <= epsilon.
template <typename Weight>
std::vector<double> unboundedFrequencyCore(const Dtmc& m, const BsccAnalysis& analysis, const SatSet& sat1,
                                           const SatSet& sat2, Weight&& weight, const NumericalOptions& opts) {
    const std::size_t n = m.numStates;
    const auto sets = firstEntrySets(analysis, n);
    const auto classes = classifyStates(sat1, sat2);
    auto x = stackedReach(analysis, n);

    CountTable layer(n, 0, 0);
    for (std::size_t s = 0; s < n; ++s) layer.vec(0, 0)[s] = sets.target[s] ? 1.0 : 0.0;

    // Mass of paths that are still inside A after h steps.
    std::vector<double> residual(n, 0.0), next(n);
    for (std::size_t s = 0; s < n; ++s) residual[s] = sets.transient[s] ? 1.0 : 0.0;

    for (std::size_t h = 0;; ++h) {
        const auto contribution = layer.weightedSum(weight);
        for (std::size_t s = 0; s < n; ++s) x[s] += contribution[s];
        const double left = *std::max_element(residual.begin(), residual.end());
        if (left <= opts.epsilon) break;
        if (h >= opts.maxIterations) {
            throw NumericError("unbounded frequency sum did not converge within " + std::to_string(opts.maxIterations) +
                               " steps (residual mass " + std::to_string(left) + ")");
        }
        layer = stepCountTable(m, layer, classes, &sets.transient);
        multiply(m, residual, next);
        for (std::size_t s = 0; s < n; ++s) residual[s] = sets.transient[s] ? next[s] : 0.0;
    }
    return x;
}

}  // namespace detail

inline std::vector<double> prob_q_unbounded_dtmc(const Dtmc& m, Comparator cmp, const Bound& q,
                                                 const TimeInterval& interval, const SatSet& sat1, const SatSet& sat2,
                                                 const NumericalOptions& opts = {}) {
    const auto iv = normalize_interval(interval, Timebase::Discrete);
    const auto analysis = analyzeBsccs(m, cmp, q, sat1, sat2);
    auto accept = [&](std::size_t j, std::size_t i) {
        return (i == 0 || q.countSatisfies(static_cast<std::int64_t>(j), cmp, static_cast<std::int64_t>(i))) ? 1.0 : 0.0;
    };
    auto x = detail::unboundedFrequencyCore(m, analysis, sat1, sat2, accept, opts);
    x = applyPower(m, std::move(x), static_cast<std::size_t>(iv.lo));
    clampProbabilities(x);
    return x;
}

inline std::vector<double> prob_q_unbounded_ctmc(const Ctmc& c, Comparator cmp, const Bound& q,
                                                 const TimeInterval& interval, const SatSet& sat1, const SatSet& sat2,
                                                 const NumericalOptions& opts = {}) {
    const auto iv = normalize_interval(interval, Timebase::Continuous);
    const auto u = uniformize(c, opts.uniformizationRate);
    const auto analysis = analyzeBsccs(u.dtmc, cmp, q, sat1, sat2);
    BinomialBoundTable bounds(cmp, q);
    auto x = detail::unboundedFrequencyCore(
        u.dtmc, analysis, sat1, sat2, [&](std::size_t j, std::size_t i) { return bounds(j, i); }, opts);
    x = transientOnUniformized(u.dtmc, u.rate, iv.lo, x, opts.epsilon);
    clampProbabilities(x);
    return x;
}

// ---------------------------------------------------------------------------
// Sat recursion.

struct CheckResult {
    SatSet sat;
    /// Probability vector of the outermost P operator, when the formula is one.
    std::optional<std::vector<double>> probabilities;
    bool holdsInitially = false;
};

class NumericalChecker {
public:
    NumericalChecker(const MarkovModel& model, NumericalOptions opts = {}) : model_(&model), opts_(opts) {}

    SatSet sat(const Formula& f) {
        if (auto it = cache_.find(&f); it != cache_.end()) return it->second;
        SatSet out = compute(f);
        cache_.emplace(&f, out);
        return out;
    }

    /// Probability vector of the path formula under a P operator.
    const std::vector<double>& probability(const Formula& path) {
        if (auto it = probCache_.find(&path); it != probCache_.end()) return it->second;
        return probCache_.emplace(&path, computeProbability(path)).first->second;
    }

private:
    std::vector<double> computeProbability(const Formula& path) {
        switch (path.kind) {
            case NodeKind::Not: {
                std::vector<double> p = probability(*path.left);
                for (double& x : p) x = 1.0 - x;
                clampProbabilities(p);
                return p;
            }
            case NodeKind::Next: {
                const auto s = sat(*path.left);
                return std::visit([&](const auto& m) { return prob_next(m, s); }, *model_);
            }
            case NodeKind::Until: {
                const auto s1 = sat(*path.left);
                const auto s2 = sat(*path.right);
                if (const auto* d = std::get_if<Dtmc>(model_)) return prob_until(*d, path.interval, s1, s2);
                return prob_until(std::get<Ctmc>(*model_), path.interval, s1, s2, opts_);
            }
            case NodeKind::Freq: {
                const auto s1 = sat(*path.left);
                const auto s2 = sat(*path.right);
                if (const auto* d = std::get_if<Dtmc>(model_)) {
                    if (normalize_interval(path.interval, Timebase::Discrete).bounded()) {
                        return prob_q_bounded_dtmc(*d, path.cmp, path.bound, path.interval, s1, s2);
                    }
                    return prob_q_unbounded_dtmc(*d, path.cmp, path.bound, path.interval, s1, s2, opts_);
                }
                const auto& c = std::get<Ctmc>(*model_);
                if (path.interval.bounded()) {
                    return prob_q_bounded_ctmc(c, path.cmp, path.bound, path.interval, s1, s2, opts_);
                }
                return prob_q_unbounded_ctmc(c, path.cmp, path.bound, path.interval, s1, s2, opts_);
            }
            default:
                throw FragmentError("path formula '" + toString(path) + "' is outside the CTL-like fragment");
        }
    }

    SatSet compute(const Formula& f) {
        const std::size_t n = numStatesOf(*model_);
        switch (f.kind) {
            case NodeKind::True: return SatSet(n, true);
            case NodeKind::Atom: return SatSet::fromLabels(labelsOf(*model_), f.atom);
            case NodeKind::Not: return sat(*f.left).complement();
            case NodeKind::And: return sat(*f.left) & sat(*f.right);
            case NodeKind::Prob: {
                const auto& p = probability(*f.left);
                const double bound = f.bound.value();
                return SatSet::fromPredicate(n, [&](std::size_t s) { return compareWithTolerance(p[s], f.cmp, bound); });
            }
            default:
                throw FragmentError("'" + toString(f) + "' is not a state formula");
        }
    }

    const MarkovModel* model_;
    NumericalOptions opts_;
    std::unordered_map<const Formula*, SatSet> cache_;
    std::unordered_map<const Formula*, std::vector<double>> probCache_;
};

inline SatSet check_state_formula(const MarkovModel& model, const Formula& phi, const NumericalOptions& opts = {}) {
    if (classify_fragment(phi) != FragmentTag::CtlLike) {
        throw FragmentError("formula is not in the CTL-like fragment: " + toString(phi));
    }
    return NumericalChecker(model, opts).sat(phi);
}

inline CheckResult check(const MarkovModel& model, const Formula& phi, const NumericalOptions& opts = {}) {
    if (classify_fragment(phi) != FragmentTag::CtlLike) {
        throw FragmentError("formula is not in the CTL-like fragment: " + toString(phi));
    }
    NumericalChecker checker(model, opts);
    CheckResult out;
    if (phi.kind == NodeKind::Prob) out.probabilities = checker.probability(*phi.left);
    out.sat = checker.sat(phi);
    out.holdsInitially = out.sat.contains(initialOf(model));
    return out;
}

}  // namespace pftl
