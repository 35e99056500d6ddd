#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pftl/errors.hpp"

namespace pftl {

struct StateId {
    std::uint32_t index = 0;

    constexpr StateId() = default;
    constexpr explicit StateId(std::size_t i) : index(static_cast<std::uint32_t>(i)) {}

    friend constexpr auto operator<=>(StateId, StateId) = default;
};

/// One sparse matrix entry: a probability for DTMCs, a rate for CTMCs.
struct Transition {
    StateId target;
    double value = 0.0;
};

using Row = std::vector<Transition>;
using LabelSet = std::vector<std::string>;

inline constexpr double kRowSumTolerance = 1e-9;

inline bool hasLabel(const LabelSet& labels, std::string_view atom) {
    return std::find(labels.begin(), labels.end(), atom) != labels.end();
}

/// Explicit finite discrete-time Markov chain with sparse rows.
struct Dtmc {
    std::size_t numStates = 0;
    StateId initial;
    std::vector<Row> rows;
    std::vector<LabelSet> labels;

    std::size_t size() const noexcept { return numStates; }
};

/// Explicit finite continuous-time Markov chain. Rows hold off-diagonal rates only;
/// exitRates[s] encodes -Q(s,s).
struct Ctmc {
    std::size_t numStates = 0;
    StateId initial;
    std::vector<Row> rows;
    std::vector<double> exitRates;
    std::vector<LabelSet> labels;

    std::size_t size() const noexcept { return numStates; }

    double maxExitRate() const {
        double m = 0.0;
        for (double r : exitRates) m = std::max(m, r);
        return m;
    }
};

using MarkovModel = std::variant<Dtmc, Ctmc>;

inline bool isContinuousTime(const MarkovModel& m) { return std::holds_alternative<Ctmc>(m); }

inline const std::vector<LabelSet>& labelsOf(const MarkovModel& m) {
    return std::visit([](const auto& x) -> const std::vector<LabelSet>& { return x.labels; }, m);
}

inline std::size_t numStatesOf(const MarkovModel& m) {
    return std::visit([](const auto& x) { return x.numStates; }, m);
}

inline StateId initialOf(const MarkovModel& m) {
    return std::visit([](const auto& x) { return x.initial; }, m);
}

/// Fills exitRates from the row sums.
inline Ctmc withExitRates(Ctmc c) {
    c.exitRates.assign(c.numStates, 0.0);
    for (std::size_t s = 0; s < c.rows.size() && s < c.numStates; ++s) {
        for (const auto& t : c.rows[s]) c.exitRates[s] += t.value;
    }
    return c;
}

struct Violation {
    std::optional<StateId> state;
    std::string condition;
};

namespace detail {

template <typename Model>
void validateShape(const Model& m, std::vector<Violation>& out) {
    if (m.numStates == 0) out.push_back({std::nullopt, "model has no states"});
    if (m.initial.index >= m.numStates) out.push_back({std::nullopt, "initial state out of range"});
    if (m.rows.size() != m.numStates) out.push_back({std::nullopt, "row count differs from number of states"});
    if (m.labels.size() != m.numStates) out.push_back({std::nullopt, "label count differs from number of states"});
}

}  // namespace detail

inline std::vector<Violation> validate_model(const Dtmc& m) {
    std::vector<Violation> out;
    detail::validateShape(m, out);
    for (std::size_t s = 0; s < m.rows.size(); ++s) {
        double sum = 0.0;
        for (const auto& t : m.rows[s]) {
            if (t.target.index >= m.numStates) {
                out.push_back({StateId(s), "transition target " + std::to_string(t.target.index) + " out of range"});
            }
            if (!(t.value > 0.0) || t.value > 1.0) {
                out.push_back({StateId(s), "probability " + std::to_string(t.value) + " not in (0,1]"});
            }
            sum += t.value;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            out.push_back({StateId(s), "row sum " + std::to_string(sum) + " differs from 1"});
        }
    }
    return out;
}

inline std::vector<Violation> validate_model(const Ctmc& m) {
    std::vector<Violation> out;
    detail::validateShape(m, out);
    if (m.exitRates.size() != m.numStates) out.push_back({std::nullopt, "exit rate count differs from number of states"});
    for (std::size_t s = 0; s < m.rows.size(); ++s) {
        double sum = 0.0;
        for (const auto& t : m.rows[s]) {
            if (t.target.index >= m.numStates) {
                out.push_back({StateId(s), "transition target " + std::to_string(t.target.index) + " out of range"});
            }
            if (t.target.index == s) out.push_back({StateId(s), "explicit diagonal rate"});
            if (t.value < 0.0) out.push_back({StateId(s), "negative rate " + std::to_string(t.value)});
            if (!std::isfinite(t.value)) out.push_back({StateId(s), "non-finite rate"});
            sum += t.value;
        }
        if (s < m.exitRates.size() && std::abs(sum - m.exitRates[s]) > kRowSumTolerance) {
            out.push_back({StateId(s), "exit rate " + std::to_string(m.exitRates[s]) + " differs from rate sum " +
                                           std::to_string(sum)});
        }
    }
    return out;
}

inline std::vector<Violation> validate_model(const MarkovModel& m) {
    return std::visit([](const auto& x) { return validate_model(x); }, m);
}

/// Divides every DTMC row by its sum. Only applied on explicit request.
inline Dtmc renormalized(Dtmc m) {
    for (auto& row : m.rows) {
        double sum = 0.0;
        for (const auto& t : row) sum += t.value;
        if (sum > 0.0) {
            for (auto& t : row) t.value /= sum;
        }
    }
    return m;
}

/// Uniformized chain P = I + Q/lambda together with the rate that was used.
struct Uniformized {
    Dtmc dtmc;
    double rate = 0.0;
};

/// When lambda is omitted the maximum exit rate is used. A chain whose states are all
/// absorbing gets rate 0 and the identity matrix.
inline Uniformized uniformize(const Ctmc& c, std::optional<double> lambda = std::nullopt) {
    const double maxRate = c.maxExitRate();
    double rate = maxRate;
    if (lambda) {
        if (*lambda < maxRate || !std::isfinite(*lambda)) {
            throw ConfigError("uniformization rate " + std::to_string(*lambda) + " is below the maximum exit rate " +
                              std::to_string(maxRate));
        }
        rate = *lambda;
    }
    Dtmc d;
    d.numStates = c.numStates;
    d.initial = c.initial;
    d.labels = c.labels;
    d.rows.resize(c.numStates);
    for (std::size_t s = 0; s < c.numStates; ++s) {
        auto& row = d.rows[s];
        if (rate <= 0.0) {
            row.push_back({StateId(s), 1.0});
            continue;
        }
        const double stay = 1.0 - c.exitRates[s] / rate;
        if (stay > 0.0) row.push_back({StateId(s), stay});
        for (const auto& t : c.rows[s]) {
            if (t.value > 0.0) row.push_back({t.target, t.value / rate});
        }
        std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
    }
    return {std::move(d), rate};
}

/// out[s] = sum_t P(s,t) x[t].
inline void multiply(const Dtmc& m, std::span<const double> x, std::span<double> out) {
    for (std::size_t s = 0; s < m.numStates; ++s) {
        double acc = 0.0;
        for (const auto& t : m.rows[s]) acc += t.value * x[t.target.index];
        out[s] = acc;
    }
}

/// out[t] = sum_s x[s] P(s,t).
inline void multiplyTransposed(const Dtmc& m, std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (x[s] == 0.0) continue;
        for (const auto& t : m.rows[s]) out[t.target.index] += x[s] * t.value;
    }
}

/// Applies P^steps to x by repeated vector products.
inline std::vector<double> applyPower(const Dtmc& m, std::vector<double> x, std::size_t steps) {
    std::vector<double> next(x.size());
    for (std::size_t i = 0; i < steps; ++i) {
        multiply(m, x, next);
        x.swap(next);
    }
    return x;
}

/// Copy of the chain in which every listed state becomes absorbing.
inline Dtmc makeAbsorbing(const Dtmc& m, const std::vector<bool>& absorbing) {
    Dtmc out = m;
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (absorbing[s]) out.rows[s] = Row{{StateId(s), 1.0}};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Successor oracles for countable-state models. Only the simulator consumes them.

template <typename State>
class DiscreteSuccessorOracle {
public:
    using state_type = State;
    virtual ~DiscreteSuccessorOracle() = default;
    virtual State initialState() const = 0;
    virtual bool satisfies(const State& s, std::string_view atom) const = 0;
    /// Finite list of (successor, probability) summing to one.
    virtual std::vector<std::pair<State, double>> successors(const State& s) const = 0;
};

template <typename State>
class ContinuousSuccessorOracle {
public:
    using state_type = State;
    virtual ~ContinuousSuccessorOracle() = default;
    virtual State initialState() const = 0;
    virtual bool satisfies(const State& s, std::string_view atom) const = 0;
    /// Finite list of (successor, rate); an empty list marks an absorbing state.
    virtual std::vector<std::pair<State, double>> successors(const State& s) const = 0;
};

class ExplicitDtmcOracle final : public DiscreteSuccessorOracle<StateId> {
public:
    explicit ExplicitDtmcOracle(const Dtmc& m) : model_(&m) {}
    StateId initialState() const override { return model_->initial; }
    bool satisfies(const StateId& s, std::string_view atom) const override {
        return hasLabel(model_->labels[s.index], atom);
    }
    std::vector<std::pair<StateId, double>> successors(const StateId& s) const override {
        std::vector<std::pair<StateId, double>> out;
        for (const auto& t : model_->rows[s.index]) out.emplace_back(t.target, t.value);
        return out;
    }

private:
    const Dtmc* model_;
};

class ExplicitCtmcOracle final : public ContinuousSuccessorOracle<StateId> {
public:
    explicit ExplicitCtmcOracle(const Ctmc& m) : model_(&m) {}
    StateId initialState() const override { return model_->initial; }
    bool satisfies(const StateId& s, std::string_view atom) const override {
        return hasLabel(model_->labels[s.index], atom);
    }
    std::vector<std::pair<StateId, double>> successors(const StateId& s) const override {
        std::vector<std::pair<StateId, double>> out;
        for (const auto& t : model_->rows[s.index]) {
            if (t.value > 0.0) out.emplace_back(t.target, t.value);
        }
        return out;
    }

private:
    const Ctmc* model_;
};

}  // namespace pftl
