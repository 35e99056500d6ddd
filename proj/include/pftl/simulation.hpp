#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pftl/errors.hpp"
#include "pftl/model.hpp"

namespace pftl {

/// Segments per timed path before the simulator gives up on a (likely explosive) model.
inline constexpr std::size_t kMaxSegments = 10'000'000;

template <typename State>
struct BasicDiscretePath {
    std::vector<State> states;  // positions 0..k_total
};
using DiscretePath = BasicDiscretePath<StateId>;

template <typename State>
struct TimedSegment {
    State state;
    double duration;  // +inf for an absorbing final state
};

template <typename State>
struct BasicTimedPath {
    std::vector<TimedSegment<State>> segments;

    double totalTime() const {
        double t = 0.0;
        for (const auto& s : segments) t += s.duration;
        return t;
    }
};
using TimedPath = BasicTimedPath<StateId>;

// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Per-path random stream. Uniform draws lie in (0,1], so -ln(u) is always finite.
class PathRng {
public:
    explicit PathRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

/// Seed plus path index determines the stream, independent of scheduling order.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed) {}
    std::uint64_t seed() const noexcept { return seed_; }

    PathRng streamFor(std::uint64_t pathIndex) const {
        std::uint64_t x = seed_;
        std::uint64_t mixed = splitmix64(x);
        x = mixed ^ (pathIndex * 0xD1B54A32D192ED03ULL);
        mixed = splitmix64(x);
        return PathRng(mixed ^ splitmix64(x));
    }

private:
    std::uint64_t seed_;
};

namespace detail {

/// Index i with cumulative weight crossing u * total; rows are tiny, so a linear scan.
template <typename Weights>
std::size_t pickIndex(const Weights& items, double total, double u) {
    const double target = u * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        acc += items[i].second;
        if (target <= acc) return i;
    }
    return items.size() - 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Explicit models.

inline DiscretePath sample_discrete_prefix(const Dtmc& m, std::size_t kTotal, PathRng& rng) {
    DiscretePath path;
    path.states.reserve(kTotal + 1);
    StateId s = m.initial;
    path.states.push_back(s);
    for (std::size_t step = 0; step < kTotal; ++step) {
        const auto& row = m.rows[s.index];
        if (row.empty()) throw ModelError("state " + std::to_string(s.index) + " has no successors");
        const double target = rng.uniform();
        double acc = 0.0;
        StateId next = row.back().target;
        for (const auto& t : row) {
            acc += t.value;
            if (target <= acc) {
                next = t.target;
                break;
            }
        }
        s = next;
        path.states.push_back(s);
    }
    return path;
}

inline TimedPath sample_timed_prefix(const Ctmc& m, double kTotal, PathRng& rng) {
    TimedPath path;
    StateId s = m.initial;
    double elapsed = 0.0;
    for (;;) {
        const double exit = m.exitRates[s.index];
        if (exit <= 0.0) {
            path.segments.push_back({s, std::numeric_limits<double>::infinity()});
            return path;
        }
        if (path.segments.size() >= kMaxSegments) {
            throw ModelError("path exceeded " + std::to_string(kMaxSegments) +
                             " segments before reaching the horizon; the model may be explosive");
        }
        const double d = rng.exponential(exit);
        path.segments.push_back({s, d});
        elapsed += d;
        if (elapsed > kTotal) return path;
        const double target = rng.uniform() * exit;
        const auto& row = m.rows[s.index];
        double acc = 0.0;
        StateId next = row.back().target;
        for (const auto& t : row) {
            acc += t.value;
            if (target <= acc) {
                next = t.target;
                break;
            }
        }
        s = next;
    }
}

// ---------------------------------------------------------------------------
// Successor oracles.

template <typename State>
BasicDiscretePath<State> sample_discrete_prefix(const DiscreteSuccessorOracle<State>& oracle, std::size_t kTotal,
                                                PathRng& rng) {
    BasicDiscretePath<State> path;
    path.states.reserve(kTotal + 1);
    path.states.push_back(oracle.initialState());
    for (std::size_t step = 0; step < kTotal; ++step) {
        const auto succ = oracle.successors(path.states.back());
        if (succ.empty()) throw ModelError("successor oracle returned no successors");
        double total = 0.0;
        for (const auto& [st, p] : succ) total += p;
        path.states.push_back(succ[detail::pickIndex(succ, total, rng.uniform())].first);
    }
    return path;
}

template <typename State>
BasicTimedPath<State> sample_timed_prefix(const ContinuousSuccessorOracle<State>& oracle, double kTotal, PathRng& rng) {
    BasicTimedPath<State> path;
    State s = oracle.initialState();
    double elapsed = 0.0;
    for (;;) {
        const auto succ = oracle.successors(s);
        double exit = 0.0;
        for (const auto& [st, r] : succ) exit += r;
        if (succ.empty() || exit <= 0.0) {
            path.segments.push_back({s, std::numeric_limits<double>::infinity()});
            return path;
        }
        if (path.segments.size() >= kMaxSegments) {
            throw ModelError("path exceeded " + std::to_string(kMaxSegments) +
                             " segments before reaching the horizon; the model may be explosive");
        }
        const double d = rng.exponential(exit);
        path.segments.push_back({s, d});
        elapsed += d;
        if (elapsed > kTotal) return path;
        s = succ[detail::pickIndex(succ, exit, rng.uniform())].first;
    }
}

}  // namespace pftl
