#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pftl/errors.hpp"
#include "pftl/formula.hpp"
#include "pftl/model.hpp"
#include "pftl/satint.hpp"
#include "pftl/simulation.hpp"
#include "pftl/sprt.hpp"

namespace pftl {

struct StatisticalOptions {
    SprtConfig sprt;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0: hardware concurrency
    std::size_t batchSize = 64;
};

struct StatisticalResult {
    SprtVerdict verdict = SprtVerdict::Inconclusive;
    std::size_t samplesUsed = 0;
    std::size_t m = 0;
    double logLambda = 0.0;
    double p = 0.0;
    Comparator cmp = Comparator::GreaterEq;
    double kTotal = 0.0;
    SprtConfig config;
    std::uint64_t seed = 0;
};

namespace detail {

/// Fills out[i] = pathVerdict(first + i) using a small pool; any worker exception is rethrown.
template <typename PathVerdict>
void evaluateBatch(PathVerdict& pathVerdict, std::size_t first, std::vector<std::uint8_t>& out, unsigned threads) {
    const std::size_t count = out.size();
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = pathVerdict(first + i) ? 1 : 0;
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) out[i] = pathVerdict(first + i) ? 1 : 0;
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// SPRT over path indices 0, 1, 2, ...; verdicts are consumed strictly in index order, so the
/// result depends only on the seed, never on thread count or batch size.
template <typename PathVerdict>
SprtOutcome runIndexed(double p, Comparator cmp, const StatisticalOptions& opts, PathVerdict pathVerdict) {
    SprtState state(p, opts.sprt);
    const unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::uint8_t> batch;
    std::size_t next = 0;
    while (!state.decided() && !state.exhausted()) {
        const std::size_t size = std::min(std::max<std::size_t>(1, opts.batchSize), opts.sprt.maxSamples - next);
        batch.assign(size, 0);
        evaluateBatch(pathVerdict, next, batch, threads);
        for (std::size_t i = 0; i < size && !state.decided(); ++i) state.observe(batch[i] != 0);
        next += size;
    }
    return {sprtVerdict(state, cmp), state.n(), state.m(), state.logLambda()};
}

inline const Formula& statisticalBody(const Formula& phi) {
    if (!in_bounded_ltl_fragment(phi)) {
        throw FragmentError("formula is not in the bounded LTL-like fragment (P~p [psi] with bounded psi and 0<p<1)");
    }
    return *phi.left;
}

inline StatisticalResult makeResult(const SprtOutcome& o, const Formula& phi, double kTotal,
                                    const StatisticalOptions& opts) {
    return {o.verdict, o.n, o.m, o.logLambda, phi.bound.value(), phi.cmp, kTotal, opts.sprt, opts.seed};
}

}  // namespace detail

/// Statistical check of P~p [psi] on an explicit DTMC or CTMC.
inline StatisticalResult check_statistical(const MarkovModel& model, const Formula& phi,
                                           const StatisticalOptions& opts = {}) {
    const Formula& psi = detail::statisticalBody(phi);
    const RandomSource source(opts.seed);
    if (const auto* d = std::get_if<Dtmc>(&model)) {
        const double k = total_bound(psi, Timebase::Discrete);
        const auto steps = static_cast<std::size_t>(k);
        auto verdict = [&](std::size_t i) {
            auto rng = source.streamFor(i);
            return check_path_discrete(sample_discrete_prefix(*d, steps, rng), psi, d->labels);
        };
        return detail::makeResult(detail::runIndexed(phi.bound.value(), phi.cmp, opts, verdict), phi, k, opts);
    }
    const auto& c = std::get<Ctmc>(model);
    const double k = total_bound(psi, Timebase::Continuous);
    auto verdict = [&](std::size_t i) {
        auto rng = source.streamFor(i);
        return check_path_timed(sample_timed_prefix(c, k, rng), psi, k, c.labels);
    };
    return detail::makeResult(detail::runIndexed(phi.bound.value(), phi.cmp, opts, verdict), phi, k, opts);
}

/// Statistical check against a discrete-time successor oracle.
template <typename State>
StatisticalResult check_statistical(const DiscreteSuccessorOracle<State>& oracle, const Formula& phi,
                                    const StatisticalOptions& opts = {}) {
    const Formula& psi = detail::statisticalBody(phi);
    const RandomSource source(opts.seed);
    const double k = total_bound(psi, Timebase::Discrete);
    auto labeler = [&](const State& s, std::string_view a) { return oracle.satisfies(s, a); };
    auto verdict = [&](std::size_t i) {
        auto rng = source.streamFor(i);
        return check_path_discrete(sample_discrete_prefix(oracle, static_cast<std::size_t>(k), rng), psi, labeler);
    };
    return detail::makeResult(detail::runIndexed(phi.bound.value(), phi.cmp, opts, verdict), phi, k, opts);
}

/// Statistical check against a continuous-time successor oracle.
template <typename State>
StatisticalResult check_statistical(const ContinuousSuccessorOracle<State>& oracle, const Formula& phi,
                                    const StatisticalOptions& opts = {}) {
    const Formula& psi = detail::statisticalBody(phi);
    const RandomSource source(opts.seed);
    const double k = total_bound(psi, Timebase::Continuous);
    auto labeler = [&](const State& s, std::string_view a) { return oracle.satisfies(s, a); };
    auto verdict = [&](std::size_t i) {
        auto rng = source.streamFor(i);
        return check_path_timed(sample_timed_prefix(oracle, k, rng), psi, k, labeler);
    };
    return detail::makeResult(detail::runIndexed(phi.bound.value(), phi.cmp, opts, verdict), phi, k, opts);
}

inline nlohmann::ordered_json toJson(const StatisticalResult& r) {
    nlohmann::ordered_json j;
    j["verdict"] = toString(r.verdict);
    j["samplesUsed"] = r.samplesUsed;
    j["m"] = r.m;
    j["logLambda"] = r.logLambda;
    j["config"] = {{"p", r.p},
                   {"comparator", toString(r.cmp)},
                   {"alpha", r.config.alpha},
                   {"beta", r.config.beta},
                   {"delta", r.config.delta},
                   {"maxSamples", r.config.maxSamples},
                   {"kTotal", r.kTotal}};
    j["seed"] = r.seed;
    return j;
}

}  // namespace pftl
