#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "pftl/errors.hpp"
#include "pftl/formula.hpp"

namespace pftl {

struct SprtConfig {
    double alpha = 0.01;
    double beta = 0.01;
    double delta = 0.01;
    std::size_t maxSamples = 1'000'000;
};

enum class SprtVerdict { Holds, Fails, Inconclusive };

inline std::string_view toString(SprtVerdict v) {
    switch (v) {
        case SprtVerdict::Holds: return "holds";
        case SprtVerdict::Fails: return "fails";
        case SprtVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

/// Wald's test of H0: p_hat >= p + delta against H1: p_hat <= p - delta, one observation at a time.
class SprtState {
public:
    SprtState(double p, const SprtConfig& config) : config_(config) {
        if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
        if (!(config.beta > 0.0 && config.beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
        if (!(config.delta > 0.0)) throw ConfigError("delta must be positive");
        if (config.maxSamples == 0) throw ConfigError("maxSamples must be positive");
        const double hi = p + config.delta, lo = p - config.delta;
        if (!(lo > 0.0 && hi < 1.0)) {
            throw ConfigError("indifference region (" + formatNumber(lo) + ", " + formatNumber(hi) + ") must lie inside (0,1)");
        }
        stepSat_ = std::log(hi / lo);
        stepUnsat_ = std::log((1.0 - hi) / (1.0 - lo));
        acceptH0_ = std::log((1.0 - config.beta) / config.alpha);
        acceptH1_ = std::log(config.beta / (1.0 - config.alpha));
    }

    /// Adds one observation; true once a hypothesis has been accepted.
    bool observe(bool satisfied) {
        ++n_;
        if (satisfied) {
            ++m_;
            logLambda_ += stepSat_;
        } else {
            logLambda_ += stepUnsat_;
        }
        return decided();
    }

    bool acceptedH0() const { return logLambda_ > acceptH0_; }
    bool acceptedH1() const { return logLambda_ < acceptH1_; }
    bool decided() const { return acceptedH0() || acceptedH1(); }
    bool exhausted() const { return n_ >= config_.maxSamples; }

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return m_; }
    double logLambda() const noexcept { return logLambda_; }

private:
    SprtConfig config_;
    double stepSat_ = 0.0;
    double stepUnsat_ = 0.0;
    double acceptH0_ = 0.0;
    double acceptH1_ = 0.0;
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    double logLambda_ = 0.0;
};

/// Maps the accepted hypothesis to a verdict on P cmp p [psi]; upper-bound comparators negate it.
inline SprtVerdict sprtVerdict(const SprtState& s, Comparator cmp) {
    if (!s.decided()) return SprtVerdict::Inconclusive;
    const bool above = s.acceptedH0();
    return above != isUpperBound(cmp) ? SprtVerdict::Holds : SprtVerdict::Fails;
}

struct SprtOutcome {
    SprtVerdict verdict = SprtVerdict::Inconclusive;
    std::size_t n = 0;
    std::size_t m = 0;
    double logLambda = 0.0;
};

/// Runs the test on a stream of per-path verdicts; `next()` yields the i-th path's truth value.
template <typename Stream>
SprtOutcome sprt_run(double p, Comparator cmp, const SprtConfig& config, Stream&& next) {
    SprtState state(p, config);
    while (!state.decided() && !state.exhausted()) state.observe(next());
    return {sprtVerdict(state, cmp), state.n(), state.m(), state.logLambda()};
}

}  // namespace pftl
