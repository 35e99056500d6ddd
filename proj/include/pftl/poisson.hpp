#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "pftl/errors.hpp"
#include "pftl/model.hpp"

namespace pftl {

/// Truncated Poisson distribution rho(n; lambdaK) for n in [left, right].
struct PoissonWeights {
    double lambdaK = 0.0;
    double epsilon = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::vector<double> weights;  // weights[n - left]
    double retained = 0.0;        // sum of weights

    double weight(std::size_t n) const {
        return (n < left || n > right) ? 0.0 : weights[n - left];
    }
};

/// Keeps the smallest window around the mode whose mass reaches 1 - epsilon. The mode weight
/// is computed in log space and the window grows with the ratio recurrence on either side.
inline PoissonWeights poisson_truncate(double lambdaK, double epsilon) {
    if (!(lambdaK >= 0.0) || !std::isfinite(lambdaK)) throw ConfigError("Poisson parameter must be finite and >= 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("truncation epsilon must lie in (0,1)");

    PoissonWeights pw;
    pw.lambdaK = lambdaK;
    pw.epsilon = epsilon;
    if (lambdaK == 0.0) {
        pw.weights = {1.0};
        pw.retained = 1.0;
        return pw;
    }

    const auto mode = static_cast<std::size_t>(std::floor(lambdaK));
    const double md = static_cast<double>(mode);
    const double modeWeight = std::exp(-lambdaK + md * std::log(lambdaK) - std::lgamma(md + 1.0));

    std::deque<double> w{modeWeight};
    std::size_t left = mode;
    std::size_t right = mode;
    double sum = modeWeight;
    double compensation = 0.0;
    auto add = [&](double x) {
        const double y = x - compensation;
        const double t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    };

    // Beyond this many standard deviations the tails are far below any usable epsilon.
    const double spread = 60.0 * std::sqrt(lambdaK) + 60.0;
    const auto hardRight = static_cast<std::size_t>(lambdaK + spread);

    while (sum < 1.0 - epsilon) {
        const double nextLeft = left > 0 ? w.front() * static_cast<double>(left) / lambdaK : 0.0;
        const double nextRight = right < hardRight ? w.back() * lambdaK / static_cast<double>(right + 1) : 0.0;
        if (nextLeft <= 0.0 && nextRight <= 0.0) break;
        if (nextLeft >= nextRight) {
            w.push_front(nextLeft);
            --left;
            add(nextLeft);
        } else {
            w.push_back(nextRight);
            ++right;
            add(nextRight);
        }
    }

    pw.left = left;
    pw.right = right;
    pw.weights.assign(w.begin(), w.end());
    pw.retained = sum;
    return pw;
}

/// Computes sum_{n=left}^{right} rho(n) P^n v for a uniformized chain P.
inline std::vector<double> poissonMix(const Dtmc& p, const PoissonWeights& pw, std::span<const double> v) {
    std::vector<double> current(v.begin(), v.end());
    std::vector<double> next(current.size());
    std::vector<double> result(current.size(), 0.0);
    for (std::size_t n = 0; n <= pw.right; ++n) {
        if (n >= pw.left) {
            const double w = pw.weight(n);
            for (std::size_t s = 0; s < result.size(); ++s) result[s] += w * current[s];
        }
        if (n == pw.right) break;
        multiply(p, current, next);
        current.swap(next);
    }
    return result;
}

/// Pi_t v on a chain already uniformized at `rate`.
inline std::vector<double> transientOnUniformized(const Dtmc& p, double rate, double t, std::span<const double> v,
                                                  double epsilon) {
    if (t < 0.0) throw ConfigError("time must be nonnegative");
    if (t == 0.0 || rate == 0.0) return {v.begin(), v.end()};
    return poissonMix(p, poisson_truncate(rate * t, epsilon), v);
}

/// Pi_t v: the expectation of v at time t from each start state. Truncation error is at most
/// epsilon * max|v|.
inline std::vector<double> transient_apply(const Ctmc& c, double t, std::span<const double> v, double epsilon) {
    if (t == 0.0) return {v.begin(), v.end()};
    const auto u = uniformize(c);
    return transientOnUniformized(u.dtmc, u.rate, t, v, epsilon);
}

/// pi Pi_t: the state distribution at time t from the initial distribution pi.
inline std::vector<double> transient_distribution(const Ctmc& c, double t, std::span<const double> initial,
                                                  double epsilon) {
    if (t < 0.0) throw ConfigError("time must be nonnegative");
    std::vector<double> current(initial.begin(), initial.end());
    if (t == 0.0) return current;
    const auto u = uniformize(c);
    if (u.rate == 0.0) return current;
    const auto pw = poisson_truncate(u.rate * t, epsilon);
    std::vector<double> next(current.size());
    std::vector<double> result(current.size(), 0.0);
    for (std::size_t n = 0; n <= pw.right; ++n) {
        if (n >= pw.left) {
            const double w = pw.weight(n);
            for (std::size_t s = 0; s < result.size(); ++s) result[s] += w * current[s];
        }
        if (n == pw.right) break;
        multiplyTransposed(u.dtmc, current, next);
        current.swap(next);
    }
    return result;
}

}  // namespace pftl
