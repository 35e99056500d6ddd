#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pftl/model.hpp"

namespace pftl::testing {

using Edges = std::vector<std::vector<std::pair<std::uint32_t, double>>>;

inline Dtmc makeDtmc(const Edges& edges, std::vector<LabelSet> labels = {}, std::uint32_t init = 0) {
    Dtmc d;
    d.numStates = edges.size();
    d.initial = StateId(std::size_t{init});
    d.rows.resize(edges.size());
    for (std::size_t s = 0; s < edges.size(); ++s) {
        for (const auto& [t, p] : edges[s]) d.rows[s].push_back({StateId(std::size_t{t}), p});
    }
    labels.resize(edges.size());
    d.labels = std::move(labels);
    return d;
}

inline Ctmc makeCtmc(const Edges& edges, std::vector<LabelSet> labels = {}, std::uint32_t init = 0) {
    Ctmc c;
    c.numStates = edges.size();
    c.initial = StateId(std::size_t{init});
    c.rows.resize(edges.size());
    for (std::size_t s = 0; s < edges.size(); ++s) {
        for (const auto& [t, r] : edges[s]) c.rows[s].push_back({StateId(std::size_t{t}), r});
    }
    labels.resize(edges.size());
    c.labels = std::move(labels);
    return withExitRates(std::move(c));
}

/// Random DTMC; `density` is the chance that any given edge exists (a self-loop is added
/// when a row would otherwise be empty). Labels a and b are drawn independently.
inline Dtmc randomDtmc(std::mt19937_64& rng, std::size_t n, double density = 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Edges edges(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> w(n, 0.0);
        double sum = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (u(rng) < density) {
                w[t] = 0.05 + u(rng);
                sum += w[t];
            }
        }
        if (sum == 0.0) {
            w[s] = 1.0;
            sum = 1.0;
        }
        for (std::size_t t = 0; t < n; ++t) {
            if (w[t] > 0.0) edges[s].push_back({static_cast<std::uint32_t>(t), w[t] / sum});
        }
    }
    std::vector<LabelSet> labels(n);
    for (auto& l : labels) {
        if (u(rng) < 0.5) l.push_back("a");
        if (u(rng) < 0.6) l.push_back("b");
    }
    return makeDtmc(edges, labels);
}

inline Ctmc randomCtmc(std::mt19937_64& rng, std::size_t n, double density = 0.7) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Edges edges(n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) {
            if (t != s && u(rng) < density) edges[s].push_back({static_cast<std::uint32_t>(t), 0.2 + 2.0 * u(rng)});
        }
    }
    std::vector<LabelSet> labels(n);
    for (auto& l : labels) {
        if (u(rng) < 0.5) l.push_back("a");
        if (u(rng) < 0.6) l.push_back("b");
    }
    return makeCtmc(edges, labels);
}

}  // namespace pftl::testing
