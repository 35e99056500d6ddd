#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "pftl/model.hpp"

namespace pftl {

/// Non-BSCC states A and the bottom strongly connected components B_1..B_n. Each list is sorted.
struct BsccDecomposition {
    std::vector<StateId> nonBscc;
    std::vector<std::vector<StateId>> bsccs;
};

/// Tarjan's algorithm, iterative so deep chains do not exhaust the call stack.
/// Components are returned in reverse topological order of the condensation.
inline std::vector<std::vector<std::uint32_t>> stronglyConnectedComponents(const std::vector<std::vector<std::uint32_t>>& graph) {
    const std::size_t n = graph.size();
    constexpr std::uint32_t kUnvisited = UINT32_MAX;
    std::vector<std::uint32_t> index(n, kUnvisited), lowlink(n, 0);
    std::vector<bool> onStack(n, false);
    std::vector<std::uint32_t> stack;
    std::vector<std::pair<std::uint32_t, std::size_t>> callStack;
    std::vector<std::vector<std::uint32_t>> components;
    std::uint32_t counter = 0;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        callStack.emplace_back(root, 0);
        while (!callStack.empty()) {
            auto& [v, next] = callStack.back();
            if (next == 0) {
                index[v] = lowlink[v] = counter++;
                stack.push_back(v);
                onStack[v] = true;
            }
            bool descended = false;
            while (next < graph[v].size()) {
                const std::uint32_t w = graph[v][next++];
                if (index[w] == kUnvisited) {
                    callStack.emplace_back(w, 0);
                    descended = true;
                    break;
                }
                if (onStack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;

            const std::uint32_t done = v;
            if (lowlink[done] == index[done]) {
                std::vector<std::uint32_t> component;
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    onStack[w] = false;
                    component.push_back(w);
                } while (w != done);
                std::sort(component.begin(), component.end());
                components.push_back(std::move(component));
            }
            callStack.pop_back();
            if (!callStack.empty()) {
                const std::uint32_t parent = callStack.back().first;
                lowlink[parent] = std::min(lowlink[parent], lowlink[done]);
            }
        }
    }
    return components;
}

inline std::vector<std::vector<std::uint32_t>> successorGraph(const Dtmc& m) {
    std::vector<std::vector<std::uint32_t>> g(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        for (const auto& t : m.rows[s]) {
            if (t.value > 0.0) g[s].push_back(t.target.index);
        }
    }
    return g;
}

inline BsccDecomposition bscc_decompose(const Dtmc& m) {
    const auto graph = successorGraph(m);
    const auto sccs = stronglyConnectedComponents(graph);
    std::vector<std::uint32_t> componentOf(m.numStates);
    for (std::size_t c = 0; c < sccs.size(); ++c) {
        for (auto s : sccs[c]) componentOf[s] = static_cast<std::uint32_t>(c);
    }

    BsccDecomposition out;
    std::vector<bool> inBscc(m.numStates, false);
    for (std::size_t c = 0; c < sccs.size(); ++c) {
        bool bottom = true;
        for (auto s : sccs[c]) {
            for (auto t : graph[s]) {
                if (componentOf[t] != c) {
                    bottom = false;
                    break;
                }
            }
            if (!bottom) break;
        }
        if (!bottom) continue;
        std::vector<StateId> b;
        for (auto s : sccs[c]) {
            b.emplace_back(s);
            inBscc[s] = true;
        }
        out.bsccs.push_back(std::move(b));
    }
    std::sort(out.bsccs.begin(), out.bsccs.end());
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (!inBscc[s]) out.nonBscc.emplace_back(s);
    }
    return out;
}

}  // namespace pftl
