#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pftl/errors.hpp"
#include "pftl/model.hpp"

namespace pftl {

namespace detail {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

inline std::vector<Token> splitLine(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size() || line[i] == '#') break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

inline std::size_t parseCount(const Token& t, std::size_t line) {
    std::size_t v = 0;
    const auto* end = t.text.data() + t.text.size();
    const auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ParseError("expected a nonnegative integer, got '" + std::string(t.text) + "'", line, t.column);
    return v;
}

inline double parseReal(const Token& t, std::size_t line) {
    double v = 0.0;
    const auto* end = t.text.data() + t.text.size();
    const auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ParseError("expected a real number, got '" + std::string(t.text) + "'", line, t.column);
    }
    return v;
}

}  // namespace detail

/// Parses the explicit-state `.pfmc` text format. Structural problems (row sums, rate signs)
/// are left to validate_model; only syntax and index ranges are rejected here.
inline MarkovModel parse_model(std::string_view text) {
    enum class Section { Header, Labels, Transitions };
    Section section = Section::Header;
    std::optional<bool> continuous;
    std::optional<std::size_t> numStates;
    std::optional<std::size_t> init;
    std::vector<LabelSet> labels;
    std::vector<Row> rows;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;

    auto requireStates = [&](std::size_t line, std::size_t column) {
        if (!numStates) throw ParseError("STATES must precede this line", line, column);
        return *numStates;
    };
    auto checkState = [&](const detail::Token& t, std::size_t line) {
        const auto n = requireStates(line, t.column);
        const auto s = detail::parseCount(t, line);
        if (s >= n) throw ParseError("state " + std::to_string(s) + " out of range", line, t.column);
        return s;
    };

    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineNo;
        const auto tokens = detail::splitLine(line);
        if (tokens.empty()) continue;
        const auto& head = tokens.front();

        if (head.text == "MODEL") {
            if (tokens.size() != 2) throw ParseError("expected 'MODEL dtmc|ctmc'", lineNo, head.column);
            if (continuous) throw ParseError("duplicate MODEL line", lineNo, head.column);
            if (tokens[1].text == "dtmc") continuous = false;
            else if (tokens[1].text == "ctmc") continuous = true;
            else throw ParseError("unknown model type '" + std::string(tokens[1].text) + "'", lineNo, tokens[1].column);
            continue;
        }
        if (head.text == "STATES") {
            if (tokens.size() != 2) throw ParseError("expected 'STATES <n>'", lineNo, head.column);
            if (numStates) throw ParseError("duplicate STATES line", lineNo, head.column);
            numStates = detail::parseCount(tokens[1], lineNo);
            if (*numStates == 0) throw ParseError("a model needs at least one state", lineNo, tokens[1].column);
            labels.assign(*numStates, {});
            rows.assign(*numStates, {});
            continue;
        }
        if (head.text == "INIT") {
            if (tokens.size() != 2) throw ParseError("expected 'INIT <state>'", lineNo, head.column);
            init = checkState(tokens[1], lineNo);
            continue;
        }
        if (head.text == "LABELS" || head.text == "TRANSITIONS") {
            if (tokens.size() != 1) throw ParseError("unexpected text after section header", lineNo, tokens[1].column);
            requireStates(lineNo, head.column);
            section = head.text == "LABELS" ? Section::Labels : Section::Transitions;
            continue;
        }

        switch (section) {
            case Section::Header:
                throw ParseError("unexpected '" + std::string(head.text) + "'", lineNo, head.column);
            case Section::Labels: {
                if (tokens.size() < 2) throw ParseError("expected '<state> <label> ...'", lineNo, head.column);
                const auto s = checkState(head, lineNo);
                for (std::size_t i = 1; i < tokens.size(); ++i) {
                    std::string name(tokens[i].text);
                    if (!hasLabel(labels[s], name)) labels[s].push_back(std::move(name));
                }
                break;
            }
            case Section::Transitions: {
                if (tokens.size() != 3) throw ParseError("expected '<from> <to> <value>'", lineNo, head.column);
                const auto from = checkState(tokens[0], lineNo);
                const auto to = checkState(tokens[1], lineNo);
                const double value = detail::parseReal(tokens[2], lineNo);
                if (const auto it = seen.find({from, to}); it != seen.end()) {
                    throw ParseError("duplicate transition " + std::to_string(from) + " -> " + std::to_string(to) +
                                         " (first on line " + std::to_string(it->second) + ")",
                                     lineNo, head.column);
                }
                seen.emplace(std::make_pair(from, to), lineNo);
                rows[from].push_back({StateId(to), value});
                break;
            }
        }
    }

    if (!continuous) throw ParseError("missing MODEL line", lineNo, 1);
    if (!numStates) throw ParseError("missing STATES line", lineNo, 1);
    if (!init) throw ParseError("missing INIT line", lineNo, 1);

    for (auto& row : rows) {
        std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
    }

    if (!*continuous) {
        Dtmc d;
        d.numStates = *numStates;
        d.initial = StateId(*init);
        d.rows = std::move(rows);
        d.labels = std::move(labels);
        return d;
    }
    Ctmc c;
    c.numStates = *numStates;
    c.initial = StateId(*init);
    c.rows = std::move(rows);
    c.labels = std::move(labels);
    return withExitRates(std::move(c));
}

inline MarkovModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

inline std::string format_model(const MarkovModel& model) {
    std::ostringstream out;
    out.precision(17);
    const bool ctmc = isContinuousTime(model);
    out << "MODEL " << (ctmc ? "ctmc" : "dtmc") << "\n";
    out << "STATES " << numStatesOf(model) << "\n";
    out << "INIT " << initialOf(model).index << "\n";
    out << "LABELS\n";
    const auto& labels = labelsOf(model);
    for (std::size_t s = 0; s < labels.size(); ++s) {
        if (labels[s].empty()) continue;
        out << "  " << s;
        for (const auto& l : labels[s]) out << ' ' << l;
        out << "\n";
    }
    out << "TRANSITIONS\n";
    std::visit(
        [&](const auto& m) {
            for (std::size_t s = 0; s < m.rows.size(); ++s) {
                for (const auto& t : m.rows[s]) out << "  " << s << ' ' << t.target.index << ' ' << t.value << "\n";
            }
        },
        model);
    return out.str();
}

}  // namespace pftl
