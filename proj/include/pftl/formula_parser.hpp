#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pftl/errors.hpp"
#include "pftl/formula.hpp"

namespace pftl {

namespace detail {

enum class Tok { Ident, Number, LParen, RParen, LBracket, RBracket, Comma, Bang, Amp, Bar, Arrow, Cmp, End };

struct FToken {
    Tok kind;
    std::string_view text;
    std::size_t offset;
};

inline std::vector<FToken> lexFormula(std::string_view s) {
    std::vector<FToken> out;
    std::size_t i = 0;
    auto error = [&](const std::string& msg) { throw ParseError(msg, 1, i + 1); };
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        auto single = [&](Tok k) {
            out.push_back({k, s.substr(start, 1), start});
            ++i;
        };
        switch (c) {
            case '(': single(Tok::LParen); continue;
            case ')': single(Tok::RParen); continue;
            case '[': single(Tok::LBracket); continue;
            case ']': single(Tok::RBracket); continue;
            case ',': single(Tok::Comma); continue;
            case '!': single(Tok::Bang); continue;
            case '&': single(Tok::Amp); continue;
            case '|': single(Tok::Bar); continue;
            case '-':
                if (i + 1 < s.size() && s[i + 1] == '>') {
                    out.push_back({Tok::Arrow, s.substr(start, 2), start});
                    i += 2;
                    continue;
                }
                error("unexpected '-'");
                break;
            case '<':
            case '>': {
                const std::size_t len = (i + 1 < s.size() && s[i + 1] == '=') ? 2 : 1;
                out.push_back({Tok::Cmp, s.substr(start, len), start});
                i += len;
                continue;
            }
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                ++i;
                if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
            out.push_back({Tok::Number, s.substr(start, i - start), start});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            out.push_back({Tok::Ident, s.substr(start, i - start), start});
            continue;
        }
        error(std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, {}, s.size()});
    return out;
}

/// Recursive-descent parser. Precedence from loosest to tightest:
///   ->  (right assoc),  |,  U (right assoc),  &,  unary ! X F G.
class FormulaParser {
public:
    explicit FormulaParser(std::string_view text) : text_(text), tokens_(lexFormula(text)) {}

    FormulaPtr parseTop() {
        auto f = implication();
        expect(Tok::End, "end of formula");
        return f;
    }

private:
    static bool isKeyword(std::string_view w) {
        return w == "P" || w == "Q" || w == "X" || w == "U" || w == "F" || w == "G" || w == "true" || w == "false" ||
               w == "inf";
    }

    const FToken& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
    const FToken& advance() { return tokens_[pos_++]; }
    bool atIdent(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

    [[noreturn]] void fail(const std::string& msg, const FToken& at) const { throw ParseError(msg, 1, at.offset + 1); }

    const FToken& expect(Tok k, const char* what) {
        if (peek().kind != k) {
            fail(std::string("expected ") + what + (peek().kind == Tok::End ? " before end of input" : ", found '" + std::string(peek().text) + "'"), peek());
        }
        return advance();
    }

    FormulaPtr implication() {
        auto lhs = disjunction();
        if (peek().kind == Tok::Arrow) {
            advance();
            return make::implies(lhs, implication());
        }
        return lhs;
    }

    FormulaPtr disjunction() {
        auto lhs = untilExpr();
        while (peek().kind == Tok::Bar) {
            advance();
            lhs = make::disj(lhs, untilExpr());
        }
        return lhs;
    }

    FormulaPtr untilExpr() {
        auto lhs = conjunction();
        if (atIdent("U")) {
            advance();
            const auto iv = optionalInterval();
            return make::until(lhs, iv, untilExpr());
        }
        return lhs;
    }

    FormulaPtr conjunction() {
        auto lhs = unary();
        while (peek().kind == Tok::Amp) {
            advance();
            lhs = make::conj(lhs, unary());
        }
        return lhs;
    }

    FormulaPtr unary() {
        if (peek().kind == Tok::Bang) {
            advance();
            return make::negate(unary());
        }
        if (atIdent("X")) {
            advance();
            return make::next(unary());
        }
        if (atIdent("F")) {
            advance();
            const auto iv = optionalInterval();
            return make::eventually(iv, unary());
        }
        if (atIdent("G")) {
            advance();
            const auto iv = optionalInterval();
            return make::globally(iv, unary());
        }
        return primary();
    }

    FormulaPtr primary() {
        const FToken& t = peek();
        if (t.kind == Tok::LParen) {
            advance();
            auto f = implication();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (t.kind != Tok::Ident) fail(t.kind == Tok::End ? "unexpected end of formula" : "unexpected '" + std::string(t.text) + "'", t);
        if (t.text == "true") {
            advance();
            return make::top();
        }
        if (t.text == "false") {
            advance();
            return make::negate(make::top());
        }
        if (t.text == "P") {
            advance();
            const auto cmp = comparator();
            const auto p = probability("probability");
            expect(Tok::LBracket, "'[' opening the P body");
            auto body = implication();
            expect(Tok::RBracket, "']' closing the P body");
            return make::prob(cmp, p, body);
        }
        if (t.text == "Q") {
            advance();
            const auto cmp = comparator();
            const auto q = probability("frequency bound");
            const auto iv = optionalInterval();
            expect(Tok::LParen, "'(' opening the Q body");
            auto body = untilExpr();
            FormulaPtr condition = make::top();
            if (peek().kind == Tok::Bar) {
                advance();
                condition = implication();
            }
            expect(Tok::RParen, "')' closing the Q body");
            return make::freq(cmp, q, iv, body, condition);
        }
        if (isKeyword(t.text)) fail("unexpected keyword '" + std::string(t.text) + "'", t);
        advance();
        return make::atom(std::string(t.text));
    }

    Comparator comparator() {
        const auto& t = expect(Tok::Cmp, "a comparator (<, <=, >, >=)");
        if (t.text == "<") return Comparator::Less;
        if (t.text == "<=") return Comparator::LessEq;
        if (t.text == ">") return Comparator::Greater;
        return Comparator::GreaterEq;
    }

    Bound probability(const char* what) {
        const auto& t = expect(Tok::Number, what);
        Bound b;
        try {
            b = Bound::fromDecimal(t.text);
        } catch (const FormulaError& e) {
            fail(e.what(), t);
        }
        if (b.numerator() > b.denominator()) fail(std::string(what) + " " + std::string(t.text) + " outside [0,1]", t);
        return b;
    }

    double number() {
        const auto& t = peek();
        if (atIdent("inf")) {
            advance();
            return kInfinity;
        }
        const auto& n = expect(Tok::Number, "a number");
        double v = 0.0;
        const auto* end = n.text.data() + n.text.size();
        const auto [ptr, ec] = std::from_chars(n.text.data(), end, v);
        if (ec != std::errc() || ptr != end) fail("malformed number '" + std::string(n.text) + "'", t);
        return v;
    }

    bool intervalAhead() const {
        if (peek().kind == Tok::LBracket) return true;
        return peek().kind == Tok::LParen && peek(1).kind == Tok::Number && peek(2).kind == Tok::Comma;
    }

    TimeInterval optionalInterval() {
        if (!intervalAhead()) return TimeInterval::unbounded();
        const auto& open = advance();
        TimeInterval iv;
        iv.loClosed = open.kind == Tok::LBracket;
        const auto& loTok = peek();
        iv.lo = number();
        if (!std::isfinite(iv.lo)) fail("interval lower bound must be finite", loTok);
        expect(Tok::Comma, "','");
        const auto& hiTok = peek();
        iv.hi = number();
        if (peek().kind == Tok::RBracket) iv.hiClosed = true;
        else if (peek().kind == Tok::RParen) iv.hiClosed = false;
        else fail("expected ']' or ')' closing the interval", peek());
        advance();
        if (!std::isfinite(iv.hi)) iv.hiClosed = false;
        if (iv.hi < iv.lo) fail("interval upper bound below lower bound", hiTok);
        return iv;
    }

    std::string_view text_;
    std::vector<FToken> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a formula in the concrete syntax and checks that it is a state formula.
inline FormulaPtr parse_formula(std::string_view text) {
    auto f = detail::FormulaParser(text).parseTop();
    if (!isStateFormula(*f)) {
        throw FormulaError("top-level formula must be a state formula; wrap path operators in P~p [ ... ]");
    }
    return f;
}

/// Parses a path formula (no state-formula requirement at the top).
inline FormulaPtr parse_path_formula(std::string_view text) { return detail::FormulaParser(text).parseTop(); }

}  // namespace pftl
