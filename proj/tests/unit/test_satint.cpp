#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "pftl/errors.hpp"
#include "pftl/formula_parser.hpp"
#include "pftl/satint.hpp"
#include "timed_oracle.hpp"

using namespace pftl;

namespace {

IntervalSet set(std::vector<Interval> parts) { return IntervalSet::fromIntervals(std::move(parts)); }

TimedPath timed(std::vector<std::pair<std::uint32_t, double>> segs) {
    TimedPath p;
    for (auto [s, d] : segs) p.segments.push_back({StateId(std::size_t{s}), d});
    return p;
}

DiscretePath discrete(std::vector<std::uint32_t> states) {
    DiscretePath p;
    for (auto s : states) p.states.emplace_back(std::size_t{s});
    return p;
}

}  // namespace

TEST(SatintAtomic, ClipsAtHorizonAndKeepsFinalPoint) {
    const std::vector<LabelSet> labels = {{"a"}, {}};
    const auto p = timed({{0, 2.0}, {1, 3.0}, {0, 4.0}});
    EXPECT_EQ(satint_atomic(p, labels, "a", 5.0), set({Interval::rightOpen(0, 2), Interval::point(5)}));
    EXPECT_TRUE(satint_atomic(p, labels, "b", 5.0).empty());
    const std::vector<LabelSet> all = {{"a"}, {"a"}};
    EXPECT_EQ(satint_atomic(p, all, "a", 5.0), set({Interval::closed(0, 5)}));
}

TEST(SatintAtomic, AbsorbingSegmentCoversTheRest) {
    const std::vector<LabelSet> labels = {{}, {"a"}};
    const auto p = timed({{0, 1.5}, {1, std::numeric_limits<double>::infinity()}});
    EXPECT_EQ(satint_atomic(p, labels, "a", 4.0), set({Interval::closed(1.5, 4)}));
}

TEST(SatintUntil, Examples) {
    const auto full = set({Interval::closed(0, 5)});
    EXPECT_EQ(satint_until(full, set({Interval::rightOpen(2, 5)}), TimeInterval::closed(0, 1), 5),
              set({Interval::rightOpen(1, 5)}));
    EXPECT_TRUE(satint_until(full, IntervalSet{}, TimeInterval::closed(0, 1), 5).empty());
    const auto s2 = set({Interval::rightOpen(1, 2), Interval::point(4)});
    EXPECT_EQ(satint_until(IntervalSet{}, s2, TimeInterval::closed(0, 0), 5), s2);
}

TEST(SatintUntil, StartPointNeedNotSatisfyTheFirstOperand) {
    // psi1 on (1,3), psi2 from 3: a start at 1 works because only (t, t') is constrained.
    const auto r = satint_until(set({Interval::open(1, 3)}), set({Interval::closed(3, 4)}), TimeInterval::closed(0, 10), 4);
    EXPECT_EQ(r, set({Interval::closed(1, 4)}));
}

TEST(SatintUntil, ExampleAgreesWithDenseSampling) {
    // Same sets as the first example, realised on a path: a everywhere, b on [2,5).
    const std::vector<LabelSet> labels = {{"a"}, {"a", "b"}, {"a"}};
    const auto p = timed({{0, 2.0}, {1, 3.0}, {2, 10.0}});
    const auto f = parse_path_formula("a U[0,1] b");
    const auto got = satint(p, *f, 5.0, labels);
    EXPECT_EQ(got, set({Interval::rightOpen(1, 5)}));
    pftl::testing::TimedOracle oracle(p, labels, 5.0);
    for (int i = 0; i <= 1000; ++i) {
        const double t = 5.0 * i / 1000.0;
        EXPECT_EQ(got.contains(t), oracle.holds(*f, t)) << t;
    }
}

TEST(SatintQ, WorkedExample) {
    const auto a = set({Interval::rightOpen(0, 2), Interval::rightOpen(4, 6)});
    const auto full = set({Interval::closed(0, 6)});
    const auto r = satint_q(satint_and(a, full), full, Comparator::GreaterEq, Bound::fromDecimal("0.5"),
                            TimeInterval::closed(0, 2), 6);
    EXPECT_EQ(r, set({Interval::closed(0, 1), Interval::closed(3, 4)}));

    const std::vector<LabelSet> labels = {{"a"}, {}};
    const auto p = timed({{0, 2.0}, {1, 2.0}, {0, 2.0}, {1, 5.0}});
    const auto f = parse_path_formula("Q>=0.5[0,2] (a)");
    EXPECT_EQ(satint(p, *f, 6.0, labels), r);
    EXPECT_TRUE(check_path_timed(p, *f, 6.0, labels));
    pftl::testing::TimedOracle oracle(p, labels, 6.0);
    for (int i = 0; i <= 10000; ++i) {
        const double t = 6.0 * i / 10000.0;
        EXPECT_EQ(r.contains(t), oracle.holds(*f, t)) << t;
    }
}

TEST(SatintQ, EmptyConditionIsTrueOnWholeDomain) {
    const auto r = satint_q(IntervalSet{}, IntervalSet{}, Comparator::GreaterEq, Bound::fromDecimal("0.9"),
                            TimeInterval::closed(0, 2), 6);
    EXPECT_EQ(r, set({Interval::closed(0, 4)}));
}

TEST(SatintQ, AlwaysTrueAtBoundOne) {
    const auto full = set({Interval::closed(0, 6)});
    EXPECT_EQ(satint_q(full, full, Comparator::GreaterEq, Bound::fromDecimal("1"), TimeInterval::closed(0, 3), 6),
              set({Interval::closed(0, 3)}));
}

TEST(SatintQ, ShiftedWindow) {
    // a on [0,2)∪[4,6): with window [1,3] the frequency at t is that of [t+1, t+3].
    const auto a = set({Interval::rightOpen(0, 2), Interval::rightOpen(4, 6)});
    const auto full = set({Interval::closed(0, 8)});
    const auto r = satint_q(a, full, Comparator::GreaterEq, Bound::fromDecimal("0.5"), TimeInterval::closed(1, 3), 8);
    EXPECT_EQ(r, set({Interval::closed(0, 0), Interval::closed(2, 4)}));
}

TEST(SatintQ, PointWindowIsConditional) {
    const auto s2 = set({Interval::closed(0, 3)});
    const auto s12 = set({Interval::rightOpen(1, 2)});
    const auto ge = satint_q(s12, s2, Comparator::GreaterEq, Bound::fromDecimal("0.5"), TimeInterval::closed(0, 0), 5);
    EXPECT_EQ(ge, set({Interval::rightOpen(1, 2), Interval::leftOpen(3, 5)}));
    const auto le = satint_q(s12, s2, Comparator::LessEq, Bound::fromDecimal("0.5"), TimeInterval::closed(0, 0), 5);
    EXPECT_EQ(le, set({Interval::rightOpen(0, 1), Interval::closed(2, 5)}));
}

TEST(SatintQ, SizeStaysLinearInInputs) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Interval> a, b;
        double t = 0.0;
        while (t < 20.0) {
            const double len = 0.05 + u(rng);
            (u(rng) < 0.5 ? a : b).push_back(Interval::rightOpen(t, t + len));
            t += len + 0.1 * u(rng);
        }
        const auto s2b = unite(set(a), set(b));
        const auto s12b = satint_and(s2b, set(a));
        const auto r = satint_q(s12b, s2b, Comparator::Greater, Bound::fromDecimal("0.4"), TimeInterval::closed(0, 1.5), 20);
        EXPECT_LE(r.size(), 2 * (s12b.size() + s2b.size()) + 2);
    }
}

TEST(SatintPath, NextIsRejectedOnTimedPaths) {
    const auto p = timed({{0, 1.0}});
    EXPECT_THROW(check_path_timed(p, *parse_path_formula("X a"), 1.0, std::vector<LabelSet>{{}}), FragmentError);
    EXPECT_THROW(check_path_timed(p, *parse_path_formula("a U b"), 1.0, std::vector<LabelSet>{{}}), FormulaError);
}
// ---------------------------------------------------------------------------


TEST(SatintPath, AgreesWithPointwiseSemanticsOnRandomPaths) {
    std::mt19937_64 rng(31);
    std::exponential_distribution<double> dur(1.0);
    const std::vector<LabelSet> labels = {{"a"}, {"b"}, {"a", "b"}, {}};
    const double horizon = 8.0;
    std::size_t compared = 0;
    for (int trial = 0; trial < 40; ++trial) {
        TimedPath p;
        double t = 0.0;
        while (t <= horizon) {
            const double d = dur(rng);
            p.segments.push_back({StateId(std::size_t{rng() % 4}), d});
            t += d;
        }
        const auto f = pftl::testing::randomTimedFormula(rng, 3);
        const auto got = satint(p, *f, horizon, labels);
        pftl::testing::TimedOracle oracle(p, labels, horizon);
        const auto pw = oracle.build(*f);
        for (int i = 0; i <= 2000; ++i) {
            const double x = horizon * i / 2000.0;
            const bool nearBreak = std::any_of(pw.pts.begin(), pw.pts.end(),
                                               [&](double b) { return b != 0.0 && std::abs(b - x) < 1e-7; });
            if (nearBreak) continue;
            ++compared;
            ASSERT_EQ(got.contains(x), oracle.holds(*f, x)) << toString(*f) << " at t=" << x << " got " << toString(got);
        }
    }
    EXPECT_GT(compared, 79000u);
}

// ---------------------------------------------------------------------------

TEST(CheckPathDiscrete, Examples) {
    const std::vector<LabelSet> labels = {{"a"}, {"b"}};
    EXPECT_TRUE(check_path_discrete(discrete({0, 1, 1}), *parse_path_formula("a"), labels));
    EXPECT_FALSE(check_path_discrete(discrete({1, 1, 1}), *parse_path_formula("a"), labels));
    EXPECT_TRUE(check_path_discrete(discrete({0, 1, 1}), *parse_path_formula("Q>=0.5[0,2] (b)"), labels));
    EXPECT_FALSE(check_path_discrete(discrete({0, 0, 1}), *parse_path_formula("Q>=0.5[0,2] (b)"), labels));
    EXPECT_TRUE(check_path_discrete(discrete({0, 1}), *parse_path_formula("a U[1,1] b"), labels));
    EXPECT_FALSE(check_path_discrete(discrete({1, 0}), *parse_path_formula("a U[1,1] b"), labels));
    EXPECT_TRUE(check_path_discrete(discrete({0, 1}), *parse_path_formula("X b"), labels));
    EXPECT_TRUE(check_path_discrete(discrete({0, 0, 0}), *parse_path_formula("Q>=0.9[0,2] (a | b)"), labels));
}

namespace {

/// Literal reading of the discrete semantics, by recursion on suffixes.
bool literal(const std::vector<LabelSet>& labels, const DiscretePath& p, std::size_t i, const Formula& f) {
    const auto at = [&](std::size_t j, const Formula& g) { return j < p.states.size() && literal(labels, p, j, g); };
    switch (f.kind) {
        case NodeKind::True: return true;
        case NodeKind::Atom: return hasLabel(labels[p.states[i].index], f.atom);
        case NodeKind::Not: return !literal(labels, p, i, *f.left);
        case NodeKind::And: return literal(labels, p, i, *f.left) && literal(labels, p, i, *f.right);
        case NodeKind::Next: return at(i + 1, *f.left);
        case NodeKind::Until: {
            const auto iv = normalize_interval(f.interval, Timebase::Discrete);
            for (auto k = static_cast<std::size_t>(iv.lo); k <= static_cast<std::size_t>(iv.hi); ++k) {
                if (!at(i + k, *f.right)) continue;
                bool ok = true;
                for (std::size_t j = 0; j < k; ++j) ok = ok && at(i + j, *f.left);
                if (ok) return true;
            }
            return false;
        }
        case NodeKind::Freq: {
            const auto iv = normalize_interval(f.interval, Timebase::Discrete);
            std::int64_t n2 = 0, n12 = 0;
            for (auto k = static_cast<std::size_t>(iv.lo); k <= static_cast<std::size_t>(iv.hi); ++k) {
                if (!at(i + k, *f.right)) continue;
                ++n2;
                if (at(i + k, *f.left)) ++n12;
            }
            return n2 == 0 || f.bound.countSatisfies(n12, f.cmp, n2);
        }
        default: throw std::logic_error("unsupported");
    }
}

}  // namespace

TEST(CheckPathDiscrete, AgreesWithLiteralSemantics) {
    std::mt19937_64 rng(77);
    const std::vector<LabelSet> labels = {{"a"}, {"b"}, {"a", "b"}, {}};
    int checked = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        auto f = pftl::testing::randomTimedFormula(rng, 3);
        if (rng() % 4 == 0) f = make::next(f);
        double bound = 0.0;
        try {
            bound = total_bound(*f, Timebase::Discrete);
        } catch (const FormulaError&) {
            continue;
        }
        DiscretePath p;
        for (std::size_t i = 0; i <= static_cast<std::size_t>(bound); ++i) p.states.emplace_back(std::size_t{rng() % 4});
        ASSERT_EQ(check_path_discrete(p, *f, labels), literal(labels, p, 0, *f)) << toString(*f);
        ++checked;
    }
    EXPECT_GT(checked, 1000);
}
