#include "amhedge/market.hpp"
#include "amhedge/path_tree.hpp"
#include "amhedge/problem_io.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <set>

namespace amhedge {
namespace {

using testing::example_problem;
using testing::q;

bool mentions(const ValidationReport& report, const std::string& needle) {
    for (const auto& v : report.violations) {
        if (v.find(needle) != std::string::npos) {
            return true;
        }
    }
    return false;
}

TEST(Validate, ExampleExampleIsWellPosed) {
    auto report = validate(example_problem());
    EXPECT_TRUE(report.ok()) << report.violations.front();
}

TEST(Validate, MeanCorrectMarginalIsDecidedByFeasibility) {
    Problem p = example_problem();
    p.terminal_marginal->mass = {{q(0), q(1, 2)}, {q(2), q(0)}, {q(4), q(1, 2)}};
    EXPECT_TRUE(validate(p).ok());

    // Mean 2 as well, but X_2 = 2 almost surely cannot follow X_1 in {1, 3}.
    p.terminal_marginal->mass = {{q(2), q(1)}};
    auto report = validate(p);
    EXPECT_FALSE(report.ok());
    EXPECT_TRUE(mentions(report, "no martingale path measure"));
}

TEST(Validate, MeanMismatchIsReported) {
    Problem p = example_problem();
    p.terminal_marginal->mass = {{q(0), q(1)}, {q(2), q(0)}, {q(4), q(0)}};
    auto report = validate(p);
    EXPECT_TRUE(mentions(report, "marginal mean 0 ≠ spot 2"));
}

TEST(Validate, NegativePayoffIsReported) {
    Problem p = example_problem();
    p.payoff.set(1, q(1), q(-1));
    EXPECT_TRUE(mentions(validate(p), "negative payoff"));
}

TEST(Validate, OffLatticeKeysAreReported) {
    Problem p = example_problem();
    p.payoff.set(1, q(2), q(3));
    EXPECT_TRUE(mentions(validate(p), "payoff key (1,2) is not a lattice node"));
    Problem r = example_problem();
    r.terminal_marginal->mass[q(5)] = 0;
    EXPECT_TRUE(mentions(validate(r), "level 5 is not a lattice node"));
}

TEST(Validate, StructuralLatticeViolations) {
    Problem p = example_problem();
    p.lattice = PriceLattice::complete({{q(2), q(3)}, {q(1), q(3)}, {q(0), q(2), q(4)}});
    EXPECT_TRUE(mentions(validate(p), "exactly one spot price"));

    p.lattice = PriceLattice::complete({{q(2)}, {q(3), q(1)}, {q(0), q(2), q(4)}});
    EXPECT_TRUE(mentions(validate(p), "not strictly increasing"));

    p.lattice = PriceLattice::complete({{q(5)}, {q(1), q(3)}, {q(0), q(2), q(4)}});
    EXPECT_TRUE(mentions(validate(p), "no martingale kernel exists"));

    p = example_problem();
    p.lattice.successors[1][1] = {2};  // (1,3) may only move to 4
    EXPECT_TRUE(mentions(validate(p), "lies outside [4, 4]"));
}

TEST(Validate, NeedsCalibrationData) {
    Problem p = example_problem();
    p.terminal_marginal.reset();
    EXPECT_TRUE(mentions(validate(p), "terminal marginal or at least one instrument"));
    EXPECT_TRUE(validate(testing::example_problem_single_instrument()).ok());
}

TEST(EnumeratePaths, Counts) {
    EXPECT_EQ(enumerate_paths(example_problem().lattice).size(), 6u);
    EXPECT_EQ(enumerate_paths(PriceLattice::complete({{q(2)}, {q(2)}, {q(2)}})).size(), 1u);

    PriceLattice cut = example_problem().lattice;
    cut.successors[1][1] = {1, 2};  // drop (1,3) -> (2,0)
    EXPECT_EQ(enumerate_paths(cut).size(), 5u);
}

TEST(EnumeratePaths, LexicographicAndCapped) {
    const auto paths = enumerate_paths(example_problem().lattice);
    EXPECT_TRUE(std::is_sorted(paths.begin(), paths.end()));
    EXPECT_EQ(paths.front().nodes, (std::vector<NodeIndex>{0, 0, 0}));
    EXPECT_EQ(paths.back().nodes, (std::vector<NodeIndex>{0, 1, 2}));
    try {
        enumerate_paths(example_problem().lattice, 5);
        FAIL() << "expected an enumeration limit";
    } catch (const EnumerationLimit& e) {
        EXPECT_EQ(e.cap(), 5u);
        EXPECT_EQ(e.required(), 6);
    }
}

// Depth-first count written independently of PathTree.
std::size_t dfs_count(const PriceLattice& lattice, std::size_t t, NodeIndex i) {
    if (t == lattice.horizon()) {
        return 1;
    }
    std::size_t total = 0;
    for (NodeIndex j : lattice.successors[t][i]) {
        total += dfs_count(lattice, t + 1, j);
    }
    return total;
}

TEST(EnumeratePaths, MatchesDepthFirstCountOnRandomLattices) {
    RandomProblemOptions options;
    options.drop_edge_probability = 0.3;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const std::vector<std::size_t> shape{1, 1 + seed % 3, 2 + seed % 2, 2 + (seed / 3) % 3};
        Problem p = random_problem(seed, shape, options);
        const auto paths = enumerate_paths(p.lattice);
        EXPECT_EQ(paths.size(), dfs_count(p.lattice, 0, 0)) << "seed " << seed;
        EXPECT_EQ(count_paths(p.lattice), paths.size());
        std::set<Path> unique(paths.begin(), paths.end());
        EXPECT_EQ(unique.size(), paths.size());
    }
}

// Brute force: every map from internal prefixes to {exercise, continue},
// collapsed to the exercise schedule it induces.
std::set<std::vector<std::size_t>> brute_force_schedules(const PriceLattice& lattice) {
    const auto paths = enumerate_paths(lattice);
    std::set<Prefix> internal;
    for (const auto& path : paths) {
        for (std::size_t t = 0; t < lattice.horizon(); ++t) {
            internal.insert(Prefix(path.nodes.begin(), path.nodes.begin() + static_cast<long>(t) + 1));
        }
    }
    const std::vector<Prefix> keys(internal.begin(), internal.end());
    std::set<std::vector<std::size_t>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << keys.size()); ++mask) {
        StoppingRule rule;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            rule.decisions[keys[k]] = ((mask >> k) & 1U) != 0;
        }
        std::vector<std::size_t> times;
        for (const auto& path : paths) {
            times.push_back(rule.exercise_time(path));
        }
        out.insert(times);
    }
    return out;
}

TEST(EnumerateStoppingRules, ExampleLatticeHasFiveRules) {
    const auto lattice = example_problem().lattice;
    const auto rules = enumerate_stopping_rules(lattice);
    EXPECT_EQ(rules.size(), 5u);
    EXPECT_EQ(brute_force_schedules(lattice).size(), 5u);
    EXPECT_EQ(count_stopping_rules(lattice), 5);
    // First rule stops at the root.
    EXPECT_TRUE(rules.front().decisions.at(Prefix{0}));
}

TEST(EnumerateStoppingRules, SmallCases) {
    EXPECT_EQ(enumerate_stopping_rules(PriceLattice::complete({{q(2)}, {q(1), q(3)}})).size(), 2u);
    EXPECT_EQ(enumerate_stopping_rules(PriceLattice::complete({{q(2)}, {q(2)}})).size(), 2u);
}

TEST(EnumerateStoppingRules, MatchBruteForceAndAreDistinct) {
    RandomProblemOptions options;
    options.drop_edge_probability = 0.25;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const std::vector<std::size_t> shape{1, 2, 2 + seed % 2, 2 + seed % 2};
        Problem p = random_problem(seed, shape, options);
        PathTree tree(p.lattice);
        if (tree.internal_prefixes().size() > 12) {
            continue;
        }
        const auto rules = enumerate_stopping_rules(p.lattice);
        std::set<std::vector<std::size_t>> seen;
        for (const auto& rule : rules) {
            std::vector<std::size_t> times;
            for (const auto& path : tree.paths()) {
                const std::size_t u = rule.exercise_time(path);
                EXPECT_LE(u, p.lattice.horizon());
                times.push_back(u);
            }
            EXPECT_TRUE(seen.insert(times).second) << "duplicate rule, seed " << seed;
        }
        EXPECT_EQ(seen, brute_force_schedules(p.lattice)) << "seed " << seed;
    }
}

TEST(EnumerateStoppingRules, CapReportsRequiredCount) {
    try {
        enumerate_stopping_rules(example_problem().lattice, 4);
        FAIL() << "expected an enumeration limit";
    } catch (const EnumerationLimit& e) {
        EXPECT_EQ(e.required(), 5);
        EXPECT_EQ(e.cap(), 4u);
    }
}

TEST(MarginalToInstruments, Indicators) {
    const auto instruments = marginal_to_instruments(*example_problem().terminal_marginal);
    ASSERT_EQ(instruments.size(), 3u);
    EXPECT_EQ(instruments[0].price, q(2, 5));
    EXPECT_EQ(instruments[1].price, q(1, 5));
    EXPECT_EQ(instruments[2].price, q(2, 5));
    EXPECT_EQ(instruments[2].payoff, (std::map<Rational, Rational>{{q(4), q(1)}}));

    MarginalLaw point;
    point.time = 1;
    point.mass = {{q(2), q(1)}};
    const auto single = marginal_to_instruments(point);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].price, 1);
}

TEST(MarginalToInstruments, SelectingTheTopStateGivesTheSingleClaim) {
    const auto instruments = marginal_to_instruments(*example_problem().terminal_marginal);
    const auto& top = instruments.back();
    const auto single = testing::example_problem_single_instrument().instruments.front();
    EXPECT_EQ(top.payoff, single.payoff);
    EXPECT_EQ(top.price, single.price);
}

TEST(RandomProblem, DeterministicInSeed) {
    const std::vector<std::size_t> shape{1, 3, 4, 3};
    RandomProblemOptions options;
    options.intermediate_probability = 0.5;
    options.drop_edge_probability = 0.2;
    EXPECT_EQ(random_problem(42, shape, options), random_problem(42, shape, options));
    EXPECT_NE(random_problem(42, shape, options), random_problem(43, shape, options));
}

TEST(RandomProblem, AlwaysValidAndMartingale) {
    for (std::uint64_t seed = 0; seed < 120; ++seed) {
        const std::vector<std::size_t> shape{1, 1 + seed % 4, 1 + (seed / 4) % 4 + (seed % 4 > 0)};
        RandomProblemOptions options;
        options.intermediate_probability = (seed % 3) / 2.0;
        options.drop_edge_probability = (seed % 5) / 10.0;
        Problem p = random_problem(seed, shape, options);
        auto report = validate(p);
        EXPECT_TRUE(report.ok()) << "seed " << seed << ": " << report.violations.front();
        for (const MarginalLaw* law : p.marginals()) {
            Rational total;
            Rational mean;
            for (const auto& [x, m] : law->mass) {
                total += m;
                mean += x * m;
            }
            EXPECT_EQ(total, 1);
            EXPECT_EQ(mean, p.lattice.spot());
        }
        for (std::size_t t = 0; t < shape.size(); ++t) {
            EXPECT_EQ(p.lattice.levels[t].size(), shape[t]);
        }
    }
}

TEST(RandomProblem, RejectsBadShapes) {
    EXPECT_THROW(random_problem(1, std::vector<std::size_t>{2, 2}), InvalidShape);
    EXPECT_THROW(random_problem(1, std::vector<std::size_t>{1, 0}), InvalidShape);
    EXPECT_THROW(random_problem(1, std::vector<std::size_t>{1, 3, 1}), InvalidShape);
    EXPECT_THROW(random_problem(1, std::vector<std::size_t>{1}), InvalidShape);
}

TEST(ProblemIo, ParsesBundledExample) {
    const Problem p = load_problem(testing::source_dir() + "/data/hobson-neuberger.json");
    EXPECT_EQ(p, example_problem());
}

TEST(ProblemIo, RoundTripsRandomProblems) {
    RandomProblemOptions options;
    options.intermediate_probability = 0.5;
    options.drop_edge_probability = 0.3;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Problem p = random_problem(seed, std::vector<std::size_t>{1, 3, 3, 2}, options);
        p.instruments.push_back(Instrument{{{p.lattice.levels[3][0], q(3, 7)}}, q(1, 9), 3});
        EXPECT_EQ(parse_problem(dump_problem(p)), p);
        EXPECT_EQ(problem_digest(parse_problem(dump_problem(p))), problem_digest(p));
    }
}

TEST(ProblemIo, DiagnosticsNameLineOrField) {
    const std::string text = "{\n  \"levels\": [[\"2\"], [\"1\", \"3\"]],\n  \"payoff\": [";
    try {
        parse_problem(text);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    try {
        parse_problem(R"({"levels": [["2"], ["1", "3/x"]]})");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("levels[1][1]"), std::string::npos) << e.what();
    }
    try {
        parse_problem(R"({"levels": [["2"], ["1", "3"]], "terminal_marginal": {"1": "2/4"}})");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("lowest terms"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_problem(R"({"levels": [["2"], [1.5]]})"), ParseError);
    EXPECT_THROW(parse_problem(R"({"levels": [["2"], ["1"]], "transitions": [{"t": 0, "from": 2, "to": 7}]})"),
                 ParseError);
}

TEST(Rational, CanonicalStringsAndDecimals) {
    EXPECT_EQ(to_string(q(36, 10)), "18/5");
    EXPECT_EQ(to_string(q(4)), "4");
    EXPECT_EQ(parse_rational("-6/4"), q(-3, 2));
    EXPECT_THROW(parse_rational("1/0"), ParseError);
    EXPECT_THROW(parse_rational("1/-2"), ParseError);
    EXPECT_EQ(to_decimal(q(7, 2)), "3.5");
    EXPECT_EQ(to_decimal(q(1, 3)), "0.3333333333");
    EXPECT_EQ(to_decimal(q(2, 3)), "0.6666666667");
    EXPECT_EQ(to_decimal(q(-1, 10)), "-0.1");
    EXPECT_EQ(to_decimal(q(123456789012)), "1.23456789e+11");
    EXPECT_EQ(to_decimal(q(0)), "0");
}

}  // namespace
}  // namespace amhedge
