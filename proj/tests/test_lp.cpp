#include "amhedge/lp.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace amhedge::lp {
namespace {

Rational q(long num, long den = 1) {
    return make_rational(num, den);
}

TEST(LpSolve, MinimizeSingleLowerBound) {
    LinearProgram prog(Sense::minimize);
    auto x = prog.add_variable("x", VarKind::free, 1);
    prog.add_constraint({{x, 1}}, Relation::greater_equal, 3);
    auto sol = solve(prog);
    ASSERT_EQ(sol.status, Status::optimal);
    EXPECT_EQ(sol.value, 3);
    EXPECT_EQ(sol.primal[x], 3);
    EXPECT_TRUE(check_solution(prog, sol).ok);
}

TEST(LpSolve, MaximizeTwoUpperBoundsDualOnTightRow) {
    LinearProgram prog(Sense::maximize);
    auto x = prog.add_variable("x", VarKind::free, 1);
    prog.add_constraint({{x, 1}}, Relation::less_equal, 1);
    prog.add_constraint({{x, 1}}, Relation::less_equal, 2);
    auto sol = solve(prog);
    ASSERT_EQ(sol.status, Status::optimal);
    EXPECT_EQ(sol.value, 1);
    EXPECT_EQ(sol.dual[0], 1);
    EXPECT_EQ(sol.dual[1], 0);
    EXPECT_TRUE(check_solution(prog, sol).ok);
}

TEST(LpSolve, InfeasibleCarriesFarkasCertificate) {
    LinearProgram prog(Sense::maximize);
    auto x = prog.add_variable("x");
    auto y = prog.add_variable("y");
    prog.add_constraint({{x, 1}, {y, 1}}, Relation::less_equal, 1);
    prog.add_constraint({{x, 1}, {y, 1}}, Relation::greater_equal, 2);
    auto sol = solve(prog);
    ASSERT_EQ(sol.status, Status::infeasible);
    auto report = check_solution(prog, sol);
    EXPECT_TRUE(report.ok) << (report.failures.empty() ? "" : report.failures.front());
}

TEST(LpSolve, InfeasibleWithNegativeRhsAndFreeVariable) {
    LinearProgram prog(Sense::minimize);
    auto x = prog.add_variable("x", VarKind::free);
    auto y = prog.add_variable("y");
    prog.add_constraint({{x, 1}, {y, 1}}, Relation::equal, -1);
    prog.add_constraint({{x, 1}}, Relation::equal, 0);
    auto sol = solve(prog);
    ASSERT_EQ(sol.status, Status::infeasible);
    EXPECT_TRUE(check_solution(prog, sol).ok);
}

TEST(LpSolve, UnboundedCarriesRay) {
    LinearProgram prog(Sense::maximize);
    auto x = prog.add_variable("x", VarKind::non_negative, 1);
    auto y = prog.add_variable("y", VarKind::free, 0);
    prog.add_constraint({{x, 1}, {y, -1}}, Relation::less_equal, 4);
    auto sol = solve(prog);
    ASSERT_EQ(sol.status, Status::unbounded);
    EXPECT_TRUE(check_solution(prog, sol).ok);
}

TEST(LpSolve, RedundantEqualityRows) {
    // Probability simplex written twice plus a mean condition.
    LinearProgram prog(Sense::maximize);
    std::vector<std::size_t> w;
    const long xs[] = {0, 2, 4};
    for (int i = 0; i < 3; ++i) {
        w.push_back(prog.add_variable("w" + std::to_string(i), VarKind::non_negative,
                                      i == 2 ? 1 : 0));
    }
    prog.add_constraint({{w[0], 1}, {w[1], 1}, {w[2], 1}}, Relation::equal, 1, "mass");
    prog.add_constraint({{w[0], 2}, {w[1], 2}, {w[2], 2}}, Relation::equal, 2, "mass2");
    prog.add_constraint({{w[0], xs[0]}, {w[1], xs[1]}, {w[2], xs[2]}}, Relation::equal, 3,
                        "mean");
    auto sol = solve(prog);
    ASSERT_EQ(sol.status, Status::optimal);
    EXPECT_EQ(sol.value, q(3, 4));
    EXPECT_TRUE(check_solution(prog, sol).ok);
}

TEST(LpCheck, DetectsViolatedPrimalRow) {
    LinearProgram prog(Sense::maximize);
    auto x = prog.add_variable("x", VarKind::free, 1);
    prog.add_constraint({{x, 1}}, Relation::less_equal, 1, "cap");
    auto sol = solve(prog);
    sol.primal[x] = 2;
    sol.value = 2;
    auto report = check_solution(prog, sol);
    ASSERT_FALSE(report.ok);
    bool named = false;
    for (const auto& f : report.failures) {
        named = named || f.find("row 0 (cap)") != std::string::npos;
    }
    EXPECT_TRUE(named);
}

TEST(LpCheck, DetectsTinyDualPerturbation) {
    LinearProgram prog(Sense::maximize);
    auto x = prog.add_variable("x", VarKind::non_negative, 3);
    auto y = prog.add_variable("y", VarKind::non_negative, 2);
    prog.add_constraint({{x, 1}, {y, 1}}, Relation::less_equal, 4);
    prog.add_constraint({{x, 1}, {y, 3}}, Relation::less_equal, 6);
    auto sol = solve(prog);
    ASSERT_TRUE(check_solution(prog, sol).ok);
    sol.dual[0] += q(1, 1000000);
    auto report = check_solution(prog, sol);
    ASSERT_FALSE(report.ok);
    bool objective_failure = false;
    for (const auto& f : report.failures) {
        objective_failure = objective_failure || f.find("objective equality") != std::string::npos;
    }
    EXPECT_TRUE(objective_failure);
}

TEST(LpSolve, RejectsOversizedPrograms) {
    LinearProgram prog;
    for (std::size_t j = 0; j <= kMaxVariables; ++j) {
        prog.add_variable("");
    }
    EXPECT_THROW(solve(prog), LpTooLarge);
}

TEST(LpSolve, UndeclaredVariableIsAnError) {
    LinearProgram prog;
    prog.add_variable("x");
    prog.add_constraint({{3, 1}}, Relation::less_equal, 1);
    EXPECT_THROW(solve(prog), LpError);
}

TEST(LpSolve, ReoptimizerMatchesColdSolves) {
    LinearProgram prog(Sense::maximize);
    std::vector<std::size_t> v;
    for (int i = 0; i < 4; ++i) {
        v.push_back(prog.add_variable("v" + std::to_string(i)));
    }
    prog.add_constraint({{v[0], 1}, {v[1], 1}, {v[2], 1}, {v[3], 1}}, Relation::equal, 1);
    prog.add_constraint({{v[0], -1}, {v[1], 1}, {v[2], 2}, {v[3], 3}}, Relation::equal, 1);
    Reoptimizer engine(prog);
    ASSERT_TRUE(engine.feasible());
    for (int k = 0; k < 6; ++k) {
        std::vector<Rational> c = {q(k), q(1 - k), q(k * k - 3), q(2)};
        auto warm = engine.optimize(c);
        LinearProgram cold = prog;
        for (int j = 0; j < 4; ++j) {
            cold.set_objective(v[j], c[j]);
        }
        auto fresh = solve(cold);
        ASSERT_EQ(warm.status, Status::optimal);
        EXPECT_EQ(warm.value, fresh.value);
        EXPECT_TRUE(check_solution(cold, warm).ok);
    }
}

// Random programs with a planted optimum: choose x*, y* and reduced costs
// satisfying complementary slackness, then derive b and c from them.
TEST(LpProperty, RecoversPlantedOptimum) {
    std::mt19937_64 rng(12345);
    auto draw = [&](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
    };
    for (int trial = 0; trial < 150; ++trial) {
        const int n = draw(1, 7);
        const int m = draw(1, 6);
        std::vector<std::vector<Rational>> a(m, std::vector<Rational>(n));
        for (auto& row : a) {
            for (auto& e : row) {
                e = q(draw(-4, 4), draw(1, 3));
            }
        }
        std::vector<Rational> xstar(n);
        std::vector<Rational> reduced(n);
        for (int j = 0; j < n; ++j) {
            if (draw(0, 1) == 1) {
                xstar[j] = q(draw(0, 5), draw(1, 2));
            } else {
                reduced[j] = q(draw(0, 3));
            }
        }
        std::vector<Relation> rel(m);
        std::vector<Rational> b(m);
        std::vector<Rational> ystar(m);
        for (int i = 0; i < m; ++i) {
            Rational activity;
            for (int j = 0; j < n; ++j) {
                activity += a[i][j] * xstar[j];
            }
            const int kind = draw(0, 2);
            if (kind == 0) {
                rel[i] = Relation::equal;
                b[i] = activity;
                ystar[i] = q(draw(-3, 3));
            } else if (kind == 1) {
                rel[i] = Relation::less_equal;
                const bool tight = draw(0, 1) == 1;
                b[i] = activity + (tight ? q(0) : q(draw(1, 3)));
                ystar[i] = tight ? q(draw(0, 3)) : q(0);
            } else {
                rel[i] = Relation::greater_equal;
                const bool tight = draw(0, 1) == 1;
                b[i] = activity - (tight ? q(0) : q(draw(1, 3)));
                ystar[i] = tight ? -q(draw(0, 3)) : q(0);
            }
        }
        // Maximization: c = A^T y - r with r >= 0.
        LinearProgram prog(Sense::maximize);
        Rational expected;
        for (int j = 0; j < n; ++j) {
            Rational aty;
            for (int i = 0; i < m; ++i) {
                aty += a[i][j] * ystar[i];
            }
            prog.add_variable("x" + std::to_string(j), VarKind::non_negative, aty - reduced[j]);
            expected += (aty - reduced[j]) * xstar[j];
        }
        for (int i = 0; i < m; ++i) {
            std::vector<Term> terms;
            for (int j = 0; j < n; ++j) {
                if (sgn(a[i][j]) != 0) {
                    terms.push_back({static_cast<std::size_t>(j), a[i][j]});
                }
            }
            prog.add_constraint(terms, rel[i], b[i]);
        }
        auto sol = solve(prog);
        ASSERT_EQ(sol.status, Status::optimal) << "trial " << trial;
        EXPECT_EQ(sol.value, expected) << "trial " << trial;
        auto report = check_solution(prog, sol);
        EXPECT_TRUE(report.ok) << "trial " << trial << ": "
                               << (report.failures.empty() ? "" : report.failures.front());
        EXPECT_EQ(solve(prog).primal, sol.primal) << "determinism, trial " << trial;
    }
}

TEST(LpProperty, RandomProgramsAlwaysCertify) {
    std::mt19937_64 rng(777);
    auto draw = [&](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
    };
    int seen[3] = {0, 0, 0};
    for (int trial = 0; trial < 300; ++trial) {
        LinearProgram prog(draw(0, 1) ? Sense::maximize : Sense::minimize);
        const int n = draw(1, 5);
        const int m = draw(1, 5);
        for (int j = 0; j < n; ++j) {
            prog.add_variable("", draw(0, 3) == 0 ? VarKind::free : VarKind::non_negative,
                              q(draw(-3, 3)));
        }
        for (int i = 0; i < m; ++i) {
            std::vector<Term> terms;
            for (int j = 0; j < n; ++j) {
                terms.push_back({static_cast<std::size_t>(j), q(draw(-3, 3))});
            }
            prog.add_constraint(terms, static_cast<Relation>(draw(0, 2)), q(draw(-4, 4)));
        }
        auto sol = solve(prog);
        ++seen[static_cast<int>(sol.status)];
        auto report = check_solution(prog, sol);
        EXPECT_TRUE(report.ok) << "trial " << trial << " status " << to_string(sol.status)
                               << ": " << (report.failures.empty() ? "" : report.failures.front());
    }
    EXPECT_GT(seen[0], 0);
    EXPECT_GT(seen[1], 0);
    EXPECT_GT(seen[2], 0);
}

TEST(LpDump, WritesOneConstraintPerLine) {
    LinearProgram prog(Sense::minimize);
    auto x = prog.add_variable("x", VarKind::free, q(1, 2));
    prog.add_constraint({{x, q(2, 3)}}, Relation::greater_equal, q(-1, 5), "lo");
    std::ostringstream out;
    dump(prog, out);
    EXPECT_EQ(out.str(), "minimize + 1/2 x\nlo: + 2/3 x >= -1/5\nbound x free\n");
}

}  // namespace
}  // namespace amhedge::lp
