#pragma once

#include "amhedge/rational.hpp"

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Exact rational linear programming.
//
// The solver is a dense two-phase tableau simplex with Bland's pivot rule.
// Every solution carries a certificate that check_solution re-verifies
// without touching the solver: primal/dual pair for optimal programs, a
// Farkas vector for infeasible ones and a point plus improving ray for
// unbounded ones.
//
// Size guideline: at most kMaxVariables structural variables and
// kMaxConstraints rows. Larger programs are rejected with LpTooLarge.

namespace amhedge::lp {

inline constexpr std::size_t kMaxVariables = 5000;
inline constexpr std::size_t kMaxConstraints = 5000;

enum class Sense { minimize, maximize };
enum class Relation { less_equal, equal, greater_equal };
enum class VarKind { free, non_negative };
enum class Status { optimal, infeasible, unbounded };

class LpError : public std::runtime_error {
public:
    explicit LpError(const std::string& what) : std::runtime_error(what) {}
};

class LpTooLarge : public LpError {
public:
    explicit LpTooLarge(const std::string& what) : LpError(what) {}
};

struct Term {
    std::size_t var;
    Rational coef;
};

struct Constraint {
    std::vector<Term> terms;
    Relation relation = Relation::equal;
    Rational rhs;
    std::string name;
};

struct Variable {
    std::string name;
    VarKind kind = VarKind::non_negative;
};

class LinearProgram {
public:
    explicit LinearProgram(Sense sense = Sense::maximize) : sense_(sense) {}

    std::size_t add_variable(std::string name, VarKind kind = VarKind::non_negative,
                             Rational objective = 0);
    std::size_t add_constraint(std::vector<Term> terms, Relation relation, Rational rhs,
                               std::string name = {});

    void set_objective(std::size_t var, Rational coef);
    void set_sense(Sense sense) { sense_ = sense; }

    Sense sense() const { return sense_; }
    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Constraint>& constraints() const { return rows_; }
    const std::vector<Rational>& objective() const { return objective_; }
    std::size_t num_variables() const { return vars_.size(); }
    std::size_t num_constraints() const { return rows_.size(); }

    /// Throws LpError when a row references an undeclared variable.
    void check_well_formed() const;

private:
    Sense sense_;
    std::vector<Variable> vars_;
    std::vector<Rational> objective_;
    std::vector<Constraint> rows_;
};

enum class BasisKind { structural_plus, structural_minus, slack, artificial };

struct BasisEntry {
    BasisKind kind;
    std::size_t index;  // variable index for structural entries, row index otherwise
};

struct LpSolution {
    Status status = Status::infeasible;
    Rational value;                 // optimal objective, when optimal
    std::vector<Rational> primal;   // optimal point, or feasible point when unbounded
    std::vector<Rational> dual;     // one multiplier per constraint, when optimal
    std::vector<Rational> farkas;   // one multiplier per constraint, when infeasible
    std::vector<Rational> ray;      // improving direction, when unbounded
    std::vector<BasisEntry> basis;  // final basis, one entry per row
    std::size_t pivots = 0;
};

struct SolveOptions {
    std::size_t max_pivots = 2'000'000;
};

LpSolution solve(const LinearProgram& lp, const SolveOptions& options = {});

/// Re-solves one constraint system under many objectives. Phase one runs
/// once in the constructor; each optimize() call starts from the previous
/// optimal basis. The sense is taken from the program.
class Reoptimizer {
public:
    explicit Reoptimizer(const LinearProgram& lp, const SolveOptions& options = {});
    ~Reoptimizer();
    Reoptimizer(Reoptimizer&&) noexcept;
    Reoptimizer& operator=(Reoptimizer&&) noexcept;

    bool feasible() const;
    /// The phase-one result when the system is infeasible.
    const LpSolution& infeasibility() const;

    LpSolution optimize(std::span<const Rational> objective);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct CheckReport {
    bool ok = true;
    std::vector<std::string> failures;
};

/// Independent verification of a solution's certificate, from the
/// original program data only.
CheckReport check_solution(const LinearProgram& lp, const LpSolution& sol);

/// Plain-text dump: one constraint per line, rationals as "p/q".
void dump(const LinearProgram& lp, std::ostream& out);

std::string to_string(Status status);

}  // namespace amhedge::lp
