#include "amhedge/lp.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace amhedge::lp {

using amhedge::to_string;

std::size_t LinearProgram::add_variable(std::string name, VarKind kind, Rational objective) {
    vars_.push_back(Variable{std::move(name), kind});
    objective_.push_back(std::move(objective));
    return vars_.size() - 1;
}

std::size_t LinearProgram::add_constraint(std::vector<Term> terms, Relation relation,
                                          Rational rhs, std::string name) {
    rows_.push_back(Constraint{std::move(terms), relation, std::move(rhs), std::move(name)});
    return rows_.size() - 1;
}

void LinearProgram::set_objective(std::size_t var, Rational coef) {
    if (var >= vars_.size()) {
        throw LpError("objective references undeclared variable " + std::to_string(var));
    }
    objective_[var] = std::move(coef);
}

void LinearProgram::check_well_formed() const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        for (const auto& term : rows_[i].terms) {
            if (term.var >= vars_.size()) {
                throw LpError("constraint " + std::to_string(i) +
                              " references undeclared variable " + std::to_string(term.var));
            }
        }
    }
}

std::string to_string(Status status) {
    switch (status) {
    case Status::optimal:
        return "optimal";
    case Status::infeasible:
        return "infeasible";
    case Status::unbounded:
        return "unbounded";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Tableau simplex

struct Reoptimizer::Impl {
    const LinearProgram* lp = nullptr;
    SolveOptions options;

    std::size_t m = 0;
    std::vector<BasisEntry> columns;
    std::vector<std::vector<Rational>> tableau;
    std::vector<Rational> rhs;
    std::vector<std::size_t> basis;
    std::vector<int> row_sign;
    std::vector<std::size_t> artificial_of_row;
    std::vector<std::optional<std::size_t>> slack_of_row;
    std::vector<std::size_t> plus_col;
    std::vector<std::optional<std::size_t>> minus_col;

    std::vector<Rational> cost;
    std::vector<Rational> reduced;
    Rational objective_value;
    std::vector<bool> enterable;
    std::size_t pivots = 0;

    bool is_feasible = false;
    LpSolution infeasible_solution;

    void build();
    void pivot(std::size_t row, std::size_t col);
    void price_out();
    // Returns the entering column when unbounded, nullopt when optimal.
    std::optional<std::size_t> run();
    void phase_one();
    LpSolution phase_two(std::span<const Rational> objective, Sense sense);
    std::vector<Rational> structural_values(const std::vector<Rational>& column_values) const;
    std::vector<BasisEntry> basis_description() const;
};

void Reoptimizer::Impl::build() {
    const auto& rows = lp->constraints();
    const auto& vars = lp->variables();
    m = rows.size();
    if (vars.size() > kMaxVariables || m > kMaxConstraints) {
        std::ostringstream msg;
        msg << "linear program with " << vars.size() << " variables and " << m
            << " constraints exceeds the dense solver limit (" << kMaxVariables << " x "
            << kMaxConstraints << ")";
        throw LpTooLarge(msg.str());
    }
    lp->check_well_formed();

    plus_col.resize(vars.size());
    minus_col.assign(vars.size(), std::nullopt);
    for (std::size_t j = 0; j < vars.size(); ++j) {
        plus_col[j] = columns.size();
        columns.push_back({BasisKind::structural_plus, j});
        if (vars[j].kind == VarKind::free) {
            minus_col[j] = columns.size();
            columns.push_back({BasisKind::structural_minus, j});
        }
    }
    slack_of_row.assign(m, std::nullopt);
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].relation != Relation::equal) {
            slack_of_row[i] = columns.size();
            columns.push_back({BasisKind::slack, i});
        }
    }
    artificial_of_row.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        artificial_of_row[i] = columns.size();
        columns.push_back({BasisKind::artificial, i});
    }

    const std::size_t n = columns.size();
    tableau.assign(m, std::vector<Rational>(n));
    rhs.resize(m);
    row_sign.resize(m);
    basis.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const int sign = rows[i].rhs < 0 ? -1 : 1;
        row_sign[i] = sign;
        auto& row = tableau[i];
        for (const auto& term : rows[i].terms) {
            row[plus_col[term.var]] += sign * term.coef;
            if (minus_col[term.var]) {
                row[*minus_col[term.var]] -= sign * term.coef;
            }
        }
        if (slack_of_row[i]) {
            row[*slack_of_row[i]] = rows[i].relation == Relation::less_equal ? sign : -sign;
        }
        row[artificial_of_row[i]] = 1;
        rhs[i] = sign * rows[i].rhs;
        basis[i] = (slack_of_row[i] && row[*slack_of_row[i]] == 1) ? *slack_of_row[i]
                                                                   : artificial_of_row[i];
    }
    enterable.assign(n, true);
    for (std::size_t i = 0; i < m; ++i) {
        enterable[artificial_of_row[i]] = false;
    }
}

void Reoptimizer::Impl::pivot(std::size_t row, std::size_t col) {
    if (++pivots > options.max_pivots) {
        throw LpError("simplex pivot limit exceeded (" + std::to_string(options.max_pivots) +
                      ")");
    }
    auto& prow = tableau[row];
    const Rational inv = 1 / prow[col];
    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < prow.size(); ++j) {
        if (sgn(prow[j]) != 0) {
            prow[j] *= inv;
            nonzero.push_back(j);
        }
    }
    rhs[row] *= inv;

    auto eliminate = [&](std::vector<Rational>& target, Rational& target_rhs) {
        if (sgn(target[col]) == 0) {
            return;
        }
        const Rational factor = target[col];
        for (std::size_t j : nonzero) {
            target[j] -= factor * prow[j];
        }
        target_rhs -= factor * rhs[row];
    };
    for (std::size_t i = 0; i < m; ++i) {
        if (i != row) {
            eliminate(tableau[i], rhs[i]);
        }
    }
    // The objective row stores reduced costs d_j and -z in its rhs slot.
    Rational neg_objective = -objective_value;
    eliminate(reduced, neg_objective);
    objective_value = -neg_objective;
    basis[row] = col;
}

void Reoptimizer::Impl::price_out() {
    const std::size_t n = columns.size();
    reduced = cost;
    objective_value = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const Rational& cb = cost[basis[i]];
        if (sgn(cb) == 0) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (sgn(tableau[i][j]) != 0) {
                reduced[j] -= cb * tableau[i][j];
            }
        }
        objective_value += cb * rhs[i];
    }
}

std::optional<std::size_t> Reoptimizer::Impl::run() {
    const std::size_t n = columns.size();
    for (;;) {
        // Bland: lowest-index improving column enters.
        std::optional<std::size_t> entering;
        for (std::size_t j = 0; j < n; ++j) {
            if (enterable[j] && sgn(reduced[j]) < 0) {
                entering = j;
                break;
            }
        }
        if (!entering) {
            return std::nullopt;
        }
        const std::size_t q = *entering;
        // Bland: minimum ratio, ties to the lowest-index basic column.
        std::optional<std::size_t> leaving;
        for (std::size_t i = 0; i < m; ++i) {
            if (sgn(tableau[i][q]) <= 0) {
                continue;
            }
            if (!leaving) {
                leaving = i;
                continue;
            }
            const std::size_t k = *leaving;
            const int order = cmp(rhs[i] * tableau[k][q], rhs[k] * tableau[i][q]);
            if (order < 0 || (order == 0 && basis[i] < basis[k])) {
                leaving = i;
            }
        }
        if (!leaving) {
            return q;
        }
        pivot(*leaving, q);
    }
}

void Reoptimizer::Impl::phase_one() {
    const std::size_t n = columns.size();
    cost.assign(n, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
        cost[artificial_of_row[i]] = 1;
    }
    price_out();
    if (run()) {
        throw LpError("phase one reported unbounded; this cannot happen");
    }
    if (sgn(objective_value) > 0) {
        is_feasible = false;
        LpSolution sol;
        sol.status = Status::infeasible;
        sol.farkas.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            // y = c_B B^-1, read off the artificial column (cost 1).
            sol.farkas[i] = row_sign[i] * (1 - reduced[artificial_of_row[i]]);
        }
        sol.basis = basis_description();
        sol.pivots = pivots;
        infeasible_solution = std::move(sol);
        return;
    }
    is_feasible = true;
    // Drive zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and keep their artificial at zero.
    for (std::size_t i = 0; i < m; ++i) {
        if (columns[basis[i]].kind != BasisKind::artificial) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (columns[j].kind != BasisKind::artificial && sgn(tableau[i][j]) != 0) {
                pivot(i, j);
                break;
            }
        }
    }
}

std::vector<Rational> Reoptimizer::Impl::structural_values(
    const std::vector<Rational>& column_values) const {
    std::vector<Rational> x(lp->num_variables());
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = column_values[plus_col[j]];
        if (minus_col[j]) {
            x[j] -= column_values[*minus_col[j]];
        }
    }
    return x;
}

std::vector<BasisEntry> Reoptimizer::Impl::basis_description() const {
    std::vector<BasisEntry> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        out.push_back(columns[basis[i]]);
    }
    return out;
}

LpSolution Reoptimizer::Impl::phase_two(std::span<const Rational> objective, Sense sense) {
    const std::size_t n = columns.size();
    if (objective.size() != lp->num_variables()) {
        throw LpError("objective has " + std::to_string(objective.size()) +
                      " coefficients for " + std::to_string(lp->num_variables()) +
                      " variables");
    }
    const int flip = sense == Sense::maximize ? -1 : 1;
    cost.assign(n, Rational(0));
    for (std::size_t j = 0; j < objective.size(); ++j) {
        cost[plus_col[j]] = flip * objective[j];
        if (minus_col[j]) {
            cost[*minus_col[j]] = -flip * objective[j];
        }
    }
    price_out();
    const std::size_t start_pivots = pivots;
    const auto unbounded_column = run();

    std::vector<Rational> column_values(n);
    for (std::size_t i = 0; i < m; ++i) {
        column_values[basis[i]] = rhs[i];
    }
    LpSolution sol;
    sol.primal = structural_values(column_values);
    sol.basis = basis_description();
    sol.pivots = pivots - start_pivots;
    if (unbounded_column) {
        sol.status = Status::unbounded;
        std::vector<Rational> direction(n);
        direction[*unbounded_column] = 1;
        for (std::size_t i = 0; i < m; ++i) {
            direction[basis[i]] = -tableau[i][*unbounded_column];
        }
        sol.ray = structural_values(direction);
        return sol;
    }
    sol.status = Status::optimal;
    sol.value = flip * objective_value;
    sol.dual.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        // Artificial cost is zero in phase two, so y_i = -d_{a_i}.
        sol.dual[i] = -flip * row_sign[i] * reduced[artificial_of_row[i]];
    }
    return sol;
}

Reoptimizer::Reoptimizer(const LinearProgram& lp, const SolveOptions& options)
    : impl_(std::make_unique<Impl>()) {
    impl_->lp = &lp;
    impl_->options = options;
    impl_->build();
    impl_->phase_one();
}

Reoptimizer::~Reoptimizer() = default;
Reoptimizer::Reoptimizer(Reoptimizer&&) noexcept = default;
Reoptimizer& Reoptimizer::operator=(Reoptimizer&&) noexcept = default;

bool Reoptimizer::feasible() const {
    return impl_->is_feasible;
}

const LpSolution& Reoptimizer::infeasibility() const {
    return impl_->infeasible_solution;
}

LpSolution Reoptimizer::optimize(std::span<const Rational> objective) {
    if (!impl_->is_feasible) {
        return impl_->infeasible_solution;
    }
    return impl_->phase_two(objective, impl_->lp->sense());
}

LpSolution solve(const LinearProgram& lp, const SolveOptions& options) {
    Reoptimizer engine(lp, options);
    if (!engine.feasible()) {
        return engine.infeasibility();
    }
    LpSolution sol = engine.optimize(lp.objective());
    return sol;
}

// ---------------------------------------------------------------------------
// Certificate checking

namespace {

std::string row_label(const LinearProgram& lp, std::size_t i) {
    const auto& name = lp.constraints()[i].name;
    return "row " + std::to_string(i) + (name.empty() ? "" : " (" + name + ")");
}

std::string var_label(const LinearProgram& lp, std::size_t j) {
    const auto& name = lp.variables()[j].name;
    return "variable " + std::to_string(j) + (name.empty() ? "" : " (" + name + ")");
}

Rational row_activity(const Constraint& row, std::span<const Rational> x) {
    Rational total;
    for (const auto& term : row.terms) {
        total += term.coef * x[term.var];
    }
    return total;
}

// Column sums of y^T A.
std::vector<Rational> transpose_product(const LinearProgram& lp, std::span<const Rational> y) {
    std::vector<Rational> out(lp.num_variables());
    const auto& rows = lp.constraints();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (sgn(y[i]) == 0) {
            continue;
        }
        for (const auto& term : rows[i].terms) {
            out[term.var] += y[i] * term.coef;
        }
    }
    return out;
}

void check_primal(const LinearProgram& lp, std::span<const Rational> x, CheckReport& report) {
    const auto& rows = lp.constraints();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Rational activity = row_activity(rows[i], x);
        const int c = cmp(activity, rows[i].rhs);
        const bool ok = rows[i].relation == Relation::equal          ? c == 0
                      : rows[i].relation == Relation::less_equal     ? c <= 0
                                                                     : c >= 0;
        if (!ok) {
            report.failures.push_back("primal infeasible at " + row_label(lp, i) +
                                      ": activity " + to_string(activity) + " vs rhs " +
                                      to_string(rows[i].rhs));
        }
    }
    for (std::size_t j = 0; j < lp.num_variables(); ++j) {
        if (lp.variables()[j].kind == VarKind::non_negative && sgn(x[j]) < 0) {
            report.failures.push_back("primal infeasible: " + var_label(lp, j) + " is negative");
        }
    }
}

// Sign a row multiplier must have; +1 means >= 0, -1 means <= 0, 0 free.
// Expressed for a maximization dual (shadow-price convention).
int dual_sign_for_max(Relation rel) {
    switch (rel) {
    case Relation::less_equal:
        return 1;
    case Relation::greater_equal:
        return -1;
    case Relation::equal:
        return 0;
    }
    return 0;
}

}  // namespace

CheckReport check_solution(const LinearProgram& lp, const LpSolution& sol) {
    CheckReport report;
    const std::size_t n = lp.num_variables();
    const std::size_t m = lp.num_constraints();
    const auto& rows = lp.constraints();
    const auto& c = lp.objective();
    auto fail = [&](std::string msg) { report.failures.push_back(std::move(msg)); };

    switch (sol.status) {
    case Status::optimal: {
        if (sol.primal.size() != n || sol.dual.size() != m) {
            fail("certificate shape mismatch");
            break;
        }
        check_primal(lp, sol.primal, report);
        // For minimization the multiplier signs flip.
        const int sense_sign = lp.sense() == Sense::maximize ? 1 : -1;
        for (std::size_t i = 0; i < m; ++i) {
            const int required = dual_sign_for_max(rows[i].relation) * sense_sign;
            if (required != 0 && sgn(sol.dual[i]) * required < 0) {
                fail("dual sign violated at " + row_label(lp, i));
            }
        }
        const auto aty = transpose_product(lp, sol.dual);
        for (std::size_t j = 0; j < n; ++j) {
            const Rational gap = aty[j] - c[j];  // max: must be >= 0; min: <= 0
            if (lp.variables()[j].kind == VarKind::free) {
                if (sgn(gap) != 0) {
                    fail("dual infeasible at " + var_label(lp, j) + ": reduced cost " +
                         to_string(gap) + " on a free variable");
                }
            } else if (sgn(gap) * sense_sign < 0) {
                fail("dual infeasible at " + var_label(lp, j) + ": reduced cost " +
                     to_string(gap));
            } else if (sgn(gap) != 0 && sgn(sol.primal[j]) != 0) {
                fail("complementary slackness violated at " + var_label(lp, j));
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (sgn(sol.dual[i]) != 0 && row_activity(rows[i], sol.primal) != rows[i].rhs) {
                fail("complementary slackness violated at " + row_label(lp, i));
            }
        }
        Rational primal_obj;
        for (std::size_t j = 0; j < n; ++j) {
            primal_obj += c[j] * sol.primal[j];
        }
        Rational dual_obj;
        for (std::size_t i = 0; i < m; ++i) {
            dual_obj += rows[i].rhs * sol.dual[i];
        }
        if (primal_obj != sol.value) {
            fail("stated value " + to_string(sol.value) + " differs from primal objective " +
                 to_string(primal_obj));
        }
        if (dual_obj != primal_obj) {
            fail("objective equality failed: primal " + to_string(primal_obj) + " vs dual " +
                 to_string(dual_obj));
        }
        break;
    }
    case Status::infeasible: {
        if (sol.farkas.size() != m) {
            fail("Farkas certificate shape mismatch");
            break;
        }
        // y^T A x >= y^T b for every feasible x; combined with y^T A <= 0
        // on x >= 0 and y^T b > 0 this is a contradiction.
        for (std::size_t i = 0; i < m; ++i) {
            const int required = -dual_sign_for_max(rows[i].relation);
            if (required != 0 && sgn(sol.farkas[i]) * required < 0) {
                fail("Farkas sign violated at " + row_label(lp, i));
            }
        }
        const auto aty = transpose_product(lp, sol.farkas);
        for (std::size_t j = 0; j < n; ++j) {
            const bool ok = lp.variables()[j].kind == VarKind::free ? sgn(aty[j]) == 0
                                                                    : sgn(aty[j]) <= 0;
            if (!ok) {
                fail("Farkas column condition violated at " + var_label(lp, j));
            }
        }
        Rational yb;
        for (std::size_t i = 0; i < m; ++i) {
            yb += sol.farkas[i] * rows[i].rhs;
        }
        if (sgn(yb) <= 0) {
            fail("Farkas certificate has non-positive y^T b = " + to_string(yb));
        }
        break;
    }
    case Status::unbounded: {
        if (sol.primal.size() != n || sol.ray.size() != n) {
            fail("unbounded certificate shape mismatch");
            break;
        }
        check_primal(lp, sol.primal, report);
        for (std::size_t i = 0; i < m; ++i) {
            const Rational a = row_activity(rows[i], sol.ray);
            const bool ok = rows[i].relation == Relation::equal        ? sgn(a) == 0
                          : rows[i].relation == Relation::less_equal   ? sgn(a) <= 0
                                                                       : sgn(a) >= 0;
            if (!ok) {
                fail("ray leaves the feasible region at " + row_label(lp, i));
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (lp.variables()[j].kind == VarKind::non_negative && sgn(sol.ray[j]) < 0) {
                fail("ray decreases non-negative " + var_label(lp, j));
            }
        }
        Rational slope;
        for (std::size_t j = 0; j < n; ++j) {
            slope += c[j] * sol.ray[j];
        }
        const bool improving = lp.sense() == Sense::maximize ? sgn(slope) > 0 : sgn(slope) < 0;
        if (!improving) {
            fail("ray is not improving (slope " + to_string(slope) + ")");
        }
        break;
    }
    }
    report.ok = report.failures.empty();
    return report;
}

void dump(const LinearProgram& lp, std::ostream& out) {
    auto var_name = [&](std::size_t j) {
        const auto& name = lp.variables()[j].name;
        return name.empty() ? "x" + std::to_string(j) : name;
    };
    out << (lp.sense() == Sense::maximize ? "maximize" : "minimize");
    for (std::size_t j = 0; j < lp.num_variables(); ++j) {
        if (sgn(lp.objective()[j]) != 0) {
            out << " + " << to_string(lp.objective()[j]) << " " << var_name(j);
        }
    }
    out << "\n";
    for (const auto& row : lp.constraints()) {
        out << (row.name.empty() ? "row" : row.name) << ":";
        for (const auto& term : row.terms) {
            out << " + " << to_string(term.coef) << " " << var_name(term.var);
        }
        out << (row.relation == Relation::equal          ? " = "
                : row.relation == Relation::less_equal   ? " <= "
                                                         : " >= ")
            << to_string(row.rhs) << "\n";
    }
    for (std::size_t j = 0; j < lp.num_variables(); ++j) {
        out << "bound " << var_name(j)
            << (lp.variables()[j].kind == VarKind::free ? " free" : " >= 0") << "\n";
    }
}

}  // namespace amhedge::lp
