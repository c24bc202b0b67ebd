#include "amhedge/bounds.hpp"

#include "amhedge/path_tree.hpp"

#include <algorithm>
#include <future>

namespace amhedge {

namespace {

using lp::LinearProgram;
using lp::LpSolution;
using lp::Relation;
using lp::Term;
using lp::VarKind;

void record(BoundStats& stats, const LinearProgram& prog, const LpSolution& sol) {
    ++stats.lp_solves;
    stats.lp_variables = std::max(stats.lp_variables, prog.num_variables());
    stats.lp_constraints = std::max(stats.lp_constraints, prog.num_constraints());
    stats.pivots += sol.pivots;
}

void check(const BoundOptions& options, const LinearProgram& prog, const LpSolution& sol,
           const std::string& what) {
    if (!options.check_lp) {
        return;
    }
    const auto report = lp::check_solution(prog, sol);
    if (!report.ok) {
        throw std::logic_error(what + ": LP certificate failed to verify: " +
                               report.failures.front());
    }
}

[[noreturn]] void inconsistent() {
    throw ConsistencyError(
        "no martingale path measure is consistent with the given marginals and instrument prices");
}

const Rational& path_price(const PathTree& tree, std::size_t p, std::size_t t) {
    return tree.lattice().price(t, tree.paths()[p].nodes[t]);
}

// Voluntary exercise before T is only worth considering where it pays.
bool may_exercise(const AmericanPayoff& payoff, std::size_t horizon, std::size_t t,
                  const Rational& x) {
    return t < horizon && sgn(payoff.at(t, x)) > 0;
}

std::vector<bool> stop_flags(const PathTree& tree, const AmericanPayoff& payoff) {
    std::vector<bool> out(tree.nodes().size());
    for (std::size_t id = 0; id < out.size(); ++id) {
        out[id] = may_exercise(payoff, tree.horizon(), tree.node(id).time, tree.price(id));
    }
    return out;
}

PathMeasure measure_of(const PathTree& tree, std::span<const Rational> mu) {
    PathMeasure out;
    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        if (sgn(mu[p]) != 0) {
            out.emplace(tree.paths()[p], mu[p]);
        }
    }
    return out;
}

ExerciseSchedule schedule_from_stops(const PathTree& tree, const std::vector<bool>& stop) {
    ExerciseSchedule schedule(tree.num_paths(), static_cast<std::uint8_t>(tree.horizon()));
    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        for (std::size_t t = 0; t < tree.horizon(); ++t) {
            if (stop[tree.prefix_of(p, t)]) {
                schedule[p] = static_cast<std::uint8_t>(t);
                break;
            }
        }
    }
    return schedule;
}

// Best rule against fixed path masses, by backward induction on
// unnormalized values; ties continue.
std::pair<Rational, ExerciseSchedule> best_response(const PathTree& tree,
                                                    const AmericanPayoff& payoff,
                                                    std::span<const Rational> mu) {
    const auto& nodes = tree.nodes();
    std::vector<Rational> mass(nodes.size());
    std::vector<Rational> value(nodes.size());
    std::vector<bool> stop(nodes.size(), false);
    for (std::size_t id = nodes.size(); id-- > 0;) {
        const auto& n = nodes[id];
        const Rational a = payoff.at(n.time, tree.price(id));
        if (n.path) {
            mass[id] = mu[*n.path];
            value[id] = a * mass[id];
            continue;
        }
        Rational cont;
        for (std::size_t c : n.children) {
            mass[id] += mass[c];
            cont += value[c];
        }
        Rational exercise = a * mass[id];
        stop[id] = exercise > cont;
        value[id] = stop[id] ? std::move(exercise) : std::move(cont);
    }
    return {value[tree.root()], schedule_from_stops(tree, stop)};
}

// Sub-replicating portfolio from the duals of the min-measure LP.
HedgeCertificate portfolio_from_duals(const Problem& problem, const PathTree& tree,
                                      const MeasureRows& rows, const std::vector<Rational>& dual) {
    HedgeCertificate out;
    out.cash = dual[rows.total_mass];
    const auto laws = problem.marginals();
    for (std::size_t k = 0; k < laws.size(); ++k) {
        const std::size_t t = laws[k]->time;
        for (std::size_t i = 0; i < rows.marginals[k].size(); ++i) {
            const Rational& units = dual[rows.marginals[k][i]];
            if (sgn(units) != 0) {
                out.statics[t][problem.lattice.price(t, i)] = units;
            }
        }
    }
    for (std::size_t row : rows.instruments) {
        out.instrument_units.push_back(dual[row]);
    }
    for (const auto& [id, row] : rows.martingale) {
        if (sgn(dual[row]) != 0) {
            out.pre_holdings[tree.prefix(id)] = dual[row];
        }
    }
    return out;
}

}  // namespace

std::string to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::strong: return "strong";
        case BoundKind::weak: return "weak";
        case BoundKind::superhedge: return "superhedge";
        case BoundKind::subhedge: return "subhedge";
        case BoundKind::lowest_model: return "lowest_model";
        case BoundKind::lagrangian: return "lagrangian";
    }
    return "unknown";
}

std::optional<BoundKind> parse_bound_kind(std::string_view name) {
    if (name == "lowest") {
        return BoundKind::lowest_model;
    }
    for (BoundKind kind : kAllBoundKinds) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}

BoundResult strong_value(const Problem& problem, const BoundOptions& options) {
    BoundResult result;
    result.kind = BoundKind::strong;
    const PathTree tree(problem.lattice, options.limits.max_paths);
    const auto schedules =
        enumerate_payoff_schedules(tree, problem.payoff, options.limits.max_rules);
    result.stats.paths = tree.num_paths();
    result.stats.rules = schedules.size();

    const LinearProgram prog = measure_program(problem, tree);
    lp::Reoptimizer opt(prog);
    if (!opt.feasible()) {
        check(options, prog, opt.infeasibility(), "strong bound");
        inconsistent();
    }
    LinearProgram checked = prog;
    std::optional<std::size_t> best;
    std::vector<Rational> best_mu;
    for (std::size_t r = 0; r < schedules.size(); ++r) {
        const auto objective = schedule_payoffs(tree, problem.payoff, schedules[r]);
        LpSolution sol = opt.optimize(objective);
        record(result.stats, prog, sol);
        if (options.check_lp) {
            for (std::size_t j = 0; j < objective.size(); ++j) {
                checked.set_objective(j, objective[j]);
            }
            check(options, checked, sol, "strong bound");
        }
        if (!best || sol.value > result.value) {
            best = r;
            result.value = sol.value;
            best_mu = std::move(sol.primal);
        }
    }
    result.certificate =
        StrongCertificate{rule_of(tree, schedules[*best]), measure_of(tree, best_mu)};
    return result;
}

BoundResult weak_value(const Problem& problem, const BoundOptions& options) {
    BoundResult result;
    result.kind = BoundKind::weak;
    const PathTree tree(problem.lattice, options.limits.max_paths);
    const std::size_t horizon = tree.horizon();
    const auto& lattice = problem.lattice;
    result.stats.paths = tree.num_paths();

    LinearProgram prog(lp::Sense::maximize);
    // (exercise time, variable) for each path.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> vars(tree.num_paths());
    std::vector<std::pair<std::size_t, std::size_t>> var_key;
    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        for (std::size_t u = 0; u <= horizon; ++u) {
            const Rational& x = path_price(tree, p, u);
            if (u == horizon || may_exercise(problem.payoff, horizon, u, x)) {
                const std::size_t v = prog.add_variable(
                    "nu" + std::to_string(p) + "_" + std::to_string(u), VarKind::non_negative,
                    problem.payoff.at(u, x));
                vars[p].emplace_back(u, v);
                var_key.emplace_back(p, u);
            }
        }
    }

    std::vector<Term> all;
    for (std::size_t v = 0; v < var_key.size(); ++v) {
        all.push_back({v, 1});
    }
    prog.add_constraint(std::move(all), Relation::equal, 1, "total mass");
    for (const MarginalLaw* law : problem.marginals()) {
        const std::size_t t = law->time;
        std::vector<std::vector<Term>> by_level(lattice.levels[t].size());
        for (std::size_t p = 0; p < tree.num_paths(); ++p) {
            for (const auto& [u, v] : vars[p]) {
                by_level[tree.paths()[p].nodes[t]].push_back({v, 1});
            }
        }
        for (std::size_t i = 0; i < by_level.size(); ++i) {
            prog.add_constraint(std::move(by_level[i]), Relation::equal,
                                law->mass_at(lattice.levels[t][i]),
                                "marginal t=" + std::to_string(t) + " x=" +
                                    to_string(lattice.levels[t][i]));
        }
    }
    for (std::size_t k = 0; k < problem.instruments.size(); ++k) {
        const auto& inst = problem.instruments[k];
        const std::size_t t = inst.maturity_or(horizon);
        std::vector<Term> terms;
        for (std::size_t p = 0; p < tree.num_paths(); ++p) {
            const Rational g = inst.payoff_at(path_price(tree, p, t));
            if (sgn(g) != 0) {
                for (const auto& [u, v] : vars[p]) {
                    terms.push_back({v, g});
                }
            }
        }
        prog.add_constraint(std::move(terms), Relation::equal, inst.price,
                            "instrument " + std::to_string(k));
    }
    // Martingale given the prefix and the exercise status: exercised at
    // u = 0..t (class u) or not yet (class t+1).
    for (std::size_t id : tree.internal_prefixes()) {
        const auto& n = tree.node(id);
        const std::size_t t = n.time;
        std::vector<std::vector<Term>> by_class(t + 2);
        for (std::size_t p = n.first_path; p < n.first_path + n.path_count; ++p) {
            const Rational step = path_price(tree, p, t + 1) - tree.price(id);
            if (sgn(step) == 0) {
                continue;
            }
            for (const auto& [u, v] : vars[p]) {
                by_class[std::min(u, t + 1)].push_back({v, step});
            }
        }
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            if (!by_class[c].empty()) {
                prog.add_constraint(std::move(by_class[c]), Relation::equal, 0,
                                    "martingale prefix " + std::to_string(id) + " class " +
                                        std::to_string(c));
            }
        }
    }

    const LpSolution sol = lp::solve(prog);
    record(result.stats, prog, sol);
    check(options, prog, sol, "weak bound");
    if (sol.status != lp::Status::optimal) {
        inconsistent();
    }
    result.value = sol.value;
    WeakCertificate cert;
    for (std::size_t v = 0; v < var_key.size(); ++v) {
        if (sgn(sol.primal[v]) != 0) {
            cert.mass.emplace(std::make_pair(tree.paths()[var_key[v].first], var_key[v].second),
                              sol.primal[v]);
        }
    }
    result.certificate = std::move(cert);
    return result;
}

BoundResult superhedge(const Problem& problem, const BoundOptions& options) {
    BoundResult result;
    result.kind = BoundKind::superhedge;
    const PathTree tree(problem.lattice, options.limits.max_paths);
    const std::size_t horizon = tree.horizon();
    const auto& lattice = problem.lattice;
    result.stats.paths = tree.num_paths();

    LinearProgram prog(lp::Sense::minimize);
    const std::size_t cash = prog.add_variable("cash", VarKind::free, 1);
    const auto laws = problem.marginals();
    std::vector<std::vector<std::size_t>> statics(laws.size());
    for (std::size_t k = 0; k < laws.size(); ++k) {
        const std::size_t t = laws[k]->time;
        for (const auto& x : lattice.levels[t]) {
            statics[k].push_back(prog.add_variable(
                "static t=" + std::to_string(t) + " x=" + to_string(x), VarKind::free,
                laws[k]->mass_at(x)));
        }
    }
    std::vector<std::size_t> units;
    for (std::size_t j = 0; j < problem.instruments.size(); ++j) {
        units.push_back(prog.add_variable("instrument " + std::to_string(j), VarKind::free,
                                          problem.instruments[j].price));
    }
    // Holdings only matter where the next price can move.
    auto moves = [&](std::size_t id) {
        const auto& n = tree.node(id);
        for (std::size_t c : n.children) {
            if (tree.price(c) != tree.price(id)) {
                return true;
            }
        }
        return false;
    };
    const auto internal = tree.internal_prefixes();
    std::map<std::size_t, std::size_t> pre;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> post;
    for (std::size_t id : internal) {
        if (!moves(id)) {
            continue;
        }
        pre[id] = prog.add_variable("pre " + std::to_string(id), VarKind::free);
        const std::size_t t = tree.node(id).time;
        const auto& path = tree.paths()[tree.node(id).first_path];
        for (std::size_t u = 0; u <= t; ++u) {
            if (may_exercise(problem.payoff, horizon, u, lattice.price(u, path.nodes[u]))) {
                post[{id, u}] = prog.add_variable(
                    "post " + std::to_string(id) + " u=" + std::to_string(u), VarKind::free);
            }
        }
    }

    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        std::vector<Term> base{{cash, 1}};
        for (std::size_t k = 0; k < laws.size(); ++k) {
            base.push_back({statics[k][tree.paths()[p].nodes[laws[k]->time]], 1});
        }
        for (std::size_t j = 0; j < problem.instruments.size(); ++j) {
            const auto& inst = problem.instruments[j];
            const Rational g = inst.payoff_at(path_price(tree, p, inst.maturity_or(horizon)));
            if (sgn(g) != 0) {
                base.push_back({units[j], g});
            }
        }
        for (std::size_t u = 0; u <= horizon; ++u) {
            const Rational& xu = path_price(tree, p, u);
            if (u < horizon && !may_exercise(problem.payoff, horizon, u, xu)) {
                continue;
            }
            std::vector<Term> terms = base;
            for (std::size_t t = 0; t < horizon; ++t) {
                const std::size_t id = tree.prefix_of(p, t);
                const Rational step = path_price(tree, p, t + 1) - path_price(tree, p, t);
                if (sgn(step) == 0) {
                    continue;
                }
                terms.push_back({t < u ? pre.at(id) : post.at({id, u}), step});
            }
            prog.add_constraint(std::move(terms), Relation::greater_equal,
                                problem.payoff.at(u, xu),
                                "path " + std::to_string(p) + " u=" + std::to_string(u));
        }
    }

    const LpSolution sol = lp::solve(prog);
    record(result.stats, prog, sol);
    check(options, prog, sol, "superhedge");
    if (sol.status != lp::Status::optimal) {
        inconsistent();
    }
    result.value = sol.value;
    HedgeCertificate cert;
    cert.cash = sol.primal[cash];
    for (std::size_t k = 0; k < laws.size(); ++k) {
        const std::size_t t = laws[k]->time;
        for (std::size_t i = 0; i < statics[k].size(); ++i) {
            if (sgn(sol.primal[statics[k][i]]) != 0) {
                cert.statics[t][lattice.price(t, i)] = sol.primal[statics[k][i]];
            }
        }
    }
    for (std::size_t v : units) {
        cert.instrument_units.push_back(sol.primal[v]);
    }
    for (const auto& [id, v] : pre) {
        const Rational& delta = sol.primal[v];
        if (sgn(delta) == 0) {
            continue;
        }
        const Prefix prefix = tree.prefix(id);
        cert.pre_holdings[prefix] = delta;
        // After a worthless exercise the pre-exercise strategy simply continues.
        const std::size_t t = tree.node(id).time;
        for (std::size_t u = 0; u <= t; ++u) {
            if (!post.contains({id, u})) {
                cert.post_holdings[{prefix, u}] = delta;
            }
        }
    }
    for (const auto& [key, v] : post) {
        if (sgn(sol.primal[v]) != 0) {
            cert.post_holdings[{tree.prefix(key.first), key.second}] = sol.primal[v];
        }
    }
    result.certificate = std::move(cert);
    return result;
}

BoundResult subhedge(const Problem& problem, const BoundOptions& options) {
    BoundResult result;
    result.kind = BoundKind::subhedge;
    const PathTree tree(problem.lattice, options.limits.max_paths);
    const auto schedules =
        enumerate_payoff_schedules(tree, problem.payoff, options.limits.max_rules);
    result.stats.paths = tree.num_paths();
    result.stats.rules = schedules.size();

    MeasureRows rows;
    LinearProgram prog = measure_program(problem, tree, &rows);
    prog.set_sense(lp::Sense::minimize);
    lp::Reoptimizer opt(prog);
    if (!opt.feasible()) {
        check(options, prog, opt.infeasibility(), "subhedge");
        inconsistent();
    }
    LinearProgram checked = prog;
    std::optional<std::size_t> best;
    std::vector<Rational> best_dual;
    for (std::size_t r = 0; r < schedules.size(); ++r) {
        const auto objective = schedule_payoffs(tree, problem.payoff, schedules[r]);
        LpSolution sol = opt.optimize(objective);
        record(result.stats, prog, sol);
        if (options.check_lp) {
            for (std::size_t j = 0; j < objective.size(); ++j) {
                checked.set_objective(j, objective[j]);
            }
            check(options, checked, sol, "subhedge");
        }
        if (!best || sol.value > result.value) {
            best = r;
            result.value = sol.value;
            best_dual = std::move(sol.dual);
        }
    }
    result.certificate = SubhedgeCertificate{rule_of(tree, schedules[*best]),
                                             portfolio_from_duals(problem, tree, rows, best_dual)};
    return result;
}

BoundResult lowest_model_value(const Problem& problem, const BoundOptions& options) {
    BoundResult result;
    result.kind = BoundKind::lowest_model;
    const PathTree tree(problem.lattice, options.limits.max_paths);
    const std::vector<bool> may_stop = stop_flags(tree, problem.payoff);
    const mpz_class count = count_schedules(tree, may_stop);
    result.stats.paths = tree.num_paths();

    bool eager = false;
    switch (options.lowest) {
        case LowestStrategy::eager: eager = true; break;
        case LowestStrategy::lazy: eager = false; break;
        case LowestStrategy::automatic:
            eager = count <= std::min(options.eager_rule_limit, options.limits.max_rules);
            break;
    }

    const std::size_t paths = tree.num_paths();
    auto build = [&](const std::vector<ExerciseSchedule>& cuts) {
        LinearProgram prog(lp::Sense::minimize);
        std::vector<std::size_t> mu;
        for (std::size_t p = 0; p < paths; ++p) {
            mu.push_back(prog.add_variable("mu" + std::to_string(p)));
        }
        const std::size_t z = prog.add_variable("z", VarKind::free, 1);
        add_measure_rows(prog, problem, tree, mu);
        for (std::size_t r = 0; r < cuts.size(); ++r) {
            std::vector<Term> terms{{z, 1}};
            const auto f = schedule_payoffs(tree, problem.payoff, cuts[r]);
            for (std::size_t p = 0; p < paths; ++p) {
                if (sgn(f[p]) != 0) {
                    terms.push_back({mu[p], -f[p]});
                }
            }
            prog.add_constraint(std::move(terms), Relation::greater_equal, 0,
                                "rule " + std::to_string(r));
        }
        return prog;
    };
    auto solve_master = [&](const std::vector<ExerciseSchedule>& cuts) {
        const LinearProgram prog = build(cuts);
        LpSolution sol = lp::solve(prog);
        record(result.stats, prog, sol);
        check(options, prog, sol, "lowest model");
        if (sol.status != lp::Status::optimal) {
            inconsistent();
        }
        return sol;
    };

    LpSolution sol;
    if (eager) {
        const auto schedules = enumerate_schedules(tree, may_stop, options.limits.max_rules);
        result.stats.rules = schedules.size();
        sol = solve_master(schedules);
        result.stats.iterations = 1;
    } else {
        // Separation by optimal stopping under the incumbent measure.
        std::vector<ExerciseSchedule> cuts{
            ExerciseSchedule(paths, static_cast<std::uint8_t>(tree.horizon()))};
        for (;;) {
            if (++result.stats.iterations > options.max_iterations) {
                throw ConvergenceError("lowest-model cut generation did not converge", 0, 0);
            }
            sol = solve_master(cuts);
            const std::span<const Rational> mu(sol.primal.data(), paths);
            auto [value, schedule] = best_response(tree, problem.payoff, mu);
            if (value <= sol.value) {
                break;
            }
            cuts.push_back(std::move(schedule));
        }
        result.stats.rules = cuts.size();
    }
    result.value = sol.value;
    result.certificate =
        LowestCertificate{measure_of(tree, std::span<const Rational>(sol.primal.data(), paths))};
    return result;
}

BoundResult lagrangian_dual(const Problem& problem, const std::vector<Instrument>& instruments,
                            const BoundOptions& options) {
    BoundResult result;
    result.kind = BoundKind::lagrangian;
    result.stats.paths = PathTree(problem.lattice, options.limits.max_paths).num_paths();
    const std::size_t n = instruments.size();

    struct Cut {
        std::vector<Rational> slope;
        Rational intercept;  // h(beta_k) - g_k . beta_k
        bool operator==(const Cut&) const = default;
    };
    std::vector<Cut> cuts;
    auto master = [&](std::optional<Rational> box) {
        LinearProgram prog(lp::Sense::minimize);
        for (std::size_t i = 0; i < n; ++i) {
            prog.add_variable("beta" + std::to_string(i), VarKind::free);
        }
        const std::size_t z = prog.add_variable("z", VarKind::free, 1);
        for (std::size_t k = 0; k < cuts.size(); ++k) {
            std::vector<Term> terms{{z, 1}};
            for (std::size_t i = 0; i < n; ++i) {
                if (sgn(cuts[k].slope[i]) != 0) {
                    terms.push_back({i, -cuts[k].slope[i]});
                }
            }
            prog.add_constraint(std::move(terms), Relation::greater_equal, cuts[k].intercept,
                                "cut " + std::to_string(k));
        }
        if (box) {
            for (std::size_t i = 0; i < n; ++i) {
                prog.add_constraint({{i, 1}}, Relation::less_equal, *box);
                prog.add_constraint({{i, 1}}, Relation::greater_equal, -*box);
            }
        }
        LpSolution sol = lp::solve(prog);
        record(result.stats, prog, sol);
        check(options, prog, sol, "lagrangian master");
        return sol;
    };

    std::vector<Rational> beta(n);
    std::optional<Rational> best;
    std::vector<Rational> best_beta;
    std::optional<Rational> lower;
    Rational box = 8;
    for (;;) {
        if (++result.stats.iterations > options.max_iterations) {
            const Rational lo = lower.value_or(Rational(0));
            throw ConvergenceError("lagrangian cutting plane did not converge within " +
                                       std::to_string(options.max_iterations) +
                                       " iterations; bracket [" +
                                       (lower ? to_string(*lower) : std::string("-inf")) + ", " +
                                       to_string(*best) + "]",
                                   lo, *best);
        }
        const PenalizedValue h = robust_penalized_value(problem, instruments, beta);
        if (!best || h.value < *best) {
            best = h.value;
            best_beta = beta;
        }
        Cut cut{h.subgradient, h.value};
        for (std::size_t i = 0; i < n; ++i) {
            cut.intercept -= h.subgradient[i] * beta[i];
        }
        if (std::find(cuts.begin(), cuts.end(), cut) == cuts.end()) {
            cuts.push_back(std::move(cut));
        }

        LpSolution sol = master(std::nullopt);
        if (sol.status == lp::Status::optimal) {
            lower = sol.value;
            if (*lower == *best) {
                break;
            }
        } else {
            sol = master(box);
            box *= 2;
        }
        beta.assign(sol.primal.begin(), sol.primal.begin() + static_cast<long>(n));
    }
    result.value = *best;
    result.certificate = LagrangianCertificate{instruments, best_beta, *lower};
    return result;
}

BoundResult lagrangian_dual(const Problem& problem, const BoundOptions& options) {
    return lagrangian_dual(problem, calibration_instruments(problem), options);
}

BoundResult compute_bound(BoundKind kind, const Problem& problem, const BoundOptions& options) {
    switch (kind) {
        case BoundKind::strong: return strong_value(problem, options);
        case BoundKind::weak: return weak_value(problem, options);
        case BoundKind::superhedge: return superhedge(problem, options);
        case BoundKind::subhedge: return subhedge(problem, options);
        case BoundKind::lowest_model: return lowest_model_value(problem, options);
        case BoundKind::lagrangian: return lagrangian_dual(problem, options);
    }
    throw std::invalid_argument("unknown bound kind");
}

const BoundResult& DualityReport::get(BoundKind kind) const {
    for (const auto& b : bounds) {
        if (b.kind == kind) {
            return b;
        }
    }
    throw std::out_of_range("report has no " + to_string(kind) + " bound");
}

DualityReport duality_report(const Problem& problem, const BoundOptions& options, bool parallel) {
    DualityReport report;
    if (parallel) {
        std::vector<std::future<BoundResult>> jobs;
        for (BoundKind kind : kAllBoundKinds) {
            jobs.push_back(std::async(std::launch::async,
                                      [&, kind] { return compute_bound(kind, problem, options); }));
        }
        for (auto& job : jobs) {
            report.bounds.push_back(job.get());
        }
    } else {
        for (BoundKind kind : kAllBoundKinds) {
            report.bounds.push_back(compute_bound(kind, problem, options));
        }
    }

    const Rational& strong = report.get(BoundKind::strong).value;
    const Rational& weak = report.get(BoundKind::weak).value;
    const Rational& hedge = report.get(BoundKind::superhedge).value;
    const Rational& sub = report.get(BoundKind::subhedge).value;
    const Rational& lowest = report.get(BoundKind::lowest_model).value;
    const Rational& lagrangian = report.get(BoundKind::lagrangian).value;
    report.strong_weak = weak - strong;
    report.weak_superhedge = hedge - weak;
    report.subhedge_lowest = lowest - sub;

    auto& flags = report.flags;
    if (sgn(report.strong_weak) > 0) {
        flags.push_back("natural-filtration gap present");
    }
    if (sgn(report.strong_weak) < 0) {
        flags.push_back("invariant violated: strong exceeds weak");
    }
    if (sgn(report.weak_superhedge) != 0) {
        flags.push_back("invariant violated: weak differs from superhedge");
    }
    if (sgn(report.subhedge_lowest) != 0) {
        flags.push_back("invariant violated: subhedge differs from lowest_model");
    }
    if (sub > strong) {
        flags.push_back("invariant violated: subhedge exceeds strong");
    }
    if (lagrangian != hedge) {
        flags.push_back("invariant violated: lagrangian differs from superhedge");
    }
    for (const auto& b : report.bounds) {
        const auto check = verify_certificate(problem, b.certificate, b.value, options.limits);
        if (!check.ok()) {
            flags.push_back("certificate for " + to_string(b.kind) +
                            " failed: " + check.failures.front());
        }
    }
    return report;
}

}  // namespace amhedge
