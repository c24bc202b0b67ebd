#include "amhedge/path_tree.hpp"

#include <stdexcept>

namespace amhedge {

PathTree::PathTree(PriceLattice lattice, std::size_t max_paths) : lattice_(std::move(lattice)) {
    const mpz_class total = count_paths(lattice_);
    if (total > max_paths) {
        throw EnumerationLimit("paths", max_paths, total);
    }
    const std::size_t horizon = lattice_.horizon();

    // Iterative preorder DFS, children in increasing node order.
    struct Frame {
        std::size_t id;
        std::size_t next_child;
    };
    nodes_.push_back(Node{0, 0, std::nullopt, {}, 0, 0, std::nullopt});
    index_[Prefix{0}] = 0;
    Prefix current{0};
    std::vector<Frame> stack{{0, 0}};
    while (!stack.empty()) {
        Frame& frame = stack.back();
        const std::size_t id = frame.id;
        const std::size_t t = nodes_[id].time;
        if (t == horizon) {
            nodes_[id].first_path = paths_.size();
            nodes_[id].path_count = 1;
            nodes_[id].path = paths_.size();
            paths_.push_back(Path{current});
            stack.pop_back();
            current.pop_back();
            continue;
        }
        const auto& succ = lattice_.successors[t][nodes_[id].node];
        if (frame.next_child == 0) {
            nodes_[id].first_path = paths_.size();
        }
        if (frame.next_child == succ.size()) {
            nodes_[id].path_count = paths_.size() - nodes_[id].first_path;
            stack.pop_back();
            current.pop_back();
            continue;
        }
        const NodeIndex child_node = succ[frame.next_child++];
        const std::size_t child = nodes_.size();
        nodes_.push_back(Node{t + 1, child_node, id, {}, 0, 0, std::nullopt});
        nodes_[id].children.push_back(child);
        current.push_back(child_node);
        index_[current] = child;
        stack.push_back({child, 0});
    }

    path_prefix_.assign(paths_.size(), std::vector<std::size_t>(horizon + 1));
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        for (std::size_t p = n.first_path; p < n.first_path + n.path_count; ++p) {
            path_prefix_[p][n.time] = id;
        }
    }
}

Prefix PathTree::prefix(std::size_t id) const {
    Prefix out(nodes_[id].time + 1);
    std::optional<std::size_t> cur = id;
    while (cur) {
        out[nodes_[*cur].time] = nodes_[*cur].node;
        cur = nodes_[*cur].parent;
    }
    return out;
}

std::optional<std::size_t> PathTree::find(const Prefix& prefix) const {
    auto it = index_.find(prefix);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const Rational& PathTree::price(std::size_t id) const {
    return lattice_.price(nodes_[id].time, nodes_[id].node);
}

std::vector<std::size_t> PathTree::internal_prefixes() const {
    std::vector<std::size_t> out;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        if (nodes_[id].time < horizon()) {
            out.push_back(id);
        }
    }
    return out;
}

ExerciseSchedule schedule_of(const PathTree& tree, const StoppingRule& rule) {
    ExerciseSchedule schedule(tree.num_paths());
    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        schedule[p] = static_cast<std::uint8_t>(rule.exercise_time(tree.paths()[p]));
    }
    return schedule;
}

StoppingRule rule_of(const PathTree& tree, const ExerciseSchedule& schedule) {
    StoppingRule rule;
    for (std::size_t id : tree.internal_prefixes()) {
        const auto& n = tree.node(id);
        if (schedule[n.first_path] >= n.time) {
            rule.decisions[tree.prefix(id)] = schedule[n.first_path] == n.time;
        }
    }
    return rule;
}

namespace {

mpz_class count_below(const PathTree& tree, const std::vector<bool>& may_stop, std::size_t id) {
    const auto& n = tree.node(id);
    if (n.time == tree.horizon()) {
        return 1;
    }
    mpz_class product = 1;
    for (std::size_t child : n.children) {
        product *= count_below(tree, may_stop, child);
    }
    return product + (may_stop[id] ? 1 : 0);
}

// Schedules restricted to the block of paths below id.
std::vector<ExerciseSchedule> schedules_below(const PathTree& tree,
                                              const std::vector<bool>& may_stop,
                                              std::size_t id) {
    const auto& n = tree.node(id);
    if (n.time == tree.horizon()) {
        return {ExerciseSchedule{static_cast<std::uint8_t>(n.time)}};
    }
    std::vector<ExerciseSchedule> out;
    if (may_stop[id]) {
        out.push_back(ExerciseSchedule(n.path_count, static_cast<std::uint8_t>(n.time)));
    }
    std::vector<std::vector<ExerciseSchedule>> per_child;
    per_child.reserve(n.children.size());
    for (std::size_t child : n.children) {
        per_child.push_back(schedules_below(tree, may_stop, child));
    }
    // Odometer over the children, last child fastest.
    std::vector<std::size_t> digit(per_child.size(), 0);
    for (;;) {
        ExerciseSchedule combined;
        combined.reserve(n.path_count);
        for (std::size_t c = 0; c < per_child.size(); ++c) {
            const auto& part = per_child[c][digit[c]];
            combined.insert(combined.end(), part.begin(), part.end());
        }
        out.push_back(std::move(combined));
        std::size_t k = per_child.size();
        while (k > 0) {
            --k;
            if (++digit[k] < per_child[k].size()) {
                break;
            }
            digit[k] = 0;
            if (k == 0) {
                return out;
            }
        }
        if (per_child.empty()) {
            return out;
        }
    }
}

}  // namespace

mpz_class count_schedules(const PathTree& tree, const std::vector<bool>& may_stop) {
    return count_below(tree, may_stop, tree.root());
}

std::vector<ExerciseSchedule> enumerate_schedules(const PathTree& tree,
                                                  const std::vector<bool>& may_stop,
                                                  std::size_t max_rules) {
    const mpz_class total = count_schedules(tree, may_stop);
    if (total > max_rules) {
        throw EnumerationLimit("stopping rules", max_rules, total);
    }
    return schedules_below(tree, may_stop, tree.root());
}

std::vector<ExerciseSchedule> enumerate_payoff_schedules(const PathTree& tree,
                                                         const AmericanPayoff& payoff,
                                                         std::size_t max_rules) {
    std::vector<bool> may_stop(tree.nodes().size(), false);
    for (std::size_t id = 0; id < may_stop.size(); ++id) {
        const auto& n = tree.node(id);
        may_stop[id] = n.time < tree.horizon() && sgn(payoff.at(n.time, tree.price(id))) > 0;
    }
    return enumerate_schedules(tree, may_stop, max_rules);
}

std::vector<Rational> schedule_payoffs(const PathTree& tree, const AmericanPayoff& payoff,
                                       const ExerciseSchedule& schedule) {
    std::vector<Rational> out(tree.num_paths());
    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        const std::size_t u = schedule[p];
        out[p] = payoff.at(u, tree.lattice().price(u, tree.paths()[p].nodes[u]));
    }
    return out;
}

MeasureRows add_measure_rows(lp::LinearProgram& prog, const Problem& problem,
                             const PathTree& tree, const std::vector<std::size_t>& path_var) {
    using lp::Relation;
    using lp::Term;
    const auto& lattice = tree.lattice();
    const std::size_t horizon = tree.horizon();
    MeasureRows rows;

    std::vector<Term> all;
    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        all.push_back({path_var[p], 1});
    }
    rows.total_mass = prog.add_constraint(std::move(all), Relation::equal, 1, "total mass");

    for (const MarginalLaw* law : problem.marginals()) {
        const std::size_t t = law->time;
        std::vector<std::vector<Term>> by_level(lattice.levels[t].size());
        for (std::size_t p = 0; p < tree.num_paths(); ++p) {
            by_level[tree.paths()[p].nodes[t]].push_back({path_var[p], 1});
        }
        std::vector<std::size_t> level_rows;
        for (std::size_t i = 0; i < by_level.size(); ++i) {
            level_rows.push_back(prog.add_constraint(
                std::move(by_level[i]), Relation::equal, law->mass_at(lattice.levels[t][i]),
                "marginal t=" + std::to_string(t) + " x=" + to_string(lattice.levels[t][i])));
        }
        rows.marginals.push_back(std::move(level_rows));
    }

    for (std::size_t k = 0; k < problem.instruments.size(); ++k) {
        const auto& inst = problem.instruments[k];
        const std::size_t t = inst.maturity_or(horizon);
        std::vector<Term> terms;
        for (std::size_t p = 0; p < tree.num_paths(); ++p) {
            Rational g = inst.payoff_at(lattice.price(t, tree.paths()[p].nodes[t]));
            if (sgn(g) != 0) {
                terms.push_back({path_var[p], std::move(g)});
            }
        }
        rows.instruments.push_back(prog.add_constraint(std::move(terms), Relation::equal,
                                                       inst.price,
                                                       "instrument " + std::to_string(k)));
    }

    for (std::size_t id : tree.internal_prefixes()) {
        const auto& n = tree.node(id);
        const Rational& x = tree.price(id);
        std::vector<Term> terms;
        for (std::size_t p = n.first_path; p < n.first_path + n.path_count; ++p) {
            Rational step = lattice.price(n.time + 1, tree.paths()[p].nodes[n.time + 1]) - x;
            if (sgn(step) != 0) {
                terms.push_back({path_var[p], std::move(step)});
            }
        }
        if (!terms.empty()) {
            rows.martingale[id] = prog.add_constraint(std::move(terms), Relation::equal, 0,
                                                      "martingale prefix " + std::to_string(id));
        }
    }
    return rows;
}

lp::LinearProgram measure_program(const Problem& problem, const PathTree& tree,
                                  MeasureRows* rows) {
    lp::LinearProgram prog(lp::Sense::maximize);
    std::vector<std::size_t> vars;
    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        vars.push_back(prog.add_variable("mu" + std::to_string(p)));
    }
    MeasureRows r = add_measure_rows(prog, problem, tree, vars);
    if (rows) {
        *rows = std::move(r);
    }
    return prog;
}

}  // namespace amhedge
