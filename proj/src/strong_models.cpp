#include "amhedge/strong_models.hpp"

#include <algorithm>

namespace amhedge {

namespace {

std::string prefix_label(const PriceLattice& lattice, const Prefix& prefix) {
    std::string out = "(";
    for (std::size_t t = 0; t < prefix.size(); ++t) {
        if (t > 0) {
            out += ",";
        }
        out += to_string(lattice.price(t, prefix[t]));
    }
    return out + ")";
}

// Exercise time of each path under per-prefix stop flags.
ExerciseSchedule schedule_from_flags(const PathTree& tree, const std::vector<bool>& stop) {
    ExerciseSchedule schedule(tree.num_paths());
    for (std::size_t p = 0; p < tree.num_paths(); ++p) {
        std::size_t u = tree.horizon();
        for (std::size_t t = 0; t < tree.horizon(); ++t) {
            if (stop[tree.prefix_of(p, t)]) {
                u = t;
                break;
            }
        }
        schedule[p] = static_cast<std::uint8_t>(u);
    }
    return schedule;
}

}  // namespace

std::vector<std::string> model_violations(const PriceLattice& lattice,
                                          const std::map<Prefix, StrongModel::Kernel>& kernels) {
    std::vector<std::string> out;
    const PathTree tree(lattice);
    std::size_t seen = 0;
    for (std::size_t id : tree.internal_prefixes()) {
        const Prefix prefix = tree.prefix(id);
        const std::string where = "kernel at " + prefix_label(lattice, prefix);
        auto it = kernels.find(prefix);
        if (it == kernels.end()) {
            out.push_back(where + " is missing");
            continue;
        }
        ++seen;
        const std::size_t t = prefix.size() - 1;
        const auto& succ = lattice.successors[t][prefix.back()];
        const auto& k = it->second;
        if (k.size() != succ.size()) {
            out.push_back(where + " has " + std::to_string(k.size()) + " entries for " +
                          std::to_string(succ.size()) + " successors");
            continue;
        }
        Rational total;
        Rational mean;
        for (std::size_t j = 0; j < k.size(); ++j) {
            if (sgn(k[j]) < 0) {
                out.push_back(where + " has negative entry " + to_string(k[j]));
            }
            total += k[j];
            mean += k[j] * lattice.price(t + 1, succ[j]);
        }
        if (total != 1) {
            out.push_back(where + " sums to " + to_string(total));
        }
        if (mean != lattice.price(t, prefix.back())) {
            out.push_back(where + " has mean " + to_string(mean) + ", not " +
                          to_string(lattice.price(t, prefix.back())));
        }
    }
    if (seen != kernels.size()) {
        out.push_back(std::to_string(kernels.size() - seen) +
                      " kernels are given at prefixes that are not reachable");
    }
    return out;
}

StrongModel::StrongModel(PriceLattice lattice, std::map<Prefix, Kernel> kernels)
    : lattice_(std::move(lattice)), kernels_(std::move(kernels)) {
    const auto problems = model_violations(lattice_, kernels_);
    if (!problems.empty()) {
        throw ConstraintViolation(problems.front());
    }
}

StrongModel StrongModel::markov(PriceLattice lattice,
                                const std::vector<std::vector<Kernel>>& node_kernels) {
    std::map<Prefix, Kernel> kernels;
    const PathTree tree(lattice);
    for (std::size_t id : tree.internal_prefixes()) {
        const auto& n = tree.node(id);
        if (n.time >= node_kernels.size() || n.node >= node_kernels[n.time].size()) {
            throw ConstraintViolation("no kernel for node " + std::to_string(n.node) + " at t=" +
                                      std::to_string(n.time));
        }
        kernels.emplace(tree.prefix(id), node_kernels[n.time][n.node]);
    }
    return StrongModel(std::move(lattice), std::move(kernels));
}

const StrongModel::Kernel& StrongModel::kernel(const Prefix& prefix) const {
    auto it = kernels_.find(prefix);
    if (it == kernels_.end()) {
        throw std::out_of_range("no kernel at prefix " + prefix_label(lattice_, prefix));
    }
    return it->second;
}

Rational StrongModel::probability(const Prefix& prefix, NodeIndex j) const {
    const auto& succ = lattice_.successors[prefix.size() - 1][prefix.back()];
    auto it = std::lower_bound(succ.begin(), succ.end(), j);
    if (it == succ.end() || *it != j) {
        return 0;
    }
    return kernel(prefix)[static_cast<std::size_t>(it - succ.begin())];
}

StrongModel make_example_model(const Rational& p, const Rational& s) {
    const Rational half = make_rational(1, 2);
    const Rational three_quarters = make_rational(3, 4);
    const Rational quarter = make_rational(1, 4);
    if (p < half) {
        throw ConstraintViolation("p = " + to_string(p) + " is below the lower bound 1/2");
    }
    if (p > three_quarters) {
        throw ConstraintViolation("p = " + to_string(p) + " exceeds the upper bound 3/4");
    }
    if (sgn(s) < 0) {
        throw ConstraintViolation("s = " + to_string(s) + " is below the lower bound 0");
    }
    if (s > quarter) {
        throw ConstraintViolation("s = " + to_string(s) + " exceeds the upper bound 1/4");
    }
    PriceLattice lattice = PriceLattice::complete(
        {{Rational(2)}, {Rational(1), Rational(3)}, {Rational(0), Rational(2), Rational(4)}});
    std::vector<std::vector<StrongModel::Kernel>> k(2);
    k[0] = {{half, half}};
    // Successors are listed by price: 0, 2, 4.
    k[1] = {{(1 + 2 * s) / 2, (1 - 4 * s) / 2, s}, {p - half, (3 - 4 * p) / 2, p}};
    return StrongModel::markov(std::move(lattice), k);
}

StoppingValue optimal_stopping(const StrongModel& model, const AmericanPayoff& payoff) {
    const PathTree tree(model.lattice());
    const auto& nodes = tree.nodes();
    std::vector<Rational> value(nodes.size());
    std::vector<bool> stop(nodes.size(), false);
    StoppingValue out;
    for (std::size_t id = nodes.size(); id-- > 0;) {
        const auto& n = nodes[id];
        const Prefix prefix = tree.prefix(id);
        Rational exercise = payoff.at(n.time, tree.price(id));
        if (n.time == tree.horizon()) {
            value[id] = exercise;
            out.exercise.emplace(prefix, std::move(exercise));
            continue;
        }
        const auto& k = model.kernel(prefix);
        Rational cont;
        for (std::size_t c = 0; c < n.children.size(); ++c) {
            cont += k[c] * value[n.children[c]];
        }
        stop[id] = exercise > cont;
        value[id] = stop[id] ? exercise : cont;
        out.exercise.emplace(prefix, std::move(exercise));
        out.continuation.emplace(prefix, std::move(cont));
    }
    out.value = value[tree.root()];
    out.rule = rule_of(tree, schedule_from_flags(tree, stop));
    return out;
}

PathMeasure path_law(const StrongModel& model) {
    const PathTree tree(model.lattice());
    const auto& nodes = tree.nodes();
    std::vector<Rational> mass(nodes.size());
    mass[tree.root()] = 1;
    PathMeasure out;
    // Preorder visits parents before children.
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const auto& n = nodes[id];
        if (n.path) {
            if (sgn(mass[id]) != 0) {
                out.emplace(tree.paths()[*n.path], mass[id]);
            }
            continue;
        }
        const auto& k = model.kernel(tree.prefix(id));
        for (std::size_t c = 0; c < n.children.size(); ++c) {
            mass[n.children[c]] = mass[id] * k[c];
        }
    }
    return out;
}

EnvelopeValue concave_envelope_eval(std::span<const EnvelopePoint> points, const Rational& x0) {
    EnvelopeValue best;
    bool found = false;
    auto offer = [&](Rational value, std::vector<std::pair<std::size_t, Rational>> support) {
        if (!found || value > best.value) {
            best.value = std::move(value);
            best.support = std::move(support);
            found = true;
        }
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].x == x0) {
            offer(points[i].v, {{i, Rational(1)}});
        }
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].x < x0)) {
            continue;
        }
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (!(points[j].x > x0)) {
                continue;
            }
            const Rational width = points[j].x - points[i].x;
            Rational wi = (points[j].x - x0) / width;
            Rational wj = (x0 - points[i].x) / width;
            offer(wi * points[i].v + wj * points[j].v, {{i, wi}, {j, wj}});
        }
    }
    if (!found) {
        throw EnvelopeInfeasible("x0 = " + to_string(x0) + " lies outside the envelope's hull");
    }
    return best;
}

PenalizedValue robust_penalized_value(const Problem& problem,
                                      std::span<const Instrument> instruments,
                                      std::span<const Rational> beta) {
    if (beta.size() != instruments.size()) {
        throw std::invalid_argument("beta has " + std::to_string(beta.size()) +
                                    " entries for " + std::to_string(instruments.size()) +
                                    " instruments");
    }
    const PriceLattice& lattice = problem.lattice;
    const std::size_t horizon = lattice.horizon();

    std::vector<std::vector<Rational>> penalty(horizon + 1);
    for (std::size_t t = 0; t <= horizon; ++t) {
        penalty[t].assign(lattice.levels[t].size(), Rational(0));
    }
    for (std::size_t k = 0; k < instruments.size(); ++k) {
        const std::size_t t = instruments[k].maturity_or(horizon);
        for (std::size_t i = 0; i < lattice.levels[t].size(); ++i) {
            penalty[t][i] += beta[k] * (instruments[k].payoff_at(lattice.levels[t][i]) -
                                        instruments[k].price);
        }
    }

    // U: value once exercised (only penalties remain); V: value before.
    std::vector<std::vector<Rational>> after(horizon + 1);
    std::vector<std::vector<Rational>> before(horizon + 1);
    std::vector<std::vector<StrongModel::Kernel>> after_kernel(horizon);
    std::vector<std::vector<StrongModel::Kernel>> before_kernel(horizon);
    std::vector<std::vector<bool>> stop(horizon);
    for (std::size_t i = 0; i < lattice.levels[horizon].size(); ++i) {
        after[horizon].push_back(-penalty[horizon][i]);
        before[horizon].push_back(problem.payoff.at(horizon, lattice.levels[horizon][i]) -
                                  penalty[horizon][i]);
    }
    for (std::size_t t = horizon; t-- > 0;) {
        const std::size_t width = lattice.levels[t].size();
        after[t].resize(width);
        before[t].resize(width);
        after_kernel[t].resize(width);
        before_kernel[t].resize(width);
        stop[t].assign(width, false);
        for (std::size_t i = 0; i < width; ++i) {
            const Rational& x = lattice.levels[t][i];
            const auto& succ = lattice.successors[t][i];
            std::vector<EnvelopePoint> u_points;
            std::vector<EnvelopePoint> v_points;
            for (NodeIndex j : succ) {
                u_points.push_back({lattice.levels[t + 1][j], after[t + 1][j]});
                v_points.push_back({lattice.levels[t + 1][j], before[t + 1][j]});
            }
            const EnvelopeValue u_env = concave_envelope_eval(u_points, x);
            const EnvelopeValue v_env = concave_envelope_eval(v_points, x);
            auto kernel_of = [&](const EnvelopeValue& env) {
                StrongModel::Kernel k(succ.size());
                for (const auto& [idx, w] : env.support) {
                    k[idx] = w;
                }
                return k;
            };
            after_kernel[t][i] = kernel_of(u_env);
            before_kernel[t][i] = kernel_of(v_env);
            after[t][i] = u_env.value - penalty[t][i];
            const Rational exercise = problem.payoff.at(t, x) + u_env.value;
            stop[t][i] = exercise > v_env.value;
            before[t][i] = (stop[t][i] ? exercise : v_env.value) - penalty[t][i];
        }
    }

    // Witness: follow V-kernels until exercise, U-kernels afterwards.
    const PathTree tree(lattice);
    const auto& nodes = tree.nodes();
    std::vector<bool> exercised(nodes.size(), false);
    std::vector<bool> stop_here(nodes.size(), false);
    std::map<Prefix, StrongModel::Kernel> kernels;
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const auto& n = nodes[id];
        const bool earlier = n.parent && exercised[*n.parent];
        if (n.time == horizon) {
            continue;
        }
        stop_here[id] = !earlier && stop[n.time][n.node];
        exercised[id] = earlier || stop_here[id];
        kernels.emplace(tree.prefix(id), exercised[id] ? after_kernel[n.time][n.node]
                                                       : before_kernel[n.time][n.node]);
    }

    PenalizedValue out{before[0][0], StrongModel(lattice, std::move(kernels)),
                       rule_of(tree, schedule_from_flags(tree, stop_here)), {}};
    const PathMeasure law = path_law(out.model);
    for (const auto& inst : instruments) {
        const std::size_t t = inst.maturity_or(horizon);
        Rational expectation;
        for (const auto& [path, m] : law) {
            expectation += m * inst.payoff_at(lattice.price(t, path.nodes[t]));
        }
        out.subgradient.push_back(inst.price - expectation);
    }
    return out;
}

PenalizedValue robust_penalized_value(const Problem& problem, std::span<const Rational> beta) {
    const auto instruments = calibration_instruments(problem);
    return robust_penalized_value(problem, instruments, beta);
}

Rational expected_payoff(const PathMeasure& measure, const StoppingRule& rule,
                         const PriceLattice& lattice, const AmericanPayoff& payoff) {
    Rational total;
    for (const auto& [path, m] : measure) {
        const std::size_t u = rule.exercise_time(path);
        total += m * payoff.at(u, lattice.price(u, path.nodes[u]));
    }
    return total;
}

}  // namespace amhedge
