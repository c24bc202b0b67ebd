#include "amhedge/market.hpp"

#include "amhedge/path_tree.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace amhedge {

EnumerationLimit::EnumerationLimit(std::string what_enumerated, std::size_t cap,
                                   mpz_class required)
    : std::runtime_error("enumeration limit exceeded: " + required.get_str() + " " +
                         what_enumerated + " required, cap is " + std::to_string(cap)),
      what_enumerated_(std::move(what_enumerated)),
      cap_(cap),
      required_(std::move(required)) {}

PriceLattice PriceLattice::complete(std::vector<std::vector<Rational>> levels) {
    PriceLattice lattice;
    lattice.levels = std::move(levels);
    const std::size_t horizon = lattice.horizon();
    lattice.successors.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        std::vector<NodeIndex> all(lattice.levels[t + 1].size());
        for (std::size_t j = 0; j < all.size(); ++j) {
            all[j] = j;
        }
        lattice.successors[t].assign(lattice.levels[t].size(), all);
    }
    return lattice;
}

std::optional<NodeIndex> PriceLattice::index_of(std::size_t t, const Rational& price) const {
    if (t >= levels.size()) {
        return std::nullopt;
    }
    const auto& level = levels[t];
    auto it = std::lower_bound(level.begin(), level.end(), price);
    if (it == level.end() || *it != price) {
        return std::nullopt;
    }
    return static_cast<NodeIndex>(it - level.begin());
}

Rational MarginalLaw::mass_at(const Rational& x) const {
    auto it = mass.find(x);
    return it == mass.end() ? Rational(0) : it->second;
}

Rational AmericanPayoff::at(std::size_t t, const Rational& x) const {
    auto it = values.find({t, x});
    return it == values.end() ? Rational(0) : it->second;
}

Rational Instrument::payoff_at(const Rational& x) const {
    auto it = payoff.find(x);
    return it == payoff.end() ? Rational(0) : it->second;
}

std::vector<const MarginalLaw*> Problem::marginals() const {
    std::vector<const MarginalLaw*> out;
    for (const auto& law : intermediate_marginals) {
        out.push_back(&law);
    }
    if (terminal_marginal) {
        out.push_back(&*terminal_marginal);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const MarginalLaw* a, const MarginalLaw* b) { return a->time < b->time; });
    return out;
}

std::size_t StoppingRule::exercise_time(const Path& path) const {
    const std::size_t horizon = path.horizon();
    Prefix prefix;
    for (std::size_t t = 0; t < horizon; ++t) {
        prefix.push_back(path.nodes[t]);
        auto it = decisions.find(prefix);
        if (it == decisions.end()) {
            throw std::invalid_argument("stopping rule has no decision at a reachable prefix");
        }
        if (it->second) {
            return t;
        }
    }
    return horizon;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

std::string level_label(std::size_t t, const Rational& x) {
    return "(" + std::to_string(t) + "," + to_string(x) + ")";
}

void check_marginal(const Problem& problem, const MarginalLaw& law, std::vector<std::string>& out) {
    const auto& lattice = problem.lattice;
    const std::string where = "marginal at t=" + std::to_string(law.time);
    if (law.time == 0 || law.time > lattice.horizon()) {
        out.push_back(where + ": time outside 1.." + std::to_string(lattice.horizon()));
        return;
    }
    Rational total;
    Rational mean;
    for (const auto& [x, m] : law.mass) {
        if (!lattice.index_of(law.time, x)) {
            out.push_back(where + ": level " + to_string(x) + " is not a lattice node");
        }
        if (sgn(m) < 0) {
            out.push_back(where + ": negative mass " + to_string(m) + " at " + to_string(x));
        }
        total += m;
        mean += m * x;
    }
    if (total != 1) {
        out.push_back(where + ": masses sum to " + to_string(total) + ", not 1");
    } else if (mean != lattice.spot()) {
        out.push_back(where + ": marginal mean " + to_string(mean) + " ≠ spot " +
                      to_string(lattice.spot()));
    }
}

}  // namespace

std::vector<std::string> lattice_violations(const PriceLattice& lattice) {
    std::vector<std::string> out;
    if (lattice.levels.size() < 2) {
        out.push_back("lattice needs at least two times (horizon >= 1)");
        if (lattice.levels.empty()) {
            return out;
        }
    }
    if (lattice.levels[0].size() != 1) {
        out.push_back("levels[0] must contain exactly one spot price, found " +
                      std::to_string(lattice.levels[0].size()));
    }
    for (std::size_t t = 0; t < lattice.levels.size(); ++t) {
        const auto& level = lattice.levels[t];
        if (level.empty()) {
            out.push_back("levels[" + std::to_string(t) + "] is empty");
        }
        for (std::size_t i = 1; i < level.size(); ++i) {
            if (!(level[i - 1] < level[i])) {
                out.push_back("levels[" + std::to_string(t) + "] is not strictly increasing");
                break;
            }
        }
    }
    const std::size_t horizon = lattice.horizon();
    if (lattice.successors.size() != horizon) {
        out.push_back("transition table covers " + std::to_string(lattice.successors.size()) +
                      " steps, expected " + std::to_string(horizon));
        return out;
    }
    if (!out.empty()) {
        return out;
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        const auto& here = lattice.levels[t];
        const auto& next = lattice.levels[t + 1];
        if (lattice.successors[t].size() != here.size()) {
            out.push_back("transition table at t=" + std::to_string(t) + " has wrong size");
            continue;
        }
        std::vector<bool> has_incoming(next.size(), false);
        for (std::size_t i = 0; i < here.size(); ++i) {
            const auto& succ = lattice.successors[t][i];
            if (succ.empty()) {
                out.push_back("node " + level_label(t, here[i]) + " has no outgoing transition");
                continue;
            }
            bool in_range = true;
            for (std::size_t k = 0; k < succ.size(); ++k) {
                if (succ[k] >= next.size() || (k > 0 && succ[k] <= succ[k - 1])) {
                    out.push_back("node " + level_label(t, here[i]) +
                                  " has malformed successor list");
                    in_range = false;
                    break;
                }
                has_incoming[succ[k]] = true;
            }
            if (!in_range) {
                continue;
            }
            const Rational& lo = next[succ.front()];
            const Rational& hi = next[succ.back()];
            if (here[i] < lo || here[i] > hi) {
                out.push_back("node " + level_label(t, here[i]) + " lies outside [" +
                              to_string(lo) + ", " + to_string(hi) +
                              "] of its successors; no martingale kernel exists");
            }
        }
        for (std::size_t j = 0; j < next.size(); ++j) {
            if (!has_incoming[j]) {
                out.push_back("node " + level_label(t + 1, next[j]) +
                              " has no incoming transition");
            }
        }
    }
    return out;
}

ValidationReport validate(const Problem& problem, const Limits& limits) {
    ValidationReport report;
    auto& out = report.violations;
    out = lattice_violations(problem.lattice);
    const bool lattice_ok = out.empty();
    if (problem.lattice.levels.empty()) {
        return report;
    }
    const std::size_t horizon = problem.lattice.horizon();

    if (!problem.terminal_marginal && problem.instruments.empty()) {
        out.push_back("problem needs a terminal marginal or at least one instrument");
    }
    std::set<std::size_t> times;
    for (const MarginalLaw* law : problem.marginals()) {
        if (!times.insert(law->time).second) {
            out.push_back("two marginals given for t=" + std::to_string(law->time));
        }
        check_marginal(problem, *law, out);
    }
    if (problem.terminal_marginal && problem.terminal_marginal->time != horizon) {
        out.push_back("terminal marginal is dated t=" +
                      std::to_string(problem.terminal_marginal->time) + ", horizon is " +
                      std::to_string(horizon));
    }
    for (const auto& [key, a] : problem.payoff.values) {
        const auto& [t, x] = key;
        if (!problem.lattice.index_of(t, x)) {
            out.push_back("payoff key " + level_label(t, x) + " is not a lattice node");
        }
        if (sgn(a) < 0) {
            out.push_back("negative payoff " + to_string(a) + " at " + level_label(t, x));
        }
    }
    for (std::size_t k = 0; k < problem.instruments.size(); ++k) {
        const auto& inst = problem.instruments[k];
        const std::size_t t = inst.maturity_or(horizon);
        if (t == 0 || t > horizon) {
            out.push_back("instrument " + std::to_string(k) + " matures outside 1.." +
                          std::to_string(horizon));
            continue;
        }
        for (const auto& [x, g] : inst.payoff) {
            if (!problem.lattice.index_of(t, x)) {
                out.push_back("instrument " + std::to_string(k) + " pays at " + to_string(x) +
                              ", which is not a level at t=" + std::to_string(t));
            }
        }
    }
    if (!lattice_ok || !out.empty()) {
        return report;
    }

    try {
        PathTree tree(problem.lattice, limits.max_paths);
        lp::LinearProgram prog = measure_program(problem, tree);
        lp::LpSolution sol = lp::solve(prog);
        if (!lp::check_solution(prog, sol).ok) {
            out.push_back("internal error: feasibility certificate failed to verify");
        } else if (sol.status == lp::Status::infeasible) {
            out.push_back(
                "no martingale path measure is consistent with the given marginals and "
                "instrument prices");
        }
    } catch (const EnumerationLimit& e) {
        out.push_back(std::string("feasibility check skipped: ") + e.what());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Enumeration

mpz_class count_paths(const PriceLattice& lattice) {
    if (lattice.levels.empty()) {
        return 0;
    }
    const std::size_t horizon = lattice.horizon();
    std::vector<mpz_class> below(lattice.levels[horizon].size(), 1);
    for (std::size_t t = horizon; t-- > 0;) {
        std::vector<mpz_class> here(lattice.levels[t].size(), 0);
        for (std::size_t i = 0; i < here.size(); ++i) {
            for (NodeIndex j : lattice.successors[t][i]) {
                here[i] += below[j];
            }
        }
        below = std::move(here);
    }
    return below.empty() ? mpz_class(0) : below[0];
}

std::vector<Path> enumerate_paths(const PriceLattice& lattice, std::size_t max_paths) {
    return PathTree(lattice, max_paths).paths();
}

mpz_class count_stopping_rules(const PriceLattice& lattice, std::size_t max_paths) {
    PathTree tree(lattice, max_paths);
    return count_schedules(tree, std::vector<bool>(tree.nodes().size(), true));
}

std::vector<StoppingRule> enumerate_stopping_rules(const PriceLattice& lattice,
                                                   std::size_t max_rules, std::size_t max_paths) {
    PathTree tree(lattice, max_paths);
    const auto schedules =
        enumerate_schedules(tree, std::vector<bool>(tree.nodes().size(), true), max_rules);
    std::vector<StoppingRule> rules;
    rules.reserve(schedules.size());
    for (const auto& s : schedules) {
        rules.push_back(rule_of(tree, s));
    }
    return rules;
}

std::vector<Instrument> marginal_to_instruments(const MarginalLaw& marginal) {
    std::vector<Instrument> out;
    for (const auto& [x, m] : marginal.mass) {
        if (sgn(m) <= 0) {
            continue;
        }
        Instrument inst;
        inst.payoff[x] = 1;
        inst.price = m;
        inst.maturity = marginal.time;
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<Instrument> calibration_instruments(const Problem& problem) {
    std::vector<Instrument> out = problem.instruments;
    for (const MarginalLaw* law : problem.marginals()) {
        auto extra = marginal_to_instruments(*law);
        out.insert(out.end(), extra.begin(), extra.end());
    }
    return out;
}

}  // namespace amhedge
