#include "amhedge/bounds.hpp"

#include "amhedge/path_tree.hpp"

#include <algorithm>
#include <set>

namespace amhedge {

namespace {

std::string path_label(const PriceLattice& lattice, const std::vector<NodeIndex>& nodes) {
    std::string out = "(";
    for (std::size_t t = 0; t < nodes.size(); ++t) {
        out += (t ? "," : "") + to_string(lattice.price(t, nodes[t]));
    }
    return out + ")";
}

bool valid_path(const PriceLattice& lattice, const std::vector<NodeIndex>& nodes) {
    if (nodes.size() != lattice.levels.size() || nodes.empty() || nodes[0] != 0) {
        return false;
    }
    for (std::size_t t = 0; t + 1 < nodes.size(); ++t) {
        if (nodes[t] >= lattice.levels[t].size()) {
            return false;
        }
        const auto& succ = lattice.successors[t][nodes[t]];
        if (!std::binary_search(succ.begin(), succ.end(), nodes[t + 1])) {
            return false;
        }
    }
    return nodes.back() < lattice.levels.back().size();
}

Prefix head(const std::vector<NodeIndex>& nodes, std::size_t t) {
    return Prefix(nodes.begin(), nodes.begin() + static_cast<long>(t) + 1);
}

class Checker {
public:
    explicit Checker(const Problem& problem) : problem_(problem), lattice_(problem.lattice) {}

    void fail(std::string message) { report_.failures.push_back(std::move(message)); }

    // Path-level consistency: mass, marginals, instrument prices.
    void calibration(const std::vector<std::pair<const Path*, Rational>>& masses) {
        const std::size_t horizon = lattice_.horizon();
        Rational total;
        for (const auto& [path, m] : masses) {
            total += m;
        }
        if (total != 1) {
            fail("total mass is " + to_string(total) + ", not 1");
        }
        for (const MarginalLaw* law : problem_.marginals()) {
            std::map<Rational, Rational> got;
            for (const auto& [path, m] : masses) {
                got[lattice_.price(law->time, path->nodes[law->time])] += m;
            }
            for (const auto& x : lattice_.levels[law->time]) {
                if (got[x] != law->mass_at(x)) {
                    fail("marginal at t=" + std::to_string(law->time) + ", x=" + to_string(x) +
                         ": mass " + to_string(got[x]) + " instead of " +
                         to_string(law->mass_at(x)));
                }
            }
        }
        for (std::size_t k = 0; k < problem_.instruments.size(); ++k) {
            const auto& inst = problem_.instruments[k];
            const std::size_t t = inst.maturity_or(horizon);
            Rational value;
            for (const auto& [path, m] : masses) {
                value += m * inst.payoff_at(lattice_.price(t, path->nodes[t]));
            }
            if (value != inst.price) {
                fail("instrument " + std::to_string(k) + " is valued at " + to_string(value) +
                     " instead of " + to_string(inst.price));
            }
        }
    }

    // Path measure: valid non-negative entries, calibration, martingale.
    bool measure(const PathMeasure& mu) {
        std::vector<std::pair<const Path*, Rational>> masses;
        std::map<Prefix, Rational> drift;
        for (const auto& [path, m] : mu) {
            if (!valid_path(lattice_, path.nodes)) {
                fail("measure charges a path that is not in the lattice");
                return false;
            }
            if (sgn(m) < 0) {
                fail("negative mass " + to_string(m) + " on path " +
                     path_label(lattice_, path.nodes));
            }
            masses.emplace_back(&path, m);
            for (std::size_t t = 0; t < lattice_.horizon(); ++t) {
                drift[head(path.nodes, t)] +=
                    m * (lattice_.price(t + 1, path.nodes[t + 1]) - lattice_.price(t, path.nodes[t]));
            }
        }
        calibration(masses);
        for (const auto& [prefix, d] : drift) {
            if (sgn(d) != 0) {
                fail("martingale condition fails at prefix " + path_label(lattice_, prefix));
            }
        }
        return true;
    }

    // Largest expected payoff over all stopping rules under mu.
    Rational snell(const std::map<Prefix, Rational>& prefix_mass, const Prefix& prefix) const {
        const std::size_t t = prefix.size() - 1;
        auto it = prefix_mass.find(prefix);
        if (it == prefix_mass.end()) {
            return 0;
        }
        const Rational exercise = problem_.payoff.at(t, lattice_.price(t, prefix.back())) * it->second;
        if (t == lattice_.horizon()) {
            return exercise;
        }
        Rational cont;
        for (NodeIndex j : lattice_.successors[t][prefix.back()]) {
            Prefix next = prefix;
            next.push_back(j);
            cont += snell(prefix_mass, next);
        }
        return std::max(exercise, cont);
    }

    Rational best_rule_value(const PathMeasure& mu) const {
        std::map<Prefix, Rational> prefix_mass;
        for (const auto& [path, m] : mu) {
            for (std::size_t t = 0; t <= lattice_.horizon(); ++t) {
                prefix_mass[head(path.nodes, t)] += m;
            }
        }
        return snell(prefix_mass, Prefix{0});
    }

    void claimed(const char* what, const Rational& actual, const Rational& claimed) {
        if (actual != claimed) {
            fail(std::string(what) + " is " + to_string(actual) + ", claimed " + to_string(claimed));
        }
    }

    // Portfolio wealth at T along the path, before paying the option.
    // Pre-exercise holdings apply before u, post-exercise ones from u on.
    Rational wealth(const HedgeCertificate& h, const Path& path, std::size_t u, bool post_allowed) {
        const std::size_t horizon = lattice_.horizon();
        Rational w = h.cash;
        for (const auto& [t, claim] : h.statics) {
            auto it = claim.find(lattice_.price(t, path.nodes[t]));
            if (it != claim.end()) {
                w += it->second;
            }
        }
        for (std::size_t j = 0; j < h.instrument_units.size(); ++j) {
            const auto& inst = problem_.instruments[j];
            const std::size_t t = inst.maturity_or(horizon);
            w += h.instrument_units[j] * inst.payoff_at(lattice_.price(t, path.nodes[t]));
        }
        for (std::size_t t = 0; t < horizon; ++t) {
            const Rational step =
                lattice_.price(t + 1, path.nodes[t + 1]) - lattice_.price(t, path.nodes[t]);
            const Prefix prefix = head(path.nodes, t);
            if (t < u || !post_allowed) {
                auto it = h.pre_holdings.find(prefix);
                if (it != h.pre_holdings.end()) {
                    w += it->second * step;
                }
            } else {
                auto it = h.post_holdings.find({prefix, u});
                if (it != h.post_holdings.end()) {
                    w += it->second * step;
                }
            }
        }
        return w;
    }

    bool portfolio_shape(const HedgeCertificate& h) {
        bool ok = true;
        if (!h.instrument_units.empty() && h.instrument_units.size() != problem_.instruments.size()) {
            fail("portfolio lists " + std::to_string(h.instrument_units.size()) +
                 " instrument positions for " + std::to_string(problem_.instruments.size()) +
                 " instruments");
            ok = false;
        }
        std::set<std::size_t> times;
        for (const MarginalLaw* law : problem_.marginals()) {
            times.insert(law->time);
        }
        for (const auto& [t, claim] : h.statics) {
            if (!times.contains(t)) {
                fail("static claim at t=" + std::to_string(t) + " has no quoted marginal");
                ok = false;
                continue;
            }
            for (const auto& [x, units] : claim) {
                if (!lattice_.index_of(t, x)) {
                    fail("static claim pays at " + to_string(x) + ", not a level at t=" +
                         std::to_string(t));
                    ok = false;
                }
            }
        }
        return ok;
    }

    Rational cost(const HedgeCertificate& h) const {
        Rational c = h.cash;
        for (const MarginalLaw* law : problem_.marginals()) {
            auto it = h.statics.find(law->time);
            if (it == h.statics.end()) {
                continue;
            }
            for (const auto& [x, units] : it->second) {
                c += units * law->mass_at(x);
            }
        }
        for (std::size_t j = 0; j < h.instrument_units.size(); ++j) {
            c += h.instrument_units[j] * problem_.instruments[j].price;
        }
        return c;
    }

    CertificateReport take() { return std::move(report_); }
    CertificateReport& report() { return report_; }

private:
    const Problem& problem_;
    const PriceLattice& lattice_;
    CertificateReport report_;
};

Rational payoff_on(const Problem& problem, const Path& path, std::size_t u) {
    return problem.payoff.at(u, problem.lattice.price(u, path.nodes[u]));
}

}  // namespace

std::vector<RegimeKernel> extract_mixture(const PriceLattice& lattice, const WeakCertificate& cert) {
    using Key = std::pair<Prefix, std::optional<std::size_t>>;
    std::map<Key, RegimeKernel> groups;
    for (const auto& [key, m] : cert.mass) {
        const auto& [path, u] = key;
        if (sgn(m) <= 0) {
            continue;
        }
        for (std::size_t t = 0; t < lattice.horizon(); ++t) {
            std::optional<std::size_t> status;
            if (u <= t) {
                status = u;
            }
            Prefix prefix = head(path.nodes, t);
            auto& g = groups[{prefix, status}];
            g.prefix = std::move(prefix);
            g.exercised_at = status;
            g.mass += m;
            g.kernel[path.nodes[t + 1]] += m;
        }
    }
    std::vector<RegimeKernel> out;
    for (auto& [key, g] : groups) {
        for (auto& [j, w] : g.kernel) {
            w /= g.mass;
        }
        out.push_back(std::move(g));
    }
    return out;
}

CertificateReport verify_certificate(const Problem& problem, const Certificate& cert,
                                     const Rational& claimed, const Limits& limits) {
    Checker check(problem);
    const PriceLattice& lattice = problem.lattice;
    const std::size_t horizon = lattice.horizon();

    if (const auto* c = std::get_if<StrongCertificate>(&cert)) {
        if (!check.measure(c->measure)) {
            return check.take();
        }
        try {
            check.claimed("expected payoff of the rule",
                          expected_payoff(c->measure, c->rule, lattice, problem.payoff), claimed);
        } catch (const std::invalid_argument& e) {
            check.fail(e.what());
            return check.take();
        }
        check.claimed("best stopping value under the measure", check.best_rule_value(c->measure),
                      claimed);
    } else if (const auto* c = std::get_if<LowestCertificate>(&cert)) {
        if (check.measure(c->measure)) {
            check.claimed("best stopping value under the measure",
                          check.best_rule_value(c->measure), claimed);
        }
    } else if (const auto* c = std::get_if<WeakCertificate>(&cert)) {
        std::vector<std::pair<const Path*, Rational>> masses;
        std::map<std::pair<Prefix, std::size_t>, Rational> drift;
        Rational value;
        for (const auto& [key, m] : c->mass) {
            const auto& [path, u] = key;
            if (!valid_path(lattice, path.nodes) || u > horizon) {
                check.fail("certificate charges a (path, exercise time) pair outside the lattice");
                return check.take();
            }
            if (sgn(m) < 0) {
                check.fail("negative mass " + to_string(m) + " on path " +
                           path_label(lattice, path.nodes) + ", u=" + std::to_string(u));
            }
            masses.emplace_back(&path, m);
            value += m * payoff_on(problem, path, u);
            for (std::size_t t = 0; t < horizon; ++t) {
                drift[{head(path.nodes, t), std::min(u, t + 1)}] +=
                    m * (lattice.price(t + 1, path.nodes[t + 1]) - lattice.price(t, path.nodes[t]));
            }
        }
        check.calibration(masses);
        for (const auto& [key, d] : drift) {
            if (sgn(d) != 0) {
                const std::size_t t = key.first.size() - 1;
                check.fail("martingale condition fails at prefix " + path_label(lattice, key.first) +
                           (key.second <= t ? " given exercise at u=" + std::to_string(key.second)
                                            : std::string(" before exercise")));
            }
        }
        check.claimed("expected payoff", value, claimed);
    } else if (const auto* c = std::get_if<HedgeCertificate>(&cert)) {
        if (!check.portfolio_shape(*c)) {
            return check.take();
        }
        const PathTree tree(lattice, limits.max_paths);
        for (const Path& path : tree.paths()) {
            for (std::size_t u = 0; u <= horizon; ++u) {
                const Rational w = check.wealth(*c, path, u, true);
                const Rational a = payoff_on(problem, path, u);
                const std::string where =
                    "path " + path_label(lattice, path.nodes) + ", u=" + std::to_string(u);
                if (w < a) {
                    check.fail(where + ": covers " + to_string(w) + " < payoff " + to_string(a));
                } else if (w == a) {
                    check.report().binding.push_back(where);
                }
            }
        }
        check.claimed("portfolio cost", check.cost(*c), claimed);
    } else if (const auto* c = std::get_if<SubhedgeCertificate>(&cert)) {
        if (!c->portfolio.post_holdings.empty()) {
            check.fail("sub-hedging portfolios carry no post-exercise holdings");
        }
        if (!check.portfolio_shape(c->portfolio)) {
            return check.take();
        }
        const PathTree tree(lattice, limits.max_paths);
        for (const Path& path : tree.paths()) {
            std::size_t u = 0;
            try {
                u = c->rule.exercise_time(path);
            } catch (const std::invalid_argument& e) {
                check.fail(e.what());
                return check.take();
            }
            const Rational w = check.wealth(c->portfolio, path, u, false);
            const Rational a = payoff_on(problem, path, u);
            const std::string where =
                "path " + path_label(lattice, path.nodes) + ", u=" + std::to_string(u);
            if (w > a) {
                check.fail(where + ": portfolio pays " + to_string(w) + " > payoff " + to_string(a));
            } else if (w == a) {
                check.report().binding.push_back(where);
            }
        }
        check.claimed("amount raised", check.cost(c->portfolio), claimed);
    } else if (const auto* c = std::get_if<LagrangianCertificate>(&cert)) {
        if (c->beta.size() != c->instruments.size()) {
            check.fail("beta has " + std::to_string(c->beta.size()) + " entries for " +
                       std::to_string(c->instruments.size()) + " instruments");
            return check.take();
        }
        const PenalizedValue h = robust_penalized_value(problem, c->instruments, c->beta);
        check.claimed("penalized robust value at beta", h.value, claimed);
        check.claimed("cutting-plane lower bound", c->lower_bound, claimed);
        // The witness model must attain the value on its own.
        const PathMeasure law = path_law(h.model);
        Rational attained = expected_payoff(law, h.rule, lattice, problem.payoff);
        for (std::size_t k = 0; k < c->instruments.size(); ++k) {
            const auto& inst = c->instruments[k];
            const std::size_t t = inst.maturity_or(horizon);
            for (const auto& [path, m] : law) {
                attained -= c->beta[k] * m *
                            (inst.payoff_at(lattice.price(t, path.nodes[t])) - inst.price);
            }
        }
        check.claimed("witness model value", attained, claimed);
    }
    return check.take();
}

}  // namespace amhedge
