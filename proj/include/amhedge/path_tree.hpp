#pragma once

#include "amhedge/lp.hpp"
#include "amhedge/market.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace amhedge {

/// The tree of all reachable prefixes of a lattice. Prefix ids follow a
/// depth-first preorder that visits children in increasing node order,
/// so the leaves below any prefix form a contiguous block of path ids and
/// paths come out in lexicographic order.
class PathTree {
public:
    struct Node {
        std::size_t time = 0;
        NodeIndex node = 0;
        std::optional<std::size_t> parent;
        std::vector<std::size_t> children;
        std::size_t first_path = 0;
        std::size_t path_count = 0;
        std::optional<std::size_t> path;  // set on leaves (time T)
    };

    explicit PathTree(PriceLattice lattice, std::size_t max_paths = kDefaultMaxPaths);

    const PriceLattice& lattice() const { return lattice_; }
    std::size_t horizon() const { return lattice_.horizon(); }

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(std::size_t id) const { return nodes_[id]; }
    std::size_t root() const { return 0; }

    const std::vector<Path>& paths() const { return paths_; }
    std::size_t num_paths() const { return paths_.size(); }

    /// Prefix id of path p truncated at time t.
    std::size_t prefix_of(std::size_t path, std::size_t t) const { return path_prefix_[path][t]; }
    Prefix prefix(std::size_t id) const;
    std::optional<std::size_t> find(const Prefix& prefix) const;
    const Rational& price(std::size_t id) const;

    /// Non-leaf prefix ids in preorder (those with time < T).
    std::vector<std::size_t> internal_prefixes() const;

private:
    PriceLattice lattice_;
    std::vector<Node> nodes_;
    std::vector<Path> paths_;
    std::vector<std::vector<std::size_t>> path_prefix_;
    std::map<Prefix, std::size_t> index_;
};

/// Exercise time per path id. Distinct natural-filtration rules give
/// distinct vectors, so this is a faithful encoding of a rule.
using ExerciseSchedule = std::vector<std::uint8_t>;

ExerciseSchedule schedule_of(const PathTree& tree, const StoppingRule& rule);
StoppingRule rule_of(const PathTree& tree, const ExerciseSchedule& schedule);

/// Rules that never exercise before maturity where the payoff is zero.
/// On every path such a rule's payoff dominates that of some full rule and
/// vice versa, so every sup/inf over rules is unchanged.
std::vector<ExerciseSchedule> enumerate_payoff_schedules(const PathTree& tree,
                                                         const AmericanPayoff& payoff,
                                                         std::size_t max_rules);

/// Counts and enumerates rule schedules; voluntary exercise before T is
/// only considered at prefixes whose may_stop entry is set.
mpz_class count_schedules(const PathTree& tree, const std::vector<bool>& may_stop);

std::vector<ExerciseSchedule> enumerate_schedules(const PathTree& tree,
                                                  const std::vector<bool>& may_stop,
                                                  std::size_t max_rules);

/// Payoff realized on each path by the schedule.
std::vector<Rational> schedule_payoffs(const PathTree& tree, const AmericanPayoff& payoff,
                                       const ExerciseSchedule& schedule);

/// Row bookkeeping for the path-measure polytope.
struct MeasureRows {
    std::size_t total_mass = 0;
    /// marginals[k][i]: row of level i in the k-th marginal of Problem::marginals().
    std::vector<std::vector<std::size_t>> marginals;
    std::vector<std::size_t> instruments;
    /// martingale[prefix id] for internal prefixes.
    std::map<std::size_t, std::size_t> martingale;
};

/// Adds the consistent-martingale constraints on path masses mu(path) to
/// an LP whose variables path_var[p] carry those masses.
MeasureRows add_measure_rows(lp::LinearProgram& prog, const Problem& problem,
                             const PathTree& tree, const std::vector<std::size_t>& path_var);

/// LP in mu(path) >= 0 (variable index = path id) with the consistent
/// martingale constraints and a zero objective.
lp::LinearProgram measure_program(const Problem& problem, const PathTree& tree,
                                  MeasureRows* rows = nullptr);

}  // namespace amhedge
