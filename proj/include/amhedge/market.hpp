#pragma once

#include "amhedge/lp.hpp"
#include "amhedge/rational.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace amhedge {

using NodeIndex = std::size_t;

/// History (x_0, ..., x_t) as node indices, one per time.
using Prefix = std::vector<NodeIndex>;

inline constexpr std::size_t kDefaultMaxPaths = 100'000;
inline constexpr std::size_t kDefaultMaxRules = 100'000;

struct Limits {
    std::size_t max_paths = kDefaultMaxPaths;
    std::size_t max_rules = kDefaultMaxRules;
};

/// Thrown when an enumeration would exceed its configured cap. The
/// required count is exact (it may not fit in 64 bits).
class EnumerationLimit : public std::runtime_error {
public:
    EnumerationLimit(std::string what_enumerated, std::size_t cap, mpz_class required);

    const std::string& what_enumerated() const { return what_enumerated_; }
    std::size_t cap() const { return cap_; }
    const mpz_class& required() const { return required_; }

private:
    std::string what_enumerated_;
    std::size_t cap_;
    mpz_class required_;
};

/// Thrown by operations that need a consistent problem and do not have one.
class ConsistencyError : public std::runtime_error {
public:
    explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

struct PriceLattice {
    /// levels[t] holds the admissible prices at time t, strictly increasing.
    std::vector<std::vector<Rational>> levels;
    /// successors[t][i] lists the allowed node indices at t+1 from node i
    /// at t, sorted. Same outer size as levels minus one.
    std::vector<std::vector<std::vector<NodeIndex>>> successors;

    /// Lattice whose consecutive levels are joined by every possible edge.
    static PriceLattice complete(std::vector<std::vector<Rational>> levels);

    std::size_t horizon() const { return levels.empty() ? 0 : levels.size() - 1; }
    const Rational& spot() const { return levels.at(0).at(0); }
    const Rational& price(std::size_t t, NodeIndex i) const { return levels[t][i]; }
    std::optional<NodeIndex> index_of(std::size_t t, const Rational& price) const;

    bool operator==(const PriceLattice&) const = default;
};

struct MarginalLaw {
    std::size_t time = 0;
    /// Price level to probability; absent levels carry mass 0.
    std::map<Rational, Rational> mass;

    Rational mass_at(const Rational& x) const;
    bool operator==(const MarginalLaw&) const = default;
};

struct AmericanPayoff {
    /// (time, price) to payoff; unspecified entries are 0.
    std::map<std::pair<std::size_t, Rational>, Rational> values;

    Rational at(std::size_t t, const Rational& x) const;
    void set(std::size_t t, const Rational& x, Rational a) { values[{t, x}] = std::move(a); }
    bool operator==(const AmericanPayoff&) const = default;
};

/// A European claim paying payoff(X_maturity), quoted at price. A missing
/// maturity means the horizon T.
struct Instrument {
    std::map<Rational, Rational> payoff;
    Rational price;
    std::optional<std::size_t> maturity;

    Rational payoff_at(const Rational& x) const;
    std::size_t maturity_or(std::size_t horizon) const { return maturity.value_or(horizon); }
    bool operator==(const Instrument&) const = default;
};

struct Problem {
    PriceLattice lattice;
    std::optional<MarginalLaw> terminal_marginal;
    std::vector<MarginalLaw> intermediate_marginals;
    AmericanPayoff payoff;
    std::vector<Instrument> instruments;

    /// All given marginals, ordered by time.
    std::vector<const MarginalLaw*> marginals() const;
    bool operator==(const Problem&) const = default;
};

struct Path {
    std::vector<NodeIndex> nodes;

    std::size_t horizon() const { return nodes.size() - 1; }
    auto operator<=>(const Path&) const = default;
};

/// A deterministic natural-filtration exercise policy. decisions holds
/// exercise (true) / continue (false) for every prefix of length 1..T
/// that is reachable without earlier exercise; at T exercise is forced.
struct StoppingRule {
    std::map<Prefix, bool> decisions;

    /// First time the rule exercises along the path (T when it never does
    /// before maturity).
    std::size_t exercise_time(const Path& path) const;
    bool operator==(const StoppingRule&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Problem& problem, const Limits& limits = {});

/// Structural lattice checks only (no marginals, no LP).
std::vector<std::string> lattice_violations(const PriceLattice& lattice);

/// All transition-respecting paths, lexicographic in node indices.
std::vector<Path> enumerate_paths(const PriceLattice& lattice,
                                  std::size_t max_paths = kDefaultMaxPaths);

/// Number of transition-respecting paths, computed without enumeration.
mpz_class count_paths(const PriceLattice& lattice);

/// Every deterministic stopping rule with exercise forced at T, in a fixed
/// order: at each prefix "exercise" precedes "continue", and children vary
/// lexicographically with the first child slowest.
std::vector<StoppingRule> enumerate_stopping_rules(const PriceLattice& lattice,
                                                   std::size_t max_rules = kDefaultMaxRules,
                                                   std::size_t max_paths = kDefaultMaxPaths);

mpz_class count_stopping_rules(const PriceLattice& lattice,
                               std::size_t max_paths = kDefaultMaxPaths);

/// One Arrow-Debreu indicator per support point, priced at its mass.
std::vector<Instrument> marginal_to_instruments(const MarginalLaw& marginal);

/// The problem's instruments followed by the indicators of every given
/// marginal (intermediate ones carry their maturity).
std::vector<Instrument> calibration_instruments(const Problem& problem);

struct PriceRange {
    long lo = 0;
    long hi = 10;
};

struct RandomProblemOptions {
    PriceRange range;
    /// Chance of also publishing the implied marginal at each intermediate time.
    double intermediate_probability = 0.0;
    /// Chance that any single edge is removed (reachability is repaired).
    double drop_edge_probability = 0.0;
    /// Chance that a node carries a positive payoff.
    double payoff_density = 0.5;
};

class InvalidShape : public std::invalid_argument {
public:
    explicit InvalidShape(const std::string& what) : std::invalid_argument(what) {}
};

/// Random consistent problem. The lattice is generated level by level, a
/// random martingale is built from mixtures of extreme two-point kernels
/// and the published marginals are that martingale's marginals.
Problem random_problem(std::uint64_t seed, std::span<const std::size_t> shape,
                       const RandomProblemOptions& options = {});

}  // namespace amhedge
