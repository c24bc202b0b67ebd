#pragma once

#include "amhedge/market.hpp"
#include "amhedge/strong_models.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace amhedge {

enum class BoundKind { strong, weak, superhedge, subhedge, lowest_model, lagrangian };

inline constexpr BoundKind kAllBoundKinds[] = {BoundKind::strong,   BoundKind::weak,
                                               BoundKind::superhedge, BoundKind::subhedge,
                                               BoundKind::lowest_model, BoundKind::lagrangian};

std::string to_string(BoundKind kind);
/// Accepts the names produced by to_string; "lowest" is an alias.
std::optional<BoundKind> parse_bound_kind(std::string_view name);

/// Optimal natural-filtration model for the strong bound: a consistent
/// path measure and the rule that attains the bound under it.
struct StrongCertificate {
    StoppingRule rule;
    PathMeasure measure;
};

/// Joint law of (path, exercise time).
struct WeakCertificate {
    std::map<std::pair<Path, std::size_t>, Rational> mass;
};

/// Static claims, instrument positions and stock holdings. Missing
/// holdings are zero.
struct HedgeCertificate {
    Rational cash;
    /// Marginal date -> level -> units of the claim paying 1 at that level.
    std::map<std::size_t, std::map<Rational, Rational>> statics;
    /// Units of each of the problem's instruments.
    std::vector<Rational> instrument_units;
    /// Stock held over (t, t+1] before exercise.
    std::map<Prefix, Rational> pre_holdings;
    /// Stock held over (t, t+1] after exercise at u <= t; key (prefix, u).
    std::map<std::pair<Prefix, std::size_t>, Rational> post_holdings;
};

/// Buyer's side: an exercise rule and a portfolio (no post-exercise
/// holdings) whose value never exceeds the exercised payoff.
struct SubhedgeCertificate {
    StoppingRule rule;
    HedgeCertificate portfolio;
};

/// Consistent path measure under which no rule earns more than the bound.
struct LowestCertificate {
    PathMeasure measure;
};

struct LagrangianCertificate {
    std::vector<Instrument> instruments;
    std::vector<Rational> beta;
    /// Cutting-plane lower bound at termination (equal to the value).
    Rational lower_bound;
};

using Certificate = std::variant<StrongCertificate, WeakCertificate, HedgeCertificate,
                                 SubhedgeCertificate, LowestCertificate, LagrangianCertificate>;

struct BoundStats {
    std::size_t paths = 0;
    std::size_t rules = 0;
    std::size_t lp_solves = 0;
    std::size_t lp_variables = 0;
    std::size_t lp_constraints = 0;
    std::size_t pivots = 0;
    std::size_t iterations = 0;
};

struct BoundResult {
    BoundKind kind = BoundKind::strong;
    Rational value;
    Certificate certificate;
    BoundStats stats;
};

enum class LowestStrategy { automatic, eager, lazy };

struct BoundOptions {
    Limits limits;
    LowestStrategy lowest = LowestStrategy::automatic;
    /// Rule count up to which the automatic strategy builds the full epigraph.
    std::size_t eager_rule_limit = 256;
    std::size_t max_iterations = 1000;
    /// Re-verify every LP solution with lp::check_solution.
    bool check_lp = true;
};

/// sup over consistent natural-filtration models of the optimal-stopping
/// value, as a max over rules of LPs over consistent path measures.
BoundResult strong_value(const Problem& problem, const BoundOptions& options = {});

/// sup over joint laws of (path, exercise time) that are consistent and
/// martingale given the price history and the exact exercise status.
BoundResult weak_value(const Problem& problem, const BoundOptions& options = {});

/// Cheapest super-replicating portfolio against every exercise time.
BoundResult superhedge(const Problem& problem, const BoundOptions& options = {});

/// min over consistent path measures of the best rule's expected payoff.
BoundResult lowest_model_value(const Problem& problem, const BoundOptions& options = {});

/// max over rules of the largest amount a buyer can raise by trading
/// against the option exercised by that rule.
BoundResult subhedge(const Problem& problem, const BoundOptions& options = {});

/// min over beta of robust_penalized_value, by cutting planes.
BoundResult lagrangian_dual(const Problem& problem, const std::vector<Instrument>& instruments,
                            const BoundOptions& options = {});
/// Same, with the problem's calibration instruments.
BoundResult lagrangian_dual(const Problem& problem, const BoundOptions& options = {});

BoundResult compute_bound(BoundKind kind, const Problem& problem, const BoundOptions& options = {});

/// Thrown when the cutting plane hits its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, Rational lower, Rational upper)
        : std::runtime_error(what), lower_(std::move(lower)), upper_(std::move(upper)) {}
    const Rational& lower() const { return lower_; }
    const Rational& upper() const { return upper_; }

private:
    Rational lower_;
    Rational upper_;
};

/// Conditional transition kernel of a weak certificate given a prefix and
/// an exercise status (exercised_at empty: not yet exercised).
struct RegimeKernel {
    Prefix prefix;
    std::optional<std::size_t> exercised_at;
    Rational mass;
    std::map<NodeIndex, Rational> kernel;
};

/// Presents a weak certificate as a finite-regime model: one kernel per
/// prefix and positive-mass exercise status.
std::vector<RegimeKernel> extract_mixture(const PriceLattice& lattice, const WeakCertificate& cert);

struct CertificateReport {
    std::vector<std::string> failures;
    /// Constraints holding with equality (hedge certificates).
    std::vector<std::string> binding;

    bool ok() const { return failures.empty(); }
};

/// Re-checks a certificate from the problem data by direct enumeration.
CertificateReport verify_certificate(const Problem& problem, const Certificate& cert,
                                     const Rational& claimed,
                                     const Limits& limits = {});

struct DualityReport {
    std::vector<BoundResult> bounds;
    Rational strong_weak;
    Rational weak_superhedge;
    Rational subhedge_lowest;
    std::vector<std::string> flags;

    const BoundResult& get(BoundKind kind) const;
};

/// All six bounds, their gaps and certificate checks. The sub-computations
/// run concurrently when parallel is set; results do not depend on it.
DualityReport duality_report(const Problem& problem, const BoundOptions& options = {},
                             bool parallel = true);

}  // namespace amhedge
