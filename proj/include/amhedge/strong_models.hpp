#pragma once

#include "amhedge/market.hpp"
#include "amhedge/path_tree.hpp"

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace amhedge {

/// Thrown when model parameters or kernels break a stated constraint.
class ConstraintViolation : public std::invalid_argument {
public:
    explicit ConstraintViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown by concave_envelope_eval when x0 lies outside the abscissas.
class EnvelopeInfeasible : public std::domain_error {
public:
    explicit EnvelopeInfeasible(const std::string& what) : std::domain_error(what) {}
};

/// Natural-filtration martingale model: one transition kernel per
/// reachable history prefix of length 1..T, aligned with
/// lattice.successors[t][x_t].
class StrongModel {
public:
    using Kernel = std::vector<Rational>;

    /// Throws ConstraintViolation unless every reachable prefix has a
    /// non-negative martingale kernel summing to one.
    StrongModel(PriceLattice lattice, std::map<Prefix, Kernel> kernels);

    /// Markov model: node_kernels[t][i] is used at every prefix ending at
    /// node i of time t.
    static StrongModel markov(PriceLattice lattice,
                              const std::vector<std::vector<Kernel>>& node_kernels);

    const PriceLattice& lattice() const { return lattice_; }
    const std::map<Prefix, Kernel>& kernels() const { return kernels_; }
    const Kernel& kernel(const Prefix& prefix) const;

    /// Transition probability from the prefix to node j at t+1 (0 off the
    /// successor list).
    Rational probability(const Prefix& prefix, NodeIndex j) const;

private:
    PriceLattice lattice_;
    std::map<Prefix, Kernel> kernels_;
};

/// Kernel problems found in a candidate model; empty when valid.
std::vector<std::string> model_violations(const PriceLattice& lattice,
                                          const std::map<Prefix, StrongModel::Kernel>& kernels);

/// The two-parameter family on the three-period example lattice: from
/// (1,3) the kernel over (4,2,0) is (p, (3-4p)/2, p-1/2); from (1,1) it is
/// (s, (1-4s)/2, (1+2s)/2); the root moves to 1 or 3 with probability 1/2.
/// Requires 1/2 <= p <= 3/4 and 0 <= s <= 1/4.
StrongModel make_example_model(const Rational& p, const Rational& s);

struct StoppingValue {
    Rational value;
    StoppingRule rule;
    /// Conditional values at every reachable prefix of length 1..T.
    std::map<Prefix, Rational> exercise;
    std::map<Prefix, Rational> continuation;
};

/// Backward induction under a fixed model; ties continue.
StoppingValue optimal_stopping(const StrongModel& model, const AmericanPayoff& payoff);

using PathMeasure = std::map<Path, Rational>;

/// Product of kernel entries along each path (zero-mass paths omitted).
PathMeasure path_law(const StrongModel& model);

struct EnvelopePoint {
    Rational x;
    Rational v;
};

struct EnvelopeValue {
    Rational value;
    /// (index into the query points, weight); one or two entries.
    std::vector<std::pair<std::size_t, Rational>> support;
};

/// Upper concave envelope of the points evaluated at x0, with an attaining
/// one- or two-point combination whose weights average to x0.
EnvelopeValue concave_envelope_eval(std::span<const EnvelopePoint> points, const Rational& x0);

struct PenalizedValue {
    Rational value;
    StrongModel model;
    StoppingRule rule;
    /// c_i - E[g_i(X_{maturity_i})] under the witness model.
    std::vector<Rational> subgradient;
};

/// sup over all natural-filtration martingale models and stopping rules of
/// E[a(tau, X_tau) - sum_i beta_i (g_i(X_{m_i}) - c_i)]. Each penalty is
/// collected at its instrument's maturity whether or not the option has
/// been exercised.
PenalizedValue robust_penalized_value(const Problem& problem,
                                      std::span<const Instrument> instruments,
                                      std::span<const Rational> beta);

/// Same, with the problem's calibration instruments.
PenalizedValue robust_penalized_value(const Problem& problem, std::span<const Rational> beta);

/// E[a(tau, X_tau)] when the rule is followed under the path measure.
Rational expected_payoff(const PathMeasure& measure, const StoppingRule& rule,
                         const PriceLattice& lattice, const AmericanPayoff& payoff);

}  // namespace amhedge
