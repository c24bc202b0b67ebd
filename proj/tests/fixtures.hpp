#pragma once

#include "amhedge/market.hpp"

#include <string>
#include <vector>

namespace amhedge::testing {

inline Rational q(long num, long den = 1) {
    return make_rational(num, den);
}

inline std::vector<std::vector<Rational>> example_levels() {
    return {{q(2)}, {q(1), q(3)}, {q(0), q(2), q(4)}};
}

/// The three-period example: time-2 law (2/5, 1/5, 2/5) on {0, 2, 4},
/// payoff 1 at (1,1) and 8 at (2,4).
inline Problem example_problem() {
    Problem p;
    p.lattice = PriceLattice::complete(example_levels());
    MarginalLaw law;
    law.time = 2;
    law.mass = {{q(0), q(2, 5)}, {q(2), q(1, 5)}, {q(4), q(2, 5)}};
    p.terminal_marginal = law;
    p.payoff.set(1, q(1), q(1));
    p.payoff.set(2, q(4), q(8));
    return p;
}

/// Same lattice calibrated only by the Arrow-Debreu claim on {X_2 = 4}.
inline Problem example_problem_single_instrument() {
    Problem p = example_problem();
    p.terminal_marginal.reset();
    Instrument inst;
    inst.payoff[q(4)] = 1;
    inst.price = q(2, 5);
    p.instruments.push_back(inst);
    return p;
}

inline Problem with_payoff(Problem p, AmericanPayoff payoff) {
    p.payoff = std::move(payoff);
    return p;
}

/// European claim paying 8 at X_2 = 4 only.
inline AmericanPayoff european_payoff() {
    AmericanPayoff a;
    a.set(2, q(4), q(8));
    return a;
}

inline std::string source_dir() {
    return AMHEDGE_SOURCE_DIR;
}

}  // namespace amhedge::testing
