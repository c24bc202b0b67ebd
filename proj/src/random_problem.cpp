#include "amhedge/market.hpp"

#include <algorithm>
#include <random>

namespace amhedge {

namespace {

// Draws from the raw engine output, whose sequence is fixed by the
// standard, so problems are reproducible across standard libraries.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : engine_(seed) {}

    long between(long lo, long hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(engine_() % span);
    }

    bool chance(double p) {
        if (p <= 0.0) {
            return false;
        }
        constexpr std::uint64_t kScale = 1'000'000;
        return static_cast<double>(engine_() % kScale) < p * static_cast<double>(kScale);
    }

private:
    std::mt19937_64 engine_;
};

std::vector<Rational> next_level(Draw& draw, const std::vector<Rational>& prev, std::size_t count,
                                 const PriceRange& range) {
    const long prev_lo = prev.front().get_num().get_si();
    const long prev_hi = prev.back().get_num().get_si();
    if (count == 1) {
        if (prev_lo != prev_hi) {
            throw InvalidShape("a single level cannot follow several levels");
        }
        return {prev.front()};
    }
    if (range.hi - range.lo + 1 < static_cast<long>(count)) {
        throw InvalidShape("price range too narrow for " + std::to_string(count) + " levels");
    }
    long lo = 0;
    long hi = 0;
    bool found = false;
    for (int attempt = 0; attempt < 64 && !found; ++attempt) {
        lo = draw.between(range.lo, prev_lo);
        hi = draw.between(prev_hi, range.hi);
        found = hi - lo - 1 >= static_cast<long>(count) - 2 && lo < hi;
    }
    if (!found) {
        lo = range.lo;
        hi = range.hi;
    }
    std::vector<long> interior;
    for (long v = lo + 1; v < hi; ++v) {
        interior.push_back(v);
    }
    // Partial Fisher-Yates for count - 2 distinct interior values.
    for (std::size_t k = 0; k + 2 < count; ++k) {
        const auto pick = static_cast<std::size_t>(
            draw.between(static_cast<long>(k), static_cast<long>(interior.size()) - 1));
        std::swap(interior[k], interior[pick]);
    }
    std::vector<long> chosen(interior.begin(), interior.begin() + static_cast<long>(count - 2));
    chosen.push_back(lo);
    chosen.push_back(hi);
    std::sort(chosen.begin(), chosen.end());
    std::vector<Rational> level;
    for (long v : chosen) {
        level.push_back(Rational(v));
    }
    return level;
}

// Successor subsets that still straddle each node and reach every node.
std::vector<std::vector<NodeIndex>> random_edges(Draw& draw, const std::vector<Rational>& here,
                                                 const std::vector<Rational>& next,
                                                 double drop_probability) {
    std::vector<std::vector<NodeIndex>> succ(here.size());
    std::vector<bool> incoming(next.size(), false);
    for (std::size_t i = 0; i < here.size(); ++i) {
        std::vector<bool> keep(next.size(), true);
        for (std::size_t j = 0; j < next.size(); ++j) {
            keep[j] = !draw.chance(drop_probability);
        }
        bool below = false;
        bool above = false;
        for (std::size_t j = 0; j < next.size(); ++j) {
            below = below || (keep[j] && next[j] <= here[i]);
            above = above || (keep[j] && next[j] >= here[i]);
        }
        if (!below) {
            // Nearest level at or below the node.
            std::size_t j = 0;
            while (j + 1 < next.size() && next[j + 1] <= here[i]) {
                ++j;
            }
            keep[j] = true;
        }
        if (!above) {
            std::size_t j = next.size() - 1;
            while (j > 0 && next[j - 1] >= here[i]) {
                --j;
            }
            keep[j] = true;
        }
        for (std::size_t j = 0; j < next.size(); ++j) {
            if (keep[j]) {
                succ[i].push_back(j);
                incoming[j] = true;
            }
        }
    }
    for (std::size_t j = 0; j < next.size(); ++j) {
        if (!incoming[j]) {
            auto& list = succ[static_cast<std::size_t>(
                draw.between(0, static_cast<long>(here.size()) - 1))];
            list.insert(std::lower_bound(list.begin(), list.end(), j), j);
        }
    }
    return succ;
}

// Random martingale kernel at x over the given successor prices: a random
// mixture of the extreme kernels (point mass at x, or two points bracketing x).
std::vector<Rational> random_kernel(Draw& draw, const Rational& x,
                                    const std::vector<Rational>& prices) {
    std::vector<std::vector<Rational>> extremes;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (prices[i] == x) {
            std::vector<Rational> k(prices.size());
            k[i] = 1;
            extremes.push_back(std::move(k));
            continue;
        }
        if (prices[i] > x) {
            continue;
        }
        for (std::size_t j = 0; j < prices.size(); ++j) {
            if (prices[j] > x) {
                std::vector<Rational> k(prices.size());
                const Rational width = prices[j] - prices[i];
                k[i] = (prices[j] - x) / width;
                k[j] = (x - prices[i]) / width;
                extremes.push_back(std::move(k));
            }
        }
    }
    const long picks = draw.between(1, 3);
    std::vector<Rational> kernel(prices.size());
    Rational total_weight;
    for (long n = 0; n < picks; ++n) {
        const auto& e =
            extremes[static_cast<std::size_t>(draw.between(0, static_cast<long>(extremes.size()) - 1))];
        const Rational w = draw.between(1, 4);
        for (std::size_t i = 0; i < kernel.size(); ++i) {
            kernel[i] += w * e[i];
        }
        total_weight += w;
    }
    for (auto& k : kernel) {
        k /= total_weight;
    }
    return kernel;
}

}  // namespace

Problem random_problem(std::uint64_t seed, std::span<const std::size_t> shape,
                       const RandomProblemOptions& options) {
    if (shape.size() < 2) {
        throw InvalidShape("shape needs at least two times");
    }
    if (shape[0] != 1) {
        throw InvalidShape("shape must start with a single spot level");
    }
    for (std::size_t c : shape) {
        if (c == 0) {
            throw InvalidShape("every time needs at least one level");
        }
    }
    const PriceRange& range = options.range;
    if (range.hi < range.lo) {
        throw InvalidShape("empty price range");
    }
    Draw draw(seed);

    const long spot = range.hi - range.lo >= 2 ? draw.between(range.lo + 1, range.hi - 1)
                                               : range.lo;
    std::vector<std::vector<Rational>> levels{{Rational(spot)}};
    for (std::size_t t = 1; t < shape.size(); ++t) {
        levels.push_back(next_level(draw, levels.back(), shape[t], range));
    }

    Problem problem;
    problem.lattice = PriceLattice::complete(levels);
    const std::size_t horizon = problem.lattice.horizon();
    if (options.drop_edge_probability > 0.0) {
        for (std::size_t t = 0; t < horizon; ++t) {
            problem.lattice.successors[t] =
                random_edges(draw, levels[t], levels[t + 1], options.drop_edge_probability);
        }
    }

    // Markov martingale: propagate the node distribution forward.
    std::vector<std::vector<Rational>> law{{Rational(1)}};
    for (std::size_t t = 0; t < horizon; ++t) {
        std::vector<Rational> next(levels[t + 1].size());
        for (std::size_t i = 0; i < levels[t].size(); ++i) {
            const auto& succ = problem.lattice.successors[t][i];
            std::vector<Rational> prices;
            for (NodeIndex j : succ) {
                prices.push_back(levels[t + 1][j]);
            }
            const auto kernel = random_kernel(draw, levels[t][i], prices);
            for (std::size_t k = 0; k < succ.size(); ++k) {
                next[succ[k]] += law[t][i] * kernel[k];
            }
        }
        law.push_back(std::move(next));
    }
    auto marginal_at = [&](std::size_t t) {
        MarginalLaw m;
        m.time = t;
        for (std::size_t i = 0; i < levels[t].size(); ++i) {
            m.mass[levels[t][i]] = law[t][i];
        }
        return m;
    };
    problem.terminal_marginal = marginal_at(horizon);
    for (std::size_t t = 1; t < horizon; ++t) {
        if (draw.chance(options.intermediate_probability)) {
            problem.intermediate_marginals.push_back(marginal_at(t));
        }
    }

    for (std::size_t t = 0; t <= horizon; ++t) {
        for (const auto& x : levels[t]) {
            if (draw.chance(options.payoff_density)) {
                problem.payoff.set(t, x, make_rational(draw.between(1, 12), draw.between(1, 2)));
            }
        }
    }
    return problem;
}

}  // namespace amhedge
