#pragma once

// Brute-force references that share no code with the LP-based bounds.

#include "amhedge/market.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

namespace amhedge::testing {

/// Equality system A mu = b describing consistent martingale path measures.
struct MeasureSystem {
    std::vector<Path> paths;
    std::vector<std::vector<Rational>> rows;
    std::vector<Rational> rhs;
};

inline MeasureSystem measure_system(const Problem& problem) {
    const PriceLattice& lat = problem.lattice;
    MeasureSystem sys;
    sys.paths = enumerate_paths(lat);
    const std::size_t n = sys.paths.size();
    const std::size_t T = lat.horizon();

    sys.rows.emplace_back(n, Rational(1));
    sys.rhs.emplace_back(1);

    for (const MarginalLaw* law : problem.marginals()) {
        for (std::size_t i = 0; i < lat.levels[law->time].size(); ++i) {
            std::vector<Rational> row(n);
            for (std::size_t k = 0; k < n; ++k) {
                if (sys.paths[k].nodes[law->time] == i) {
                    row[k] = 1;
                }
            }
            sys.rows.push_back(std::move(row));
            sys.rhs.push_back(law->mass_at(lat.levels[law->time][i]));
        }
    }
    for (const Instrument& inst : problem.instruments) {
        const std::size_t t = inst.maturity_or(T);
        std::vector<Rational> row(n);
        for (std::size_t k = 0; k < n; ++k) {
            row[k] = inst.payoff_at(lat.price(t, sys.paths[k].nodes[t]));
        }
        sys.rows.push_back(std::move(row));
        sys.rhs.push_back(inst.price);
    }

    std::map<Prefix, std::vector<Rational>> drift;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& nodes = sys.paths[k].nodes;
        for (std::size_t t = 0; t < T; ++t) {
            auto& row = drift[Prefix(nodes.begin(), nodes.begin() + static_cast<long>(t) + 1)];
            row.resize(n);
            row[k] = lat.price(t + 1, nodes[t + 1]) - lat.price(t, nodes[t]);
        }
    }
    for (auto& [prefix, row] : drift) {
        sys.rows.push_back(std::move(row));
        sys.rhs.emplace_back(0);
    }
    return sys;
}

/// Unique solution of A_S x = b on the columns in support, if the columns
/// are independent and the system is consistent.
inline std::optional<std::vector<Rational>> solve_on_support(const MeasureSystem& sys,
                                                             const std::vector<std::size_t>& support) {
    const std::size_t m = sys.rows.size();
    const std::size_t s = support.size();
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(s + 1));
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            a[r][c] = sys.rows[r][support[c]];
        }
        a[r][s] = sys.rhs[r];
    }
    std::size_t rank = 0;
    for (std::size_t c = 0; c < s; ++c) {
        std::size_t pivot = rank;
        while (pivot < m && sgn(a[pivot][c]) == 0) {
            ++pivot;
        }
        if (pivot == m) {
            return std::nullopt;
        }
        std::swap(a[pivot], a[rank]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r != rank && sgn(a[r][c]) != 0) {
                const Rational f = a[r][c] / a[rank][c];
                for (std::size_t k = c; k <= s; ++k) {
                    a[r][k] -= f * a[rank][k];
                }
            }
        }
        ++rank;
    }
    for (std::size_t r = rank; r < m; ++r) {
        if (sgn(a[r][s]) != 0) {
            return std::nullopt;
        }
    }
    std::vector<Rational> x(s);
    for (std::size_t c = 0; c < s; ++c) {
        x[c] = a[c][s] / a[c][c];
    }
    return x;
}

/// Every vertex of the consistent martingale polytope, as path masses.
inline std::vector<std::vector<Rational>> polytope_vertices(const MeasureSystem& sys) {
    const std::size_t n = sys.paths.size();
    if (n > 16) {
        throw std::invalid_argument("vertex enumeration is limited to 16 paths");
    }
    std::set<std::vector<Rational>> found;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::size_t> support;
        for (std::size_t k = 0; k < n; ++k) {
            if (mask & (1u << k)) {
                support.push_back(k);
            }
        }
        const auto x = solve_on_support(sys, support);
        if (!x) {
            continue;
        }
        bool positive = true;
        for (const auto& v : *x) {
            positive = positive && sgn(v) > 0;
        }
        if (!positive) {
            continue;
        }
        std::vector<Rational> mu(n);
        for (std::size_t c = 0; c < support.size(); ++c) {
            mu[support[c]] = (*x)[c];
        }
        found.insert(std::move(mu));
    }
    return {found.begin(), found.end()};
}

/// Snell envelope on unnormalized prefix masses: the best rule's expected
/// payoff under mu.
inline Rational snell_value(const Problem& problem, const std::vector<Path>& paths,
                            const std::vector<Rational>& mu) {
    const PriceLattice& lat = problem.lattice;
    const std::size_t T = lat.horizon();
    std::vector<std::map<Prefix, Rational>> mass(T + 1);
    for (std::size_t k = 0; k < paths.size(); ++k) {
        for (std::size_t t = 0; t <= T; ++t) {
            mass[t][Prefix(paths[k].nodes.begin(), paths[k].nodes.begin() + static_cast<long>(t) + 1)] +=
                mu[k];
        }
    }
    std::map<Prefix, Rational> value;
    for (const auto& [p, m] : mass[T]) {
        value[p] = m * problem.payoff.at(T, lat.price(T, p.back()));
    }
    for (std::size_t t = T; t-- > 0;) {
        std::map<Prefix, Rational> cont;
        for (const auto& [p, v] : value) {
            cont[Prefix(p.begin(), p.end() - 1)] += v;
        }
        std::map<Prefix, Rational> next;
        for (const auto& [p, m] : mass[t]) {
            const Rational stop = m * problem.payoff.at(t, lat.price(t, p.back()));
            next[p] = stop > cont[p] ? stop : cont[p];
        }
        value = std::move(next);
    }
    return value.begin()->second;
}

/// max over polytope vertices of the Snell value; nullopt when the
/// polytope is empty.
inline std::optional<Rational> strong_by_vertices(const Problem& problem) {
    const MeasureSystem sys = measure_system(problem);
    std::optional<Rational> best;
    for (const auto& mu : polytope_vertices(sys)) {
        const Rational v = snell_value(problem, sys.paths, mu);
        if (!best || v > *best) {
            best = v;
        }
    }
    return best;
}

/// Random instance with horizon 1..3 and 2..4 levels after time 0.
inline Problem random_instance(std::uint64_t seed) {
    std::mt19937_64 g(seed * 7919 + 1);
    const std::size_t T = 1 + g() % 3;
    std::vector<std::size_t> shape{1};
    for (std::size_t t = 1; t <= T; ++t) {
        shape.push_back(2 + g() % 3);
    }
    RandomProblemOptions o;
    o.intermediate_probability = 0.3;
    o.drop_edge_probability = 0.2;
    return random_problem(seed, shape, o);
}

/// Random instance with at most max_paths paths.
inline Problem small_instance(std::uint64_t seed, std::size_t max_paths = 12) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        std::mt19937_64 g(seed * 104729 + attempt);
        const std::size_t T = 1 + g() % 3;
        std::vector<std::size_t> shape{1};
        for (std::size_t t = 1; t <= T; ++t) {
            shape.push_back(2 + g() % (T == 3 ? 1 : 3));
        }
        RandomProblemOptions o;
        o.intermediate_probability = 0.3;
        o.drop_edge_probability = 0.3;
        Problem p = random_problem(seed * 1000 + attempt, shape, o);
        if (count_paths(p.lattice) <= max_paths) {
            return p;
        }
    }
}

}  // namespace amhedge::testing
