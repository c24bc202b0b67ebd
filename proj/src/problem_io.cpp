#include "amhedge/problem_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace amhedge {

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& message) {
    throw ParseError("field '" + field + "': " + message);
}

const Json& require(const Json& obj, const char* key, const std::string& field) {
    if (!obj.is_object() || !obj.contains(key)) {
        field_error(field, std::string("missing required key '") + key + "'");
    }
    return obj.at(key);
}

std::size_t index_from_json(const Json& value, const std::string& field) {
    if (!value.is_number_integer() || value.get<long long>() < 0) {
        field_error(field, "expected a non-negative integer");
    }
    return static_cast<std::size_t>(value.get<long long>());
}

std::map<Rational, Rational> rational_map(const Json& obj, const std::string& field) {
    if (!obj.is_object()) {
        field_error(field, "expected an object mapping price levels to rationals");
    }
    std::map<Rational, Rational> out;
    for (const auto& [key, value] : obj.items()) {
        Rational x;
        try {
            x = parse_rational(key, true);
        } catch (const ParseError& e) {
            field_error(field + "." + key, e.what());
        }
        if (!out.emplace(x, rational_from_json(value, field + "." + key)).second) {
            field_error(field + "." + key, "duplicate level");
        }
    }
    return out;
}

Json map_to_json(const std::map<Rational, Rational>& m) {
    Json obj = Json::object();
    for (const auto& [x, v] : m) {
        obj[to_string(x)] = rational_to_json(v);
    }
    return obj;
}

std::string locate(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

Rational rational_from_json(const Json& value, const std::string& field) {
    if (value.is_number_integer()) {
        return Rational(mpz_class(value.dump(), 10));
    }
    if (value.is_string()) {
        try {
            return parse_rational(value.get<std::string>(), true);
        } catch (const ParseError& e) {
            field_error(field, e.what());
        }
    }
    field_error(field, "expected a rational string \"p/q\" or an integer");
}

Json rational_to_json(const Rational& value) {
    return to_string(value);
}

Problem parse_problem(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw ParseError("syntax error at " + locate(text, e.byte == 0 ? 0 : e.byte - 1) +
                         ": " + e.what());
    }
    if (!doc.is_object()) {
        field_error("<root>", "expected a JSON object");
    }

    Problem problem;
    const Json& levels = require(doc, "levels", "levels");
    if (!levels.is_array() || levels.empty()) {
        field_error("levels", "expected a non-empty array of arrays");
    }
    std::vector<std::vector<Rational>> lattice_levels;
    for (std::size_t t = 0; t < levels.size(); ++t) {
        const std::string field = "levels[" + std::to_string(t) + "]";
        if (!levels[t].is_array()) {
            field_error(field, "expected an array");
        }
        std::vector<Rational> level;
        for (std::size_t i = 0; i < levels[t].size(); ++i) {
            level.push_back(rational_from_json(levels[t][i], field + "[" + std::to_string(i) + "]"));
        }
        lattice_levels.push_back(std::move(level));
    }
    problem.lattice = PriceLattice::complete(std::move(lattice_levels));
    const std::size_t horizon = problem.lattice.horizon();

    if (doc.contains("transitions")) {
        const Json& arr = doc.at("transitions");
        if (!arr.is_array()) {
            field_error("transitions", "expected an array");
        }
        std::vector<std::vector<std::set<NodeIndex>>> edges(horizon);
        for (std::size_t t = 0; t < horizon; ++t) {
            edges[t].resize(problem.lattice.levels[t].size());
        }
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string field = "transitions[" + std::to_string(k) + "]";
            const std::size_t t = index_from_json(require(arr[k], "t", field), field + ".t");
            if (t >= horizon) {
                field_error(field + ".t", "time must be below the horizon " + std::to_string(horizon));
            }
            const Rational from = rational_from_json(require(arr[k], "from", field), field + ".from");
            const Rational to = rational_from_json(require(arr[k], "to", field), field + ".to");
            const auto i = problem.lattice.index_of(t, from);
            const auto j = problem.lattice.index_of(t + 1, to);
            if (!i) {
                field_error(field + ".from", to_string(from) + " is not a level at t=" + std::to_string(t));
            }
            if (!j) {
                field_error(field + ".to", to_string(to) + " is not a level at t=" + std::to_string(t + 1));
            }
            edges[t][*i].insert(*j);
        }
        for (std::size_t t = 0; t < horizon; ++t) {
            for (std::size_t i = 0; i < edges[t].size(); ++i) {
                problem.lattice.successors[t][i].assign(edges[t][i].begin(), edges[t][i].end());
            }
        }
    }

    if (doc.contains("terminal_marginal")) {
        MarginalLaw law;
        law.time = horizon;
        law.mass = rational_map(doc.at("terminal_marginal"), "terminal_marginal");
        problem.terminal_marginal = std::move(law);
    }
    if (doc.contains("intermediate_marginals")) {
        const Json& arr = doc.at("intermediate_marginals");
        if (!arr.is_array()) {
            field_error("intermediate_marginals", "expected an array");
        }
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string field = "intermediate_marginals[" + std::to_string(k) + "]";
            MarginalLaw law;
            law.time = index_from_json(require(arr[k], "t", field), field + ".t");
            law.mass = rational_map(require(arr[k], "mass", field), field + ".mass");
            problem.intermediate_marginals.push_back(std::move(law));
        }
    }
    if (doc.contains("payoff")) {
        const Json& arr = doc.at("payoff");
        if (!arr.is_array()) {
            field_error("payoff", "expected an array of {t, x, a}");
        }
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string field = "payoff[" + std::to_string(k) + "]";
            const std::size_t t = index_from_json(require(arr[k], "t", field), field + ".t");
            const Rational x = rational_from_json(require(arr[k], "x", field), field + ".x");
            const Rational a = rational_from_json(require(arr[k], "a", field), field + ".a");
            if (!problem.payoff.values.emplace(std::make_pair(t, x), a).second) {
                field_error(field, "duplicate payoff entry");
            }
        }
    }
    if (doc.contains("instruments")) {
        const Json& arr = doc.at("instruments");
        if (!arr.is_array()) {
            field_error("instruments", "expected an array");
        }
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string field = "instruments[" + std::to_string(k) + "]";
            Instrument inst;
            inst.payoff = rational_map(require(arr[k], "payoff", field), field + ".payoff");
            inst.price = rational_from_json(require(arr[k], "price", field), field + ".price");
            if (arr[k].contains("t")) {
                inst.maturity = index_from_json(arr[k].at("t"), field + ".t");
            }
            problem.instruments.push_back(std::move(inst));
        }
    }
    return problem;
}

Problem load_problem(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot read '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_problem(buffer.str());
}

Json problem_to_json(const Problem& problem) {
    const auto& lattice = problem.lattice;
    Json doc = Json::object();
    Json levels = Json::array();
    for (const auto& level : lattice.levels) {
        Json row = Json::array();
        for (const auto& x : level) {
            row.push_back(rational_to_json(x));
        }
        levels.push_back(std::move(row));
    }
    doc["levels"] = std::move(levels);
    if (lattice != PriceLattice::complete(lattice.levels)) {
        Json edges = Json::array();
        for (std::size_t t = 0; t < lattice.successors.size(); ++t) {
            for (std::size_t i = 0; i < lattice.successors[t].size(); ++i) {
                for (NodeIndex j : lattice.successors[t][i]) {
                    edges.push_back(Json{{"t", t},
                                         {"from", rational_to_json(lattice.levels[t][i])},
                                         {"to", rational_to_json(lattice.levels[t + 1][j])}});
                }
            }
        }
        doc["transitions"] = std::move(edges);
    }
    if (problem.terminal_marginal) {
        doc["terminal_marginal"] = map_to_json(problem.terminal_marginal->mass);
    }
    if (!problem.intermediate_marginals.empty()) {
        Json arr = Json::array();
        for (const auto& law : problem.intermediate_marginals) {
            arr.push_back(Json{{"t", law.time}, {"mass", map_to_json(law.mass)}});
        }
        doc["intermediate_marginals"] = std::move(arr);
    }
    Json payoff = Json::array();
    for (const auto& [key, a] : problem.payoff.values) {
        payoff.push_back(
            Json{{"t", key.first}, {"x", rational_to_json(key.second)}, {"a", rational_to_json(a)}});
    }
    doc["payoff"] = std::move(payoff);
    if (!problem.instruments.empty()) {
        Json arr = Json::array();
        for (const auto& inst : problem.instruments) {
            Json item{{"payoff", map_to_json(inst.payoff)}, {"price", rational_to_json(inst.price)}};
            if (inst.maturity) {
                item["t"] = *inst.maturity;
            }
            arr.push_back(std::move(item));
        }
        doc["instruments"] = std::move(arr);
    }
    return doc;
}

std::string dump_problem(const Problem& problem) {
    return problem_to_json(problem).dump(2) + "\n";
}

std::string problem_digest(const Problem& problem) {
    const std::string text = problem_to_json(problem).dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace amhedge
