#include "amhedge/certificate_io.hpp"

namespace amhedge {

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& message) {
    throw ParseError("field '" + field + "': " + message);
}

const Json& member(const Json& obj, const char* key, const std::string& field) {
    if (!obj.is_object() || !obj.contains(key)) {
        field_error(field, std::string("missing required key '") + key + "'");
    }
    return obj.at(key);
}

const Json& array_at(const Json& obj, const std::string& field) {
    if (!obj.is_array()) {
        field_error(field, "expected an array");
    }
    return obj;
}

std::size_t index_of_json(const Json& value, const std::string& field) {
    if (!value.is_number_integer() || value.get<long long>() < 0) {
        field_error(field, "expected a non-negative integer");
    }
    return static_cast<std::size_t>(value.get<long long>());
}

Json prices_json(const PriceLattice& lattice, const std::vector<NodeIndex>& nodes) {
    Json out = Json::array();
    for (std::size_t t = 0; t < nodes.size(); ++t) {
        out.push_back(rational_to_json(lattice.price(t, nodes[t])));
    }
    return out;
}

std::vector<NodeIndex> nodes_from_json(const PriceLattice& lattice, const Json& arr,
                                       const std::string& field) {
    array_at(arr, field);
    if (arr.empty() || arr.size() > lattice.levels.size()) {
        field_error(field, "expected between 1 and " + std::to_string(lattice.levels.size()) +
                               " prices");
    }
    std::vector<NodeIndex> nodes;
    for (std::size_t t = 0; t < arr.size(); ++t) {
        const std::string f = field + "[" + std::to_string(t) + "]";
        const auto i = lattice.index_of(t, rational_from_json(arr[t], f));
        if (!i) {
            field_error(f, "not a price level at t=" + std::to_string(t));
        }
        nodes.push_back(*i);
    }
    return nodes;
}

Path path_from_json(const PriceLattice& lattice, const Json& arr, const std::string& field) {
    Path path{nodes_from_json(lattice, arr, field)};
    if (path.nodes.size() != lattice.levels.size()) {
        field_error(field, "a path needs " + std::to_string(lattice.levels.size()) + " prices");
    }
    return path;
}

Json level_map_json(const std::map<Rational, Rational>& m) {
    Json obj = Json::object();
    for (const auto& [x, v] : m) {
        obj[to_string(x)] = rational_to_json(v);
    }
    return obj;
}

std::map<Rational, Rational> level_map_from_json(const Json& obj, const std::string& field) {
    if (!obj.is_object()) {
        field_error(field, "expected an object mapping levels to rationals");
    }
    std::map<Rational, Rational> out;
    for (const auto& [key, value] : obj.items()) {
        Rational x;
        try {
            x = parse_rational(key, true);
        } catch (const ParseError& e) {
            field_error(field + "." + key, e.what());
        }
        out[x] = rational_from_json(value, field + "." + key);
    }
    return out;
}

Json rule_json(const PriceLattice& lattice, const StoppingRule& rule) {
    Json arr = Json::array();
    for (const auto& [prefix, exercise] : rule.decisions) {
        arr.push_back(Json{{"prefix", prices_json(lattice, prefix)}, {"exercise", exercise}});
    }
    return arr;
}

StoppingRule rule_from_json(const PriceLattice& lattice, const Json& arr, const std::string& field) {
    StoppingRule rule;
    array_at(arr, field);
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string f = field + "[" + std::to_string(k) + "]";
        const Json& flag = member(arr[k], "exercise", f);
        if (!flag.is_boolean()) {
            field_error(f + ".exercise", "expected a boolean");
        }
        rule.decisions[nodes_from_json(lattice, member(arr[k], "prefix", f), f + ".prefix")] =
            flag.get<bool>();
    }
    return rule;
}

Json measure_json(const PriceLattice& lattice, const PathMeasure& mu) {
    Json arr = Json::array();
    for (const auto& [path, m] : mu) {
        arr.push_back(Json{{"path", prices_json(lattice, path.nodes)}, {"mass", rational_to_json(m)}});
    }
    return arr;
}

PathMeasure measure_from_json(const PriceLattice& lattice, const Json& arr, const std::string& field) {
    PathMeasure mu;
    array_at(arr, field);
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string f = field + "[" + std::to_string(k) + "]";
        mu[path_from_json(lattice, member(arr[k], "path", f), f + ".path")] +=
            rational_from_json(member(arr[k], "mass", f), f + ".mass");
    }
    return mu;
}

Json hedge_json(const PriceLattice& lattice, const HedgeCertificate& h) {
    const std::size_t horizon = lattice.horizon();
    Json doc{{"cash", rational_to_json(h.cash)}};
    auto terminal = h.statics.find(horizon);
    doc["static"] = terminal == h.statics.end() ? Json::object() : level_map_json(terminal->second);
    Json intermediate = Json::array();
    for (const auto& [t, claim] : h.statics) {
        if (t != horizon) {
            intermediate.push_back(Json{{"t", t}, {"claim", level_map_json(claim)}});
        }
    }
    if (!intermediate.empty()) {
        doc["intermediate_statics"] = std::move(intermediate);
    }
    if (!h.instrument_units.empty()) {
        Json units = Json::array();
        for (const auto& u : h.instrument_units) {
            units.push_back(rational_to_json(u));
        }
        doc["instruments"] = std::move(units);
    }
    Json pre = Json::array();
    for (const auto& [prefix, units] : h.pre_holdings) {
        pre.push_back(Json{{"prefix", prices_json(lattice, prefix)}, {"units", rational_to_json(units)}});
    }
    doc["pre_holdings"] = std::move(pre);
    Json post = Json::array();
    for (const auto& [key, units] : h.post_holdings) {
        post.push_back(Json{{"prefix", prices_json(lattice, key.first)},
                            {"u", key.second},
                            {"units", rational_to_json(units)}});
    }
    doc["post_holdings"] = std::move(post);
    return doc;
}

HedgeCertificate hedge_from_json(const PriceLattice& lattice, const Json& doc, const std::string& field) {
    HedgeCertificate h;
    h.cash = rational_from_json(member(doc, "cash", field), field + ".cash");
    if (doc.contains("static")) {
        auto claim = level_map_from_json(doc.at("static"), field + ".static");
        if (!claim.empty()) {
            h.statics[lattice.horizon()] = std::move(claim);
        }
    }
    if (doc.contains("intermediate_statics")) {
        const Json& arr = array_at(doc.at("intermediate_statics"), field + ".intermediate_statics");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string f = field + ".intermediate_statics[" + std::to_string(k) + "]";
            h.statics[index_of_json(member(arr[k], "t", f), f + ".t")] =
                level_map_from_json(member(arr[k], "claim", f), f + ".claim");
        }
    }
    if (doc.contains("instruments")) {
        const Json& arr = array_at(doc.at("instruments"), field + ".instruments");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            h.instrument_units.push_back(
                rational_from_json(arr[k], field + ".instruments[" + std::to_string(k) + "]"));
        }
    }
    if (doc.contains("pre_holdings")) {
        const Json& arr = array_at(doc.at("pre_holdings"), field + ".pre_holdings");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string f = field + ".pre_holdings[" + std::to_string(k) + "]";
            h.pre_holdings[nodes_from_json(lattice, member(arr[k], "prefix", f), f + ".prefix")] =
                rational_from_json(member(arr[k], "units", f), f + ".units");
        }
    }
    if (doc.contains("post_holdings")) {
        const Json& arr = array_at(doc.at("post_holdings"), field + ".post_holdings");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string f = field + ".post_holdings[" + std::to_string(k) + "]";
            const Prefix prefix = nodes_from_json(lattice, member(arr[k], "prefix", f), f + ".prefix");
            const std::size_t u = index_of_json(member(arr[k], "u", f), f + ".u");
            h.post_holdings[{prefix, u}] = rational_from_json(member(arr[k], "units", f), f + ".units");
        }
    }
    return h;
}

Json instrument_json(const Instrument& inst) {
    Json item{{"payoff", level_map_json(inst.payoff)}, {"price", rational_to_json(inst.price)}};
    if (inst.maturity) {
        item["t"] = *inst.maturity;
    }
    return item;
}

Instrument instrument_from_json(const Json& doc, const std::string& field) {
    Instrument inst;
    inst.payoff = level_map_from_json(member(doc, "payoff", field), field + ".payoff");
    inst.price = rational_from_json(member(doc, "price", field), field + ".price");
    if (doc.contains("t")) {
        inst.maturity = index_of_json(doc.at("t"), field + ".t");
    }
    return inst;
}

}  // namespace

Json certificate_to_json(const PriceLattice& lattice, const Certificate& cert) {
    if (const auto* c = std::get_if<StrongCertificate>(&cert)) {
        return Json{{"rule", rule_json(lattice, c->rule)}, {"measure", measure_json(lattice, c->measure)}};
    }
    if (const auto* c = std::get_if<WeakCertificate>(&cert)) {
        Json arr = Json::array();
        for (const auto& [key, m] : c->mass) {
            arr.push_back(Json{{"path", prices_json(lattice, key.first.nodes)},
                               {"u", key.second},
                               {"mass", rational_to_json(m)}});
        }
        return arr;
    }
    if (const auto* c = std::get_if<HedgeCertificate>(&cert)) {
        return hedge_json(lattice, *c);
    }
    if (const auto* c = std::get_if<SubhedgeCertificate>(&cert)) {
        return Json{{"rule", rule_json(lattice, c->rule)}, {"portfolio", hedge_json(lattice, c->portfolio)}};
    }
    if (const auto* c = std::get_if<LowestCertificate>(&cert)) {
        return Json{{"measure", measure_json(lattice, c->measure)}};
    }
    const auto& c = std::get<LagrangianCertificate>(cert);
    Json beta = Json::array();
    for (const auto& b : c.beta) {
        beta.push_back(rational_to_json(b));
    }
    Json instruments = Json::array();
    for (const auto& inst : c.instruments) {
        instruments.push_back(instrument_json(inst));
    }
    return Json{{"beta", std::move(beta)},
                {"lower_bound", rational_to_json(c.lower_bound)},
                {"instruments", std::move(instruments)}};
}

Certificate certificate_from_json(const PriceLattice& lattice, BoundKind kind, const Json& doc) {
    const std::string field = "certificate";
    switch (kind) {
        case BoundKind::strong:
            return StrongCertificate{rule_from_json(lattice, member(doc, "rule", field), field + ".rule"),
                                     measure_from_json(lattice, member(doc, "measure", field),
                                                       field + ".measure")};
        case BoundKind::weak: {
            WeakCertificate cert;
            array_at(doc, field);
            for (std::size_t k = 0; k < doc.size(); ++k) {
                const std::string f = field + "[" + std::to_string(k) + "]";
                Path path = path_from_json(lattice, member(doc[k], "path", f), f + ".path");
                const std::size_t u = index_of_json(member(doc[k], "u", f), f + ".u");
                cert.mass[{std::move(path), u}] += rational_from_json(member(doc[k], "mass", f), f + ".mass");
            }
            return cert;
        }
        case BoundKind::superhedge:
            return hedge_from_json(lattice, doc, field);
        case BoundKind::subhedge:
            return SubhedgeCertificate{
                rule_from_json(lattice, member(doc, "rule", field), field + ".rule"),
                hedge_from_json(lattice, member(doc, "portfolio", field), field + ".portfolio")};
        case BoundKind::lowest_model:
            return LowestCertificate{
                measure_from_json(lattice, member(doc, "measure", field), field + ".measure")};
        case BoundKind::lagrangian: {
            LagrangianCertificate cert;
            const Json& beta = array_at(member(doc, "beta", field), field + ".beta");
            for (std::size_t k = 0; k < beta.size(); ++k) {
                cert.beta.push_back(rational_from_json(beta[k], field + ".beta[" + std::to_string(k) + "]"));
            }
            cert.lower_bound = rational_from_json(member(doc, "lower_bound", field), field + ".lower_bound");
            const Json& inst = array_at(member(doc, "instruments", field), field + ".instruments");
            for (std::size_t k = 0; k < inst.size(); ++k) {
                cert.instruments.push_back(
                    instrument_from_json(inst[k], field + ".instruments[" + std::to_string(k) + "]"));
            }
            return cert;
        }
    }
    throw ParseError("unknown certificate kind");
}

Json stats_to_json(const BoundStats& stats) {
    return Json{{"paths", stats.paths},
                {"rules", stats.rules},
                {"lp_solves", stats.lp_solves},
                {"lp_variables", stats.lp_variables},
                {"lp_constraints", stats.lp_constraints},
                {"pivots", stats.pivots},
                {"iterations", stats.iterations}};
}

Json bound_to_json(const BoundResult& result) {
    return Json{{"kind", to_string(result.kind)},
                {"value", rational_to_json(result.value)},
                {"value_decimal", to_decimal(result.value)},
                {"stats", stats_to_json(result.stats)}};
}

Json certificate_document(const Problem& problem, const BoundResult& result) {
    return Json{{"problem_digest", problem_digest(problem)},
                {"kind", to_string(result.kind)},
                {"value", rational_to_json(result.value)},
                {"value_decimal", to_decimal(result.value)},
                {"certificate", certificate_to_json(problem.lattice, result.certificate)}};
}

CertificateDocument parse_certificate_document(const PriceLattice& lattice, const Json& doc) {
    const Json& kind_json = member(doc, "kind", "kind");
    const auto kind = kind_json.is_string() ? parse_bound_kind(kind_json.get<std::string>()) : std::nullopt;
    if (!kind) {
        field_error("kind", "unknown bound kind");
    }
    return CertificateDocument{*kind, rational_from_json(member(doc, "value", "value"), "value"),
                               certificate_from_json(lattice, *kind, member(doc, "certificate", "certificate"))};
}

Json report_to_json(const Problem& problem, const DualityReport& report) {
    Json bounds = Json::array();
    for (const auto& b : report.bounds) {
        bounds.push_back(bound_to_json(b));
    }
    Json flags = Json::array();
    for (const auto& f : report.flags) {
        flags.push_back(f);
    }
    return Json{{"problem_digest", problem_digest(problem)},
                {"bounds", std::move(bounds)},
                {"gaps", Json{{"strong_weak", rational_to_json(report.strong_weak)},
                              {"weak_superhedge", rational_to_json(report.weak_superhedge)},
                              {"subhedge_lowest", rational_to_json(report.subhedge_lowest)}}},
                {"flags", std::move(flags)}};
}

}  // namespace amhedge
