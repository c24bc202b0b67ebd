#include "amhedge/bounds.hpp"
#include "amhedge/certificate_io.hpp"
#include "amhedge/problem_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace amhedge;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kCap = 2;

enum class Format { json, text };

struct RunConfig {
    std::string input;
    std::string selector = "all";
    std::string output;
    Limits limits;
    Format format = Format::json;
    std::uint64_t seed = 0;
    std::string shape;
};

struct Failure {
    int code;
    std::string message;
};

std::vector<BoundKind> select(const std::string& selector) {
    if (selector == "all") {
        return {std::begin(kAllBoundKinds), std::end(kAllBoundKinds)};
    }
    const auto kind = parse_bound_kind(selector);
    if (!kind) {
        throw Failure{kInvalid, "unknown bound '" + selector +
                                    "' (expected strong, weak, superhedge, subhedge, lowest, "
                                    "lagrangian or all)"};
    }
    return {*kind};
}

std::string approx(const Rational& v) {
    return to_string(v) + " (≈ " + to_decimal(v) + ")";
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    out << text;
    if (!out) {
        throw Failure{kInvalid, "cannot write '" + cfg.output + "'"};
    }
}

std::string dump(const Json& doc) {
    return doc.dump(2) + "\n";
}

Problem load_valid(const RunConfig& cfg) {
    Problem problem = load_problem(cfg.input);
    if (lattice_violations(problem.lattice).empty()) {
        const mpz_class paths = count_paths(problem.lattice);
        if (paths > cfg.limits.max_paths) {
            throw EnumerationLimit("paths", cfg.limits.max_paths, paths);
        }
    }
    const auto report = validate(problem, cfg.limits);
    if (!report.ok()) {
        std::string msg = "invalid problem:";
        for (const auto& v : report.violations) {
            msg += "\n  " + v;
        }
        throw Failure{kInvalid, msg};
    }
    return problem;
}

BoundOptions options_for(const RunConfig& cfg) {
    BoundOptions o;
    o.limits = cfg.limits;
    return o;
}

int cmd_validate(const RunConfig& cfg) {
    const Problem problem = load_problem(cfg.input);
    const auto report = validate(problem, cfg.limits);
    std::ostringstream out;
    if (cfg.format == Format::json) {
        Json doc{{"valid", report.ok()}, {"violations", report.violations}};
        out << dump(doc);
    } else if (report.ok()) {
        out << "valid\n";
    } else {
        for (const auto& v : report.violations) {
            out << "violation: " << v << "\n";
        }
    }
    std::cout << out.str();
    return report.ok() ? kOk : kInvalid;
}

int cmd_price(const RunConfig& cfg) {
    const Problem problem = load_valid(cfg);
    std::vector<BoundResult> results;
    for (BoundKind kind : select(cfg.selector)) {
        results.push_back(compute_bound(kind, problem, options_for(cfg)));
    }
    std::ostringstream out;
    if (cfg.format == Format::json) {
        Json bounds = Json::array();
        for (const auto& r : results) {
            bounds.push_back(bound_to_json(r));
        }
        out << dump(Json{{"problem_digest", problem_digest(problem)}, {"bounds", std::move(bounds)}});
    } else {
        for (const auto& r : results) {
            out << std::left << std::setw(14) << to_string(r.kind) << approx(r.value) << "\n";
        }
    }
    emit(cfg, out.str());
    return kOk;
}

int cmd_certificate(const RunConfig& cfg) {
    const Problem problem = load_valid(cfg);
    Json docs = Json::array();
    std::ostringstream summary;
    for (BoundKind kind : select(cfg.selector)) {
        const BoundResult r = compute_bound(kind, problem, options_for(cfg));
        Json doc = certificate_document(problem, r);
        // The written bytes are what gets re-verified.
        const auto back = parse_certificate_document(problem.lattice, Json::parse(doc.dump()));
        const auto check = verify_certificate(problem, back.certificate, back.value, cfg.limits);
        if (!check.ok()) {
            throw Failure{kInvalid, to_string(kind) + " certificate failed verification: " +
                                        check.failures.front()};
        }
        summary << to_string(kind) << " certificate verified at " << approx(r.value) << "\n";
        docs.push_back(std::move(doc));
    }
    emit(cfg, dump(docs.size() == 1 ? docs[0] : docs));
    std::cerr << summary.str();
    return kOk;
}

int cmd_report(const RunConfig& cfg) {
    const Problem problem = load_valid(cfg);
    const DualityReport report = duality_report(problem, options_for(cfg));
    std::ostringstream out;
    if (cfg.format == Format::json) {
        out << dump(report_to_json(problem, report));
    } else {
        out << "problem " << problem_digest(problem) << "\n";
        for (const auto& b : report.bounds) {
            out << std::left << std::setw(14) << to_string(b.kind) << approx(b.value) << "\n";
        }
        out << "gap strong_weak       " << approx(report.strong_weak) << "\n";
        out << "gap weak_superhedge   " << approx(report.weak_superhedge) << "\n";
        out << "gap subhedge_lowest   " << approx(report.subhedge_lowest) << "\n";
        for (const auto& f : report.flags) {
            out << "flag: " << f << "\n";
        }
    }
    emit(cfg, out.str());
    return kOk;
}

int cmd_random(const RunConfig& cfg) {
    std::vector<std::size_t> shape;
    std::stringstream in(cfg.shape);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw Failure{kInvalid, "bad shape entry '" + item + "'"};
        }
        shape.push_back(v);
    }
    const Problem problem = random_problem(cfg.seed, shape);
    emit(cfg, dump_problem(problem));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust American option price bounds on finite lattices"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string format = "json";

    auto common = [&](CLI::App* sub) {
        sub->add_option("--max-paths", cfg.limits.max_paths, "Path enumeration cap");
        sub->add_option("--max-rules", cfg.limits.max_rules, "Stopping rule enumeration cap");
        sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check a problem file");
    validate_cmd->add_option("file", cfg.input)->required();
    common(validate_cmd);

    auto* price_cmd = app.add_subcommand("price", "Compute price bounds");
    price_cmd->add_option("--bound", cfg.selector, "Bound to compute or all");
    price_cmd->add_option("file", cfg.input)->required();
    price_cmd->add_option("--out", cfg.output, "Output file (default stdout)");
    common(price_cmd);

    auto* cert_cmd = app.add_subcommand("certificate", "Write a verified certificate");
    cert_cmd->add_option("--bound", cfg.selector, "Bound to certify or all")->required();
    cert_cmd->add_option("--out", cfg.output, "Output file (default stdout)");
    cert_cmd->add_option("file", cfg.input)->required();
    common(cert_cmd);

    auto* report_cmd = app.add_subcommand("report", "All bounds, gaps and certificate checks");
    report_cmd->add_option("file", cfg.input)->required();
    report_cmd->add_option("--out", cfg.output, "Output file (default stdout)");
    common(report_cmd);

    auto* random_cmd = app.add_subcommand("random", "Write a random consistent problem");
    random_cmd->add_option("--seed", cfg.seed)->required();
    random_cmd->add_option("--shape", cfg.shape, "Level counts per time, e.g. 1,2,3")->required();
    random_cmd->add_option("--out", cfg.output, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }
    cfg.format = format == "text" ? Format::text : Format::json;

    try {
        if (*validate_cmd) {
            return cmd_validate(cfg);
        }
        if (*price_cmd) {
            return cmd_price(cfg);
        }
        if (*cert_cmd) {
            return cmd_certificate(cfg);
        }
        if (*report_cmd) {
            return cmd_report(cfg);
        }
        return cmd_random(cfg);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const InvalidShape& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const ConsistencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const EnumerationLimit& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCap;
    } catch (const lp::LpTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCap;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCap;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
}
