#pragma once

#include "amhedge/bounds.hpp"
#include "amhedge/problem_io.hpp"

namespace amhedge {

/// Certificate payloads use price levels (rational strings) for paths and
/// prefixes: a weak certificate is an array of {path, u, mass}; a hedge
/// certificate is {cash, static, intermediate_statics, instruments,
/// pre_holdings, post_holdings}.
Json certificate_to_json(const PriceLattice& lattice, const Certificate& cert);
/// Throws ParseError naming the offending field.
Certificate certificate_from_json(const PriceLattice& lattice, BoundKind kind, const Json& doc);

Json stats_to_json(const BoundStats& stats);

/// {kind, value, value_decimal, stats}
Json bound_to_json(const BoundResult& result);

/// {problem_digest, kind, value, value_decimal, certificate}
Json certificate_document(const Problem& problem, const BoundResult& result);

struct CertificateDocument {
    BoundKind kind;
    Rational value;
    Certificate certificate;
};
CertificateDocument parse_certificate_document(const PriceLattice& lattice, const Json& doc);

/// {problem_digest, bounds, gaps: {strong_weak, weak_superhedge, subhedge_lowest}, flags}
Json report_to_json(const Problem& problem, const DualityReport& report);

}  // namespace amhedge
