#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace amhedge {

/// Arbitrary-precision rational, always kept in canonical form.
using Rational = mpq_class;

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses "p/q", "-p/q" or a bare integer. The result is canonicalized,
/// so "2/4" parses to 1/2; strict_canonical rejects non-reduced input.
Rational parse_rational(std::string_view text, bool strict_canonical = false);

/// Canonical "p/q" string, or "p" when the denominator is 1.
std::string to_string(const Rational& value);

/// Display-only decimal with the given number of significant digits.
std::string to_decimal(const Rational& value, int significant_digits = 10);

inline Rational make_rational(long num, long den = 1) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

}  // namespace amhedge
