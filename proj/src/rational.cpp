#include "amhedge/rational.hpp"

#include <cctype>

namespace amhedge {

namespace {

bool is_integer_text(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (start == s.size()) {
        return false;
    }
    for (std::size_t i = start; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return false;
        }
    }
    return true;
}

mpz_class pow10(long exponent) {
    mpz_class result;
    mpz_ui_pow_ui(result.get_mpz_t(), 10, static_cast<unsigned long>(exponent));
    return result;
}

}  // namespace

Rational parse_rational(std::string_view text, bool strict_canonical) {
    auto slash = text.find('/');
    std::string_view num_text = text.substr(0, slash);
    std::string_view den_text = slash == std::string_view::npos ? std::string_view("1")
                                                                 : text.substr(slash + 1);
    if (!is_integer_text(num_text) || !is_integer_text(den_text) || den_text[0] == '-' ||
        den_text[0] == '+') {
        throw ParseError("malformed rational '" + std::string(text) + "'");
    }
    std::string num_str(num_text[0] == '+' ? num_text.substr(1) : num_text);
    mpz_class num(num_str, 10);
    mpz_class den(std::string(den_text), 10);
    if (den == 0) {
        throw ParseError("zero denominator in '" + std::string(text) + "'");
    }
    Rational value(num, den);
    value.canonicalize();
    if (strict_canonical && slash != std::string_view::npos &&
        (value.get_num() != num || value.get_den() != den)) {
        throw ParseError("rational '" + std::string(text) + "' is not in lowest terms");
    }
    return value;
}

std::string to_string(const Rational& value) {
    return value.get_str(10);
}

std::string to_decimal(const Rational& value, int significant_digits) {
    if (value == 0) {
        return "0";
    }
    if (significant_digits < 1) {
        significant_digits = 1;
    }
    Rational magnitude = abs(value);

    // Decimal exponent e with 10^e <= magnitude < 10^(e+1).
    long exponent = static_cast<long>(mpz_sizeinbase(magnitude.get_num().get_mpz_t(), 10)) -
                    static_cast<long>(mpz_sizeinbase(magnitude.get_den().get_mpz_t(), 10));
    auto power = [](long e) {
        return e >= 0 ? Rational(pow10(e)) : Rational(mpz_class(1), pow10(-e));
    };
    while (magnitude >= power(exponent + 1)) {
        ++exponent;
    }
    while (magnitude < power(exponent)) {
        --exponent;
    }

    long shift = significant_digits - 1 - exponent;
    Rational scaled = magnitude * power(shift);
    // Round half away from zero.
    mpz_class digits = (2 * scaled.get_num() + scaled.get_den()) / (2 * scaled.get_den());
    if (digits == pow10(significant_digits)) {
        digits /= 10;
        ++exponent;
        --shift;
    }

    std::string text = digits.get_str(10);
    std::string result;
    if (exponent >= -5 && exponent < significant_digits) {
        if (exponent >= 0) {
            result = text.substr(0, static_cast<std::size_t>(exponent + 1));
            std::string frac = text.substr(static_cast<std::size_t>(exponent + 1));
            while (!frac.empty() && frac.back() == '0') {
                frac.pop_back();
            }
            if (!frac.empty()) {
                result += "." + frac;
            }
        } else {
            std::string frac = std::string(static_cast<std::size_t>(-exponent - 1), '0') + text;
            while (!frac.empty() && frac.back() == '0') {
                frac.pop_back();
            }
            result = "0." + frac;
        }
    } else {
        std::string frac = text.substr(1);
        while (!frac.empty() && frac.back() == '0') {
            frac.pop_back();
        }
        result = text.substr(0, 1);
        if (!frac.empty()) {
            result += "." + frac;
        }
        result += "e" + std::string(exponent < 0 ? "-" : "+") +
                  std::to_string(exponent < 0 ? -exponent : exponent);
    }
    return value < 0 ? "-" + result : result;
}

}  // namespace amhedge
