#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace srkw {

using Rational = mpq_class;

/// Parses "p", "p/q" or "-p/q". Throws std::invalid_argument on bad input.
Rational parse_rational(std::string_view text);

/// "p/q" form, or "p" when the denominator is one.
std::string to_string(const Rational& q);

inline Rational factorial(int n) {
    mpz_class f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return Rational(f);
}

inline Rational rational_pow(const Rational& base, int e) {
    Rational r = 1;
    Rational b = base;
    if (e < 0) {
        b = 1 / b;
        e = -e;
    }
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace srkw
