#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace dhjlab {

/// Exact rational number. All probability and measure arithmetic goes through this type.
using Rational = mpq_class;
using BigInt = mpz_class;

/// Parses "a/b", "a" or "-a/b". Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// Canonical "num/den" (or "num" when den == 1).
std::string to_string(const Rational& q);

Rational pow(const Rational& base, unsigned long exponent);

/// Compares q against sqrt(r) exactly (r >= 0). Returns -1, 0 or 1.
int compare_with_sqrt(const Rational& q, const Rational& r);

/// Rational s with s >= sqrt(r) and s - sqrt(r) <= 10^-digits (r >= 0).
Rational sqrt_upper(const Rational& r, unsigned digits = 12);

inline double to_double(const Rational& q) { return q.get_d(); }

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

BigInt binomial(unsigned long n, unsigned long k);

}  // namespace dhjlab
