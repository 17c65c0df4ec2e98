#include "dhjlab/rational.hpp"

#include <stdexcept>

namespace dhjlab {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational");
  for (char c : s) {
    if (!(c == '-' || c == '/' || (c >= '0' && c <= '9'))) {
      throw std::invalid_argument("malformed rational: " + s);
    }
  }
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("malformed rational: " + s);
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

Rational pow(const Rational& base, unsigned long exponent) {
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), exponent);
  Rational out(num, den);
  out.canonicalize();
  return out;
}

int compare_with_sqrt(const Rational& q, const Rational& r) {
  if (r < 0) throw std::invalid_argument("sqrt of negative rational");
  if (q < 0) return r == 0 && q == 0 ? 0 : -1;
  const Rational q2 = q * q;
  return cmp(q2, r);
}

Rational sqrt_upper(const Rational& r, unsigned digits) {
  if (r < 0) throw std::invalid_argument("sqrt of negative rational");
  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  // ceil(sqrt(r * scale^2)) / scale
  Rational scaled = r * Rational(scale * scale);
  BigInt floor_val = scaled.get_num() / scaled.get_den();
  BigInt root;
  mpz_sqrt(root.get_mpz_t(), floor_val.get_mpz_t());
  while (Rational(root * root) < scaled) root += 1;
  Rational out(root, scale);
  out.canonicalize();
  return out;
}

BigInt binomial(unsigned long n, unsigned long k) {
  BigInt out;
  if (k > n) return BigInt(0);
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

}  // namespace dhjlab
