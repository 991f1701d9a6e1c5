#pragma once

// Thin helpers around GMP rationals (mpq_class). All certificate math in this
// project runs on exact rationals; doubles appear only at the reporting edge.

#include <gmpxx.h>

#include <cmath>
#include <string>

#include "pepls/errors.hpp"

namespace pepls {

using Rational = mpq_class;
using Integer = mpz_class;

// mpq_class(n, d) does not canonicalize; every construction goes through here.
inline Rational rat(long num, long den = 1) {
  if (den == 0) throw InputError("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Rational rat(const Integer& num, const Integer& den) {
  if (den == 0) throw InputError("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Accepts "p", "-p", "p/q". Decimal notation is rejected: callers that take
// rationals do so because they promise exact arithmetic.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw InputError("empty rational literal");
  if (text.find('.') != std::string::npos || text.find('e') != std::string::npos ||
      text.find('E') != std::string::npos)
    throw InputError("rational literal must be an integer or p/q, got '" + text + "'");
  Rational q;
  if (q.set_str(text, 10) != 0)
    throw InputError("cannot parse rational '" + text + "'");
  if (q.get_den() == 0) throw InputError("rational with zero denominator: '" + text + "'");
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

inline Rational rational_from_double(double x) {
  Rational q(x);  // exact binary expansion
  q.canonicalize();
  return q;
}

// True iff q is the square of a rational; root receives the nonnegative root.
inline bool rational_square_root(const Rational& q, Rational* root) {
  if (q < 0) return false;
  Integer num_root, den_root;
  if (!mpz_perfect_square_p(q.get_num().get_mpz_t()) ||
      !mpz_perfect_square_p(q.get_den().get_mpz_t()))
    return false;
  mpz_sqrt(num_root.get_mpz_t(), q.get_num().get_mpz_t());
  mpz_sqrt(den_root.get_mpz_t(), q.get_den().get_mpz_t());
  if (root) *root = rat(num_root, den_root);
  return true;
}

// Rational r >= sqrt(d) with r - sqrt(d) <= tol, by Newton iteration from a
// double seed. Exact arithmetic throughout, so the bound is rigorous:
// r - sqrt(d) <= (r^2 - d) / r once r >= sqrt(d).
inline Rational sqrt_upper_bound(const Rational& d, const Rational& tol) {
  if (d < 0) throw InputError("sqrt of negative rational");
  if (d == 0) return Rational(0);
  if (tol <= 0) throw InputError("sqrt tolerance must be positive");
  Rational x = rational_from_double(std::sqrt(to_double(d)));
  if (x <= 0) x = d + 1;
  while (x * x < d) x += x / 1000 + tol;  // nudge above the root
  for (int iter = 0; iter < 200; ++iter) {
    if (x * x - d <= tol * x) return x;
    x = (x + d / x) / 2;
  }
  throw NumericalError("rational sqrt did not reach requested tolerance");
}

}  // namespace pepls
