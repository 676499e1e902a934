#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deception {

using Rational = mpq_class;
using Integer = mpz_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad tables, shapes, out-of-alphabet symbols.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A configuration would exceed an enumeration budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double gap) : Error(what), gap_(gap) {}
  double gap() const { return gap_; }

 private:
  double gap_;
};

// Accepts "a/b", "a", and finite decimals such as "0.45" (converted exactly).
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto fail = [&]() -> Rational { throw ValidationError("not a rational: '" + s + "'"); };
  if (s.empty()) return fail();
  if (auto dot = s.find('.'); dot != std::string::npos) {
    if (s.find('/') != std::string::npos) return fail();
    std::string sign;
    std::string body = s;
    if (body[0] == '-' || body[0] == '+') {
      if (body[0] == '-') sign = "-";
      body = body.substr(1);
    }
    dot = body.find('.');
    std::string whole = body.substr(0, dot);
    std::string frac = body.substr(dot + 1);
    if (whole.empty() && frac.empty()) return fail();
    for (char c : whole + frac)
      if (c < '0' || c > '9') return fail();
    std::string digits = whole + frac;
    if (digits.empty()) digits = "0";
    Integer num(sign + digits, 10);
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Rational r(num, den);
    r.canonicalize();
    return r;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    bool ok = (c >= '0' && c <= '9') || c == '/' || (i == 0 && (c == '-' || c == '+'));
    if (!ok) return fail();
  }
  if (s[0] == '+') s = s.substr(1);
  auto slash = s.find('/');
  if (slash == 0 || slash + 1 == s.size()) return fail();
  if (slash != std::string::npos && s.find('/', slash + 1) != std::string::npos) return fail();
  Rational r;
  if (r.set_str(s, 10) != 0) return fail();
  if (r.get_den() == 0) throw ValidationError("zero denominator in '" + s + "'");
  r.canonicalize();
  return r;
}

// gmpxx keeps a/b as written; comparisons and equality need lowest terms.
inline Rational canonical(Rational r) {
  if (sgn(r.get_den()) == 0) throw ValidationError("zero denominator");
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }
inline std::string to_string(const Integer& z) { return z.get_str(); }

inline double to_double(const Rational& r) { return r.get_d(); }

// Every finite double is a dyadic rational; this conversion is exact.
inline Rational exact_rational(double v) {
  if (!std::isfinite(v)) throw ValidationError("non-finite value has no rational form");
  Rational r(v);
  return r;
}

namespace detail {

inline double log_integer(const Integer& z) {
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::log(2.0);
}

}  // namespace detail

// Natural log of a positive rational without underflow for tiny values.
inline double log_rational(const Rational& r) {
  if (sgn(r) < 0) throw ValidationError("log of negative rational");
  if (sgn(r) == 0) return -std::numeric_limits<double>::infinity();
  return detail::log_integer(r.get_num()) - detail::log_integer(r.get_den());
}

inline double log_integer(const Integer& z) {
  if (sgn(z) <= 0) throw ValidationError("log of non-positive integer");
  return detail::log_integer(z);
}

inline Integer binomial(unsigned long n, unsigned long k) {
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

inline Integer factorial(unsigned long n) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

inline Rational pow(const Rational& base, unsigned long e) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), e);
  out.canonicalize();
  return out;
}

}  // namespace deception
