#include "fpt/rational.hpp"

#include <cctype>

#include "fpt/error.hpp"

namespace fpt {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::size_t hash_mpz(mpz_srcptr z, std::size_t seed) {
  const std::size_t limbs = mpz_size(z);
  seed ^= static_cast<std::size_t>(mpz_sgn(z) + 2) * 0x9e3779b97f4a7c15ULL;
  for (std::size_t i = 0; i < limbs; ++i) {
    seed ^= static_cast<std::size_t>(mpz_getlimbn(z, i)) + 0x9e3779b97f4a7c15ULL +
            (seed << 6) + (seed >> 2);
  }
  return seed;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && body.front() == '-') {
    negative = true;
    body.remove_prefix(1);
  }
  const auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1")
                                                         : body.substr(slash + 1);
  if (!all_digits(num) || !all_digits(den)) {
    throw Error(Errc::kInvalidArgument,
                "not a rational literal: '" + std::string(text) + "'");
  }
  mpz_class n(std::string(num), 10);
  mpz_class d(std::string(den), 10);
  if (d == 0) {
    throw Error(Errc::kInvalidArgument,
                "zero denominator in '" + std::string(text) + "'");
  }
  if (negative) n = -n;
  Rational q(n, d);
  q.canonicalize();
  return q;
}

Rational make_rational(long numerator, long denominator) {
  if (denominator == 0) {
    throw Error(Errc::kInvalidArgument, "zero denominator");
  }
  Rational q(numerator, denominator);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

std::size_t hash_value(const Rational& q) {
  return hash_mpz(q.get_den_mpz_t(), hash_mpz(q.get_num_mpz_t(), 0x51ed27));
}

Rational clip_unit(const Rational& x) {
  if (sgn(x) < 0) return Rational(0);
  if (x > 1) return Rational(1);
  return x;
}

}  // namespace fpt
