#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <string_view>

namespace fpt {

// Exact arbitrary-precision rational; GMP keeps it in lowest terms once
// canonicalized, and every helper below returns canonical values.
using Rational = mpq_class;

// Accepts "p" or "p/q" with an optional leading '-' and q > 0.
Rational parse_rational(std::string_view text);

Rational make_rational(long numerator, long denominator = 1);

std::string to_string(const Rational& q);

std::size_t hash_value(const Rational& q);

// x -> min(max(x, 0), 1)
Rational clip_unit(const Rational& x);

}  // namespace fpt
