#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace neyman2k {

/// Exact rational scalar. GMP-backed so that population identities and
/// bound-attainment conditions can be tested with equality instead of
/// floating-point tolerances.
using Rational = mpq_class;

/// num/den in canonical form. Throws std::invalid_argument when den == 0.
Rational make_rational(std::int64_t num, std::int64_t den = 1);

/// 2^exponent; exponent may be negative.
Rational pow2_rational(int exponent);

Rational rational_from_int128(__int128 value);

double to_double(const Rational& value);

/// "num/den"; integers render without the denominator.
std::string to_string(const Rational& value);

}  // namespace neyman2k
