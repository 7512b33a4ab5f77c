#include "neyman2k/rational.hpp"

#include <stdexcept>

namespace neyman2k {

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) {
    throw std::invalid_argument("rational denominator must be non-zero");
  }
  Rational value(mpz_class(static_cast<long>(num)),
                 mpz_class(static_cast<long>(den)));
  value.canonicalize();
  return value;
}

Rational pow2_rational(int exponent) {
  mpz_class power = 1;
  power <<= static_cast<unsigned>(exponent >= 0 ? exponent : -exponent);
  if (exponent >= 0) {
    return Rational(power);
  }
  Rational value(mpz_class(1), power);
  value.canonicalize();
  return value;
}

Rational rational_from_int128(__int128 value) {
  const bool negative = value < 0;
  const unsigned __int128 magnitude =
      negative ? -static_cast<unsigned __int128>(value)
               : static_cast<unsigned __int128>(value);
  mpz_class result(static_cast<unsigned long>(magnitude >> 64));
  result <<= 64;
  result += static_cast<unsigned long>(magnitude & ~std::uint64_t{0});
  if (negative) {
    result = -result;
  }
  return Rational(result);
}

double to_double(const Rational& value) { return value.get_d(); }

std::string to_string(const Rational& value) {
  if (value.get_den() == 1) {
    return value.get_num().get_str();
  }
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

}  // namespace neyman2k
