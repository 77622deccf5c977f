#ifndef HEATDUAL_RATIONAL_HPP
#define HEATDUAL_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace heatdual {

using Rational = mpq_class;

// Parses "3", "-7/2", "0.25" or "1e-3" into an exact rational. Decimal
// strings are read as written (0.1 is 1/10), not as the nearest double.
Rational parse_rational(std::string_view text);

// Canonical text form: "p" for integers, "p/q" otherwise.
std::string format_rational(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

// (2n-1)!! with (-1)!! = 1.
Rational double_factorial_odd(unsigned n);

// Rising factorial a (a+1) ... (a+n-1); equals Gamma(a+n)/Gamma(a).
Rational rising_factorial(const Rational& a, unsigned n);

Rational binomial(unsigned n, unsigned k);

}  // namespace heatdual

#endif  // HEATDUAL_RATIONAL_HPP
