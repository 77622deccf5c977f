#include "heatdual/rational.hpp"

#include <cctype>
#include <string>

#include "heatdual/error.hpp"

namespace heatdual {

namespace {

mpz_class parse_integer(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw Error(ErrorCode::BadValue, "not a number: '" + std::string(whole) + "'");
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw Error(ErrorCode::BadValue, "not a number: '" + std::string(whole) + "'");
    }
  }
  return mpz_class(std::string(digits), 10);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(s.substr(0, slash), text);
    mpz_class den = parse_integer(s.substr(slash + 1), text);
    if (den == 0) throw Error(ErrorCode::BadValue, "zero denominator in '" + std::string(text) + "'");
    value = Rational(num, den);
  } else {
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      std::string exp_text(s.substr(e + 1));
      try {
        std::size_t used = 0;
        exponent = std::stol(exp_text, &used);
        if (used != exp_text.size()) throw std::invalid_argument(exp_text);
      } catch (const std::exception&) {
        throw Error(ErrorCode::BadValue, "bad exponent in '" + std::string(text) + "'");
      }
      s = s.substr(0, e);
    }
    std::string_view int_part = s;
    std::string_view frac_part;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      int_part = s.substr(0, dot);
      frac_part = s.substr(dot + 1);
    }
    if (int_part.empty() && frac_part.empty()) {
      throw Error(ErrorCode::BadValue, "not a number: '" + std::string(text) + "'");
    }
    mpz_class num = int_part.empty() ? mpz_class(0) : parse_integer(int_part, text);
    mpz_class den = 1;
    for (char c : frac_part) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw Error(ErrorCode::BadValue, "not a number: '" + std::string(text) + "'");
      }
      num = num * 10 + (c - '0');
      den *= 10;
    }
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    if (exponent >= 0) num *= scale; else den *= scale;
    value = Rational(num, den);
  }
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

std::string format_rational(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_str();
}

Rational double_factorial_odd(unsigned n) {
  Rational r = 1;
  for (unsigned j = 1; j <= n; ++j) r *= 2 * j - 1;
  return r;
}

Rational rising_factorial(const Rational& a, unsigned n) {
  Rational r = 1;
  for (unsigned j = 0; j < n; ++j) r *= a + j;
  return r;
}

Rational binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return Rational(r);
}

}  // namespace heatdual
