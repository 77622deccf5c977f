#ifndef HEATDUAL_SYMBOLIC_HPP
#define HEATDUAL_SYMBOLIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "heatdual/error.hpp"
#include "heatdual/model.hpp"
#include "heatdual/rational.hpp"

namespace heatdual {

/// v^2 -> constant + other_coeff * other^2 (other < 0: no second term).
/// Enough to express s^2 + c^2 = 1 and sqrt(2)^2 = 2, sqrt(3)^2 = 3.
struct SquareRule {
  std::size_t var = 0;
  Rational constant = 0;
  int other = -1;
  Rational other_coeff = 0;
};

/// Variable names plus the square rules applied after every product.
struct Ring {
  std::vector<std::string> names;
  std::vector<SquareRule> rules;

  std::size_t size() const { return names.size(); }
  std::size_t index_of(const std::string& name) const;
};
using RingPtr = std::shared_ptr<const Ring>;

RingPtr make_ring(std::vector<std::string> names, std::vector<SquareRule> rules = {});
/// Throws VariableMismatch unless both rings have the same variables.
void require_same_ring(const RingPtr& a, const RingPtr& b);

using Exponents = std::vector<std::uint16_t>;

std::string format_monomial(const Ring& ring, const Exponents& e);

template <class C>
struct CoeffTraits;

template <>
struct CoeffTraits<Rational> {
  static bool is_zero(const Rational& c) { return c == 0; }
  static double magnitude(const Rational& c) { return std::abs(c.get_d()); }
  static std::string format(const Rational& c) { return format_rational(c); }
  static Rational from(const Rational& q) { return q; }
};

template <>
struct CoeffTraits<double> {
  static bool is_zero(double c) { return c == 0.0; }
  static double magnitude(double c) { return std::abs(c); }
  static std::string format(double c);
  static double from(const Rational& q) { return q.get_d(); }
};

/// Sparse multivariate polynomial; zero coefficients are never stored.
template <class C>
class Polynomial {
 public:
  using Terms = std::map<Exponents, C>;

  Polynomial() = default;
  explicit Polynomial(RingPtr ring) : ring_(std::move(ring)) {}

  static Polynomial constant(RingPtr ring, const C& c) {
    Polynomial p(ring);
    p.add_term(Exponents(p.ring_->size(), 0), c);
    return p;
  }
  static Polynomial variable(RingPtr ring, std::size_t var) {
    Polynomial p(ring);
    Exponents e(p.ring_->size(), 0);
    e.at(var) = 1;
    p.add_term(e, C(1));
    return p;
  }
  static Polynomial monomial(RingPtr ring, const Exponents& e, const C& c) {
    Polynomial p(ring);
    if (e.size() != p.ring_->size()) throw Error(ErrorCode::VariableMismatch, "exponent length");
    p.add_term(e, c);
    p.reduce();
    return p;
  }

  const RingPtr& ring() const { return ring_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  unsigned total_degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) {
      unsigned s = 0;
      for (auto v : e) s += v;
      d = std::max(d, s);
    }
    return d;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, CoeffTraits<C>::magnitude(c));
    return m;
  }

  /// Drops coefficients with magnitude <= tol (float mode cleanup).
  Polynomial pruned(double tol) const {
    Polynomial out(ring_);
    for (const auto& [e, c] : terms_) {
      if (CoeffTraits<C>::magnitude(c) > tol) out.terms_.emplace(e, c);
    }
    return out;
  }

  void add_term(const Exponents& e, const C& c) {
    if (CoeffTraits<C>::is_zero(c)) return;
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (CoeffTraits<C>::is_zero(it->second)) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    adopt(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    adopt(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator+=(long v) {
    add_term(Exponents(ring_->size(), 0), C(v));
    return *this;
  }
  Polynomial& operator*=(const C& s) {
    if (CoeffTraits<C>::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= C(-1); }
  friend Polynomial operator*(Polynomial a, const C& s) { return a *= s; }
  friend Polynomial operator*(const C& s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(Polynomial a, long s) { return a *= C(s); }
  friend Polynomial operator*(long s, Polynomial a) { return a *= C(s); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    require_same_ring(a.ring_, b.ring_);
    Polynomial out(a.ring_);
    Exponents e(a.ring_->size());
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t k = 0; k < e.size(); ++k) e[k] = static_cast<std::uint16_t>(ea[k] + eb[k]);
        out.add_term(e, ca * cb);
      }
    }
    out.reduce();
    return out;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial pow(unsigned n) const {
    Polynomial result = constant(ring_, C(1));
    Polynomial base = *this;
    while (n) {
      if (n & 1u) result *= base;
      n >>= 1u;
      if (n) base *= base;
    }
    return result;
  }

  Polynomial derivative(std::size_t var, unsigned order = 1) const {
    Polynomial out(ring_);
    for (const auto& [e, c] : terms_) {
      if (e[var] < order) continue;
      C f = c;
      for (unsigned k = 0; k < order; ++k) f *= C(static_cast<long>(e[var] - k));
      Exponents d = e;
      d[var] = static_cast<std::uint16_t>(d[var] - order);
      out.add_term(d, f);
    }
    return out;
  }

  /// Replaces variable `var` by the polynomial `value`.
  Polynomial substitute(std::size_t var, const Polynomial& value) const {
    require_same_ring(ring_, value.ring_);
    Polynomial out(ring_);
    std::vector<Polynomial> powers{constant(ring_, C(1))};
    for (const auto& [e, c] : terms_) {
      while (powers.size() <= e[var]) powers.push_back(powers.back() * value);
      Exponents rest = e;
      rest[var] = 0;
      out += monomial(ring_, rest, c) * powers[e[var]];
    }
    return out;
  }

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [e, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += "(" + CoeffTraits<C>::format(c) + ")*" + format_monomial(*ring_, e);
    }
    return s;
  }

 private:
  void adopt(const Polynomial& o) {
    if (!ring_) {
      ring_ = o.ring_;
      return;
    }
    require_same_ring(ring_, o.ring_);
  }

  void reduce() {
    if (ring_->rules.empty()) return;
    bool changed = true;
    while (changed) {
      changed = false;
      Terms next;
      for (const auto& [e, c] : terms_) {
        const SquareRule* rule = nullptr;
        for (const auto& r : ring_->rules) {
          if (e[r.var] >= 2) {
            rule = &r;
            break;
          }
        }
        auto put = [&](const Exponents& x, const C& v) {
          if (CoeffTraits<C>::is_zero(v)) return;
          auto [it, inserted] = next.emplace(x, v);
          if (!inserted) {
            it->second += v;
            if (CoeffTraits<C>::is_zero(it->second)) next.erase(it);
          }
        };
        if (!rule) {
          put(e, c);
          continue;
        }
        changed = true;
        Exponents base = e;
        base[rule->var] = static_cast<std::uint16_t>(base[rule->var] - 2);
        put(base, c * CoeffTraits<C>::from(rule->constant));
        if (rule->other >= 0) {
          Exponents o = base;
          o[static_cast<std::size_t>(rule->other)] += 2;
          put(o, c * CoeffTraits<C>::from(rule->other_coeff));
        }
      }
      terms_ = std::move(next);
    }
  }

  RingPtr ring_;
  Terms terms_;
};

/// Converts rational coefficients to C.
template <class C>
Polynomial<C> convert(const Polynomial<Rational>& p, RingPtr ring) {
  require_same_ring(p.ring(), ring);
  Polynomial<C> out(ring);
  for (const auto& [e, c] : p.terms()) out.add_term(e, CoeffTraits<C>::from(c));
  return out;
}

/// f(images[0], images[1], ...): every variable of f replaced by a
/// polynomial over another ring.
template <class C>
Polynomial<C> compose(const Polynomial<Rational>& f, const std::vector<Polynomial<C>>& images) {
  if (images.size() != f.ring()->size()) {
    throw Error(ErrorCode::VariableMismatch, "compose needs one image per variable");
  }
  const RingPtr& target = images.front().ring();
  std::vector<std::vector<Polynomial<C>>> powers(images.size());
  for (std::size_t v = 0; v < images.size(); ++v) {
    powers[v].push_back(Polynomial<C>::constant(target, C(1)));
  }
  Polynomial<C> out(target);
  for (const auto& [e, c] : f.terms()) {
    Polynomial<C> term = Polynomial<C>::constant(target, CoeffTraits<C>::from(c));
    for (std::size_t v = 0; v < e.size(); ++v) {
      while (powers[v].size() <= e[v]) powers[v].push_back(powers[v].back() * images[v]);
      if (e[v]) term *= powers[v][e[v]];
    }
    out += term;
  }
  return out;
}

/// Normal-ordered differential operator: sum of coefficient(x) * d^alpha.
template <class C>
class DiffOperator {
 public:
  using Poly = Polynomial<C>;

  explicit DiffOperator(RingPtr ring) : ring_(std::move(ring)) {}

  static DiffOperator multiply_by(const Poly& p) {
    DiffOperator op(p.ring());
    op.add(Exponents(p.ring()->size(), 0), p);
    return op;
  }
  static DiffOperator partial(RingPtr ring, std::size_t var) {
    DiffOperator op(ring);
    Exponents a(ring->size(), 0);
    a.at(var) = 1;
    op.add(a, Poly::constant(ring, C(1)));
    return op;
  }
  static DiffOperator identity(RingPtr ring) { return multiply_by(Poly::constant(ring, C(1))); }

  const RingPtr& ring() const { return ring_; }
  const std::map<Exponents, Poly>& terms() const { return terms_; }

  void add(const Exponents& alpha, const Poly& coeff) {
    if (coeff.is_zero()) return;
    auto [it, inserted] = terms_.emplace(alpha, coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  /// Throws VariableMismatch if f lives over different variables.
  Poly apply(const Poly& f) const {
    require_same_ring(ring_, f.ring());
    Poly out(ring_);
    for (const auto& [alpha, coeff] : terms_) {
      Poly g = f;
      for (std::size_t v = 0; v < alpha.size() && !g.is_zero(); ++v) {
        if (alpha[v]) g = g.derivative(v, alpha[v]);
      }
      if (!g.is_zero()) out += coeff * g;
    }
    return out;
  }

  DiffOperator& operator+=(const DiffOperator& o) {
    require_same_ring(ring_, o.ring_);
    for (const auto& [a, c] : o.terms_) add(a, c);
    return *this;
  }
  DiffOperator& operator-=(const DiffOperator& o) {
    require_same_ring(ring_, o.ring_);
    for (const auto& [a, c] : o.terms_) add(a, -c);
    return *this;
  }
  DiffOperator& operator*=(const C& s) {
    std::map<Exponents, Poly> next;
    for (auto& [a, c] : terms_) {
      Poly scaled = c * s;
      if (!scaled.is_zero()) next.emplace(a, std::move(scaled));
    }
    terms_ = std::move(next);
    return *this;
  }
  friend DiffOperator operator+(DiffOperator a, const DiffOperator& b) { return a += b; }
  friend DiffOperator operator-(DiffOperator a, const DiffOperator& b) { return a -= b; }
  friend DiffOperator operator*(const C& s, DiffOperator a) { return a *= s; }

  /// Composition a o b, brought back to normal order with the Leibniz rule.
  friend DiffOperator operator*(const DiffOperator& a, const DiffOperator& b) {
    require_same_ring(a.ring_, b.ring_);
    DiffOperator out(a.ring_);
    const std::size_t n = a.ring_->size();
    for (const auto& [alpha, ca] : a.terms_) {
      for (const auto& [beta, cb] : b.terms_) {
        // Enumerate gamma <= alpha componentwise.
        Exponents gamma(n, 0);
        while (true) {
          Poly db = cb;
          C weight(1);
          for (std::size_t v = 0; v < n && !db.is_zero(); ++v) {
            if (gamma[v]) {
              db = db.derivative(v, gamma[v]);
              weight *= C(binomial(alpha[v], gamma[v]).get_num().get_si());
            }
          }
          if (!db.is_zero()) {
            Exponents order(n);
            for (std::size_t v = 0; v < n; ++v) {
              order[v] = static_cast<std::uint16_t>(alpha[v] - gamma[v] + beta[v]);
            }
            out.add(order, (ca * db) * weight);
          }
          std::size_t v = 0;
          while (v < n && gamma[v] == alpha[v]) gamma[v++] = 0;
          if (v == n) break;
          ++gamma[v];
        }
      }
    }
    return out;
  }

 private:
  RingPtr ring_;
  std::map<Exponents, Poly> terms_;
};

/// Discrete-side generator: for each configuration, the reachable
/// configurations with their rates.
template <class C>
using JumpOperator = std::function<std::vector<std::pair<DualConfig, Polynomial<C>>>(const DualConfig&)>;

/// SIP(m) jump operator built on sip_jumps/sip_rate, with every rate
/// multiplied by `scale`. `half_m` may be a constant or a polynomial in a
/// formal m.
template <class C>
JumpOperator<C> sip_jump_operator(const Polynomial<C>& half_m, bool absorbing, const C& scale) {
  return [half_m, absorbing, scale](const DualConfig& eta) {
    std::vector<std::pair<DualConfig, Polynomial<C>>> out;
    for (const auto& j : sip_jumps(eta, absorbing)) {
      out.emplace_back(apply_jump(eta, j), sip_rate(j, half_m) * scale);
    }
    return out;
  };
}

template <class C>
using DualityColumn = std::function<std::optional<Polynomial<C>>(const DualConfig&)>;

/// sum over jumps of rate * (D(eta') - D(eta)). Throws DomainGap if a target
/// is outside the column's domain.
template <class C>
Polynomial<C> apply_dual_generator(const JumpOperator<C>& op, const DualityColumn<C>& column,
                                   const DualConfig& eta) {
  const auto here = column(eta);
  if (!here) throw Error(ErrorCode::DomainGap, "duality function undefined at " + format_dual_config(eta));
  Polynomial<C> out(here->ring());
  for (const auto& [target, rate] : op(eta)) {
    const auto there = column(target);
    if (!there) {
      throw Error(ErrorCode::DomainGap, "duality function undefined at " + format_dual_config(target));
    }
    out += rate * (*there - *here);
  }
  return out;
}

template <class C>
Polynomial<C> apply_generator(const DiffOperator<C>& op, const Polynomial<C>& f) {
  return op.apply(f);
}

}  // namespace heatdual

#endif  // HEATDUAL_SYMBOLIC_HPP
