#include <gtest/gtest.h>

#include "heatdual/rng.hpp"
#include "heatdual/symbolic.hpp"
#include "heatdual/verify.hpp"

using namespace heatdual;

namespace {

using P = Polynomial<Rational>;
using Op = DiffOperator<Rational>;

struct Xy {
  RingPtr ring = make_ring({"x", "y"});
  P x = P::variable(ring, 0);
  P y = P::variable(ring, 1);
  P one = P::constant(ring, 1);
};

P random_poly(const RingPtr& ring, Rng& rng, unsigned max_deg, int terms) {
  P p(ring);
  for (int t = 0; t < terms; ++t) {
    Exponents e(ring->size());
    for (auto& v : e) v = static_cast<std::uint16_t>(rng.below(max_deg + 1));
    Rational c(static_cast<long>(rng.below(19)) - 9, static_cast<long>(rng.below(5)) + 1);
    c.canonicalize();
    p.add_term(e, c);
  }
  return p;
}

}  // namespace

TEST(Polynomial, ArithmeticAndZeroTerms) {
  Xy v;
  P p = (v.x + v.y) * (v.x - v.y);
  EXPECT_EQ(p, v.x * v.x - v.y * v.y);
  EXPECT_EQ(p.term_count(), 2u);
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ((p - p).term_count(), 0u);
  EXPECT_EQ((v.x + v.one).pow(3), v.x * v.x * v.x + 3L * (v.x * v.x) + 3L * v.x + v.one);
  EXPECT_EQ(p.total_degree(), 2u);
  EXPECT_EQ(P(v.ring).to_string(), "0");
}

TEST(Polynomial, DerivativeAndSubstitute) {
  Xy v;
  P f = v.x.pow(4) * v.y + Rational(1, 2) * v.y.pow(2);
  EXPECT_EQ(f.derivative(0), 4L * v.x.pow(3) * v.y);
  EXPECT_EQ(f.derivative(0, 2), 12L * v.x.pow(2) * v.y);
  EXPECT_EQ(f.derivative(1), v.x.pow(4) + v.y);
  EXPECT_TRUE(f.derivative(0, 5).is_zero());
  // y -> x + 1
  EXPECT_EQ(f.substitute(1, v.x + v.one),
            v.x.pow(5) + v.x.pow(4) + Rational(1, 2) * (v.x + v.one).pow(2));
}

TEST(Polynomial, SquareRulesReduce) {
  // s^2 = 1 - c^2, r^2 = 2
  auto ring = make_ring({"s", "c", "r"}, {SquareRule{0, 1, 1, -1}, SquareRule{2, 2, -1, 0}});
  P s = P::variable(ring, 0), c = P::variable(ring, 1), r = P::variable(ring, 2);
  EXPECT_EQ(s * s + c * c, P::constant(ring, 1));
  EXPECT_EQ((r * Rational(1, 2)).pow(2), P::constant(ring, Rational(1, 2)));
  EXPECT_EQ(s.pow(3), s - s * c * c);
}

TEST(Polynomial, VariableMismatch) {
  Xy a;
  auto other = make_ring({"x", "z"});
  P z = P::variable(other, 1);
  try {
    auto sum = a.x + z;
    ADD_FAILURE() << sum.to_string();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::VariableMismatch);
  }
  EXPECT_THROW(Op::partial(a.ring, 0).apply(z), Error);
  // same names, separately built ring: fine
  auto same = make_ring({"x", "y"});
  EXPECT_NO_THROW(a.x + P::variable(same, 1));
}

TEST(DiffOperator, EdgeGeneratorByComposition) {
  Xy v;
  // A = x d_y - y d_x
  Op A = Op::multiply_by(v.x) * Op::partial(v.ring, 1) - Op::multiply_by(v.y) * Op::partial(v.ring, 0);
  Op A2 = A * A;
  // hand expansion: A x^2 = -2xy, A(-2xy) = 2y^2 - 2x^2
  EXPECT_EQ(A2.apply(v.x * v.x), 2L * (v.y * v.y - v.x * v.x));
  EXPECT_TRUE(A2.apply(v.x * v.x + v.y * v.y).is_zero());
  // composition agrees with applying A twice on arbitrary input
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    P f = random_poly(v.ring, rng, 5, 6);
    EXPECT_EQ(A2.apply(f), A.apply(A.apply(f)));
  }
}

TEST(DiffOperator, Linearity) {
  auto ring = bmp_ring(3);
  Op gen = bmp_reservoir_generator(ring, 3);
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    P f = random_poly(ring, rng, 4, 5), g = random_poly(ring, rng, 4, 5);
    const Rational a(static_cast<long>(rng.below(7)) - 3, 2), b(5, 3);
    EXPECT_EQ(gen.apply(a * f + b * g), a * gen.apply(f) + b * gen.apply(g));
  }
}

TEST(DiffOperator, BmpEdgeConservesEnergy) {
  auto ring = bmp_ring(4);
  for (std::size_t i = 1; i < 4; ++i) {
    Op edge = bmp_edge_generator(ring, i, i + 1);
    P xi = P::variable(ring, i - 1), xj = P::variable(ring, i);
    EXPECT_TRUE(edge.apply(xi * xi + xj * xj).is_zero());
    EXPECT_EQ(edge.apply(xi * xi), 2L * (xj * xj - xi * xi));
  }
}

TEST(DualGenerator, AbsorbedAndSingleWalker) {
  auto ring = bmp_ring(2);
  P x1 = P::variable(ring, 0), x2 = P::variable(ring, 1);
  const P half = P::constant(ring, Rational(1, 2));
  DualityColumn<Rational> column = [&](const DualConfig& eta) -> std::optional<P> {
    if (eta.total() != 1) return std::nullopt;
    if (eta[1]) return x1 * x1;
    if (eta[2]) return x2 * x2;
    return P::constant(ring, 1);
  };
  auto closed = sip_jump_operator<Rational>(half, false, 1);
  auto open = sip_jump_operator<Rational>(half, true, 1);
  EXPECT_TRUE(apply_dual_generator(open, column, parse_dual_config("1;0,0;0")).is_zero());
  // one walker on a closed two-site chain hops at rate 1/2
  const P dual = apply_dual_generator(closed, column, parse_dual_config("0;1,0;0"));
  EXPECT_EQ(dual, Rational(1, 2) * (x2 * x2 - x1 * x1));
  // the diffusion side is four times faster
  EXPECT_EQ(bmp_edge_generator(ring, 1, 2).apply(x1 * x1), 4L * dual);

  DualityColumn<Rational> partial = [&](const DualConfig& eta) -> std::optional<P> {
    if (eta[1] == 1) return x1 * x1;
    return std::nullopt;
  };
  try {
    apply_dual_generator(closed, partial, parse_dual_config("0;1,0;0"));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainGap);
  }
}

TEST(FloatPolynomial, PruneAndConvert) {
  auto ring = make_ring({"x"});
  Polynomial<double> p(ring);
  p.add_term({2}, 1.0);
  p.add_term({1}, 1e-18);
  EXPECT_EQ(p.pruned(1e-14).term_count(), 1u);
  EXPECT_DOUBLE_EQ(p.max_abs_coeff(), 1.0);
  auto q = convert<double>(P::variable(ring, 0) * Rational(1, 4), ring);
  EXPECT_DOUBLE_EQ(q.terms().begin()->second, 0.25);
}
