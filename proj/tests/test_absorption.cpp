#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "heatdual/absorption.hpp"

using namespace heatdual;

namespace {

ChainSpec sip(std::size_t L, const char* m = "1") {
  return validate_spec({{"family", "SIP"}, {"L", L}, {"m", m}, {"boundary", "absorbing"}});
}

ChainSpec bmp(std::size_t L, double tl, double tr) {
  return validate_spec({{"family", "BMP"}, {"L", L}, {"T_left", tl}, {"T_right", tr},
                        {"boundary", "reservoirs"}});
}

AbsorptionOptions rational_backend() {
  AbsorptionOptions o;
  o.backend = SolverBackend::Rational;
  return o;
}

DualConfig reversed(const DualConfig& eta) {
  return DualConfig(std::vector<std::uint32_t>(eta.eta.rbegin(), eta.eta.rend()));
}

// Closed form for i < j with T_l, T_r reservoirs.
double covariance_formula(double i, double j, double L, double tl, double tr) {
  return 2 * i * (L + 1 - j) * (tl - tr) * (tl - tr) / ((L + 3) * (L + 1) * (L + 1));
}

}  // namespace

TEST(StateSpace, SizeAndIndex) {
  for (std::size_t L : {1u, 2u, 4u}) {
    for (unsigned k : {1u, 2u, 3u}) {
      DualStateSpace space(L, k);
      // compositions of k into L+2 parts
      EXPECT_EQ(space.size(), binomial(static_cast<unsigned>(k + L + 1), k).get_num().get_ui());
      for (std::size_t s = 0; s < space.size(); ++s) {
        EXPECT_EQ(space.index(space.state(s)), s);
        EXPECT_EQ(space.state(s).total(), k);
      }
    }
  }
  DualStateSpace space(2, 2);
  EXPECT_THROW(space.index(parse_dual_config("0;1,0;0")), Error);
}

// Values from an independent rational elimination of the same chain.
TEST(ExactAbsorption, IndependentOracles) {
  auto p = absorption_distribution_exact(DualConfig::walkers_at(2, {1, 2}), sip(2), rational_backend());
  EXPECT_EQ(p.at({0, 2}), Rational(4, 15));
  EXPECT_EQ(p.at({1, 1}), Rational(7, 15));
  EXPECT_EQ(p.at({2, 0}), Rational(4, 15));

  p = absorption_distribution_exact(DualConfig::walkers_at(3, {1}), sip(3), rational_backend());
  EXPECT_EQ(p.at({1, 0}), Rational(3, 4));
  EXPECT_EQ(p.at({0, 1}), Rational(1, 4));

  p = absorption_distribution_exact(parse_dual_config("0;0,2,0;0"), sip(3), rational_backend());
  EXPECT_EQ(p.at({0, 2}), Rational(7, 24));
  EXPECT_EQ(p.at({1, 1}), Rational(5, 12));
  EXPECT_EQ(p.at({2, 0}), Rational(7, 24));

  p = absorption_distribution_exact(parse_dual_config("0;1,1,0;0"), sip(3, "3"), rational_backend());
  EXPECT_EQ(p.at({0, 2}), Rational(1, 7));
  EXPECT_EQ(p.at({1, 1}), Rational(13, 28));
  EXPECT_EQ(p.at({2, 0}), Rational(11, 28));
}

TEST(SparseAbsorption, AgreesWithRational) {
  for (const char* m : {"1", "2", "3/2"}) {
    for (const auto& eta : std::vector<DualConfig>{parse_dual_config("0;1,0,2,0;0"),
                                                   parse_dual_config("1;0,1,1,0;0"),
                                                   parse_dual_config("0;0,0,0,3;0")}) {
      auto exact = absorption_distribution_exact(eta, sip(4, m), rational_backend());
      auto fast = absorption_distribution(eta, sip(4, m));
      EXPECT_NEAR(fast.total_mass(), 1.0, 1e-12);
      for (const auto& [ab, q] : exact) EXPECT_NEAR(fast.at(ab.first, ab.second), q.get_d(), 1e-12);
    }
  }
}

TEST(SparseAbsorption, OneWalkerIsLinear) {
  const std::size_t L = 7;
  for (std::size_t i = 1; i <= L; ++i) {
    auto p = absorption_distribution(DualConfig::walkers_at(L, {i}), sip(L));
    EXPECT_NEAR(p.at(1, 0), 1.0 - static_cast<double>(i) / (L + 1), 1e-12);
  }
}

TEST(SparseAbsorption, ReflectionIsExact) {
  auto spec = sip(5, "3/2");
  auto eta = parse_dual_config("0;2,0,1,0,0;1");
  auto p = absorption_distribution_exact(eta, spec, rational_backend());
  auto q = absorption_distribution_exact(reversed(eta), spec, rational_backend());
  for (const auto& [ab, v] : p) EXPECT_EQ(v, q.at({ab.second, ab.first}));
}

TEST(SparseAbsorption, AbsorbedStartAndCemeteryWalkers) {
  auto p = absorption_distribution(parse_dual_config("2;0,0;1"), sip(2));
  EXPECT_EQ(p.k, 3u);
  EXPECT_EQ(p.at(2, 1), 1.0);
  // one walker already in the left cemetery shifts a by one
  auto q = absorption_distribution(parse_dual_config("1;1,0,0;0"), sip(3));
  EXPECT_NEAR(q.at(2, 0), 0.75, 1e-12);
  EXPECT_NEAR(q.at(1, 1), 0.25, 1e-12);
}

TEST(SparseAbsorption, Errors) {
  AbsorptionOptions small;
  small.k_max = 2;
  try {
    absorption_distribution(DualConfig::walkers_at(3, {1, 2, 3}), sip(3), small);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WalkerBudgetExceeded);
  }
  EXPECT_THROW(absorption_distribution(DualConfig::walkers_at(2, {1}), sip(3)), Error);
  auto closed = validate_spec({{"family", "SIP"}, {"L", 3}});
  EXPECT_THROW(absorption_distribution(DualConfig::walkers_at(3, {1}), closed), Error);
  AbsorptionOptions tiny = rational_backend();
  tiny.rational_state_limit = 5;
  EXPECT_THROW(absorption_distribution_exact(DualConfig::walkers_at(3, {1, 2}), sip(3), tiny), Error);
}

TEST(Profile, LinearBetweenReservoirs) {
  auto spec = bmp(10, 1, 2);
  auto profile = temperature_profile(spec);
  ASSERT_EQ(profile.size(), 10u);
  for (std::size_t i = 1; i <= 10; ++i) {
    EXPECT_NEAR(profile[i - 1], 1.0 + static_cast<double>(i) / 11.0, 1e-12);
    if (i > 1) {
      EXPECT_GT(profile[i - 1], profile[i - 2]);
    }
  }
  for (double t : temperature_profile(bmp(5, 1.7, 1.7))) EXPECT_NEAR(t, 1.7, 1e-12);
}

TEST(Covariance, MatchesClosedForm) {
  for (std::size_t L : {2u, 3u, 5u}) {
    auto spec = bmp(L, 1.0, 2.5);
    auto entries = covariance_matrix(spec);
    EXPECT_EQ(entries.size(), L * (L - 1) / 2);
    for (const auto& e : entries) {
      ASSERT_LT(e.i, e.j);
      EXPECT_GT(e.value, 0.0);
      EXPECT_NEAR(e.value, covariance_formula(e.i, e.j, L, 1.0, 2.5), 1e-12);
    }
  }
  auto spec = bmp(2, 1, 0.5);
  EXPECT_THROW(energy_covariance(2, 1, spec), Error);
  EXPECT_THROW(energy_covariance(1, 1, spec), Error);
  EXPECT_NEAR(energy_covariance(1, 2, bmp(4, 3, 3)), 0.0, 1e-13);
}

TEST(Covariance, TwoSiteFromOracle) {
  // with T_r -> 0 only p(2,0) = 4/15 survives
  auto spec = bmp(2, 1.0, 1e-300);
  const double m = stationary_moment(DualConfig::walkers_at(2, {1, 2}), spec);
  EXPECT_NEAR(m, 4.0 / 15.0, 1e-14);
}

TEST(CsvWriters, Format) {
  auto spec = bmp(2, 1, 2);
  std::ostringstream p, c;
  write_profile_csv(p, spec, temperature_profile(spec));
  write_covariance_csv(c, spec, covariance_matrix(spec));
  EXPECT_EQ(p.str().rfind("# spec: {", 0), 0u);
  EXPECT_NE(p.str().find("\ni,value\n1,"), std::string::npos);
  EXPECT_NE(c.str().find("\ni,j,value\n1,2,"), std::string::npos);
}
