#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "heatdual/absorption.hpp"
#include "heatdual/jump.hpp"
#include "stats.hpp"

using namespace heatdual;

namespace {

ChainSpec sip(std::size_t L, const char* m = "1", const char* boundary = "absorbing") {
  return validate_spec({{"family", "SIP"}, {"L", L}, {"m", m}, {"boundary", boundary}});
}

// Independent rate table: (from, to) -> rate, straight from the generator.
std::map<std::pair<std::size_t, std::size_t>, double> reference_rates(const DualConfig& eta, double m,
                                                                      bool absorbing) {
  std::map<std::pair<std::size_t, std::size_t>, double> r;
  const std::size_t L = eta.eta.size() - 2;
  for (std::size_t i = 1; i < L; ++i) {
    if (eta[i]) r[{i, i + 1}] = eta[i] * (m / 2 + eta[i + 1]);
    if (eta[i + 1]) r[{i + 1, i}] = eta[i + 1] * (m / 2 + eta[i]);
  }
  if (absorbing) {
    if (eta[1]) r[{1, 0}] = m / 2 * eta[1];
    if (eta[L]) r[{L, L + 1}] = m / 2 * eta[L];
  }
  return r;
}

}  // namespace

TEST(SipRates, Examples) {
  auto spec = sip(2);
  auto one = sip_rates(parse_dual_config("0;1,0;0"), spec);
  ASSERT_EQ(one.jumps.size(), 2u);
  EXPECT_DOUBLE_EQ(one.rates[0], 0.5);
  EXPECT_EQ(one.jumps[1].to, 0u);
  EXPECT_DOUBLE_EQ(one.rates[1], 0.5);
  EXPECT_DOUBLE_EQ(one.total_rate, 1.0);

  auto two = sip_rates(parse_dual_config("0;1,1;0"), spec);
  ASSERT_EQ(two.jumps.size(), 4u);
  EXPECT_DOUBLE_EQ(two.rates[0], 1.5);
  EXPECT_DOUBLE_EQ(two.rates[1], 1.5);
  EXPECT_DOUBLE_EQ(two.rates[2], 0.5);
  EXPECT_DOUBLE_EQ(two.rates[3], 0.5);
  EXPECT_DOUBLE_EQ(two.total_rate, 4.0);

  auto dead = sip_rates(parse_dual_config("2;0,0;1"), spec);
  EXPECT_TRUE(dead.jumps.empty());
  EXPECT_EQ(dead.total_rate, 0.0);

  EXPECT_THROW(sip_rates(parse_dual_config("0;1,0;0"),
                         validate_spec({{"family", "BMP"}, {"L", 2}})), Error);
}

TEST(SipRates, MatchIndependentFormula) {
  for (const char* m : {"1", "2", "3/2", "5"}) {
    for (const char* boundary : {"absorbing", "closed"}) {
      auto spec = sip(4, m, boundary);
      for (const auto& eta : std::vector<DualConfig>{parse_dual_config("0;2,0,1,3;0"),
                                                     parse_dual_config("1;0,4,0,0;2"),
                                                     parse_dual_config("0;1,1,1,1;0")}) {
        auto table = sip_rates(eta, spec);
        auto want = reference_rates(eta, spec.m_double(), spec.boundary == Boundary::Absorbing);
        ASSERT_EQ(table.jumps.size(), want.size());
        double total = 0.0;
        for (std::size_t k = 0; k < table.jumps.size(); ++k) {
          EXPECT_DOUBLE_EQ(table.rates[k], (want[{table.jumps[k].from, table.jumps[k].to}]));
          total += table.rates[k];
        }
        EXPECT_DOUBLE_EQ(table.total_rate, total);
      }
    }
  }
}

TEST(Gillespie, SingleEntryAndConservation) {
  auto spec = sip(1);
  Rng rng(1);
  auto eta = parse_dual_config("0;1;0");
  RateTable t;
  t.jumps = {sip_jumps(eta, true)[0]};
  t.rates = {0.5};
  t.total_rate = 0.5;
  for (int k = 0; k < 100; ++k) {
    auto step = gillespie_step(eta, t, rng);
    EXPECT_EQ(step.choice, 0u);
    EXPECT_GT(step.holding_time, 0.0);
    EXPECT_EQ(format_dual_config(step.next), "1;0;0");
  }
  auto big = sip(4);
  auto cur = parse_dual_config("0;2,1,0,3;0");
  while (!cur.absorbed()) {
    auto step = gillespie_step(cur, sip_rates(cur, big), rng);
    ASSERT_EQ(step.next.total(), 6u);
    cur = step.next;
  }
  try {
    gillespie_step(cur, sip_rates(cur, big), rng);
    ADD_FAILURE() << "no AbsorbedState";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AbsorbedState);
  }
}

TEST(Gillespie, TransitionFrequenciesAndHoldingTimes) {
  auto spec = sip(3, "3/2");
  auto eta = parse_dual_config("0;2,0,1;0");
  auto table = sip_rates(eta, spec);
  Rng rng(2);
  const int n = 100000;
  std::vector<double> counts(table.jumps.size(), 0.0);
  double hold = 0.0;
  for (int k = 0; k < n; ++k) {
    auto s = gillespie_step(eta, table, rng);
    counts[s.choice] += 1;
    hold += s.holding_time;
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double p = table.rates[k] / table.total_rate;
    const double se = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(counts[k] / n, p, 4 * se) << k;
  }
  // Exponential(total): mean 1/total, sd 1/total
  EXPECT_NEAR(hold / n, 1 / table.total_rate, 4 / (table.total_rate * std::sqrt(n)));
}

TEST(Absorption, OneWalkerProfile) {
  auto spec = sip(3);
  for (std::size_t i = 1; i <= 3; ++i) {
    auto eta = DualConfig::walkers_at(3, {i});
    auto runs = run_absorption_ensemble(eta, spec, 100 + i, 100000, 0);
    double left = 0;
    for (const auto& r : runs) {
      ASSERT_EQ(r.a + r.b, 1u);
      left += r.a;
    }
    const double p = 1.0 - static_cast<double>(i) / 4.0;
    EXPECT_NEAR(left / 1e5, p, 3 * std::sqrt(p * (1 - p) / 1e5)) << "site " << i;
  }
}

TEST(Absorption, AlreadyAbsorbed) {
  Rng rng(3);
  auto r = run_until_absorbed(parse_dual_config("1;0,0,0;0"), sip(3), rng);
  EXPECT_EQ(r.a, 1u);
  EXPECT_EQ(r.b, 0u);
  EXPECT_EQ(r.n_events, 0u);
}

TEST(Absorption, TwoWalkersMatchSolver) {
  auto spec = sip(4);
  auto eta = DualConfig::walkers_at(4, {1, 3});
  auto exact = absorption_distribution(eta, spec);
  auto runs = run_absorption_ensemble(eta, spec, 5, 50000, 0);
  std::map<std::pair<unsigned, unsigned>, double> freq;
  for (const auto& r : runs) freq[{r.a, r.b}] += 1.0 / 50000;
  for (const auto& [ab, p] : exact.p) {
    EXPECT_NEAR(freq[ab], p, 3 * std::sqrt(p * (1 - p) / 50000)) << ab.first << "," << ab.second;
  }
}

TEST(Absorption, BudgetAndErrors) {
  Rng rng(4);
  try {
    run_until_absorbed(DualConfig::walkers_at(6, {3, 3, 4}), sip(6), rng, 3);
    ADD_FAILURE() << "budget not enforced";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EventBudgetExceeded);
  }
  EXPECT_THROW(run_until_absorbed(DualConfig::walkers_at(3, {1}), sip(3, "1", "closed"), rng), Error);
}

TEST(Absorption, EnsembleDeterministicAcrossThreads) {
  auto spec = sip(4, "2");
  auto eta = DualConfig::walkers_at(4, {2, 2});
  auto a = run_absorption_ensemble(eta, spec, 9, 500, 1);
  auto b = run_absorption_ensemble(eta, spec, 9, 500, 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].a, b[k].a);
    EXPECT_EQ(a[k].n_events, b[k].n_events);
    EXPECT_EQ(a[k].total_time, b[k].total_time);
  }
  std::ostringstream os;
  write_absorption_csv(os, {a[0]});
  EXPECT_EQ(os.str().substr(0, 35), "run_index,a,b,n_events,total_time\n0");
}

TEST(Kmp, PairSumAndUniformFraction) {
  Rng rng(6);
  std::vector<double> fractions;
  for (int k = 0; k < 20000; ++k) {
    EnergyConfig z{{1.5, 2.5}};
    kmp_step(z, 2, rng);
    ASSERT_GE(z.z[0], 0.0);
    ASSERT_GE(z.z[1], 0.0);
    ASSERT_NEAR(z.z[0] + z.z[1], 4.0, 4.0 * 2.3e-16);
    fractions.push_back(z.z[0] / 4.0);
  }
  EXPECT_GT(stats::ks_one_sample(fractions, [](double u) { return u; }).p_value, 0.01);
}

TEST(Kmp, BetaMomentsAtMFour) {
  Rng rng(7);
  const int n = 100000;
  double s = 0, s2 = 0;
  std::vector<double> p(n);
  for (int k = 0; k < n; ++k) {
    EnergyConfig z{{1.0, 0.0}};
    kmp_step(z, 4, rng);
    p[k] = z.z[0];
    s += p[k];
  }
  const double mean = s / n;
  for (double v : p) s2 += (v - mean) * (v - mean);
  const double var = s2 / (n - 1);
  // Beta(2,2): mean 1/2, variance 1/20, fourth central moment 3/560
  EXPECT_NEAR(mean, 0.5, 4 * std::sqrt(0.05 / n));
  EXPECT_NEAR(var, 0.05, 4 * std::sqrt((3.0 / 560 - 0.05 * 0.05) / n));
}

TEST(Kmp, Errors) {
  Rng rng(8);
  EnergyConfig neg{{1.0, -1.0}};
  EXPECT_THROW(kmp_step(neg, 2, rng), Error);
  EnergyConfig one{{1.0}};
  EXPECT_THROW(kmp_step(one, 2, rng), Error);
}

TEST(NegativeBinomial, Weights) {
  // m=2, p=3/4: p^n (1-p)^1 (1)_n / n! = (3/4)^n / 4
  EXPECT_EQ(negative_binomial_weight(parse_dual_config("0;2;0"), 2, Rational(3, 4)), Rational(9, 64));
  // m=1: (1/4)^{1/2} = 1/2; (1/2)_1 = 1/2 -> 3/4 * 1/2 * 1/2
  EXPECT_EQ(negative_binomial_weight(parse_dual_config("0;1;0"), 1, Rational(3, 4)), Rational(3, 16));
  // (1/2)^{1/2} is irrational
  EXPECT_THROW(negative_binomial_weight(parse_dual_config("0;1;0"), 1, Rational(1, 2)), Error);
}

TEST(DetailedBalance, ClosedSip) {
  for (int m : {1, 2, 3}) {
    auto r = check_detailed_balance(3, m, 4, Rational(3, 4));
    EXPECT_TRUE(r.pass()) << "m=" << m << " violations " << r.violations;
    EXPECT_GT(r.transitions, 0u);
  }
  EXPECT_TRUE(check_detailed_balance(2, 2, 4, Rational(1, 3)).pass());
  // a single site has nothing to balance
  EXPECT_EQ(check_detailed_balance(1, 2, 4, Rational(1, 3)).transitions, 0u);
}
