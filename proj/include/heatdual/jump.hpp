#ifndef HEATDUAL_JUMP_HPP
#define HEATDUAL_JUMP_HPP

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "heatdual/model.hpp"
#include "heatdual/rng.hpp"

namespace heatdual {

struct RateTable {
  std::vector<SipJump> jumps;
  std::vector<double> rates;
  double total_rate = 0.0;
};

/// Jump rates of SIP(m): eta_i (m/2 + eta_j) across each bulk edge, and
/// (m/2) eta at sites 1 and L towards the cemeteries when absorbing.
RateTable sip_rates(const DualConfig& eta, const ChainSpec& spec);

struct GillespieStep {
  DualConfig next;
  double holding_time = 0.0;
  std::size_t choice = 0;  // index into the rate table
};

/// Exponential holding time, then a transition picked with probability
/// rate/total. Throws AbsorbedState when nothing can happen.
GillespieStep gillespie_step(const DualConfig& eta, const RateTable& table, Rng& rng);

struct AbsorptionRun {
  unsigned a = 0;  // walkers ending in cemetery 0
  unsigned b = 0;  // walkers ending in cemetery L+1
  std::uint64_t n_events = 0;
  double total_time = 0.0;
};

inline constexpr std::uint64_t kDefaultEventBudget = 100'000'000;

AbsorptionRun run_until_absorbed(const DualConfig& eta0, const ChainSpec& spec, Rng& rng,
                                 std::uint64_t max_events = kDefaultEventBudget);

/// Runs n_runs independent absorptions, run r using stream (seed, r).
std::vector<AbsorptionRun> run_absorption_ensemble(const DualConfig& eta0, const ChainSpec& spec,
                                                   std::uint64_t seed, std::uint64_t n_runs,
                                                   std::size_t threads,
                                                   std::uint64_t max_events = kDefaultEventBudget);

/// CSV with header run_index,a,b,n_events,total_time.
void write_absorption_csv(std::ostream& out, const std::vector<AbsorptionRun>& runs);

/// One redistribution event: a uniformly chosen bulk edge resplits its total
/// energy with a Beta(m/2, m/2) fraction (uniform for m = 2).
void kmp_step(EnergyConfig& z, const Rational& m, Rng& rng);

/// Product Negative-Binomial(m/2, p) weight of a closed-chain configuration,
/// prod_i p^{n_i} (1-p)^{m/2} (m/2)_{n_i} / n_i!. Throws InvalidArgument
/// when (1-p)^{m/2} is irrational.
Rational negative_binomial_weight(const DualConfig& eta, const Rational& m, const Rational& p);

struct DetailedBalanceReport {
  std::size_t configurations = 0;
  std::size_t transitions = 0;
  std::size_t violations = 0;
  bool pass() const { return violations == 0 && transitions > 0; }
};

/// mu(eta) r(eta -> eta') == mu(eta') r(eta' -> eta) in exact arithmetic for
/// every transition of closed SIP(m) on L sites with up to max_walkers walkers.
DetailedBalanceReport check_detailed_balance(std::size_t L, const Rational& m,
                                             unsigned max_walkers, const Rational& p);

}  // namespace heatdual

#endif  // HEATDUAL_JUMP_HPP
