#include "heatdual/jump.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <thread>

namespace heatdual {

RateTable sip_rates(const DualConfig& eta, const ChainSpec& spec) {
  if (spec.family != Family::SIP) throw Error(ErrorCode::WrongFamily, "sip_rates needs a SIP spec");
  if (eta.eta.size() != spec.L + 2) {
    throw Error(ErrorCode::DimensionMismatch, "eta must have L+2 entries");
  }
  RateTable table;
  table.jumps = sip_jumps(eta, spec.boundary == Boundary::Absorbing);
  table.rates.reserve(table.jumps.size());
  const double half_m = spec.half_m();
  for (const auto& j : table.jumps) {
    const double r = sip_rate(j, half_m);
    table.rates.push_back(r);
    table.total_rate += r;
  }
  return table;
}

GillespieStep gillespie_step(const DualConfig& eta, const RateTable& table, Rng& rng) {
  if (!(table.total_rate > 0)) throw Error(ErrorCode::AbsorbedState, "no transition has positive rate");
  GillespieStep out;
  out.holding_time = rng.exponential(table.total_rate);
  const double target = rng.uniform() * table.total_rate;
  double acc = 0.0;
  out.choice = table.rates.size() - 1;
  for (std::size_t i = 0; i < table.rates.size(); ++i) {
    acc += table.rates[i];
    if (target < acc) {
      out.choice = i;
      break;
    }
  }
  out.next = apply_jump(eta, table.jumps[out.choice]);
  return out;
}

AbsorptionRun run_until_absorbed(const DualConfig& eta0, const ChainSpec& spec, Rng& rng,
                                 std::uint64_t max_events) {
  if (spec.family != Family::SIP || spec.boundary != Boundary::Absorbing) {
    throw Error(ErrorCode::WrongFamily, "run_until_absorbed needs SIP with absorbing boundaries");
  }
  if (eta0.eta.size() != spec.L + 2) {
    throw Error(ErrorCode::DimensionMismatch, "eta must have L+2 entries");
  }
  AbsorptionRun run;
  DualConfig eta = eta0;
  while (!eta.absorbed()) {
    if (run.n_events >= max_events) {
      throw Error(ErrorCode::EventBudgetExceeded,
                  "absorption not reached within " + std::to_string(max_events) + " events");
    }
    const RateTable table = sip_rates(eta, spec);
    GillespieStep step = gillespie_step(eta, table, rng);
    eta = std::move(step.next);
    run.total_time += step.holding_time;
    ++run.n_events;
  }
  run.a = eta[0];
  run.b = eta[spec.L + 1];
  return run;
}

std::vector<AbsorptionRun> run_absorption_ensemble(const DualConfig& eta0, const ChainSpec& spec,
                                                   std::uint64_t seed, std::uint64_t n_runs,
                                                   std::size_t threads, std::uint64_t max_events) {
  std::vector<AbsorptionRun> runs(n_runs);
  threads = std::max<std::size_t>(1, std::min<std::size_t>(threads, n_runs));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (std::uint64_t r = next++; r < n_runs && !failed; r = next++) {
        Rng rng = Rng::for_stream(seed, r);
        runs[r] = run_until_absorbed(eta0, spec, rng, max_events);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return runs;
}

void write_absorption_csv(std::ostream& out, const std::vector<AbsorptionRun>& runs) {
  out << "run_index,a,b,n_events,total_time\n";
  char buf[64];
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", runs[r].total_time);
    out << r << ',' << runs[r].a << ',' << runs[r].b << ',' << runs[r].n_events << ',' << buf << '\n';
  }
}

void kmp_step(EnergyConfig& z, const Rational& m, Rng& rng) {
  if (m <= 0) throw Error(ErrorCode::NonPositiveM, "m must be > 0");
  if (z.z.size() < 2) throw Error(ErrorCode::InvalidArgument, "kmp_step needs at least two sites");
  for (double v : z.z) {
    if (!(v >= 0)) throw Error(ErrorCode::NegativeEnergyInput, "energies must be non-negative");
  }
  const std::size_t i = static_cast<std::size_t>(rng.below(z.z.size() - 1));
  const double shape = m.get_d() / 2.0;
  const double p = rng.beta(shape, shape);
  const double total = z.z[i] + z.z[i + 1];
  z.z[i] = p * total;
  z.z[i + 1] = total - z.z[i];
}

namespace {

// Exact r-th root of a non-negative integer, if it exists.
std::optional<mpz_class> exact_root(const mpz_class& v, unsigned long r) {
  mpz_class root;
  if (mpz_root(root.get_mpz_t(), v.get_mpz_t(), r) == 0) return std::nullopt;
  return root;
}

}  // namespace

Rational negative_binomial_weight(const DualConfig& eta, const Rational& m, const Rational& p) {
  if (!(p > 0 && p < 1)) throw Error(ErrorCode::InvalidArgument, "p must lie in (0,1)");
  const Rational half_m = m / 2;
  const Rational q = 1 - p;
  // (1-p)^{m/2} with m/2 = a/b in lowest terms.
  const unsigned long a = half_m.get_num().get_ui();
  const unsigned long b = half_m.get_den().get_ui();
  auto num_root = exact_root(q.get_num(), b);
  auto den_root = exact_root(q.get_den(), b);
  if (!num_root || !den_root) {
    throw Error(ErrorCode::InvalidArgument,
                "(1-p)^(m/2) is irrational for p=" + format_rational(p) + ", m=" + format_rational(m));
  }
  Rational site_factor(*num_root, *den_root);
  {
    mpz_class n, d;
    mpz_pow_ui(n.get_mpz_t(), site_factor.get_num().get_mpz_t(), a);
    mpz_pow_ui(d.get_mpz_t(), site_factor.get_den().get_mpz_t(), a);
    site_factor = Rational(n, d);
    site_factor.canonicalize();
  }

  Rational w = 1;
  for (std::size_t i = 1; i <= eta.bulk_size(); ++i) {
    const unsigned n = eta[i];
    Rational pn = 1;
    for (unsigned j = 0; j < n; ++j) pn *= p;
    Rational fact = 1;
    for (unsigned j = 2; j <= n; ++j) fact *= j;
    w *= pn * site_factor * rising_factorial(half_m, n) / fact;
  }
  return w;
}

DetailedBalanceReport check_detailed_balance(std::size_t L, const Rational& m,
                                             unsigned max_walkers, const Rational& p) {
  DetailedBalanceReport report;
  const Rational half_m = m / 2;
  for (unsigned k = 0; k <= max_walkers; ++k) {
    for_each_composition(L, k, [&](const std::vector<std::uint32_t>& bulk) {
      DualConfig eta = DualConfig::empty(L);
      std::copy(bulk.begin(), bulk.end(), eta.eta.begin() + 1);
      ++report.configurations;
      const Rational mu = negative_binomial_weight(eta, m, p);
      for (const auto& j : sip_jumps(eta, false)) {
        const DualConfig next = apply_jump(eta, j);
        const Rational forward = sip_rate(j, half_m);
        Rational backward = 0;
        for (const auto& back : sip_jumps(next, false)) {
          if (back.from == j.to && back.to == j.from) backward = sip_rate(back, half_m);
        }
        ++report.transitions;
        if (mu * forward != negative_binomial_weight(next, m, p) * backward) ++report.violations;
      }
    });
  }
  return report;
}

}  // namespace heatdual
