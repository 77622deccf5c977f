// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is nonzero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_01.hpp>

#include "commands.hpp"
#include "heatdual/absorption.hpp"
#include "heatdual/diffusion.hpp"
#include "heatdual/estimators.hpp"
#include "heatdual/jump.hpp"
#include "heatdual/verify.hpp"
#include "stats.hpp"

using namespace heatdual;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ChainSpec bmp(std::size_t L, double tl, double tr) {
  return validate_spec({{"family", "BMP"}, {"L", L}, {"T_left", tl}, {"T_right", tr},
                        {"boundary", "reservoirs"}});
}

// Runs the CLI in-process; returns the exit code.
int cli(const std::vector<std::string>& args, std::string* captured = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (captured) *captured = out.str() + err.str();
  return code;
}

Outcome ac1() {
  Outcome o;
  std::string text;
  o.require(cli({"verify", "duality", "--pair", "bmp-sip1", "--L", "2,3,4", "--max-eta", "3"}, &text) == 0,
            "bmp-sip1 " + text.substr(0, 300));
  o.require(cli({"verify", "duality", "--pair", "bep-sip", "--L", "2,3", "--max-eta", "3"}, &text) == 0,
            "bep-sip " + text.substr(0, 300));
  o.require(cli({"verify", "duality", "--pair", "l3", "--phi", "formal,0,pi/6,pi/4"}, &text) == 0,
            "l3 exact");
  o.require(cli({"verify", "duality", "--pair", "l3", "--phi", "0,pi/6,pi/4", "--float"}, &text) == 0,
            "l3 float");
  o.require(cli({"verify", "change-of-coords", "--phi", "0,pi/6,pi/4"}, &text) == 0, "change exact");
  o.require(cli({"verify", "change-of-coords", "--phi", "0,pi/6,pi/4", "--float"}, &text) == 0,
            "change float");
  // negative control: the check must be able to fail
  o.require(cli({"verify", "duality", "--pair", "bmp-sip1", "--L", "2", "--drop-normalization"}) == 2,
            "negative control passed");
  if (o.pass) o.detail = "BMP L=2,3,4 and BEP L=2,3 with |eta|<=3; L3 exact and float at 0, pi/6, pi/4";
  return o;
}

Outcome ac2() {
  Outcome o;
  for (const char* m : {"1", "3/2", "2"}) {
    o.require(cli({"verify", "su11", "--sites", "2", "--m", m, "--max-degree", "8"}) == 0,
              std::string("su11 m=") + m);
    o.require(cli({"verify", "intertwiner", "--m", m, "--max-eta", "8"}) == 0,
              std::string("intertwiner m=") + m);
  }
  if (o.pass) o.detail = "4 representations and both intertwiner families, degree <= 8";
  return o;
}

Outcome ac3() {
  Outcome o;
  const auto profile = temperature_profile(bmp(10, 1, 2));
  double worst = 0;
  for (std::size_t i = 1; i <= 10; ++i) worst = std::max(worst, std::fabs(profile[i - 1] - (1.0 + i / 11.0)));
  o.require(profile.size() == 10 && worst <= 1e-10, fmt("max error %.3g", worst));
  if (o.pass) o.detail = fmt("max abs error %.3g", worst);
  return o;
}

Outcome ac4() {
  Outcome o;
  double worst = 0;
  const double tl = 1.0, tr = 2.0;
  for (std::size_t L : {2u, 3u, 4u, 6u}) {
    const auto entries = covariance_matrix(bmp(L, tl, tr));
    o.require(entries.size() == L * (L - 1) / 2, "wrong entry count");
    for (const auto& e : entries) {
      const double i = e.i, j = e.j, n = L;
      const double want = 2 * i * (n + 1 - j) * (tl - tr) * (tl - tr) / ((n + 3) * (n + 1) * (n + 1));
      worst = std::max(worst, std::fabs(e.value - want));
    }
  }
  o.require(worst <= 1e-9, fmt("max error %.3g", worst));
  if (o.pass) o.detail = fmt("L in {2,3,4,6}, max abs error %.3g", worst);
  return o;
}

Outcome ac5() {
  Outcome o;
  const auto spec = validate_spec({{"family", "SIP"}, {"L", 4}, {"boundary", "absorbing"}});
  const auto eta = DualConfig::walkers_at(4, {1, 3});
  const auto exact = absorption_distribution(eta, spec);
  const std::size_t n = 100000;
  const auto runs = run_absorption_ensemble(eta, spec, 20240501, n, 0);
  std::map<std::pair<unsigned, unsigned>, double> counts;
  for (const auto& r : runs) counts[{r.a, r.b}] += 1;
  std::vector<double> observed, probs;
  for (const auto& [ab, p] : exact.p) {
    observed.push_back(counts[ab]);
    probs.push_back(p);
  }
  o.require(observed.size() == 3, "expected three outcomes");
  const auto chi = stats::chi_square(observed, probs);
  o.require(chi.p_value > 0.01, fmt("chi2 %.3f dof %.0f p %.4f", chi.statistic, chi.dof, chi.p_value));
  if (o.pass) o.detail = fmt("chi2 %.3f on %.0f dof, p = %.3f", chi.statistic, chi.dof, chi.p_value);
  return o;
}

// Channels: x_i^2 for i = 1..8, then x_2^2 x_6^2.
Outcome ac6() {
  Outcome o;
  const std::size_t L = 8;
  const auto spec = bmp(L, 1, 2);
  const std::uint64_t burn = 1000000, sweeps = 10000000;
  const std::size_t batches = 32;
  MultiBatchMeans acc(L + 1, sweeps / batches, batches);
  ObservableConfig obs;
  obs.ledger = false;
  std::vector<double> row(L + 1);
  run_trajectory(spec, default_initial_state(spec), StepParams{1e-3, 100, 0}, burn + sweeps, 1, obs,
                 [&](std::uint64_t step, double, std::span<const double> x2) {
                   if (step <= burn) return;
                   for (std::size_t i = 0; i < L; ++i) row[i] = x2[i];
                   row[L] = x2[1] * x2[5];
                   acc.add(row);
                 });
  o.require(acc.full(), "batches not filled");
  const auto profile = temperature_profile(spec);
  double worst_z = 0;
  for (std::size_t i = 0; i < L; ++i) {
    const auto est = acc.estimate(i);
    const double z = std::fabs(est.value - profile[i]) / est.std_error;
    worst_z = std::max(worst_z, z);
    o.require(z <= 3, fmt("site %.0f: %.5f vs %.5f", i + 1.0, est.value, profile[i]));
  }
  const double want = energy_covariance(2, 6, spec);
  const auto cov = acc.covariance(1, 5, L);
  const double zc = std::fabs(cov.value - want) / cov.std_error;
  o.require(zc <= 3, fmt("cov(2,6) %.5f +- %.5f vs %.5f", cov.value, cov.std_error, want));
  if (o.pass) {
    o.detail = fmt("profile max |z| %.2f; cov(2,6) %.5f +- %.5f", worst_z, cov.value, cov.std_error) +
               fmt(" vs %.5f", want);
  }
  return o;
}

// Per-step rounding bounds, with ulp read as machine epsilon times the
// conserved quantity. Sums are taken in long double so that evaluating the
// invariant adds no error of its own.
Outcome ac7() {
  Outcome o;
  const std::size_t steps = 1000000;
  double bmp_worst = 0, bep_worst = 0, kmp_worst = 0, p_worst = 0, e_worst = 0;

  {
    const auto spec = validate_spec({{"family", "BMP"}, {"L", 8}});
    Rng rng(71);
    VelocityConfig x;
    for (int i = 0; i < 8; ++i) x.x.push_back(3 * rng.normal());
    FluxLedger ledger;
    auto energy = [&] {
      long double s = 0;
      for (double v : x.x) s += static_cast<long double>(v) * v;
      return s;
    };
    for (std::size_t k = 0; k < steps; ++k) {
      const long double before = energy();
      bmp_step(x, spec, 0.001 + 0.1 * rng.uniform(), rng, ledger);
      bmp_worst = std::max(bmp_worst, static_cast<double>(std::fabs(energy() - before) / (kEps * before)));
    }
  }
  {
    const auto spec = validate_spec({{"family", "BEP"}, {"L", 8}, {"m", "3"}});
    Rng rng(72);
    EnergyConfig z;
    for (int i = 0; i < 8; ++i) z.z.push_back(rng.gamma(1.5));
    auto total = [&] {
      long double s = 0;
      for (double v : z.z) s += v;
      return s;
    };
    for (std::size_t k = 0; k < steps; ++k) {
      const long double before = total();
      bep_step(z, spec, 0.001 + 0.01 * rng.uniform(), rng);
      bep_worst = std::max(bep_worst, static_cast<double>(std::fabs(total() - before) / (kEps * before)));
    }
  }
  {
    Rng rng(73);
    EnergyConfig z;
    for (int i = 0; i < 6; ++i) z.z.push_back(rng.gamma(1.0));
    for (std::size_t k = 0; k < steps; ++k) {
      const EnergyConfig before = z;
      kmp_step(z, 2, rng);
      // The chosen edge is not exposed, so take every edge that leaves all
      // other entries untouched; if only one entry moved there can be two.
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i + 1 < z.z.size(); ++i) {
        bool others_fixed = true;
        for (std::size_t j = 0; j < z.z.size(); ++j) {
          if (j != i && j != i + 1 && z.z[j] != before.z[j]) others_fixed = false;
        }
        if (!others_fixed) continue;
        const double pair = before.z[i] + before.z[i + 1];
        const long double now = static_cast<long double>(z.z[i]) + z.z[i + 1];
        best = std::min(best, static_cast<double>(std::fabs(now - pair) / (kEps * pair)));
      }
      kmp_worst = std::max(kmp_worst, best);
    }
  }
  {
    Rng rng(74);
    std::array<double, 3> v{rng.normal(), rng.normal(), rng.normal()};
    for (std::size_t k = 0; k < steps; ++k) {
      const long double p0 = static_cast<long double>(v[0]) + v[1] + v[2];
      const long double e0 = static_cast<long double>(v[0]) * v[0] + static_cast<long double>(v[1]) * v[1] +
                             static_cast<long double>(v[2]) * v[2];
      const double scale = std::fabs(v[0]) + std::fabs(v[1]) + std::fabs(v[2]);
      l3_step(v, 0.001 + 0.1 * rng.uniform(), rng);
      const long double p1 = static_cast<long double>(v[0]) + v[1] + v[2];
      const long double e1 = static_cast<long double>(v[0]) * v[0] + static_cast<long double>(v[1]) * v[1] +
                             static_cast<long double>(v[2]) * v[2];
      p_worst = std::max(p_worst, static_cast<double>(std::fabs(p1 - p0) / (kEps * scale)));
      e_worst = std::max(e_worst, static_cast<double>(std::fabs(e1 - e0) / (kEps * e0)));
    }
  }
  o.require(bmp_worst <= 4, fmt("BMP energy moved %.2f eps", bmp_worst));
  o.require(bep_worst <= 2, fmt("BEP total moved %.2f eps", bep_worst));
  o.require(kmp_worst <= 1, fmt("KMP pair sum moved %.2f eps", kmp_worst));
  o.require(p_worst <= 8 && e_worst <= 8, fmt("L3 P %.2f eps, E %.2f eps", p_worst, e_worst));
  o.detail = fmt("worst per step in eps units: BMP %.2f/4, BEP %.2f/2, KMP %.2f/1", bmp_worst, bep_worst,
                 kmp_worst) +
             fmt(", L3 P %.2f/8 E %.2f/8", p_worst, e_worst);
  return o;
}

Outcome ac8() {
  Outcome o;
  const std::size_t n = 2000;
  const double dt = 1e-3, t_end = 50;
  const auto steps = static_cast<std::uint64_t>(std::llround(t_end / dt));
  std::string summary;
  for (int m : {1, 2, 4}) {
    const auto spec = validate_spec({{"family", "BEP"}, {"L", 2}, {"m", m}});
    const auto runs = run_ensemble(spec, {1.0, 1.0}, StepParams{dt, 80u + m, 0}, steps, steps, ObservableConfig{},
                                   n, std::thread::hardware_concurrency());
    std::vector<double> fraction(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto row = runs[k].row(runs[k].size() - 1);
      fraction[k] = row[0] / (row[0] + row[1]);
    }
    boost::random::mt19937 gen(900 + m);
    boost::random::beta_distribution<double> beta(m / 2.0, m / 2.0);
    std::vector<double> direct(n);
    for (auto& d : direct) d = beta(gen);
    const auto ks = stats::ks_two_sample(fraction, direct);
    o.require(ks.p_value > 0.01, fmt("m=%.0f KS D %.4f p %.4f", m, ks.d, ks.p_value));
    summary += fmt("m=%.0f p=%.3f ", m, ks.p_value);
    if (m == 2) {
      std::vector<double> uniform(n);
      for (auto& u : uniform) u = boost::random::uniform_01<double>()(gen);
      const auto ku = stats::ks_two_sample(fraction, uniform);
      o.require(ku.p_value > 0.01, fmt("m=2 vs uniform D %.4f p %.4f", ku.d, ku.p_value));
      summary += fmt("(uniform p=%.3f) ", ku.p_value);
    }
  }
  if (o.pass) o.detail = "two-sample KS at t=50: " + summary;
  return o;
}

Outcome ac9() {
  Outcome o;
  std::size_t transitions = 0;
  for (int m : {1, 2, 3}) {
    const auto r = check_detailed_balance(3, m, 4, Rational(3, 4));
    o.require(r.pass() && r.transitions > 0, fmt("m=%.0f: %.0f violations", m, static_cast<double>(r.violations)));
    transitions += r.transitions;
  }
  if (o.pass) o.detail = fmt("%.0f transitions checked exactly", static_cast<double>(transitions));
  return o;
}

// T_l = T_r = 1.5: constant profile, zero current, Gaussian fourth moment.
Outcome ac10() {
  Outcome o;
  const double T = 1.5;
  const std::size_t L = 4;
  const auto spec = bmp(L, T, T);
  AbsorptionOptions exact;
  exact.backend = SolverBackend::Rational;
  for (double t : temperature_profile(spec, exact)) o.require(t == T, fmt("solver profile %.17g", t));

  const std::uint64_t burn = 200000, sweeps = 3200000;
  const std::size_t batches = 32;
  // channels: flux, then x_i^4
  MultiBatchMeans acc(L + 1, sweeps / batches, batches);
  ObservableConfig obs;
  std::vector<double> row(L + 1);
  double prev_left = 0, prev_right = 0, prev_time = 0;
  run_trajectory(spec, default_initial_state(spec), StepParams{1e-3, 10, 0}, burn + sweeps, 1, obs,
                 [&](std::uint64_t step, double time, std::span<const double> v) {
                   const double left = v[L], right = v[L + 1];
                   row[0] = 0.5 * ((left - prev_left) - (right - prev_right)) / (time - prev_time);
                   prev_left = left;
                   prev_right = right;
                   prev_time = time;
                   if (step <= burn) return;
                   for (std::size_t i = 0; i < L; ++i) row[i + 1] = v[i] * v[i];
                   acc.add(row);
                 });
  const auto J = acc.estimate(0);
  o.require(std::fabs(J.value) <= 3 * J.std_error, fmt("J %.4g +- %.4g", J.value, J.std_error));
  double worst_z = 0;
  for (std::size_t i = 1; i <= L; ++i) {
    const auto m4 = acc.estimate(i);
    const double z = std::fabs(m4.value - 3 * T * T) / m4.std_error;
    worst_z = std::max(worst_z, z);
    o.require(z <= 3, fmt("<x_%.0f^4> %.4f +- %.4f", static_cast<double>(i), m4.value, m4.std_error));
  }
  if (o.pass) o.detail = fmt("J %.3g +- %.3g; fourth moments max |z| %.2f", J.value, J.std_error, worst_z);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "duality identities", 30, ac1},
      {2, "su11 structure", 10, ac2},
      {3, "temperature profile", 1, ac3},
      {4, "energy covariance", 30, ac4},
      {5, "sip absorption vs solver", 120, ac5},
      {6, "bmp simulation vs duality", 600, ac6},
      {7, "conservation invariants", 60, ac7},
      {8, "thermalization limit", 120, ac8},
      {9, "detailed balance", 10, ac9},
      {10, "equilibrium sanity", 300, ac10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) o.require(false, fmt("took %.1f s, budget %.0f s", secs, c.budget_s));
    std::printf("%s AC%d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
