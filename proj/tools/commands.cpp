#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatdual/absorption.hpp"
#include "heatdual/diffusion.hpp"
#include "heatdual/estimators.hpp"
#include "heatdual/jump.hpp"
#include "heatdual/model.hpp"
#include "heatdual/verify.hpp"

namespace heatdual::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// A flag value that parsed but makes no sense; reported like a CLI11 error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(text);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& cell : split(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) {
      throw UsageError(flag + ": expected comma-separated numbers, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

DualConfig parse_eta_flag(const std::string& text, const ChainSpec& spec) {
  DualConfig eta;
  try {
    eta = parse_dual_config(text);
  } catch (const Error& e) {
    throw UsageError(std::string("--eta: ") + e.what() + " (expected \"eta0;eta1,...,etaL;etaL+1\")");
  }
  if (eta.eta.size() != spec.L + 2) {
    throw UsageError("--eta: '" + text + "' has " + std::to_string(eta.bulk_size()) +
                     " bulk sites, spec has L=" + std::to_string(spec.L));
  }
  return eta;
}

std::string family_word(Family f) {
  std::string s(to_string(f));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

json manifest(const std::string& command, const std::vector<std::string>& argv, const ChainSpec& spec,
              std::uint64_t seed, json parameters, const std::string& started,
              const std::vector<std::string>& outputs) {
  return {{"tool_version", kToolVersion},
          {"command", command},
          {"argv", argv},
          {"spec", to_json(spec)},
          {"seed", seed},
          {"parameters", std::move(parameters)},
          {"started", started},
          {"finished", utc_now()},
          {"outputs", outputs}};
}

// --- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string family;
  std::string spec_path;
  double dt = 1e-3;
  std::uint64_t steps = 1000;
  std::uint64_t observe_every = 1;
  std::size_t trajectories = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string init;
  std::vector<std::string> etas;
  bool invariants = false;
  std::size_t threads = 0;
};

int do_simulate(const SimulateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const std::string started = utc_now();
  const ChainSpec spec = load_spec(a.spec_path);
  if (family_word(spec.family) != a.family) {
    throw UsageError("simulate " + a.family + ": spec '" + a.spec_path + "' describes family " +
                     std::string(to_string(spec.family)));
  }
  if (!(a.dt > 0) || !std::isfinite(a.dt)) throw UsageError("--dt: must be a positive number");
  if (a.steps < 1) throw UsageError("--steps: must be >= 1");
  if (a.observe_every < 1) throw UsageError("--observe-every: must be >= 1");
  if (a.trajectories < 1) throw UsageError("--trajectories: must be >= 1");

  ObservableConfig obs;
  obs.ledger = spec.family == Family::BMP && spec.boundary == Boundary::Reservoirs;
  obs.invariants = a.invariants;
  for (const auto& e : a.etas) {
    if (spec.family != Family::BMP && spec.family != Family::BEP) {
      throw UsageError("--eta: duality observables exist for bmp and bep only");
    }
    obs.duality_etas.push_back(parse_eta_flag(e, spec));
  }
  const std::vector<double> init =
      a.init.empty() ? default_initial_state(spec) : parse_doubles(a.init, "--init");

  fs::create_directories(a.out_dir);
  const auto names = observable_names(spec, obs);
  std::vector<std::string> files(a.trajectories);
  for (std::size_t t = 0; t < a.trajectories; ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%03zu.csv", t);
    files[t] = name;
  }

  const std::size_t threads = std::min(a.threads ? a.threads : default_threads(), a.trajectories);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  auto worker = [&] {
    try {
      for (std::size_t t = next++; t < a.trajectories && !failed; t = next++) {
        std::ofstream csv(fs::path(a.out_dir) / files[t]);
        if (!csv) throw Error(ErrorCode::Io, "cannot write " + files[t]);
        write_csv_header(csv, names);
        StepParams params{a.dt, a.seed, t};
        run_trajectory(spec, init, params, a.steps, a.observe_every, obs,
                       [&](std::uint64_t step, double time, std::span<const double> row) {
                         write_csv_row(csv, step, time, row);
                       });
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  json params = {{"family", a.family},
                 {"dt", a.dt},
                 {"steps", a.steps},
                 {"observe_every", a.observe_every},
                 {"trajectories", a.trajectories},
                 {"init", init},
                 {"etas", a.etas},
                 {"invariants", a.invariants}};
  write_json_file(fs::path(a.out_dir) / "manifest.json",
                  manifest("simulate", argv, spec, a.seed, params, started, files));
  out << "wrote " << a.trajectories << " trajectories to " << a.out_dir << '\n';
  return kOk;
}

// --- sip -----------------------------------------------------------------

struct SipArgs {
  std::string spec_path;
  std::string eta;
  std::uint64_t runs = 1000;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t threads = 0;
  std::uint64_t max_events = kDefaultEventBudget;
};

int do_sip(const SipArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const std::string started = utc_now();
  const ChainSpec spec = absorbing_dual_of(load_spec(a.spec_path));
  const DualConfig eta = parse_eta_flag(a.eta, spec);
  if (a.runs < 1) throw UsageError("--runs: must be >= 1");
  const auto runs = run_absorption_ensemble(eta, spec, a.seed, a.runs,
                                            a.threads ? a.threads : default_threads(), a.max_events);
  if (a.out_dir.empty()) {
    write_absorption_csv(out, runs);
    return kOk;
  }
  fs::create_directories(a.out_dir);
  {
    std::ofstream csv(fs::path(a.out_dir) / "absorption.csv");
    if (!csv) throw Error(ErrorCode::Io, "cannot write absorption.csv");
    write_absorption_csv(csv, runs);
  }
  json params = {{"eta", a.eta}, {"runs", a.runs}, {"max_events", a.max_events}};
  write_json_file(fs::path(a.out_dir) / "manifest.json",
                  manifest("sip", argv, spec, a.seed, params, started, {"absorption.csv"}));
  std::map<std::pair<unsigned, unsigned>, std::uint64_t> tally;
  for (const auto& r : runs) ++tally[{r.a, r.b}];
  out << "a,b,count\n";
  for (const auto& [ab, n] : tally) out << ab.first << ',' << ab.second << ',' << n << '\n';
  return kOk;
}

// --- solve ---------------------------------------------------------------

struct SolveArgs {
  std::string kind;
  std::string spec_path;
  std::string eta;
  std::string backend = "sparse";
  unsigned k_max = 4;
  std::string out_path;
};

int do_solve(const SolveArgs& a, std::ostream& out) {
  const ChainSpec spec = load_spec(a.spec_path);
  AbsorptionOptions options;
  options.backend = a.backend == "rational" ? SolverBackend::Rational : SolverBackend::Sparse;
  options.k_max = a.k_max;

  std::ofstream file;
  if (!a.out_path.empty()) {
    file.open(a.out_path);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + a.out_path);
  }
  std::ostream& sink = a.out_path.empty() ? out : file;

  if (a.kind == "profile") {
    write_profile_csv(sink, spec, temperature_profile(spec, options));
  } else if (a.kind == "covariance") {
    write_covariance_csv(sink, spec, covariance_matrix(spec, options));
  } else {
    if (a.eta.empty()) throw UsageError("solve " + a.kind + ": --eta is required");
    const DualConfig eta = parse_eta_flag(a.eta, spec);
    char buf[32];
    sink << "# spec: " << to_json(spec).dump() << '\n';
    if (a.kind == "moment") {
      std::snprintf(buf, sizeof buf, "%.17g", stationary_moment(eta, spec, options));
      sink << "eta,value\n\"" << format_dual_config(eta) << "\"," << buf << '\n';
    } else if (options.backend == SolverBackend::Rational) {
      sink << "a,b,p\n";
      for (const auto& [ab, p] : absorption_distribution_exact(eta, spec, options)) {
        sink << ab.first << ',' << ab.second << ',' << format_rational(p) << '\n';
      }
    } else {
      sink << "a,b,p\n";
      for (const auto& [ab, p] : absorption_distribution(eta, spec, options).p) {
        std::snprintf(buf, sizeof buf, "%.17g", p);
        sink << ab.first << ',' << ab.second << ',' << buf << '\n';
      }
    }
  }
  return kOk;
}

// --- verify --------------------------------------------------------------

struct VerifyArgs {
  std::string kind;
  std::string pair = "bmp-sip1";
  std::vector<std::size_t> sizes;
  unsigned max_eta = 0;
  std::vector<std::string> phis;
  bool float_mode = false;
  std::string time_scale;
  bool drop_normalization = false;
  std::vector<std::string> reps;
  std::size_t sites = 2;
  std::string m = "1";
  unsigned max_degree = 8;
  std::vector<std::string> families;
  std::string form = "both";
};

Angle angle_from(const std::string& text, bool float_mode) {
  Angle angle;
  try {
    angle = parse_angle(text);
  } catch (const Error& e) {
    throw UsageError(std::string("--phi: ") + e.what());
  }
  if (float_mode && angle.kind == AngleKind::Exact) {
    const double pi = std::acos(-1.0);
    switch (angle.exact) {
      case ExactAngle::Zero: return Angle::radians(0.0);
      case ExactAngle::PiOver6: return Angle::radians(pi / 6);
      case ExactAngle::PiOver4: return Angle::radians(pi / 4);
    }
  }
  return angle;
}

Rational rational_flag(const std::string& text, const std::string& flag) {
  try {
    return parse_rational(text);
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

int do_verify(const VerifyArgs& a, std::ostream& out) {
  std::vector<Report> reports;
  if (a.kind == "duality") {
    const unsigned max_eta = a.max_eta ? a.max_eta : 3;
    if (a.pair == "bmp-sip1") {
      BmpDualityOptions options;
      if (!a.time_scale.empty()) options.time_scale = rational_flag(a.time_scale, "--time-scale");
      options.drop_normalization = a.drop_normalization;
      const std::vector<std::size_t> sizes = a.sizes.empty() ? std::vector<std::size_t>{2, 3, 4} : a.sizes;
      for (std::size_t L : sizes) {
        reports.push_back(check_duality_bmp_sip1(L, dual_configs_up_to(L, max_eta, true), options));
      }
    } else if (a.pair == "bep-sip") {
      const std::vector<std::size_t> sizes = a.sizes.empty() ? std::vector<std::size_t>{2, 3} : a.sizes;
      for (std::size_t L : sizes) {
        reports.push_back(check_duality_bep_sip(L, dual_configs_up_to(L, max_eta, false)));
      }
    } else {
      const std::vector<std::string> phis =
          a.phis.empty() ? std::vector<std::string>{"formal", "0", "pi/6", "pi/4"} : a.phis;
      for (const auto& p : phis) {
        reports.push_back(check_duality_l3(angle_from(p, a.float_mode), walker_pairs(max_eta)));
      }
    }
  } else if (a.kind == "su11") {
    const std::vector<std::string> reps =
        a.reps.empty() ? std::vector<std::string>{"bmp-differential", "bmp-discrete",
                                                  "bep-differential", "bep-discrete"}
                       : a.reps;
    const Rational m = rational_flag(a.m, "--m");
    for (const auto& r : reps) reports.push_back(check_su11(parse_su11_rep(r), a.sites, m, a.max_degree));
  } else if (a.kind == "intertwiner") {
    const std::vector<std::string> families =
        a.families.empty() ? std::vector<std::string>{"bmp", "bep"} : a.families;
    const Rational m = rational_flag(a.m, "--m");
    const unsigned degree = a.max_eta ? a.max_eta : 8;
    for (const auto& f : families) {
      if (f == "bmp") {
        reports.push_back(check_intertwiner(IntertwinerFamily::Bmp, 1, degree));
        continue;
      }
      if (a.form == "canonical" || a.form == "both") {
        reports.push_back(check_intertwiner(IntertwinerFamily::Bep, m, degree, IntertwinerForm::Canonical));
      }
      if (a.form == "duality-normalized" || a.form == "both") {
        reports.push_back(
            check_intertwiner(IntertwinerFamily::Bep, m, degree, IntertwinerForm::DualityNormalized));
      }
    }
  } else {
    const std::vector<std::string> phis =
        a.phis.empty() ? std::vector<std::string>{"0", "pi/6", "pi/4"} : a.phis;
    const unsigned max_eta = a.max_eta ? a.max_eta : 3;
    for (const auto& p : phis) {
      const Angle angle = angle_from(p, a.float_mode);
      reports.push_back(check_change_of_coordinates(angle, max_eta));
      reports.push_back(check_l3_operator_identity(angle));
    }
  }

  bool pass = true;
  json list = json::array();
  for (const auto& r : reports) {
    pass = pass && r.pass;
    list.push_back(r.to_json());
  }
  out << json{{"command", "verify " + a.kind}, {"pass", pass}, {"reports", list}}.dump(2) << '\n';
  return pass ? kOk : kVerificationFailed;
}

// --- report --------------------------------------------------------------

struct ReportArgs {
  std::string kind;
  std::string in_dir;
  std::optional<std::size_t> burn_in;
  std::size_t batches = kDefaultBatches;
};

int do_report(const ReportArgs& a, std::ostream& out) {
  const json m = read_json_file(fs::path(a.in_dir) / "manifest.json");
  const ChainSpec spec = validate_spec(m.at("spec"));
  std::vector<ObservationSeries> trajectories;
  for (const auto& f : m.at("outputs")) {
    std::ifstream in(fs::path(a.in_dir) / f.get<std::string>());
    if (!in) throw Error(ErrorCode::Io, "cannot open " + f.get<std::string>());
    trajectories.push_back(read_csv(in));
  }
  const TransportEstimate t = transport_summary(trajectories, spec, a.burn_in, a.batches);
  out << to_json(t, spec).dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heat-conduction chains and their dual walkers", "heatdual"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate bmp|bep|kmp|l3 trajectories");
  simulate->add_option("family", sim.family, "Process")->required()->check(
      CLI::IsMember({"bmp", "bep", "kmp", "l3"}));
  simulate->add_option("--spec", sim.spec_path, "Spec JSON file")->required();
  simulate->add_option("--dt", sim.dt, "Time step (bmp, bep, l3)");
  simulate->add_option("--steps", sim.steps, "Steps (kmp: redistribution events)");
  simulate->add_option("--observe-every", sim.observe_every, "Record every n-th step");
  simulate->add_option("--trajectories", sim.trajectories, "Independent trajectories");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--out", sim.out_dir, "Output directory")->required();
  simulate->add_option("--init", sim.init, "Initial state, comma-separated");
  simulate->add_option("--eta", sim.etas, "Record the duality function for this configuration");
  simulate->add_flag("--invariants", sim.invariants, "Record conserved quantities");
  simulate->add_option("--threads", sim.threads, "Worker threads (0: all cores)");

  SipArgs sip;
  auto* sipc = app.add_subcommand("sip", "Run absorbing SIP walkers until absorption");
  sipc->add_option("--spec", sip.spec_path, "Spec JSON file (absorbing SIP or BMP with reservoirs)")
      ->required();
  sipc->add_option("--eta", sip.eta, "Start configuration \"eta0;eta1,...,etaL;etaL+1\"")->required();
  sipc->add_option("--runs", sip.runs, "Number of runs");
  sipc->add_option("--seed", sip.seed, "Master seed");
  sipc->add_option("--out", sip.out_dir, "Output directory (default: CSV on stdout)");
  sipc->add_option("--threads", sip.threads, "Worker threads (0: all cores)");
  sipc->add_option("--max-events", sip.max_events, "Event budget per run");

  SolveArgs solve;
  auto* solvec = app.add_subcommand("solve", "Exact absorption solves: profile|covariance|moment|absorption");
  solvec->add_option("kind", solve.kind, "Quantity")->required()->check(
      CLI::IsMember({"profile", "covariance", "moment", "absorption"}));
  solvec->add_option("--spec", solve.spec_path, "Spec JSON file")->required();
  solvec->add_option("--eta", solve.eta, "Dual configuration (moment, absorption)");
  solvec->add_option("--backend", solve.backend, "sparse or rational")->check(
      CLI::IsMember({"sparse", "rational"}));
  solvec->add_option("--k-max", solve.k_max, "Walker budget");
  solvec->add_option("--out", solve.out_path, "Output file (default: stdout)");

  VerifyArgs verify;
  auto* verifyc = app.add_subcommand("verify", "Symbolic checks: duality|su11|intertwiner|change-of-coords");
  verifyc->add_option("kind", verify.kind, "Check")->required()->check(
      CLI::IsMember({"duality", "su11", "intertwiner", "change-of-coords"}));
  verifyc->add_option("--pair", verify.pair, "bmp-sip1, bep-sip or l3")->check(
      CLI::IsMember({"bmp-sip1", "bep-sip", "l3"}));
  verifyc->add_option("--L", verify.sizes, "Chain sizes")->delimiter(',');
  verifyc->add_option("--max-eta", verify.max_eta, "Walker / degree budget");
  verifyc->add_option("--phi", verify.phis, "Angles: formal, 0, pi/6, pi/4 or radians")->delimiter(',');
  verifyc->add_flag("--float", verify.float_mode, "Evaluate named angles in floating point");
  verifyc->add_option("--time-scale", verify.time_scale, "Dual time scale (bmp-sip1)");
  verifyc->add_flag("--drop-normalization", verify.drop_normalization,
                    "Negative control: omit (2 eta - 1)!!");
  verifyc->add_option("--rep", verify.reps, "SU(1,1) representations")->delimiter(',');
  verifyc->add_option("--sites", verify.sites, "Sites for su11");
  verifyc->add_option("--m", verify.m, "Parameter m (rational)");
  verifyc->add_option("--max-degree", verify.max_degree, "Degree budget for su11");
  verifyc->add_option("--family", verify.families, "Intertwiner family: bmp, bep")->delimiter(',');
  verifyc->add_option("--form", verify.form, "canonical, duality-normalized or both")->check(
      CLI::IsMember({"canonical", "duality-normalized", "both"}));

  ReportArgs report;
  std::size_t burn_in = 0;
  auto* reportc = app.add_subcommand("report", "Summaries of simulation output: transport");
  reportc->add_option("kind", report.kind, "Summary")->required()->check(CLI::IsMember({"transport"}));
  reportc->add_option("--in", report.in_dir, "Directory written by simulate")->required();
  auto* burn_opt = reportc->add_option("--burn-in", burn_in, "Observations to drop (default 10%)");
  reportc->add_option("--batches", report.batches, "Batches per trajectory");

  std::string manifest_path, rerun_out;
  auto* rerun = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  rerun->add_option("--manifest", manifest_path, "manifest.json")->required();
  rerun->add_option("--out", rerun_out, "Write to this directory instead");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const CLI::App* active = &app;
    if (!args.empty()) {
      for (const auto* sub : app.get_subcommands({})) {
        if (sub->get_name() == args.front()) active = sub;
      }
    }
    // CLI11 reports missing required flags before unknown ones; name the
    // unknown flag first since it is usually the real mistake.
    std::string unknown;
    for (const auto& a : args) {
      if (a.rfind("--", 0) != 0 || a == "--help") continue;
      const std::string name = a.substr(0, a.find('='));
      if (active != &app && !active->get_option_no_throw(name)) {
        unknown = name;
        break;
      }
    }
    if (!unknown.empty()) {
      err << "error: unknown flag " << unknown << " for '" << active->get_name() << "'\n";
    } else {
      err << "error: " << e.what() << '\n';
    }
    err << active->help();
    return kUsage;
  }
  if (*burn_opt) report.burn_in = burn_in;

  try {
    if (*simulate) return do_simulate(sim, args, out);
    if (*sipc) return do_sip(sip, args, out);
    if (*solvec) return do_solve(solve, out);
    if (*verifyc) return do_verify(verify, out);
    if (*reportc) return do_report(report, out);
    if (*rerun) {
      const json m = read_json_file(manifest_path);
      std::vector<std::string> replay = m.at("argv").get<std::vector<std::string>>();
      if (!rerun_out.empty()) {
        for (std::size_t i = 0; i < replay.size(); ++i) {
          if (replay[i] == "--out" && i + 1 < replay.size()) {
            replay[i + 1] = rerun_out;
          } else if (replay[i].rfind("--out=", 0) == 0) {
            replay[i] = "--out=" + rerun_out;
          }
        }
      }
      if (!replay.empty() && replay.front() == "rerun") throw UsageError("manifest records a rerun");
      return run(replay, out, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace heatdual::cli
