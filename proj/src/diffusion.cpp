#include "heatdual/diffusion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "heatdual/jump.hpp"

namespace heatdual {

void rotate_pair(double& a, double& b, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double na = a * c + b * s;
  const double nb = -a * s + b * c;
  a = na;
  b = nb;
}

double ou_transition(double x, double T, double dt, double xi) {
  const double decay = std::exp(-dt);
  return x * decay + std::sqrt(T * -std::expm1(-2.0 * dt)) * xi;
}

void bmp_step(VelocityConfig& x, const ChainSpec& spec, double dt, Rng& rng, FluxLedger& ledger) {
  if (spec.family != Family::BMP) throw Error(ErrorCode::WrongFamily, "bmp_step needs a BMP spec");
  if (x.x.size() != spec.L) throw Error(ErrorCode::DimensionMismatch, "x must have L entries");
  if (!(dt > 0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");

  // (x_i d_j - x_j d_i)^2 is the second derivative in the rotation angle of
  // the (i,j) plane, so the angle performs Brownian motion with variance 2t.
  const double angle_sd = std::sqrt(2.0 * dt);
  for (std::size_t i = 0; i + 1 < spec.L; ++i) {
    rotate_pair(x.x[i], x.x[i + 1], angle_sd * rng.normal());
  }

  if (spec.boundary == Boundary::Reservoirs) {
    const double before_left = x.x.front() * x.x.front();
    x.x.front() = ou_transition(x.x.front(), spec.T_left, dt, rng.normal());
    ledger.e_in_left += x.x.front() * x.x.front() - before_left;

    const double before_right = x.x.back() * x.x.back();
    x.x.back() = ou_transition(x.x.back(), spec.T_right, dt, rng.normal());
    ledger.e_in_right += x.x.back() * x.x.back() - before_right;
  }
  ledger.t_elapsed += dt;
}

void bep_step(EnergyConfig& z, const ChainSpec& spec, double dt, Rng& rng) {
  if (spec.family != Family::BEP) throw Error(ErrorCode::WrongFamily, "bep_step needs a BEP spec");
  if (z.z.size() != spec.L) throw Error(ErrorCode::DimensionMismatch, "z must have L entries");
  if (!(dt > 0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
  for (double v : z.z) {
    if (!(v >= 0)) throw Error(ErrorCode::NegativeEnergyInput, "energies must be non-negative");
  }
  const double half_m = spec.half_m();
  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t i = 0; i + 1 < spec.L; ++i) {
    const double a = z.z[i];
    const double b = z.z[i + 1];
    const double g = rng.normal();
    const double delta = -half_m * (a - b) * dt + std::sqrt(2.0 * a * b) * sqrt_dt * g;
    const double na = a + delta;
    const double nb = b - delta;
    if (na < 0.0 || nb < 0.0) continue;
    z.z[i] = na;
    z.z[i + 1] = nb;
  }
}

void rotate_about_diagonal(std::array<double, 3>& v, double theta) {
  const double mean = (v[0] + v[1] + v[2]) / 3.0;
  const double w0 = v[0] - mean;
  const double w1 = v[1] - mean;
  const double w2 = v[2] - mean;
  // k x w with k = (1,1,1)/sqrt(3); w is orthogonal to k.
  const double inv_sqrt3 = 0.57735026918962576451;
  const double k0 = (w2 - w1) * inv_sqrt3;
  const double k1 = (w0 - w2) * inv_sqrt3;
  const double k2 = (w1 - w0) * inv_sqrt3;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  v[0] = mean + (w0 * c + k0 * s);
  v[1] = mean + (w1 * c + k1 * s);
  v[2] = mean + (w2 * c + k2 * s);
}

void l3_step(std::array<double, 3>& v, double dt, Rng& rng) {
  for (double c : v) {
    if (!std::isfinite(c)) throw Error(ErrorCode::NonFiniteInput, "l3_step needs finite input");
  }
  if (!(dt > 0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
  // The generator is 3 (d/dangle)^2 in the plane orthogonal to (1,1,1).
  rotate_about_diagonal(v, std::sqrt(6.0 * dt) * rng.normal());
}

std::vector<std::string> observable_names(const ChainSpec& spec, const ObservableConfig& obs) {
  std::vector<std::string> names;
  switch (spec.family) {
    case Family::BMP:
      if (obs.site_values) {
        for (std::size_t i = 1; i <= spec.L; ++i) names.push_back("x2_" + std::to_string(i));
      }
      for (const auto& eta : obs.duality_etas) names.push_back("D(" + format_dual_config(eta) + ")");
      if (obs.ledger) {
        names.push_back("e_in_left");
        names.push_back("e_in_right");
      }
      if (obs.invariants) names.push_back("energy");
      break;
    case Family::BEP:
    case Family::KMP:
      if (obs.site_values) {
        for (std::size_t i = 1; i <= spec.L; ++i) names.push_back("z_" + std::to_string(i));
      }
      if (spec.family == Family::BEP) {
        for (const auto& eta : obs.duality_etas) names.push_back("D(" + format_dual_config(eta) + ")");
      }
      if (obs.invariants) names.push_back("energy");
      break;
    case Family::L3:
      if (obs.site_values) {
        names.insert(names.end(), {"x", "y", "z"});
      }
      if (obs.invariants) names.insert(names.end(), {"momentum", "energy"});
      break;
    case Family::SIP:
      throw Error(ErrorCode::WrongFamily, "SIP is simulated with the jump simulator");
  }
  return names;
}

std::vector<double> default_initial_state(const ChainSpec& spec) {
  std::vector<double> state;
  auto profile = [&](std::size_t i) {
    return spec.T_left + (spec.T_right - spec.T_left) * static_cast<double>(i) /
                             static_cast<double>(spec.L + 1);
  };
  switch (spec.family) {
    case Family::BMP:
      for (std::size_t i = 1; i <= spec.L; ++i) state.push_back(std::sqrt(profile(i)));
      break;
    case Family::BEP:
    case Family::KMP:
      for (std::size_t i = 1; i <= spec.L; ++i) state.push_back(profile(i));
      break;
    case Family::L3:
      state = {1.0, 0.0, 0.0};
      break;
    case Family::SIP:
      throw Error(ErrorCode::WrongFamily, "SIP is simulated with the jump simulator");
  }
  return state;
}

namespace {

void check_state(const ChainSpec& spec, const std::vector<double>& s) {
  const std::size_t expect = spec.family == Family::L3 ? 3 : spec.L;
  if (s.size() != expect) {
    throw Error(ErrorCode::DimensionMismatch,
                "initial state has " + std::to_string(s.size()) + " entries, expected " +
                    std::to_string(expect));
  }
  for (double v : s) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "initial state must be finite");
    if ((spec.family == Family::BEP || spec.family == Family::KMP) && v < 0) {
      throw Error(ErrorCode::NegativeEnergyInput, "energies must be non-negative");
    }
  }
}

}  // namespace

void run_trajectory(const ChainSpec& spec, std::vector<double> init, const StepParams& params,
                    std::uint64_t n_steps, std::uint64_t observe_every,
                    const ObservableConfig& obs, const ObservationSink& sink) {
  if (n_steps < 1) throw Error(ErrorCode::InvalidArgument, "n_steps must be >= 1");
  if (observe_every < 1) throw Error(ErrorCode::InvalidArgument, "observe_every must be >= 1");
  if (!(params.dt > 0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
  const std::size_t width = observable_names(spec, obs).size();
  check_state(spec, init);
  for (const auto& eta : obs.duality_etas) {
    if (eta.eta.size() != spec.L + 2) {
      throw Error(ErrorCode::DimensionMismatch, "duality eta must have L+2 entries");
    }
  }

  Rng rng = params.make_rng();
  std::vector<double> row;
  row.reserve(width);
  double time = 0.0;

  VelocityConfig x;
  EnergyConfig z;
  std::array<double, 3> v{};
  FluxLedger ledger;
  switch (spec.family) {
    case Family::BMP: x.x = std::move(init); break;
    case Family::BEP:
    case Family::KMP: z.z = std::move(init); break;
    case Family::L3: std::copy(init.begin(), init.end(), v.begin()); break;
    case Family::SIP: break;
  }
  const double kmp_rate = static_cast<double>(spec.L > 1 ? spec.L - 1 : 1);

  for (std::uint64_t step = 1; step <= n_steps; ++step) {
    switch (spec.family) {
      case Family::BMP: bmp_step(x, spec, params.dt, rng, ledger); time = ledger.t_elapsed; break;
      case Family::BEP: bep_step(z, spec, params.dt, rng); time += params.dt; break;
      case Family::KMP:
        time += rng.exponential(kmp_rate);
        kmp_step(z, spec.m, rng);
        break;
      case Family::L3: l3_step(v, params.dt, rng); time += params.dt; break;
      case Family::SIP: break;
    }
    if (step % observe_every != 0) continue;

    row.clear();
    switch (spec.family) {
      case Family::BMP: {
        if (obs.site_values) {
          for (double xi : x.x) row.push_back(xi * xi);
        }
        for (const auto& eta : obs.duality_etas) row.push_back(bmp_duality_weight(x, eta, spec));
        if (obs.ledger) {
          row.push_back(ledger.e_in_left);
          row.push_back(ledger.e_in_right);
        }
        if (obs.invariants) {
          double e = 0.0;
          for (double xi : x.x) e += xi * xi;
          row.push_back(e);
        }
        break;
      }
      case Family::BEP:
      case Family::KMP: {
        if (obs.site_values) row.insert(row.end(), z.z.begin(), z.z.end());
        if (spec.family == Family::BEP) {
          for (const auto& eta : obs.duality_etas) row.push_back(bep_duality_weight(z, eta, spec.m));
        }
        if (obs.invariants) {
          double e = 0.0;
          for (double zi : z.z) e += zi;
          row.push_back(e);
        }
        break;
      }
      case Family::L3:
        if (obs.site_values) row.insert(row.end(), v.begin(), v.end());
        if (obs.invariants) {
          row.push_back(v[0] + v[1] + v[2]);
          row.push_back(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        }
        break;
      case Family::SIP: break;
    }
    sink(step, time, row);
  }
}

ObservationSeries run_trajectory(const ChainSpec& spec, std::vector<double> init,
                                 const StepParams& params, std::uint64_t n_steps,
                                 std::uint64_t observe_every, const ObservableConfig& obs) {
  ObservationSeries series;
  series.names = observable_names(spec, obs);
  if (observe_every > 0) {
    series.steps.reserve(n_steps / observe_every);
    series.times.reserve(n_steps / observe_every);
    series.values.reserve((n_steps / observe_every) * series.names.size());
  }
  run_trajectory(spec, std::move(init), params, n_steps, observe_every, obs,
                 [&](std::uint64_t step, double time, std::span<const double> row) {
                   series.steps.push_back(step);
                   series.times.push_back(time);
                   series.values.insert(series.values.end(), row.begin(), row.end());
                 });
  return series;
}

std::vector<ObservationSeries> run_ensemble(const ChainSpec& spec, const std::vector<double>& init,
                                            const StepParams& params, std::uint64_t n_steps,
                                            std::uint64_t observe_every, const ObservableConfig& obs,
                                            std::size_t n_trajectories, std::size_t threads) {
  std::vector<ObservationSeries> out(n_trajectories);
  threads = std::max<std::size_t>(1, std::min(threads, n_trajectories));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  auto worker = [&] {
    try {
      for (std::size_t t = next++; t < n_trajectories && !failed; t = next++) {
        StepParams p = params;
        p.trajectory_index = t;
        out[t] = run_trajectory(spec, init, p, n_steps, observe_every, obs);
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
  return out;
}

std::size_t ObservationSeries::column_index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorCode::InvalidArgument, "no observable named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> ObservationSeries::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out(size());
  for (std::size_t r = 0; r < size(); ++r) out[r] = values[r * width() + c];
  return out;
}

void write_csv_header(std::ostream& out, const std::vector<std::string>& names) {
  out << "step,time";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
}

void write_csv_row(std::ostream& out, std::uint64_t step, double time, std::span<const double> row) {
  char buf[32];
  out << step;
  std::snprintf(buf, sizeof buf, "%.17g", time);
  out << ',' << buf;
  for (double v : row) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  }
  out << '\n';
}

void write_csv(std::ostream& out, const ObservationSeries& series) {
  write_csv_header(out, series.names);
  for (std::size_t r = 0; r < series.size(); ++r) {
    write_csv_row(out, series.steps[r], series.times[r], series.row(r));
  }
}

ObservationSeries read_csv(std::istream& in) {
  ObservationSeries series;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty series CSV");
  {
    std::istringstream header(line);
    std::string cell;
    std::vector<std::string> cols;
    while (std::getline(header, cell, ',')) cols.push_back(cell);
    // Observable names may contain commas (D(0;1,0;0)); rebuild them by
    // re-joining fragments inside parentheses.
    std::vector<std::string> merged;
    for (const auto& c : cols) {
      if (!merged.empty() && std::count(merged.back().begin(), merged.back().end(), '(') >
                                 std::count(merged.back().begin(), merged.back().end(), ')')) {
        merged.back() += "," + c;
      } else {
        merged.push_back(c);
      }
    }
    if (merged.size() < 2 || merged[0] != "step" || merged[1] != "time") {
      throw Error(ErrorCode::Io, "series CSV must start with step,time");
    }
    series.names.assign(merged.begin() + 2, merged.end());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != series.names.size() + 2) throw Error(ErrorCode::Io, "ragged series CSV row");
    series.steps.push_back(std::stoull(cells[0]));
    series.times.push_back(std::stod(cells[1]));
    for (std::size_t c = 2; c < cells.size(); ++c) series.values.push_back(std::stod(cells[c]));
  }
  return series;
}

}  // namespace heatdual
