#ifndef HEATDUAL_DIFFUSION_HPP
#define HEATDUAL_DIFFUSION_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "heatdual/model.hpp"
#include "heatdual/rng.hpp"

namespace heatdual {

struct StepParams {
  double dt = 1e-3;
  std::uint64_t seed = 0;
  std::uint64_t trajectory_index = 0;

  Rng make_rng() const { return Rng::for_stream(seed, trajectory_index); }
};

/// Cumulative energy (in units of x^2) injected by each reservoir.
struct FluxLedger {
  double e_in_left = 0.0;
  double e_in_right = 0.0;
  double t_elapsed = 0.0;
};

/// Rotates (a, b) by angle theta: (a cos + b sin, -a sin + b cos).
void rotate_pair(double& a, double& b, double theta);

/// Exact Ornstein-Uhlenbeck transition over dt for the generator
/// -x d/dx + T d^2/dx^2, driven by the standard normal `xi`.
double ou_transition(double x, double T, double dt, double xi);

/// One BMP sweep of duration dt: Brownian rotations on each bulk edge left to
/// right with angle variance 2 dt, then (with reservoirs) exact OU updates
/// of sites 1 and L, whose energy change is booked in `ledger`.
void bmp_step(VelocityConfig& x, const ChainSpec& spec, double dt, Rng& rng, FluxLedger& ledger);

/// One Euler-Maruyama sweep of BEP(m) on a closed chain. An edge update that
/// would make an energy negative is skipped for this sweep.
void bep_step(EnergyConfig& z, const ChainSpec& spec, double dt, Rng& rng);

/// Rotation of v about the (1,1,1)/sqrt(3) axis by angle theta.
void rotate_about_diagonal(std::array<double, 3>& v, double theta);

/// One step of the three-site momentum-conserving diffusion: rotation about
/// the diagonal by theta ~ Normal(0, 6 dt).
void l3_step(std::array<double, 3>& v, double dt, Rng& rng);

/// What run_trajectory records at each observation.
struct ObservableConfig {
  bool site_values = true;               // x_i^2 (BMP), z_i (BEP/KMP), x,y,z (L3)
  std::vector<DualConfig> duality_etas;  // duality weights (BMP, BEP)
  bool ledger = true;                    // e_in_left, e_in_right (BMP)
  bool invariants = false;               // total energy (and momentum for L3)
};

std::vector<std::string> observable_names(const ChainSpec& spec, const ObservableConfig& obs);

struct ObservationSeries {
  std::vector<std::string> names;
  std::vector<std::uint64_t> steps;
  std::vector<double> times;
  std::vector<double> values;  // row-major, names.size() per row

  std::size_t size() const { return steps.size(); }
  std::size_t width() const { return names.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * width(), width()};
  }
  /// Column by name; throws InvalidArgument if absent.
  std::vector<double> column(const std::string& name) const;
  std::size_t column_index(const std::string& name) const;
};

using ObservationSink = std::function<void(std::uint64_t step, double time, std::span<const double> row)>;

/// Initial state used when none is given: BMP x_i = sqrt of the linear
/// interpolation between T_left and T_right at i/(L+1); BEP/KMP z_i equal to
/// that interpolation; L3 v = (1, 0, 0).
std::vector<double> default_initial_state(const ChainSpec& spec);

/// Runs n_steps steps of the family's dynamics from `init` and hands every
/// observe_every-th state to `sink`. For KMP a step is one redistribution
/// event and time advances by Exponential(L-1) holding times.
void run_trajectory(const ChainSpec& spec, std::vector<double> init, const StepParams& params,
                    std::uint64_t n_steps, std::uint64_t observe_every,
                    const ObservableConfig& obs, const ObservationSink& sink);

ObservationSeries run_trajectory(const ChainSpec& spec, std::vector<double> init,
                                 const StepParams& params, std::uint64_t n_steps,
                                 std::uint64_t observe_every, const ObservableConfig& obs);

/// Independent trajectories 0..n_trajectories-1 (params.trajectory_index is
/// ignored). Results are indexed by trajectory and do not depend on `threads`.
std::vector<ObservationSeries> run_ensemble(const ChainSpec& spec, const std::vector<double>& init,
                                            const StepParams& params, std::uint64_t n_steps,
                                            std::uint64_t observe_every, const ObservableConfig& obs,
                                            std::size_t n_trajectories, std::size_t threads);

void write_csv(std::ostream& out, const ObservationSeries& series);
/// Pieces of write_csv for streaming output.
void write_csv_header(std::ostream& out, const std::vector<std::string>& names);
void write_csv_row(std::ostream& out, std::uint64_t step, double time, std::span<const double> row);
ObservationSeries read_csv(std::istream& in);

}  // namespace heatdual

#endif  // HEATDUAL_DIFFUSION_HPP
