#ifndef HEATDUAL_ESTIMATORS_HPP
#define HEATDUAL_ESTIMATORS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "heatdual/diffusion.hpp"
#include "heatdual/model.hpp"

namespace heatdual {

inline constexpr std::size_t kDefaultBatches = 32;

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;  // batch-means standard error
  std::size_t n_samples = 0;
  std::size_t burn_in = 0;
};

/// 10% of the series.
inline std::size_t default_burn_in(std::size_t length) { return length / 10; }

/// Means of n_batches equal blocks after burn-in; the remainder that does
/// not fill a block is dropped. Throws SeriesTooShort.
std::vector<double> batch_means(std::span<const double> series, std::size_t burn_in,
                                std::size_t n_batches);

/// Mean of the batch means with stderr sd(batch means)/sqrt(n_batches).
MomentEstimate estimate_from_batches(const std::vector<double>& means);

MomentEstimate time_average(std::span<const double> series, std::size_t burn_in,
                            std::size_t n_batches = kDefaultBatches);

/// Streaming batch means over several channels at once, for runs too long
/// to keep in memory. Samples past n_batches * batch_size are ignored.
class MultiBatchMeans {
 public:
  MultiBatchMeans(std::size_t channels, std::size_t batch_size, std::size_t n_batches);

  void add(std::span<const double> row);
  bool full() const { return completed_ == n_batches_; }
  std::size_t completed_batches() const { return completed_; }
  std::size_t channels() const { return channels_; }

  /// Requires at least two completed batches.
  MomentEstimate estimate(std::size_t channel) const;
  /// <AB> - <A><B> from channels a, b and a channel holding A*B; the error
  /// bar comes from the spread of the per-batch covariances.
  MomentEstimate covariance(std::size_t a, std::size_t b, std::size_t ab) const;
  std::vector<double> batch_means(std::size_t channel) const;

 private:
  std::size_t channels_;
  std::size_t batch_size_;
  std::size_t n_batches_;
  std::size_t in_batch_ = 0;
  std::size_t completed_ = 0;
  std::vector<double> running_;
  std::vector<double> means_;  // completed_ x channels_
};

struct TransportEstimate {
  double J = 0.0;  // > 0: energy flows left to right
  double J_stderr = 0.0;
  std::optional<double> kappa_L;
  std::vector<MomentEstimate> profile;

  /// kappa_L, or EqualTemperaturesForKappa when T_left == T_right.
  double conductivity() const;
};

/// Per-observation flux: half the difference of the two reservoir
/// injections over the elapsed time since the previous observation.
std::vector<double> flux_series(const ObservationSeries& series);

/// Transport estimate from BMP trajectories with reservoirs (columns x2_i,
/// e_in_left, e_in_right). Every trajectory contributes n_batches batches.
TransportEstimate transport_summary(const std::vector<ObservationSeries>& trajectories,
                                    const ChainSpec& spec, std::optional<std::size_t> burn_in = {},
                                    std::size_t n_batches = kDefaultBatches);
TransportEstimate transport_summary(const ObservationSeries& series, const ChainSpec& spec,
                                    std::optional<std::size_t> burn_in = {},
                                    std::size_t n_batches = kDefaultBatches);

/// kappa_L = J (L+1) / (T_left - T_right).
std::optional<double> kappa_from(double J, const ChainSpec& spec);

/// {spec, J, J_stderr, kappa_L, profile: [[i, value, stderr], ...]}.
nlohmann::json to_json(const TransportEstimate& t, const ChainSpec& spec);

}  // namespace heatdual

#endif  // HEATDUAL_ESTIMATORS_HPP
