#include "heatdual/estimators.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace heatdual {

std::vector<double> batch_means(std::span<const double> series, std::size_t burn_in,
                                std::size_t n_batches) {
  if (n_batches < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 batches");
  if (series.size() <= burn_in) {
    throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(series.size()) +
                                               " does not outlast burn-in " + std::to_string(burn_in));
  }
  const std::size_t usable = series.size() - burn_in;
  const std::size_t batch = usable / n_batches;
  if (batch == 0) {
    throw Error(ErrorCode::SeriesTooShort, std::to_string(usable) + " samples cannot fill " +
                                               std::to_string(n_batches) + " batches");
  }
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const auto first = series.begin() + static_cast<std::ptrdiff_t>(burn_in + b * batch);
    means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(batch), 0.0) /
               static_cast<double>(batch);
  }
  return means;
}

MomentEstimate estimate_from_batches(const std::vector<double>& means) {
  const std::size_t n = means.size();
  if (n < 2) throw Error(ErrorCode::SeriesTooShort, "need at least 2 batch means");
  MomentEstimate est;
  est.value = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double m : means) ss += (m - est.value) * (m - est.value);
  est.std_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  return est;
}

MomentEstimate time_average(std::span<const double> series, std::size_t burn_in,
                            std::size_t n_batches) {
  MomentEstimate est = estimate_from_batches(batch_means(series, burn_in, n_batches));
  est.n_samples = ((series.size() - burn_in) / n_batches) * n_batches;
  est.burn_in = burn_in;
  return est;
}

MultiBatchMeans::MultiBatchMeans(std::size_t channels, std::size_t batch_size, std::size_t n_batches)
    : channels_(channels), batch_size_(batch_size), n_batches_(n_batches), running_(channels, 0.0) {
  if (channels == 0 || batch_size == 0 || n_batches < 2) {
    throw Error(ErrorCode::InvalidArgument, "batch means need channels, batch size and >= 2 batches");
  }
  means_.reserve(channels * n_batches);
}

void MultiBatchMeans::add(std::span<const double> row) {
  if (full()) return;
  if (row.size() != channels_) throw Error(ErrorCode::DimensionMismatch, "row width differs from channels");
  for (std::size_t c = 0; c < channels_; ++c) running_[c] += row[c];
  if (++in_batch_ == batch_size_) {
    for (std::size_t c = 0; c < channels_; ++c) {
      means_.push_back(running_[c] / static_cast<double>(batch_size_));
      running_[c] = 0.0;
    }
    in_batch_ = 0;
    ++completed_;
  }
}

std::vector<double> MultiBatchMeans::batch_means(std::size_t channel) const {
  if (channel >= channels_) throw Error(ErrorCode::InvalidArgument, "no such channel");
  std::vector<double> out(completed_);
  for (std::size_t b = 0; b < completed_; ++b) out[b] = means_[b * channels_ + channel];
  return out;
}

MomentEstimate MultiBatchMeans::estimate(std::size_t channel) const {
  MomentEstimate est = estimate_from_batches(batch_means(channel));
  est.n_samples = completed_ * batch_size_;
  return est;
}

MomentEstimate MultiBatchMeans::covariance(std::size_t a, std::size_t b, std::size_t ab) const {
  const auto ma = batch_means(a);
  const auto mb = batch_means(b);
  const auto mab = batch_means(ab);
  std::vector<double> per_batch(completed_);
  for (std::size_t k = 0; k < completed_; ++k) per_batch[k] = mab[k] - ma[k] * mb[k];
  MomentEstimate est = estimate_from_batches(per_batch);
  const double n = static_cast<double>(completed_);
  const double mean_a = std::accumulate(ma.begin(), ma.end(), 0.0) / n;
  const double mean_b = std::accumulate(mb.begin(), mb.end(), 0.0) / n;
  const double mean_ab = std::accumulate(mab.begin(), mab.end(), 0.0) / n;
  est.value = mean_ab - mean_a * mean_b;
  est.n_samples = completed_ * batch_size_;
  return est;
}

double TransportEstimate::conductivity() const {
  if (!kappa_L) {
    throw Error(ErrorCode::EqualTemperaturesForKappa, "kappa_L is undefined when T_left == T_right");
  }
  return *kappa_L;
}

std::vector<double> flux_series(const ObservationSeries& series) {
  const std::size_t left = series.column_index("e_in_left");
  const std::size_t right = series.column_index("e_in_right");
  std::vector<double> flux(series.size());
  double prev_left = 0.0, prev_right = 0.0, prev_time = 0.0;
  for (std::size_t r = 0; r < series.size(); ++r) {
    const auto row = series.row(r);
    const double dt = series.times[r] - prev_time;
    if (!(dt > 0)) throw Error(ErrorCode::InvalidArgument, "observation times must increase");
    flux[r] = 0.5 * ((row[left] - prev_left) - (row[right] - prev_right)) / dt;
    prev_left = row[left];
    prev_right = row[right];
    prev_time = series.times[r];
  }
  return flux;
}

std::optional<double> kappa_from(double J, const ChainSpec& spec) {
  if (spec.T_left == spec.T_right) return std::nullopt;
  return J * static_cast<double>(spec.L + 1) / (spec.T_left - spec.T_right);
}

TransportEstimate transport_summary(const std::vector<ObservationSeries>& trajectories,
                                    const ChainSpec& spec, std::optional<std::size_t> burn_in,
                                    std::size_t n_batches) {
  if (spec.family != Family::BMP || spec.boundary != Boundary::Reservoirs) {
    throw Error(ErrorCode::WrongFamily, "transport needs BMP with reservoirs");
  }
  if (trajectories.empty()) throw Error(ErrorCode::SeriesTooShort, "no trajectories");
  std::vector<double> flux_means;
  std::vector<std::vector<double>> site_means(spec.L);
  std::size_t samples = 0;
  std::size_t used_burn_in = 0;
  for (const auto& series : trajectories) {
    const std::size_t b = burn_in.value_or(default_burn_in(series.size()));
    used_burn_in = b;
    const auto flux = flux_series(series);
    const auto fm = batch_means(flux, b, n_batches);
    flux_means.insert(flux_means.end(), fm.begin(), fm.end());
    for (std::size_t i = 0; i < spec.L; ++i) {
      const auto col = series.column("x2_" + std::to_string(i + 1));
      const auto sm = batch_means(col, b, n_batches);
      site_means[i].insert(site_means[i].end(), sm.begin(), sm.end());
    }
    samples += ((series.size() - b) / n_batches) * n_batches;
  }
  TransportEstimate t;
  const MomentEstimate J = estimate_from_batches(flux_means);
  t.J = J.value;
  t.J_stderr = J.std_error;
  t.kappa_L = kappa_from(t.J, spec);
  for (auto& means : site_means) {
    MomentEstimate est = estimate_from_batches(means);
    est.n_samples = samples;
    est.burn_in = used_burn_in;
    t.profile.push_back(est);
  }
  return t;
}

TransportEstimate transport_summary(const ObservationSeries& series, const ChainSpec& spec,
                                    std::optional<std::size_t> burn_in, std::size_t n_batches) {
  return transport_summary(std::vector<ObservationSeries>{series}, spec, burn_in, n_batches);
}

nlohmann::json to_json(const TransportEstimate& t, const ChainSpec& spec) {
  nlohmann::json profile = nlohmann::json::array();
  for (std::size_t i = 0; i < t.profile.size(); ++i) {
    profile.push_back({i + 1, t.profile[i].value, t.profile[i].std_error});
  }
  return {{"spec", to_json(spec)},
          {"J", t.J},
          {"J_stderr", t.J_stderr},
          {"kappa_L", t.kappa_L ? nlohmann::json(*t.kappa_L) : nlohmann::json(nullptr)},
          {"profile", profile}};
}

}  // namespace heatdual
