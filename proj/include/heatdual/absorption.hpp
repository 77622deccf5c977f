#ifndef HEATDUAL_ABSORPTION_HPP
#define HEATDUAL_ABSORPTION_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "heatdual/model.hpp"

namespace heatdual {

/// Every configuration of k walkers over sites 0..L+1, in lexicographic order.
class DualStateSpace {
 public:
  DualStateSpace(std::size_t L, unsigned k);

  std::size_t L() const { return L_; }
  unsigned k() const { return k_; }
  std::size_t size() const { return states_.size(); }
  const DualConfig& state(std::size_t i) const { return states_.at(i); }
  const std::vector<DualConfig>& states() const { return states_; }
  /// Throws InvalidArgument for a configuration outside the space.
  std::size_t index(const DualConfig& eta) const;

 private:
  std::size_t L_;
  unsigned k_;
  std::vector<DualConfig> states_;
  std::map<DualConfig, std::size_t> index_;
};

enum class SolverBackend { Sparse, Rational };

struct AbsorptionOptions {
  SolverBackend backend = SolverBackend::Sparse;
  unsigned k_max = 4;
  /// Dense exact elimination is cubic in the state count.
  std::size_t rational_state_limit = 400;
};

/// Exact absorption probabilities, keyed like AbsorptionDistribution.
using ExactAbsorption = std::map<std::pair<unsigned, unsigned>, Rational>;

/// p(a,b) for the SIP chain with absorbing cemeteries dual to `spec` (an
/// absorbing SIP spec, or a BMP spec with reservoirs, which maps to SIP(1)).
/// Walkers already sitting in a cemetery count towards a or b.
AbsorptionDistribution absorption_distribution(const DualConfig& eta0, const ChainSpec& spec,
                                               const AbsorptionOptions& options = {});

/// Same system solved by dense Gaussian elimination over the rationals.
ExactAbsorption absorption_distribution_exact(const DualConfig& eta0, const ChainSpec& spec,
                                              const AbsorptionOptions& options = {});

/// Sum over (a,b) of T_left^a T_right^b p(a,b).
double stationary_moment(const DualConfig& eta0, const ChainSpec& spec,
                         const AbsorptionOptions& options = {});

/// Stationary <x_i^2> for i = 1..L.
std::vector<double> temperature_profile(const ChainSpec& spec, const AbsorptionOptions& options = {});

/// <x_i^2 x_j^2> - <x_i^2><x_j^2> for 1 <= i < j <= L.
double energy_covariance(std::size_t i, std::size_t j, const ChainSpec& spec,
                         const AbsorptionOptions& options = {});

struct CovarianceEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double value = 0.0;
};

/// All pairs i < j.
std::vector<CovarianceEntry> covariance_matrix(const ChainSpec& spec,
                                               const AbsorptionOptions& options = {});

/// "# spec: {...}" then "i,value" rows.
void write_profile_csv(std::ostream& out, const ChainSpec& spec, const std::vector<double>& profile);
/// "# spec: {...}" then "i,j,value" rows.
void write_covariance_csv(std::ostream& out, const ChainSpec& spec,
                          const std::vector<CovarianceEntry>& entries);

}  // namespace heatdual

#endif  // HEATDUAL_ABSORPTION_HPP
