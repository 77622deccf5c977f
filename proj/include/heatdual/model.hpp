#ifndef HEATDUAL_MODEL_HPP
#define HEATDUAL_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heatdual/error.hpp"
#include "heatdual/rational.hpp"

namespace heatdual {

enum class Family { BMP, BEP, SIP, KMP, L3 };
enum class Boundary { Reservoirs, Absorbing, Closed };

std::string_view to_string(Family f);
std::string_view to_string(Boundary b);
Family parse_family(std::string_view text);
Boundary parse_boundary(std::string_view text);

/// Everything that identifies a model instance. Built only through
/// validate_spec, so a ChainSpec in hand always satisfies its invariants.
struct ChainSpec {
  Family family = Family::BMP;
  std::size_t L = 1;
  Rational m = 1;
  double T_left = 1.0;
  double T_right = 1.0;
  Boundary boundary = Boundary::Closed;

  double m_double() const { return m.get_d(); }
  double half_m() const { return m.get_d() / 2.0; }
  bool operator==(const ChainSpec&) const = default;
};

/// Checks a flat JSON document (keys: family, L, m, T_left, T_right,
/// boundary) and returns the spec. Unknown keys are rejected.
ChainSpec validate_spec(const nlohmann::json& raw);
nlohmann::json to_json(const ChainSpec& spec);
ChainSpec load_spec(const std::string& path);

/// The SIP chain with absorbing cemeteries that is dual to `spec`: a BMP
/// spec with reservoirs maps to SIP(1); an absorbing SIP spec is returned
/// unchanged.
ChainSpec absorbing_dual_of(const ChainSpec& spec);

struct VelocityConfig {
  std::vector<double> x;
};

struct EnergyConfig {
  std::vector<double> z;
};

/// Walker occupations over sites 0..L+1; sites 0 and L+1 are cemeteries.
struct DualConfig {
  std::vector<std::uint32_t> eta;

  DualConfig() = default;
  explicit DualConfig(std::vector<std::uint32_t> occupations)
      : eta(std::move(occupations)) {}

  /// All-zero configuration for a chain of L bulk sites.
  static DualConfig empty(std::size_t L) {
    return DualConfig(std::vector<std::uint32_t>(L + 2, 0));
  }
  /// Bulk configuration from one-based sites, one walker per listed site.
  static DualConfig walkers_at(std::size_t L, std::initializer_list<std::size_t> sites);

  std::size_t bulk_size() const { return eta.size() < 2 ? 0 : eta.size() - 2; }
  std::uint32_t& operator[](std::size_t i) { return eta[i]; }
  std::uint32_t operator[](std::size_t i) const { return eta[i]; }
  std::uint64_t total() const;
  std::uint64_t bulk_total() const;
  bool absorbed() const { return bulk_total() == 0; }

  auto operator<=>(const DualConfig&) const = default;
};

/// Parses "eta0;eta1,...,etaL;etaL+1".
DualConfig parse_dual_config(std::string_view text);
std::string format_dual_config(const DualConfig& eta);

/// p(a,b): probability that a walkers end in cemetery 0 and b in L+1.
struct AbsorptionDistribution {
  unsigned k = 0;
  std::map<std::pair<unsigned, unsigned>, double> p;

  double at(unsigned a, unsigned b) const;
  double total_mass() const;
};

/// T_l^{eta_0} * prod_i x_i^{2 eta_i}/(2 eta_i - 1)!! * T_r^{eta_{L+1}}.
double bmp_duality_weight(const VelocityConfig& x, const DualConfig& eta,
                          const ChainSpec& spec);

/// prod_i z_i^{eta_i} Gamma(m/2) / (2^{eta_i} Gamma(m/2 + eta_i)) over bulk
/// sites. The Gamma ratio is expanded as a finite product.
double bep_duality_weight(const EnergyConfig& z, const DualConfig& eta,
                          const Rational& m);

/// One admissible SIP transition out of a configuration. `count` is the
/// occupation of the departure site; `partner` the occupation of the
/// arrival site (bulk moves only).
struct SipJump {
  std::size_t from = 0;
  std::size_t to = 0;
  std::uint32_t count = 0;
  std::uint32_t partner = 0;
  bool to_cemetery = false;
};

/// Enumerates the nonzero-rate transitions of SIP(m) on the chain encoded by
/// eta (bulk sites 1..L). With absorbing boundaries, walkers at sites 1 and
/// L also leave to the adjacent cemetery. Order: edges left to right, for
/// each edge i->i+1 then i+1->i; then 1->0, then L->L+1.
std::vector<SipJump> sip_jumps(const DualConfig& eta, bool absorbing);

/// Rate of a jump for half-parameter m/2, generic over the number type so
/// the simulator (double), the exact checks (Rational) and the symbolic
/// verifier (polynomials in m) share a single formula.
template <class R>
R sip_rate(const SipJump& j, const R& half_m) {
  R rate = half_m * static_cast<long>(j.count);
  if (!j.to_cemetery) rate += static_cast<long>(j.count) * static_cast<long>(j.partner);
  return rate;
}

/// Applies a jump: one walker moves from j.from to j.to.
DualConfig apply_jump(const DualConfig& eta, const SipJump& j);

/// Visits every vector of `parts` non-negative integers summing to k, in
/// ascending lexicographic order.
void for_each_composition(std::size_t parts, unsigned k,
                          const std::function<void(const std::vector<std::uint32_t>&)>& visit);

}  // namespace heatdual

#endif  // HEATDUAL_MODEL_HPP
