#ifndef HEATDUAL_VERIFY_HPP
#define HEATDUAL_VERIFY_HPP

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heatdual/model.hpp"
#include "heatdual/symbolic.hpp"

namespace heatdual {

struct ResidualTerm {
  std::string context;  // which case produced it
  std::string monomial;
  std::string coefficient;
};

/// Outcome of a mechanical identity check.
struct Report {
  std::string check;
  nlohmann::json inputs = nlohmann::json::object();
  bool pass = true;
  std::size_t cases = 0;
  std::vector<ResidualTerm> residual_terms;
  /// Constant c in  L_cont D = c * L_discrete D  (reported, not hidden).
  std::string time_scale = "1";

  nlohmann::json to_json() const;
  /// Folds `other` into this report (cases add up, pass is the conjunction).
  void merge(const Report& other);
};

/// Degree budget for duality checks: total walkers per configuration.
inline constexpr unsigned kMaxDualityWalkers = 8;

/// All configurations on L bulk sites with 1..max_total walkers. With
/// `boundary`, cemetery occupations are included as well.
std::vector<DualConfig> dual_configs_up_to(std::size_t L, unsigned max_total, bool boundary);

// --- BMP with reservoirs / absorbing SIP(1) -------------------------------

/// Variables x1..xL, Tl, Tr.
RingPtr bmp_ring(std::size_t L);
/// Edge generators plus -x d + T d^2 at sites 1 and L.
DiffOperator<Rational> bmp_reservoir_generator(const RingPtr& ring, std::size_t L);
DiffOperator<Rational> bmp_edge_generator(const RingPtr& ring, std::size_t i, std::size_t j);

struct BmpDualityOptions {
  Rational time_scale = 4;
  /// Negative control: drop the (2 eta_i - 1)!! normalization.
  bool drop_normalization = false;
};

Report check_duality_bmp_sip1(std::size_t L, const std::vector<DualConfig>& etas,
                              const BmpDualityOptions& options = {});

// --- BEP(m) / SIP(m) with formal m -----------------------------------------

/// Variables z1..zL, m.
RingPtr bep_ring(std::size_t L);
DiffOperator<Rational> bep_generator(const RingPtr& ring, std::size_t L);
/// D(z, eta) multiplied by prod over bulk sites of prod_{j<N} (m/2 + j),
/// N = |eta|, which turns it into a polynomial in (z, m).
Polynomial<Rational> bep_cleared_duality(const RingPtr& ring, const DualConfig& eta);

Report check_duality_bep_sip(std::size_t L, const std::vector<DualConfig>& etas);

// --- three-site momentum-conserving diffusion ------------------------------

enum class AngleKind { Formal, Exact, Float };
enum class ExactAngle { Zero, PiOver6, PiOver4 };

struct Angle {
  AngleKind kind = AngleKind::Float;
  ExactAngle exact = ExactAngle::Zero;
  double value = 0.0;

  static Angle formal() { return {AngleKind::Formal, ExactAngle::Zero, 0.0}; }
  static Angle of(ExactAngle a);
  static Angle radians(double phi) { return {AngleKind::Float, ExactAngle::Zero, phi}; }
  std::string describe() const;
};

/// Parses "0", "pi/6", "pi/4", "formal" (exact) or a decimal in radians.
Angle parse_angle(const std::string& text);

/// Rotation taking the z' axis to (1,1,1)/sqrt(3); columns are the primed
/// axes. Exact modes work over [x,y,z,s,c,r2,r3] with s^2 = 1 - c^2,
/// r2^2 = 2, r3^2 = 3; float mode over [x,y,z].
template <class C>
struct Frame {
  RingPtr ring;
  std::array<std::array<Polynomial<C>, 3>, 3> R;  // R[row][col]

  /// x', y', z' as linear forms in x, y, z (x' = column 0 . (x,y,z)).
  Polynomial<C> primed(std::size_t axis) const;
};

Frame<Rational> exact_frame(const Angle& angle);
Frame<double> float_frame(double phi);
/// Any 3x3 matrix, used for the non-orthogonal negative control.
Frame<double> float_frame_from(const std::array<std::array<double, 3>, 3>& matrix);

/// R^T R = I and R (0,0,1) = (1,1,1)/sqrt(3); exact or within 1e-14.
Report check_frame(const Frame<Rational>& frame);
Report check_frame(const Frame<double>& frame);

/// The three-rotation generator squared, over the frame's ring.
template <class C>
DiffOperator<C> l3_generator(const RingPtr& ring);
/// 3 (x' d_y' - y' d_x')^2 written in x, y, z.
template <class C>
DiffOperator<C> l3_rotated_generator(const Frame<C>& frame);

/// x'^{2 n1} y'^{2 n2} / ((2 n1 - 1)!! (2 n2 - 1)!!) in x, y, z.
template <class C>
Polynomial<C> rotated_duality_function(const Frame<C>& frame, unsigned n1, unsigned n2);

/// Pairs (n1, n2) with 1 <= n1 + n2 <= max_total.
std::vector<std::pair<unsigned, unsigned>> walker_pairs(unsigned max_total);

/// L D(.; n1, n2) = 12 * (two-walker SIP(1) generator) D for every pair.
Report check_duality_l3(const Angle& angle, const std::vector<std::pair<unsigned, unsigned>>& pairs);

/// The three-rotation generator equals 3 (x' d_y' - y' d_x')^2 on every
/// monomial of degree <= max_degree.
Report check_l3_operator_identity(const Angle& angle, unsigned max_degree = 6);

/// Hypothesis, primed duality and conclusion of the change-of-coordinates
/// statement for the frame of `angle`.
Report check_change_of_coordinates(const Angle& angle, unsigned max_total = 3);
/// Same conclusion check for an arbitrary matrix (negative control).
Report check_change_of_coordinates(const std::array<std::array<double, 3>, 3>& matrix,
                                   unsigned max_total = 3);

// --- SU(1,1) ---------------------------------------------------------------

enum class Su11Rep { BmpDifferential, BmpDiscrete, BepDifferential, BepDiscrete };
Su11Rep parse_su11_rep(const std::string& text);
std::string to_string(Su11Rep rep);

/// Commutation relations on all monomials / basis kets of total degree
/// <= max_degree over `site_count` sites.
Report check_su11(Su11Rep rep, std::size_t site_count, const Rational& m = 1,
                  unsigned max_degree = 8);

enum class IntertwinerFamily { Bmp, Bep };
/// Canonical: d = z^eta / (m/2)_eta with the discrete action as printed.
/// DualityNormalized: d = z^eta / (2^eta (m/2)_eta), the single-site factor
/// of the BEP duality function, paired with (2 K+, K-/2, K0).
enum class IntertwinerForm { Canonical, DualityNormalized };

Report check_intertwiner(IntertwinerFamily family, const Rational& m, unsigned degree_max,
                         IntertwinerForm form = IntertwinerForm::Canonical);

}  // namespace heatdual

#endif  // HEATDUAL_VERIFY_HPP
