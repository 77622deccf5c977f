#include "heatdual/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace heatdual {

namespace {

constexpr std::size_t kMaxRecordedResiduals = 200;
constexpr double kFloatTolerance = 1e-10;
constexpr double kFrameTolerance = 1e-14;

template <class C>
using Poly = Polynomial<C>;
template <class C>
using Op = DiffOperator<C>;

template <class C>
Op<C> mul(const Poly<C>& p) {
  return Op<C>::multiply_by(p);
}

template <class C>
Op<C> d(const RingPtr& ring, std::size_t v) {
  return Op<C>::partial(ring, v);
}

template <class C>
Poly<C> var(const RingPtr& ring, std::size_t v) {
  return Poly<C>::variable(ring, v);
}

template <class C>
Poly<C> cst(const RingPtr& ring, const C& c) {
  return Poly<C>::constant(ring, c);
}

void record(Report& report, const std::string& context, const std::string& monomial,
            const std::string& coefficient) {
  report.pass = false;
  if (report.residual_terms.size() < kMaxRecordedResiduals) {
    report.residual_terms.push_back({context, monomial, coefficient});
  }
}

void compare(Report& report, const std::string& context, const Poly<Rational>& lhs,
             const Poly<Rational>& rhs, double = -1.0, double = 0.0) {
  ++report.cases;
  const Poly<Rational> residual = lhs - rhs;
  for (const auto& [e, c] : residual.terms()) {
    record(report, context, format_monomial(*residual.ring(), e), format_rational(c));
  }
}

// Float mode: coefficients within 1e-10 of the largest one count as zero,
// unless an absolute tolerance is given. When both sides should vanish,
// `reference` (the size of the input the operators act on) sets the scale.
void compare(Report& report, const std::string& context, const Poly<double>& lhs,
             const Poly<double>& rhs, double absolute_tol = -1.0, double reference = 0.0) {
  ++report.cases;
  const double scale = std::max({lhs.max_abs_coeff(), rhs.max_abs_coeff(), reference, 1e-300});
  const double tol = absolute_tol >= 0 ? absolute_tol : kFloatTolerance * scale;
  const Poly<double> residual = (lhs - rhs).pruned(tol);
  for (const auto& [e, c] : residual.terms()) {
    record(report, context, format_monomial(*residual.ring(), e), CoeffTraits<double>::format(c));
  }
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_eta_budget(const DualConfig& eta) {
  if (eta.total() > kMaxDualityWalkers) {
    throw Error(ErrorCode::DegreeBudgetExceeded,
                format_dual_config(eta) + " has more than " + std::to_string(kMaxDualityWalkers) +
                    " walkers");
  }
}

nlohmann::json etas_json(const std::vector<DualConfig>& etas) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : etas) out.push_back(format_dual_config(e));
  return out;
}

}  // namespace

nlohmann::json Report::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : residual_terms) {
    terms.push_back({{"case", t.context}, {"monomial", t.monomial}, {"coefficient", t.coefficient}});
  }
  return {{"check", check},         {"inputs", inputs}, {"pass", pass},
          {"cases", cases},         {"time_scale", time_scale},
          {"residual_terms", terms}};
}

void Report::merge(const Report& other) {
  cases += other.cases;
  pass = pass && other.pass;
  for (const auto& t : other.residual_terms) {
    if (residual_terms.size() < kMaxRecordedResiduals) residual_terms.push_back(t);
  }
}

std::vector<DualConfig> dual_configs_up_to(std::size_t L, unsigned max_total, bool boundary) {
  std::vector<DualConfig> out;
  const std::size_t parts = boundary ? L + 2 : L;
  for (unsigned k = 1; k <= max_total; ++k) {
    for_each_composition(parts, k, [&](const std::vector<std::uint32_t>& v) {
      DualConfig eta = DualConfig::empty(L);
      if (boundary) {
        eta.eta = v;
      } else {
        std::copy(v.begin(), v.end(), eta.eta.begin() + 1);
      }
      if (!eta.absorbed() || boundary) out.push_back(eta);
    });
  }
  return out;
}

// --- BMP / SIP(1) ----------------------------------------------------------

RingPtr bmp_ring(std::size_t L) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= L; ++i) names.push_back("x" + std::to_string(i));
  names.push_back("Tl");
  names.push_back("Tr");
  return make_ring(std::move(names));
}

DiffOperator<Rational> bmp_edge_generator(const RingPtr& ring, std::size_t i, std::size_t j) {
  // Sites are one-based; variable x_i has index i-1.
  const auto xi = var<Rational>(ring, i - 1);
  const auto xj = var<Rational>(ring, j - 1);
  const Op<Rational> v = mul(xi) * d<Rational>(ring, j - 1) - mul(xj) * d<Rational>(ring, i - 1);
  return v * v;
}

DiffOperator<Rational> bmp_reservoir_generator(const RingPtr& ring, std::size_t L) {
  Op<Rational> gen(ring);
  for (std::size_t i = 1; i < L; ++i) gen += bmp_edge_generator(ring, i, i + 1);
  auto reservoir = [&](std::size_t site, std::size_t temperature) {
    const auto x = var<Rational>(ring, site - 1);
    const auto dx = d<Rational>(ring, site - 1);
    return mul(var<Rational>(ring, temperature)) * dx * dx - mul(x) * dx;
  };
  gen += reservoir(1, L);
  gen += reservoir(L, L + 1);
  return gen;
}

Report check_duality_bmp_sip1(std::size_t L, const std::vector<DualConfig>& etas,
                              const BmpDualityOptions& options) {
  if (L < 2) throw Error(ErrorCode::NonPositiveSize, "BMP duality check needs L >= 2");
  Report report;
  report.check = "duality/bmp-sip1";
  report.time_scale = format_rational(options.time_scale);
  report.inputs = {{"L", L},
                   {"etas", etas_json(etas)},
                   {"drop_normalization", options.drop_normalization}};
  const RingPtr ring = bmp_ring(L);
  const Op<Rational> gen = bmp_reservoir_generator(ring, L);

  const DualityColumn<Rational> column = [&](const DualConfig& eta) -> std::optional<Poly<Rational>> {
    if (eta.eta.size() != L + 2) return std::nullopt;
    Poly<Rational> D = var<Rational>(ring, L).pow(eta[0]) * var<Rational>(ring, L + 1).pow(eta[L + 1]);
    for (std::size_t i = 1; i <= L; ++i) {
      D *= var<Rational>(ring, i - 1).pow(2 * eta[i]);
      if (!options.drop_normalization) D *= Rational(1) / double_factorial_odd(eta[i]);
    }
    return D;
  };
  const JumpOperator<Rational> dual =
      sip_jump_operator<Rational>(cst<Rational>(ring, Rational(1, 2)), true, options.time_scale);

  for (const auto& eta : etas) {
    if (eta.eta.size() != L + 2) throw Error(ErrorCode::DimensionMismatch, "eta must have L+2 entries");
    check_eta_budget(eta);
    const Poly<Rational> lhs = gen.apply(*column(eta));
    const Poly<Rational> rhs = apply_dual_generator(dual, column, eta);
    compare(report, "eta=" + format_dual_config(eta), lhs, rhs);
  }
  return report;
}

// --- BEP(m) / SIP(m) -------------------------------------------------------

RingPtr bep_ring(std::size_t L) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= L; ++i) names.push_back("z" + std::to_string(i));
  names.push_back("m");
  return make_ring(std::move(names));
}

DiffOperator<Rational> bep_generator(const RingPtr& ring, std::size_t L) {
  Op<Rational> gen(ring);
  const auto half_m = var<Rational>(ring, L) * Rational(1, 2);
  for (std::size_t i = 0; i + 1 < L; ++i) {
    const auto zi = var<Rational>(ring, i);
    const auto zj = var<Rational>(ring, i + 1);
    const Op<Rational> grad = d<Rational>(ring, i) - d<Rational>(ring, i + 1);
    gen += mul(zi * zj) * grad * grad;
    gen -= mul(half_m * (zi - zj)) * grad;
  }
  return gen;
}

Polynomial<Rational> bep_cleared_duality(const RingPtr& ring, const DualConfig& eta) {
  const std::size_t L = ring->size() - 1;
  const auto half_m = var<Rational>(ring, L) * Rational(1, 2);
  const unsigned N = static_cast<unsigned>(eta.bulk_total());
  Poly<Rational> D = cst<Rational>(ring, Rational(1));
  for (std::size_t i = 1; i <= L; ++i) {
    D *= var<Rational>(ring, i - 1).pow(eta[i]);
    Rational two_pow = 1;
    for (unsigned k = 0; k < eta[i]; ++k) two_pow *= 2;
    D *= Rational(1) / two_pow;
    for (unsigned j = eta[i]; j < N; ++j) D *= half_m + cst<Rational>(ring, Rational(j));
  }
  return D;
}

Report check_duality_bep_sip(std::size_t L, const std::vector<DualConfig>& etas) {
  if (L < 2) throw Error(ErrorCode::NonPositiveSize, "BEP duality check needs L >= 2");
  Report report;
  report.check = "duality/bep-sip";
  report.inputs = {{"L", L}, {"m", "formal"}, {"etas", etas_json(etas)}};
  const RingPtr ring = bep_ring(L);
  const Op<Rational> gen = bep_generator(ring, L);
  const DualityColumn<Rational> column = [&](const DualConfig& eta) -> std::optional<Poly<Rational>> {
    if (eta.eta.size() != L + 2 || eta[0] != 0 || eta[L + 1] != 0) return std::nullopt;
    return bep_cleared_duality(ring, eta);
  };
  const JumpOperator<Rational> dual =
      sip_jump_operator<Rational>(var<Rational>(ring, L) * Rational(1, 2), false, Rational(1));
  for (const auto& eta : etas) {
    if (eta.eta.size() != L + 2) throw Error(ErrorCode::DimensionMismatch, "eta must have L+2 entries");
    if (eta[0] != 0 || eta[L + 1] != 0) {
      throw Error(ErrorCode::InvalidArgument, "closed-chain duality takes no cemetery walkers");
    }
    check_eta_budget(eta);
    const Poly<Rational> lhs = gen.apply(*column(eta));
    const Poly<Rational> rhs = apply_dual_generator(dual, column, eta);
    compare(report, "eta=" + format_dual_config(eta), lhs, rhs);
  }
  return report;
}

// --- angles and frames -----------------------------------------------------

Angle Angle::of(ExactAngle a) { return {AngleKind::Exact, a, 0.0}; }

std::string Angle::describe() const {
  switch (kind) {
    case AngleKind::Formal: return "formal";
    case AngleKind::Exact:
      switch (exact) {
        case ExactAngle::Zero: return "0";
        case ExactAngle::PiOver6: return "pi/6";
        case ExactAngle::PiOver4: return "pi/4";
      }
      break;
    case AngleKind::Float: return fmt_double(value);
  }
  return "?";
}

Angle parse_angle(const std::string& text) {
  if (text == "formal") return Angle::formal();
  if (text == "0") return Angle::of(ExactAngle::Zero);
  if (text == "pi/6") return Angle::of(ExactAngle::PiOver6);
  if (text == "pi/4") return Angle::of(ExactAngle::PiOver4);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::BadValue, "angle must be formal, 0, pi/6, pi/4 or radians, got '" + text + "'");
  }
  return Angle::radians(v);
}

template <class C>
Polynomial<C> Frame<C>::primed(std::size_t axis) const {
  Poly<C> out(ring);
  for (std::size_t k = 0; k < 3; ++k) out += R[k][axis] * var<C>(ring, k);
  return out;
}

template struct Frame<Rational>;
template struct Frame<double>;

Frame<Rational> exact_frame(const Angle& angle) {
  if (angle.kind == AngleKind::Float) {
    throw Error(ErrorCode::InvalidArgument, "exact_frame needs a formal or exact angle");
  }
  // s^2 -> 1 - c^2, r2^2 -> 2, r3^2 -> 3.
  const RingPtr ring = make_ring({"x", "y", "z", "s", "c", "r2", "r3"},
                                 {{3, Rational(1), 4, Rational(-1)},
                                  {5, Rational(2), -1, Rational(0)},
                                  {6, Rational(3), -1, Rational(0)}});
  const auto s = var<Rational>(ring, 3);
  const auto c = var<Rational>(ring, 4);
  const auto r2 = var<Rational>(ring, 5);
  const auto r3 = var<Rational>(ring, 6);
  const auto half_r2 = r2 * Rational(1, 2);
  const auto r6_6 = r2 * r3 * Rational(1, 6);
  const auto r6_3 = r2 * r3 * Rational(1, 3);
  const auto third_r3 = r3 * Rational(1, 3);

  Frame<Rational> f;
  f.ring = ring;
  f.R[0] = {-(half_r2 * c) - r6_6 * s, half_r2 * s - r6_6 * c, third_r3};
  f.R[1] = {half_r2 * c - r6_6 * s, -(half_r2 * s) - r6_6 * c, third_r3};
  f.R[2] = {r6_3 * s, r6_3 * c, third_r3};

  if (angle.kind == AngleKind::Exact) {
    Poly<Rational> sv(ring), cv(ring);
    switch (angle.exact) {
      case ExactAngle::Zero:
        sv = cst<Rational>(ring, 0);
        cv = cst<Rational>(ring, 1);
        break;
      case ExactAngle::PiOver6:
        sv = cst<Rational>(ring, Rational(1, 2));
        cv = r3 * Rational(1, 2);
        break;
      case ExactAngle::PiOver4:
        sv = half_r2;
        cv = half_r2;
        break;
    }
    for (auto& row : f.R) {
      for (auto& entry : row) entry = entry.substitute(3, sv).substitute(4, cv);
    }
  }
  return f;
}

Frame<double> float_frame(double phi) {
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double a = std::sqrt(2.0) / 2.0;
  const double b = std::sqrt(2.0) / (2.0 * std::sqrt(3.0));
  const double e = std::sqrt(2.0) / std::sqrt(3.0);
  const double t = 1.0 / std::sqrt(3.0);
  return float_frame_from({{{-a * c - b * s, a * s - b * c, t},
                            {a * c - b * s, -a * s - b * c, t},
                            {e * s, e * c, t}}});
}

Frame<double> float_frame_from(const std::array<std::array<double, 3>, 3>& matrix) {
  Frame<double> f;
  f.ring = make_ring({"x", "y", "z"});
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) f.R[r][c] = cst<double>(f.ring, matrix[r][c]);
  }
  return f;
}

namespace {

template <class C>
Report check_frame_impl(const Frame<C>& frame, const Poly<C>& inv_sqrt3) {
  Report report;
  report.check = "frame";
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      Poly<C> dot(frame.ring);
      for (std::size_t k = 0; k < 3; ++k) dot += frame.R[k][a] * frame.R[k][b];
      compare(report, "(R^T R)[" + std::to_string(a) + "][" + std::to_string(b) + "]", dot,
              cst<C>(frame.ring, C(a == b ? 1 : 0)), kFrameTolerance);
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    compare(report, "R e_z [" + std::to_string(k) + "]", frame.R[k][2], inv_sqrt3, kFrameTolerance);
  }
  return report;
}

}  // namespace

Report check_frame(const Frame<Rational>& frame) {
  return check_frame_impl(frame, var<Rational>(frame.ring, 6) * Rational(1, 3));
}

Report check_frame(const Frame<double>& frame) {
  return check_frame_impl(frame, cst<double>(frame.ring, 1.0 / std::sqrt(3.0)));
}

template <class C>
DiffOperator<C> l3_generator(const RingPtr& ring) {
  auto field = [&](std::size_t a, std::size_t b) {
    return mul(var<C>(ring, a)) * d<C>(ring, b) - mul(var<C>(ring, b)) * d<C>(ring, a);
  };
  const Op<C> omega = field(0, 1) + field(1, 2) + field(2, 0);
  return omega * omega;
}

template <class C>
DiffOperator<C> l3_rotated_generator(const Frame<C>& frame) {
  const Poly<C> xp = frame.primed(0);
  const Poly<C> yp = frame.primed(1);
  // d/dy' = sum_k R[k][1] d/dk, d/dx' = sum_k R[k][0] d/dk.
  Op<C> v(frame.ring);
  for (std::size_t k = 0; k < 3; ++k) {
    v += mul(xp * frame.R[k][1] - yp * frame.R[k][0]) * d<C>(frame.ring, k);
  }
  return C(3) * (v * v);
}

template <class C>
Polynomial<C> rotated_duality_function(const Frame<C>& frame, unsigned n1, unsigned n2) {
  const Rational norm = double_factorial_odd(n1) * double_factorial_odd(n2);
  return frame.primed(0).pow(2 * n1) * frame.primed(1).pow(2 * n2) *
         CoeffTraits<C>::from(Rational(1) / norm);
}

template DiffOperator<Rational> l3_generator<Rational>(const RingPtr&);
template DiffOperator<double> l3_generator<double>(const RingPtr&);
template DiffOperator<Rational> l3_rotated_generator<Rational>(const Frame<Rational>&);
template DiffOperator<double> l3_rotated_generator<double>(const Frame<double>&);
template Polynomial<Rational> rotated_duality_function<Rational>(const Frame<Rational>&, unsigned, unsigned);
template Polynomial<double> rotated_duality_function<double>(const Frame<double>&, unsigned, unsigned);

std::vector<std::pair<unsigned, unsigned>> walker_pairs(unsigned max_total) {
  std::vector<std::pair<unsigned, unsigned>> out;
  for (unsigned k = 1; k <= max_total; ++k) {
    for (unsigned n1 = 0; n1 <= k; ++n1) out.emplace_back(n1, k - n1);
  }
  return out;
}

namespace {

DualConfig two_walker_config(unsigned n1, unsigned n2) { return DualConfig({0, n1, n2, 0}); }

/// Dual side of the three-site process: the printed two-walker generator
/// n1 (n2 + 1/2) [...] + n2 (n1 + 1/2) [...], i.e. closed SIP(1) on two
/// sites, times `scale`.
template <class C>
JumpOperator<C> two_walker_operator(const RingPtr& ring, const C& scale) {
  return sip_jump_operator<C>(cst<C>(ring, CoeffTraits<C>::from(Rational(1, 2))), false, scale);
}

template <class C>
void check_l3_duality_on(Report& report, const Frame<C>& frame,
                         const std::vector<std::pair<unsigned, unsigned>>& pairs,
                         const std::string& prefix) {
  const Op<C> gen = l3_generator<C>(frame.ring);
  const DualityColumn<C> column = [&](const DualConfig& eta) -> std::optional<Poly<C>> {
    if (eta.eta.size() != 4 || eta[0] != 0 || eta[3] != 0) return std::nullopt;
    return rotated_duality_function(frame, eta[1], eta[2]);
  };
  const JumpOperator<C> dual = two_walker_operator<C>(frame.ring, C(12));
  for (const auto& [n1, n2] : pairs) {
    if (n1 + n2 > kMaxDualityWalkers) {
      throw Error(ErrorCode::DegreeBudgetExceeded, "n1 + n2 exceeds the degree budget");
    }
    const DualConfig eta = two_walker_config(n1, n2);
    compare(report, prefix + "n=(" + std::to_string(n1) + "," + std::to_string(n2) + ")",
            gen.apply(*column(eta)), apply_dual_generator(dual, column, eta));
  }
}

nlohmann::json pairs_json(const std::vector<std::pair<unsigned, unsigned>>& pairs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [a, b] : pairs) out.push_back({a, b});
  return out;
}

}  // namespace

Report check_duality_l3(const Angle& angle, const std::vector<std::pair<unsigned, unsigned>>& pairs) {
  Report report;
  report.check = "duality/l3";
  report.time_scale = "12";
  report.inputs = {{"phi", angle.describe()}, {"pairs", pairs_json(pairs)}};
  if (angle.kind == AngleKind::Float) {
    const Frame<double> frame = float_frame(angle.value);
    report.merge(check_frame(frame));
    check_l3_duality_on(report, frame, pairs, "");
  } else {
    const Frame<Rational> frame = exact_frame(angle);
    report.merge(check_frame(frame));
    check_l3_duality_on(report, frame, pairs, "");
  }
  return report;
}

namespace {

std::vector<Exponents> monomials_up_to(std::size_t vars, std::size_t ring_size, unsigned max_degree) {
  std::vector<Exponents> out;
  for (unsigned k = 0; k <= max_degree; ++k) {
    for_each_composition(vars, k, [&](const std::vector<std::uint32_t>& v) {
      Exponents e(ring_size, 0);
      for (std::size_t i = 0; i < vars; ++i) e[i] = static_cast<std::uint16_t>(v[i]);
      out.push_back(e);
    });
  }
  return out;
}

template <class C>
void operator_identity_on(Report& report, const Frame<C>& frame, unsigned max_degree) {
  const Op<C> lhs = l3_generator<C>(frame.ring);
  const Op<C> rhs = l3_rotated_generator(frame);
  for (const auto& e : monomials_up_to(3, frame.ring->size(), max_degree)) {
    const Poly<C> f = Poly<C>::monomial(frame.ring, e, C(1));
    compare(report, "f=" + format_monomial(*frame.ring, e), lhs.apply(f), rhs.apply(f), -1.0,
            f.max_abs_coeff());
  }
}

template <class C>
void change_of_coordinates_on(Report& report, const Frame<C>& frame, unsigned max_total) {
  const RingPtr primed = make_ring({"x'", "y'", "z'"});
  const std::vector<Poly<C>> images{frame.primed(0), frame.primed(1), frame.primed(2)};
  const Op<Rational> v = mul(var<Rational>(primed, 0)) * d<Rational>(primed, 1) -
                         mul(var<Rational>(primed, 1)) * d<Rational>(primed, 0);
  const Op<Rational> gen_primed = Rational(3) * (v * v);
  const Op<C> gen = l3_generator<C>(frame.ring);

  // Hypothesis: L (f o phi) = (L' f) o phi.
  for (const auto& e : monomials_up_to(3, 3, 4)) {
    const Poly<Rational> f = Poly<Rational>::monomial(primed, e, Rational(1));
    const Poly<C> f_phi = compose(f, images);
    compare(report, "hypothesis f=" + format_monomial(*primed, e), gen.apply(f_phi),
            compose(gen_primed.apply(f), images), -1.0, f_phi.max_abs_coeff());
  }

  // Known duality in primed coordinates.
  const DualityColumn<Rational> primed_column =
      [&](const DualConfig& eta) -> std::optional<Poly<Rational>> {
    if (eta.eta.size() != 4 || eta[0] != 0 || eta[3] != 0) return std::nullopt;
    return var<Rational>(primed, 0).pow(2 * eta[1]) * var<Rational>(primed, 1).pow(2 * eta[2]) *
           (Rational(1) / (double_factorial_odd(eta[1]) * double_factorial_odd(eta[2])));
  };
  const JumpOperator<Rational> primed_dual = two_walker_operator<Rational>(primed, Rational(12));
  for (const auto& [n1, n2] : walker_pairs(max_total)) {
    const DualConfig eta = two_walker_config(n1, n2);
    compare(report, "primed n=(" + std::to_string(n1) + "," + std::to_string(n2) + ")",
            gen_primed.apply(*primed_column(eta)), apply_dual_generator(primed_dual, primed_column, eta));
  }

  // Conclusion: D = D' o phi is dual for L.
  const DualityColumn<C> column = [&](const DualConfig& eta) -> std::optional<Poly<C>> {
    const auto base = primed_column(eta);
    if (!base) return std::nullopt;
    return compose(*base, images);
  };
  const JumpOperator<C> dual = two_walker_operator<C>(frame.ring, C(12));
  for (const auto& [n1, n2] : walker_pairs(max_total)) {
    const DualConfig eta = two_walker_config(n1, n2);
    compare(report, "conclusion n=(" + std::to_string(n1) + "," + std::to_string(n2) + ")",
            gen.apply(*column(eta)), apply_dual_generator(dual, column, eta));
  }
}

}  // namespace

Report check_l3_operator_identity(const Angle& angle, unsigned max_degree) {
  Report report;
  report.check = "l3-operator-identity";
  report.inputs = {{"phi", angle.describe()}, {"max_degree", max_degree}};
  if (angle.kind == AngleKind::Float) {
    operator_identity_on(report, float_frame(angle.value), max_degree);
  } else {
    operator_identity_on(report, exact_frame(angle), max_degree);
  }
  return report;
}

Report check_change_of_coordinates(const Angle& angle, unsigned max_total) {
  Report report;
  report.check = "change-of-coords";
  report.time_scale = "12";
  report.inputs = {{"phi", angle.describe()}, {"max_total", max_total}};
  if (angle.kind == AngleKind::Float) {
    const Frame<double> frame = float_frame(angle.value);
    report.merge(check_frame(frame));
    change_of_coordinates_on(report, frame, max_total);
  } else {
    const Frame<Rational> frame = exact_frame(angle);
    report.merge(check_frame(frame));
    change_of_coordinates_on(report, frame, max_total);
  }
  return report;
}

Report check_change_of_coordinates(const std::array<std::array<double, 3>, 3>& matrix,
                                   unsigned max_total) {
  Report report;
  report.check = "change-of-coords";
  report.time_scale = "12";
  nlohmann::json m = nlohmann::json::array();
  for (const auto& row : matrix) m.push_back({row[0], row[1], row[2]});
  report.inputs = {{"matrix", m}, {"max_total", max_total}};
  change_of_coordinates_on(report, float_frame_from(matrix), max_total);
  return report;
}

// --- SU(1,1) ---------------------------------------------------------------

Su11Rep parse_su11_rep(const std::string& text) {
  if (text == "bmp-differential") return Su11Rep::BmpDifferential;
  if (text == "bmp-discrete") return Su11Rep::BmpDiscrete;
  if (text == "bep-differential") return Su11Rep::BepDifferential;
  if (text == "bep-discrete") return Su11Rep::BepDiscrete;
  throw Error(ErrorCode::BadValue, "unknown representation '" + text + "'");
}

std::string to_string(Su11Rep rep) {
  switch (rep) {
    case Su11Rep::BmpDifferential: return "bmp-differential";
    case Su11Rep::BmpDiscrete: return "bmp-discrete";
    case Su11Rep::BepDifferential: return "bep-differential";
    case Su11Rep::BepDiscrete: return "bep-discrete";
  }
  return "?";
}

namespace {

enum class Gen { Plus, Minus, Zero };

const char* gen_name(Gen g) {
  switch (g) {
    case Gen::Plus: return "K+";
    case Gen::Minus: return "K-";
    case Gen::Zero: return "K0";
  }
  return "?";
}

/// The three relations, as (A, B, expected generator, expected factor):
/// [A_i, B_j] = factor * delta_ij * expected_i.
struct Relation {
  Gen a, b, expected;
  int factor;
};
constexpr Relation kRelations[] = {
    {Gen::Minus, Gen::Plus, Gen::Zero, 2},
    {Gen::Zero, Gen::Plus, Gen::Plus, 1},
    {Gen::Zero, Gen::Minus, Gen::Minus, -1},
};

std::string relation_name(const Relation& r, std::size_t i, std::size_t j) {
  return std::string("[") + gen_name(r.a) + "_" + std::to_string(i + 1) + "," + gen_name(r.b) + "_" +
         std::to_string(j + 1) + "]";
}

Report su11_differential(bool bep, std::size_t n, const Rational& m, unsigned max_degree) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back((bep ? "z" : "x") + std::to_string(i));
  const RingPtr ring = make_ring(std::move(names));
  auto op = [&](Gen g, std::size_t i) {
    const auto x = var<Rational>(ring, i);
    const auto dx = d<Rational>(ring, i);
    if (bep) {
      switch (g) {
        case Gen::Plus: return mul(x);
        case Gen::Minus: return mul(x) * dx * dx + (m / 2) * dx;
        case Gen::Zero: return mul(x) * dx + mul(cst<Rational>(ring, m / 4));
      }
    }
    switch (g) {
      case Gen::Plus: return mul(x * x * Rational(1, 2));
      case Gen::Minus: return Rational(1, 2) * (dx * dx);
      case Gen::Zero: return mul(x * Rational(1, 2)) * dx + mul(cst<Rational>(ring, Rational(1, 4)));
    }
    return Op<Rational>(ring);
  };
  Report report;
  const auto monomials = monomials_up_to(n, n, max_degree);
  for (const auto& rel : kRelations) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const Op<Rational> A = op(rel.a, i);
        const Op<Rational> B = op(rel.b, j);
        const Op<Rational> commutator = A * B - B * A;
        Op<Rational> expected(ring);
        if (i == j) expected = Rational(rel.factor) * op(rel.expected, i);
        for (const auto& e : monomials) {
          const auto f = Poly<Rational>::monomial(ring, e, Rational(1));
          compare(report, relation_name(rel, i, j) + " on " + format_monomial(*ring, e),
                  commutator.apply(f), expected.apply(f));
        }
      }
    }
  }
  return report;
}

using Ket = std::map<std::vector<std::uint32_t>, Rational>;

void ket_add(Ket& k, const std::vector<std::uint32_t>& basis, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = k.emplace(basis, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) k.erase(it);
  }
}

std::string format_ket(const std::vector<std::uint32_t>& basis) {
  std::string s = "|";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(basis[i]);
  }
  return s + ">";
}

Report su11_discrete(const Rational& m, std::size_t n, unsigned max_degree) {
  const Rational half_m = m / 2;
  const Rational quarter_m = m / 4;
  auto act = [&](Gen g, std::size_t site, const Ket& in) {
    Ket out;
    for (const auto& [basis, c] : in) {
      std::vector<std::uint32_t> b = basis;
      const Rational eta = basis[site];
      switch (g) {
        case Gen::Plus:
          b[site] += 1;
          ket_add(out, b, c * (eta + half_m));
          break;
        case Gen::Minus:
          if (basis[site] == 0) break;
          b[site] -= 1;
          ket_add(out, b, c * eta);
          break;
        case Gen::Zero:
          ket_add(out, b, c * (eta + quarter_m));
          break;
      }
    }
    return out;
  };
  Report report;
  for (const auto& rel : kRelations) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (unsigned k = 0; k <= max_degree; ++k) {
          for_each_composition(n, k, [&](const std::vector<std::uint32_t>& basis) {
            const Ket start{{basis, Rational(1)}};
            Ket residual = act(rel.a, i, act(rel.b, j, start));
            for (const auto& [b, c] : act(rel.b, j, act(rel.a, i, start))) ket_add(residual, b, -c);
            if (i == j) {
              for (const auto& [b, c] : act(rel.expected, i, start)) {
                ket_add(residual, b, -Rational(rel.factor) * c);
              }
            }
            ++report.cases;
            for (const auto& [b, c] : residual) {
              record(report, relation_name(rel, i, j) + " on " + format_ket(basis), format_ket(b),
                     format_rational(c));
            }
          });
        }
      }
    }
  }
  return report;
}

}  // namespace

Report check_su11(Su11Rep rep, std::size_t site_count, const Rational& m, unsigned max_degree) {
  if (site_count < 1) throw Error(ErrorCode::NonPositiveSize, "site_count must be >= 1");
  if (max_degree > 10) throw Error(ErrorCode::DegreeBudgetExceeded, "max_degree must be <= 10");
  const bool bep = rep == Su11Rep::BepDifferential || rep == Su11Rep::BepDiscrete;
  if (bep && m <= 0) throw Error(ErrorCode::NonPositiveM, "m must be > 0");
  Report report;
  switch (rep) {
    case Su11Rep::BmpDifferential: report = su11_differential(false, site_count, 1, max_degree); break;
    case Su11Rep::BepDifferential: report = su11_differential(true, site_count, m, max_degree); break;
    // The one-component velocity representation pairs with m = 1.
    case Su11Rep::BmpDiscrete: report = su11_discrete(1, site_count, max_degree); break;
    case Su11Rep::BepDiscrete: report = su11_discrete(m, site_count, max_degree); break;
  }
  report.check = "su11/" + to_string(rep);
  report.inputs = {{"sites", site_count}, {"max_degree", max_degree}};
  if (bep) report.inputs["m"] = format_rational(m);
  return report;
}

Report check_intertwiner(IntertwinerFamily family, const Rational& m, unsigned degree_max,
                         IntertwinerForm form) {
  if (degree_max > 10) throw Error(ErrorCode::DegreeBudgetExceeded, "degree_max must be <= 10");
  const bool bep = family == IntertwinerFamily::Bep;
  if (bep && m <= 0) throw Error(ErrorCode::NonPositiveM, "m must be > 0");
  const bool normalized = bep && form == IntertwinerForm::DualityNormalized;
  const RingPtr ring = make_ring({bep ? "z" : "x"});
  const auto x = var<Rational>(ring, 0);
  const auto dx = d<Rational>(ring, 0);
  const Rational half_m = bep ? m / 2 : Rational(1, 2);
  const Rational quarter_m = bep ? m / 4 : Rational(1, 4);

  auto dfun = [&](unsigned eta) {
    if (!bep) return x.pow(2 * eta) * (Rational(1) / double_factorial_odd(eta));
    Rational norm = rising_factorial(half_m, eta);
    if (normalized) {
      for (unsigned k = 0; k < eta; ++k) norm *= 2;
    }
    return x.pow(eta) * (Rational(1) / norm);
  };
  auto continuous = [&](Gen g) {
    if (bep) {
      switch (g) {
        case Gen::Plus: return mul(x);
        case Gen::Minus: return mul(x) * dx * dx + half_m * dx;
        case Gen::Zero: return mul(x) * dx + mul(cst<Rational>(ring, quarter_m));
      }
    }
    switch (g) {
      case Gen::Plus: return mul(x * x * Rational(1, 2));
      case Gen::Minus: return Rational(1, 2) * (dx * dx);
      case Gen::Zero: return mul(x * Rational(1, 2)) * dx + mul(cst<Rational>(ring, quarter_m));
    }
    return Op<Rational>(ring);
  };
  // Discrete action on functions of eta (transpose of the ket action).
  const Rational plus_scale = normalized ? Rational(2) : Rational(1);
  const Rational minus_scale = normalized ? Rational(1, 2) : Rational(1);
  auto discrete = [&](Gen g, unsigned eta) {
    switch (g) {
      case Gen::Plus: return dfun(eta + 1) * (plus_scale * (Rational(eta) + half_m));
      case Gen::Minus:
        if (eta == 0) return Poly<Rational>(ring);
        return dfun(eta - 1) * (minus_scale * Rational(eta));
      case Gen::Zero: return dfun(eta) * (Rational(eta) + quarter_m);
    }
    return Poly<Rational>(ring);
  };

  Report report;
  report.check = std::string("intertwiner/") + (bep ? "bep" : "bmp");
  report.inputs = {{"degree_max", degree_max},
                   {"form", normalized ? "duality-normalized" : "canonical"}};
  if (bep) report.inputs["m"] = format_rational(m);
  for (Gen g : {Gen::Plus, Gen::Minus, Gen::Zero}) {
    const Op<Rational> op = continuous(g);
    for (unsigned eta = 0; eta <= degree_max; ++eta) {
      compare(report, std::string(gen_name(g)) + " eta=" + std::to_string(eta), op.apply(dfun(eta)),
              discrete(g, eta));
    }
  }
  return report;
}

}  // namespace heatdual
