#include "heatdual/model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace heatdual {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::BMP: return "BMP";
    case Family::BEP: return "BEP";
    case Family::SIP: return "SIP";
    case Family::KMP: return "KMP";
    case Family::L3: return "L3";
  }
  return "?";
}

std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::Reservoirs: return "reservoirs";
    case Boundary::Absorbing: return "absorbing";
    case Boundary::Closed: return "closed";
  }
  return "?";
}

Family parse_family(std::string_view text) {
  for (Family f : {Family::BMP, Family::BEP, Family::SIP, Family::KMP, Family::L3}) {
    if (text == to_string(f)) return f;
  }
  throw Error(ErrorCode::BadValue, "unknown family '" + std::string(text) +
                                       "' (expected BMP, BEP, SIP, KMP or L3)");
}

Boundary parse_boundary(std::string_view text) {
  for (Boundary b : {Boundary::Reservoirs, Boundary::Absorbing, Boundary::Closed}) {
    if (text == to_string(b)) return b;
  }
  throw Error(ErrorCode::BadValue, "unknown boundary '" + std::string(text) +
                                       "' (expected reservoirs, absorbing or closed)");
}

namespace {

const std::set<std::string> kSpecKeys = {"family", "L", "m", "T_left", "T_right", "boundary"};

Rational json_rational(const nlohmann::json& v, const char* key) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::BadValue, std::string(key) + " must be finite");
    // Round-trip through the shortest decimal so 0.5 and 0.1 stay exact.
    std::ostringstream os;
    os.precision(17);
    os << d;
    return parse_rational(os.str());
  }
  if (v.is_string()) return parse_rational(v.get<std::string>());
  throw Error(ErrorCode::BadValue, std::string(key) + " must be a number or a \"p/q\" string");
}

double json_real(const nlohmann::json& v, const char* key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_rational(v.get<std::string>()).get_d();
  throw Error(ErrorCode::BadValue, std::string(key) + " must be a number");
}

}  // namespace

ChainSpec validate_spec(const nlohmann::json& raw) {
  if (!raw.is_object()) throw Error(ErrorCode::BadValue, "spec must be a JSON object");
  for (const auto& [key, value] : raw.items()) {
    if (!kSpecKeys.count(key)) throw Error(ErrorCode::UnknownKey, "unknown spec key '" + key + "'");
  }
  if (!raw.contains("family")) throw Error(ErrorCode::MissingKey, "spec needs 'family'");
  if (!raw.contains("L")) throw Error(ErrorCode::MissingKey, "spec needs 'L'");

  ChainSpec spec;
  const auto& fam = raw.at("family");
  if (!fam.is_string()) throw Error(ErrorCode::BadValue, "family must be a string");
  spec.family = parse_family(fam.get<std::string>());

  const auto& size = raw.at("L");
  if (!size.is_number_integer()) throw Error(ErrorCode::BadValue, "L must be an integer");
  long L = size.get<long>();
  if (L < 1) throw Error(ErrorCode::NonPositiveSize, "L must be >= 1, got " + std::to_string(L));
  spec.L = static_cast<std::size_t>(L);

  if (raw.contains("m")) spec.m = json_rational(raw.at("m"), "m");
  if (spec.m <= 0) throw Error(ErrorCode::NonPositiveM, "m must be > 0, got " + format_rational(spec.m));

  if (raw.contains("T_left")) spec.T_left = json_real(raw.at("T_left"), "T_left");
  if (raw.contains("T_right")) spec.T_right = json_real(raw.at("T_right"), "T_right");
  if (!(spec.T_left > 0) || !std::isfinite(spec.T_left)) {
    throw Error(ErrorCode::NonPositiveTemperature, "T_left must be a positive finite number");
  }
  if (!(spec.T_right > 0) || !std::isfinite(spec.T_right)) {
    throw Error(ErrorCode::NonPositiveTemperature, "T_right must be a positive finite number");
  }

  if (raw.contains("boundary")) {
    const auto& b = raw.at("boundary");
    if (!b.is_string()) throw Error(ErrorCode::BadValue, "boundary must be a string");
    spec.boundary = parse_boundary(b.get<std::string>());
  }

  if (spec.family == Family::L3) {
    if (spec.L != 3) {
      throw Error(ErrorCode::L3SizeMismatch, "family L3 requires L=3, got " + std::to_string(spec.L));
    }
    if (spec.boundary != Boundary::Closed) {
      throw Error(ErrorCode::BadValue, "family L3 requires boundary=closed");
    }
  }
  if (spec.boundary == Boundary::Reservoirs && spec.family != Family::BMP) {
    throw Error(ErrorCode::BadValue, "reservoirs are defined for BMP only");
  }
  if (spec.boundary == Boundary::Absorbing && spec.family != Family::SIP) {
    throw Error(ErrorCode::BadValue, "absorbing boundaries are defined for SIP only");
  }
  return spec;
}

nlohmann::json to_json(const ChainSpec& spec) {
  nlohmann::json j;
  j["family"] = std::string(to_string(spec.family));
  j["L"] = spec.L;
  if (spec.m.get_den() == 1) {
    j["m"] = spec.m.get_num().get_si();
  } else {
    j["m"] = format_rational(spec.m);
  }
  j["T_left"] = spec.T_left;
  j["T_right"] = spec.T_right;
  j["boundary"] = std::string(to_string(spec.boundary));
  return j;
}

ChainSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open spec file '" + path + "'");
  nlohmann::json raw;
  try {
    in >> raw;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadValue, "malformed JSON in '" + path + "': " + e.what());
  }
  return validate_spec(raw);
}

ChainSpec absorbing_dual_of(const ChainSpec& spec) {
  if (spec.family == Family::SIP && spec.boundary == Boundary::Absorbing) return spec;
  if (spec.family == Family::BMP && spec.boundary == Boundary::Reservoirs) {
    ChainSpec dual = spec;
    dual.family = Family::SIP;
    dual.m = 1;
    dual.boundary = Boundary::Absorbing;
    return dual;
  }
  throw Error(ErrorCode::WrongFamily,
              "need an absorbing SIP spec or a BMP spec with reservoirs, got " +
                  std::string(to_string(spec.family)) + "/" + std::string(to_string(spec.boundary)));
}

DualConfig DualConfig::walkers_at(std::size_t L, std::initializer_list<std::size_t> sites) {
  DualConfig c = empty(L);
  for (std::size_t s : sites) {
    if (s < 1 || s > L) throw Error(ErrorCode::DimensionMismatch, "bulk site out of range");
    ++c.eta[s];
  }
  return c;
}

std::uint64_t DualConfig::total() const {
  return std::accumulate(eta.begin(), eta.end(), std::uint64_t{0});
}

std::uint64_t DualConfig::bulk_total() const {
  if (eta.size() < 2) return 0;
  return std::accumulate(eta.begin() + 1, eta.end() - 1, std::uint64_t{0});
}

DualConfig parse_dual_config(std::string_view text) {
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::BadValue,
                 "bad eta '" + std::string(text) + "': " + why +
                     " (expected \"eta0;eta1,...,etaL;etaL+1\", e.g. \"0;1,0,2;0\")");
  };
  auto first = text.find(';');
  auto last = text.rfind(';');
  if (first == std::string_view::npos || first == last) throw bad("need exactly two ';'");
  if (text.substr(first + 1, last - first - 1).find(';') != std::string_view::npos) {
    throw bad("need exactly two ';'");
  }
  auto read = [&](std::string_view s) -> std::uint32_t {
    if (s.empty()) throw bad("empty entry");
    std::uint64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw bad("entries must be non-negative integers");
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
      if (v > 1'000'000) throw bad("entry too large");
    }
    return static_cast<std::uint32_t>(v);
  };
  DualConfig c;
  c.eta.push_back(read(text.substr(0, first)));
  std::string_view bulk = text.substr(first + 1, last - first - 1);
  std::size_t pos = 0;
  while (true) {
    auto comma = bulk.find(',', pos);
    c.eta.push_back(read(bulk.substr(pos, comma == std::string_view::npos ? bulk.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  c.eta.push_back(read(text.substr(last + 1)));
  return c;
}

std::string format_dual_config(const DualConfig& eta) {
  std::ostringstream os;
  const auto n = eta.eta.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 1 || i + 1 == n) os << ';';
    else if (i > 1) os << ',';
    os << eta.eta[i];
  }
  return os.str();
}

double AbsorptionDistribution::at(unsigned a, unsigned b) const {
  auto it = p.find({a, b});
  return it == p.end() ? 0.0 : it->second;
}

double AbsorptionDistribution::total_mass() const {
  double s = 0.0;
  for (const auto& [ab, v] : p) s += v;
  return s;
}

double bmp_duality_weight(const VelocityConfig& x, const DualConfig& eta, const ChainSpec& spec) {
  if (spec.family != Family::BMP) {
    throw Error(ErrorCode::WrongFamily, "bmp_duality_weight needs a BMP spec");
  }
  if (x.x.size() != spec.L || eta.eta.size() != spec.L + 2) {
    throw Error(ErrorCode::DimensionMismatch, "x must have L entries and eta L+2");
  }
  double w = std::pow(spec.T_left, static_cast<double>(eta[0])) *
             std::pow(spec.T_right, static_cast<double>(eta[spec.L + 1]));
  for (std::size_t i = 1; i <= spec.L; ++i) {
    const double sq = x.x[i - 1] * x.x[i - 1];
    for (std::uint32_t j = 0; j < eta[i]; ++j) w *= sq / static_cast<double>(2 * j + 1);
  }
  return w;
}

double bep_duality_weight(const EnergyConfig& z, const DualConfig& eta, const Rational& m) {
  if (m <= 0) throw Error(ErrorCode::NonPositiveM, "m must be > 0");
  if (eta.eta.size() != z.z.size() + 2) {
    throw Error(ErrorCode::DimensionMismatch, "eta must have L+2 entries for L energies");
  }
  const double md = m.get_d();
  double w = 1.0;
  for (std::size_t i = 1; i <= z.z.size(); ++i) {
    // z^n Gamma(m/2) / (2^n Gamma(m/2+n)) = prod_{j<n} z / (m + 2j)
    for (std::uint32_t j = 0; j < eta[i]; ++j) w *= z.z[i - 1] / (md + 2.0 * j);
  }
  return w;
}

std::vector<SipJump> sip_jumps(const DualConfig& eta, bool absorbing) {
  std::vector<SipJump> out;
  const std::size_t L = eta.bulk_size();
  for (std::size_t i = 1; i + 1 <= L; ++i) {
    if (eta[i] > 0) out.push_back({i, i + 1, eta[i], eta[i + 1], false});
    if (eta[i + 1] > 0) out.push_back({i + 1, i, eta[i + 1], eta[i], false});
  }
  if (absorbing && L >= 1) {
    if (eta[1] > 0) out.push_back({1, 0, eta[1], 0, true});
    if (eta[L] > 0) out.push_back({L, L + 1, eta[L], 0, true});
  }
  return out;
}

DualConfig apply_jump(const DualConfig& eta, const SipJump& j) {
  DualConfig next = eta;
  --next.eta[j.from];
  ++next.eta[j.to];
  return next;
}

namespace {

void compose(std::vector<std::uint32_t>& v, std::size_t pos, unsigned left,
             const std::function<void(const std::vector<std::uint32_t>&)>& visit) {
  if (pos + 1 == v.size()) {
    v[pos] = left;
    visit(v);
    return;
  }
  for (unsigned n = 0; n <= left; ++n) {
    v[pos] = n;
    compose(v, pos + 1, left - n, visit);
  }
}

}  // namespace

void for_each_composition(std::size_t parts, unsigned k,
                          const std::function<void(const std::vector<std::uint32_t>&)>& visit) {
  if (parts == 0) return;
  std::vector<std::uint32_t> v(parts, 0);
  compose(v, 0, k, visit);
}

}  // namespace heatdual
