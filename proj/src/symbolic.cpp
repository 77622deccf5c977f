#include "heatdual/symbolic.hpp"

#include <cstdio>

namespace heatdual {

std::size_t Ring::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorCode::VariableMismatch, "no variable named " + name);
  return static_cast<std::size_t>(it - names.begin());
}

RingPtr make_ring(std::vector<std::string> names, std::vector<SquareRule> rules) {
  for (const auto& r : rules) {
    if (r.var >= names.size() || (r.other >= 0 && static_cast<std::size_t>(r.other) >= names.size())) {
      throw Error(ErrorCode::VariableMismatch, "square rule refers to an unknown variable");
    }
  }
  return std::make_shared<const Ring>(Ring{std::move(names), std::move(rules)});
}

void require_same_ring(const RingPtr& a, const RingPtr& b) {
  if (!a || !b) throw Error(ErrorCode::VariableMismatch, "polynomial without variables");
  if (a == b) return;
  if (a->names != b->names) {
    std::string an, bn;
    for (const auto& n : a->names) an += n + " ";
    for (const auto& n : b->names) bn += n + " ";
    throw Error(ErrorCode::VariableMismatch, "variables [" + an + "] vs [" + bn + "]");
  }
}

std::string format_monomial(const Ring& ring, const Exponents& e) {
  std::string s;
  for (std::size_t v = 0; v < e.size(); ++v) {
    if (!e[v]) continue;
    if (!s.empty()) s += "*";
    s += ring.names[v];
    if (e[v] > 1) s += "^" + std::to_string(e[v]);
  }
  return s.empty() ? "1" : s;
}

std::string CoeffTraits<double>::format(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  return buf;
}

}  // namespace heatdual
