#include "heatdual/absorption.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "heatdual/jump.hpp"

namespace heatdual {

DualStateSpace::DualStateSpace(std::size_t L, unsigned k) : L_(L), k_(k) {
  for_each_composition(L + 2, k, [&](const std::vector<std::uint32_t>& v) {
    index_.emplace(DualConfig(v), states_.size());
    states_.emplace_back(v);
  });
}

std::size_t DualStateSpace::index(const DualConfig& eta) const {
  auto it = index_.find(eta);
  if (it == index_.end()) {
    throw Error(ErrorCode::InvalidArgument, "configuration " + format_dual_config(eta) +
                                                " is not in the state space");
  }
  return it->second;
}

namespace {

struct Prepared {
  ChainSpec dual;
  unsigned k = 0;
};

Prepared prepare(const DualConfig& eta0, const ChainSpec& spec, const AbsorptionOptions& options) {
  Prepared p;
  p.dual = absorbing_dual_of(spec);
  if (eta0.eta.size() != p.dual.L + 2) {
    throw Error(ErrorCode::DimensionMismatch, "eta must have L+2 entries");
  }
  const std::uint64_t total = eta0.total();
  if (total > options.k_max) {
    throw Error(ErrorCode::WalkerBudgetExceeded,
                std::to_string(total) + " walkers exceed k_max=" + std::to_string(options.k_max));
  }
  p.k = static_cast<unsigned>(total);
  return p;
}

}  // namespace

AbsorptionDistribution absorption_distribution(const DualConfig& eta0, const ChainSpec& spec,
                                               const AbsorptionOptions& options) {
  if (options.backend == SolverBackend::Rational) {
    AbsorptionDistribution out;
    const ExactAbsorption exact = absorption_distribution_exact(eta0, spec, options);
    for (const auto& [ab, q] : exact) {
      out.k = ab.first + ab.second;
      out.p[ab] = q.get_d();
    }
    return out;
  }

  const Prepared prep = prepare(eta0, spec, options);
  const std::size_t L = prep.dual.L;
  const unsigned k = prep.k;
  AbsorptionDistribution out;
  out.k = k;
  if (eta0.absorbed()) {
    for (unsigned a = 0; a <= k; ++a) out.p[{a, k - a}] = (a == eta0[0]) ? 1.0 : 0.0;
    return out;
  }

  const DualStateSpace space(L, k);
  const std::size_t n = space.size();
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), k + 1);
  for (std::size_t s = 0; s < n; ++s) {
    const DualConfig& eta = space.state(s);
    const auto row = static_cast<Eigen::Index>(s);
    if (eta.absorbed()) {
      triplets.emplace_back(row, row, 1.0);
      rhs(row, eta[0]) = 1.0;
      continue;
    }
    const RateTable table = sip_rates(eta, prep.dual);
    triplets.emplace_back(row, row, table.total_rate);
    for (std::size_t t = 0; t < table.jumps.size(); ++t) {
      const auto col = static_cast<Eigen::Index>(space.index(apply_jump(eta, table.jumps[t])));
      triplets.emplace_back(row, col, -table.rates[t]);
    }
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "absorption system could not be factorized");
  }
  const Eigen::MatrixXd h = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !h.allFinite()) {
    throw Error(ErrorCode::SingularSystem, "absorption solve failed");
  }
  const double residual = (A * h - rhs).cwiseAbs().maxCoeff();
  if (residual > 1e-12 * std::max(1.0, A.coeffs().cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::SingularSystem, "absorption solve residual too large");
  }

  const auto start = static_cast<Eigen::Index>(space.index(eta0));
  for (unsigned a = 0; a <= k; ++a) out.p[{a, k - a}] = h(start, a);
  return out;
}

ExactAbsorption absorption_distribution_exact(const DualConfig& eta0, const ChainSpec& spec,
                                              const AbsorptionOptions& options) {
  const Prepared prep = prepare(eta0, spec, options);
  const std::size_t L = prep.dual.L;
  const unsigned k = prep.k;
  const Rational half_m = prep.dual.m / 2;
  ExactAbsorption out;
  if (eta0.absorbed()) {
    for (unsigned a = 0; a <= k; ++a) out[{a, k - a}] = (a == eta0[0]) ? 1 : 0;
    return out;
  }

  const DualStateSpace space(L, k);
  const std::size_t n = space.size();
  if (n > options.rational_state_limit) {
    throw Error(ErrorCode::WalkerBudgetExceeded,
                std::to_string(n) + " states exceed the exact solver limit of " +
                    std::to_string(options.rational_state_limit));
  }
  const std::size_t width = n + k + 1;
  std::vector<std::vector<Rational>> M(n, std::vector<Rational>(width));
  for (std::size_t s = 0; s < n; ++s) {
    const DualConfig& eta = space.state(s);
    if (eta.absorbed()) {
      M[s][s] = 1;
      M[s][n + eta[0]] = 1;
      continue;
    }
    for (const auto& j : sip_jumps(eta, true)) {
      const Rational r = sip_rate(j, half_m);
      M[s][s] += r;
      M[s][space.index(apply_jump(eta, j))] -= r;
    }
  }
  // Gauss-Jordan with the first nonzero pivot; exact, so no pivoting strategy.
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && M[pivot][c] == 0) ++pivot;
    if (pivot == n) throw Error(ErrorCode::SingularSystem, "exact absorption system is singular");
    std::swap(M[c], M[pivot]);
    const Rational inv = 1 / M[c][c];
    for (std::size_t col = c; col < width; ++col) M[c][col] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || M[r][c] == 0) continue;
      const Rational f = M[r][c];
      for (std::size_t col = c; col < width; ++col) {
        if (M[c][col] != 0) M[r][col] -= f * M[c][col];
      }
    }
  }
  const std::size_t start = space.index(eta0);
  for (unsigned a = 0; a <= k; ++a) out[{a, k - a}] = M[start][n + a];
  return out;
}

double stationary_moment(const DualConfig& eta0, const ChainSpec& spec,
                         const AbsorptionOptions& options) {
  const AbsorptionDistribution dist = absorption_distribution(eta0, spec, options);
  double sum = 0.0;
  for (const auto& [ab, p] : dist.p) {
    sum += std::pow(spec.T_left, ab.first) * std::pow(spec.T_right, ab.second) * p;
  }
  return sum;
}

std::vector<double> temperature_profile(const ChainSpec& spec, const AbsorptionOptions& options) {
  std::vector<double> profile;
  profile.reserve(spec.L);
  for (std::size_t i = 1; i <= spec.L; ++i) {
    DualConfig eta = DualConfig::empty(spec.L);
    eta[i] = 1;
    profile.push_back(stationary_moment(eta, spec, options));
  }
  return profile;
}

double energy_covariance(std::size_t i, std::size_t j, const ChainSpec& spec,
                         const AbsorptionOptions& options) {
  if (!(1 <= i && i < j && j <= spec.L)) {
    throw Error(ErrorCode::SiteOrderViolation,
                "need 1 <= i < j <= L, got i=" + std::to_string(i) + ", j=" + std::to_string(j));
  }
  DualConfig ei = DualConfig::empty(spec.L);
  ei[i] = 1;
  DualConfig ej = DualConfig::empty(spec.L);
  ej[j] = 1;
  DualConfig both = DualConfig::empty(spec.L);
  both[i] = 1;
  both[j] = 1;
  return stationary_moment(both, spec, options) -
         stationary_moment(ei, spec, options) * stationary_moment(ej, spec, options);
}

std::vector<CovarianceEntry> covariance_matrix(const ChainSpec& spec,
                                               const AbsorptionOptions& options) {
  const std::vector<double> profile = temperature_profile(spec, options);
  std::vector<CovarianceEntry> out;
  for (std::size_t i = 1; i <= spec.L; ++i) {
    for (std::size_t j = i + 1; j <= spec.L; ++j) {
      DualConfig both = DualConfig::empty(spec.L);
      both[i] = 1;
      both[j] = 1;
      out.push_back({i, j, stationary_moment(both, spec, options) - profile[i - 1] * profile[j - 1]});
    }
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_profile_csv(std::ostream& out, const ChainSpec& spec, const std::vector<double>& profile) {
  out << "# spec: " << to_json(spec).dump() << '\n' << "i,value\n";
  for (std::size_t i = 0; i < profile.size(); ++i) out << i + 1 << ',' << fmt(profile[i]) << '\n';
}

void write_covariance_csv(std::ostream& out, const ChainSpec& spec,
                          const std::vector<CovarianceEntry>& entries) {
  out << "# spec: " << to_json(spec).dump() << '\n' << "i,j,value\n";
  for (const auto& e : entries) out << e.i << ',' << e.j << ',' << fmt(e.value) << '\n';
}

}  // namespace heatdual
