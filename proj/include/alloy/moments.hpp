#pragma once

// Monte Carlo estimation of fractional moments E{|G(z;x,y)|^t} over the
// disorder. Sample i always uses the engine derived from (seed, i) and
// per-pair sums run in sample order, so results do not depend on the number
// of workers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "alloy/error.hpp"
#include "alloy/model.hpp"
#include "alloy/parallel.hpp"
#include "alloy/resolvent.hpp"
#include "alloy/rng.hpp"
#include "alloy/stats.hpp"

namespace alloy {

struct MomentConfig {
  double s = 0.3;
  std::optional<double> exponent;  // overrides s / (2|Theta|)
  cplx z{0.0, 0.01};
  double lambda = 1.0;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool theorem_mode = false;  // requires s < 1/3

  double t(std::size_t theta_size) const {
    return exponent ? *exponent : s / (2.0 * static_cast<double>(theta_size));
  }

  void validate() const {
    if (!(s > 0 && s < 1)) throw ConfigError("s must lie in (0, 1)");
    if (theorem_mode && !(s < 1.0 / 3.0)) throw ConfigError("theorem mode needs s in (0, 1/3)");
    if (exponent && !(*exponent > 0 && *exponent < 1)) throw ConfigError("moment exponent must lie in (0, 1)");
    if (samples < 100) throw ConfigError("at least 100 disorder samples are required");
    if (!(lambda >= 0)) throw ConfigError("lambda must be non-negative");
  }
};

struct MomentEstimate {
  Site x, y;
  double t = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t resonant = 0;  // samples with rcond below kSingularRcond
  double mean_regular = 0.0;  // resonant samples excluded
  double std_error_regular = 0.0;
};

namespace detail {

struct SampleValues {
  std::vector<double> values;
  bool resonant = false;
};

}  // namespace detail

/// E{|G_Gamma(z;x,y)|^t} for every pair, all pairs sharing the same disorder
/// samples. Sites outside Gamma give G = 0.
inline std::vector<MomentEstimate> fractional_moments(const SiteSet& gamma, const std::vector<std::pair<Site, Site>>& pairs,
                                                      const MomentConfig& cfg, const SingleSitePotential& u,
                                                      const DisorderDistribution& rho) {
  cfg.validate();
  if (gamma.empty()) throw GeometryError("fractional_moments: empty domain");
  const double t = cfg.t(u.size());
  const AlloyModel model(gamma, u, cfg.lambda);

  // One column per distinct second site; pairs leaving Gamma stay zero.
  std::vector<std::optional<std::pair<Eigen::Index, Eigen::Index>>> where(pairs.size());
  std::vector<Eigen::Index> columns;
  {
    std::map<Eigen::Index, int> seen;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      auto i = gamma.index_of(pairs[p].first);
      auto j = gamma.index_of(pairs[p].second);
      if (!i || !j) continue;
      where[p] = {static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j)};
      if (seen.emplace(static_cast<Eigen::Index>(*j), 0).second) columns.push_back(static_cast<Eigen::Index>(*j));
    }
  }
  const auto n = static_cast<Eigen::Index>(gamma.size());
  ComplexMatrix rhs = ComplexMatrix::Zero(n, static_cast<Eigen::Index>(columns.size()));
  std::map<Eigen::Index, Eigen::Index> column_of;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    rhs(columns[c], static_cast<Eigen::Index>(c)) = 1.0;
    column_of[columns[c]] = static_cast<Eigen::Index>(c);
  }

  auto one = [&](std::size_t i) {
    Engine eng = sample_engine(cfg.seed, i);
    const auto couplings = model.draw_couplings(rho, eng);
    ComplexMatrix M = model.hamiltonian(couplings).cast<cplx>();
    M.diagonal().array() -= cfg.z;
    detail::SampleValues out;
    out.values.assign(pairs.size(), 0.0);
    if (columns.empty()) return out;
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    out.resonant = !(lu.rcond() >= kSingularRcond);
    const ComplexMatrix G = lu.solve(rhs);
    for (std::size_t p = 0; p < pairs.size(); ++p)
      if (where[p]) out.values[p] = std::pow(std::abs(G(where[p]->first, column_of.at(where[p]->second))), t);
    return out;
  };
  const auto results = parallel_map(cfg.samples, std::max(1u, cfg.workers), one);

  std::size_t resonant = 0;
  for (const auto& r : results) resonant += r.resonant ? 1 : 0;
  if (resonant == results.size())
    throw SingularError("fractional_moments: every sample is singular at z", 0.0);

  std::vector<MomentEstimate> out(pairs.size());
  std::vector<double> column(results.size()), regular;
  regular.reserve(results.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    regular.clear();
    for (std::size_t i = 0; i < results.size(); ++i) {
      column[i] = results[i].values[p];
      if (!results[i].resonant) regular.push_back(column[i]);
    }
    const auto all = stats::summarize(column);
    const auto reg = stats::summarize(regular);
    auto& e = out[p];
    e.x = pairs[p].first;
    e.y = pairs[p].second;
    e.t = t;
    e.mean = all.mean;
    e.std_error = all.std_error;
    e.samples = results.size();
    e.resonant = resonant;
    e.mean_regular = reg.mean;
    e.std_error_regular = reg.std_error;
  }
  return out;
}

inline MomentEstimate fractional_moment(const SiteSet& gamma, const Site& x, const Site& y, const MomentConfig& cfg,
                                        const SingleSitePotential& u, const DisorderDistribution& rho) {
  return fractional_moments(gamma, {{x, y}}, cfg, u, rho).front();
}

}  // namespace alloy
