#pragma once

// Fractional moment experiments: a-priori bounds in the coupling strength,
// exponential decay profiles, and the finite-volume criterion.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "alloy/error.hpp"
#include "alloy/geometry.hpp"
#include "alloy/model.hpp"
#include "alloy/moments.hpp"
#include "alloy/stats.hpp"

namespace alloy {

/// Xi_s(lambda) = max(lambda^{-s/(2|Theta|)}, lambda^{-2s}).
inline double xi_s(double lambda, double s, std::size_t theta_size) {
  if (!(lambda > 0)) throw ConfigError("xi_s: lambda must be positive");
  if (!(s > 0 && s < 1)) throw ConfigError("xi_s: s must lie in (0, 1)");
  if (theta_size == 0) throw ConfigError("xi_s: empty support");
  const double n = static_cast<double>(theta_size);
  return std::max(std::pow(lambda, -s / (2 * n)), std::pow(lambda, -2 * s));
}

/// Exponent of the branch of Xi_s active at lambda.
inline double xi_exponent(double lambda, double s, std::size_t theta_size) {
  const double n = static_cast<double>(theta_size);
  return lambda >= 1 ? -s / (2 * n) : -2 * s;
}

/// lambda^{-s/|Theta|}, checked against the spelling lambda^{-2s/(2|Theta|)}.
inline double coupling_prefactor(double lambda, double s, std::size_t theta_size) {
  const double n = static_cast<double>(theta_size);
  const double a = std::pow(lambda, -s / n);
  const double b = std::pow(lambda, -2 * s / (2 * n));
  if (std::abs(a - b) > 1e-14 * std::abs(a)) throw std::logic_error("coupling prefactor spellings disagree");
  return a;
}

// ---------------------------------------------------------------------------
// A-priori bound

/// A translate b with x in Theta_b and Theta_b intersect Gamma inside the
/// interior boundary of Theta_b.
inline std::optional<Site> boundary_anchor(const Ambient& gamma, const SiteSet& theta, const Site& x) {
  const SiteSet rim = interior_boundary(theta);
  for (const auto& t : theta) {
    const Site b = x - t;
    bool ok = true;
    for (const auto& k : theta)
      if (gamma.contains(b + k) && !rim.contains(k)) {
        ok = false;
        break;
      }
    if (ok) return b;
  }
  return std::nullopt;
}

struct AprioriRow {
  double lambda = 0.0;
  double xi = 0.0;
  std::vector<MomentEstimate> estimates;  // one per pair
};

struct AprioriResult {
  bool part_b = false;
  double exponent = 0.0;   // moment exponent t
  double predicted = 0.0;  // predicted large-lambda slope
  std::vector<AprioriRow> rows;
  std::vector<stats::LinearFit> fits;  // per pair, large-lambda half of the grid
  std::vector<double> max_ratio;       // per pair, max over the grid of estimate / scale
  std::vector<std::optional<Site>> anchors;  // part (b): anchors of x and y per pair
  double tolerance = 0.15;
  bool bounded = false;  // estimates decrease in lambda within noise on the large half
  bool tracks = false;   // every slope within the tolerance of the prediction
  bool pass = false;     // every slope at most the prediction plus the tolerance
};

struct AprioriOptions {
  bool part_b = false;
  bool exploratory = false;  // allow u without a positive rim
  double tolerance = 0.15;
};

/// Part (a): E{|G|^{s/(2|Theta|)}} against Xi_s(lambda). Part (b): E{|G|^s}
/// against lambda^{-s}, with pairs placed where the rim condition holds.
inline AprioriResult apriori_experiment(const SiteSet& gamma, const std::vector<std::pair<Site, Site>>& pairs,
                                        std::vector<double> lambdas, MomentConfig cfg, const SingleSitePotential& u,
                                        const DisorderDistribution& rho, const AprioriOptions& opt = {}) {
  if (lambdas.size() < 4) throw ConfigError("apriori_experiment: need at least four lambda values");
  if (pairs.empty()) throw ConfigError("apriori_experiment: no pairs");
  const auto report = check_assumptions(u, rho);
  if (!report.a2 && !opt.exploratory)
    throw AssumptionError("apriori_experiment: u is not positive on the interior boundary of its support");
  std::sort(lambdas.begin(), lambdas.end());

  AprioriResult out;
  out.part_b = opt.part_b;
  out.tolerance = opt.tolerance;
  const std::size_t n_theta = u.size();
  if (opt.part_b) {
    const Ambient amb = Ambient::of(gamma);
    for (const auto& [x, y] : pairs) {
      auto bx = boundary_anchor(amb, u.support(), x);
      auto by = boundary_anchor(amb, u.support(), y);
      if (!bx || !by)
        throw GeometryError("apriori_experiment: no anchor satisfies the rim condition for " +
                            to_string(bx ? y : x));
      out.anchors.push_back(bx);
      out.anchors.push_back(by);
    }
    cfg.exponent = cfg.s;
  } else {
    cfg.exponent.reset();
  }
  out.exponent = cfg.t(n_theta);

  for (double l : lambdas) {
    cfg.lambda = l;
    AprioriRow row;
    row.lambda = l;
    row.xi = xi_s(l, cfg.s, n_theta);
    row.estimates = fractional_moments(gamma, pairs, cfg, u, rho);
    out.rows.push_back(std::move(row));
  }

  const double big = lambdas[lambdas.size() / 2];
  out.predicted = opt.part_b ? -cfg.s : xi_exponent(big, cfg.s, n_theta);
  out.tracks = out.pass = out.bounded = true;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::vector<double> lx, ly;
    double ratio = 0.0;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
      const auto& e = out.rows[i].estimates[p];
      const double scale = opt.part_b ? std::pow(out.rows[i].lambda, -cfg.s) : out.rows[i].xi;
      ratio = std::max(ratio, e.mean / scale);
      if (i >= lambdas.size() / 2) {
        lx.push_back(std::log(out.rows[i].lambda));
        ly.push_back(std::log(e.mean));
        if (i > lambdas.size() / 2) {
          const auto& prev = out.rows[i - 1].estimates[p];
          if (e.mean > prev.mean + 3 * std::hypot(e.std_error, prev.std_error)) out.bounded = false;
        }
      }
    }
    auto fit = stats::linear_fit(lx, ly);
    if (std::abs(fit.slope - out.predicted) > opt.tolerance) out.tracks = false;
    if (fit.slope > out.predicted + opt.tolerance) out.pass = false;
    out.fits.push_back(fit);
    out.max_ratio.push_back(ratio);
  }
  out.pass = out.pass && out.bounded;
  return out;
}

// ---------------------------------------------------------------------------
// Decay profiles

struct DecayFit {
  double A = 0.0;
  double mu = 0.0;
  double mu_lo = 0.0;  // 95% confidence interval
  double mu_hi = 0.0;
  double r2 = 0.0;
  std::vector<int> distances;
  std::vector<MomentEstimate> values;
  double spearman = 0.0;  // rank correlation of mean against distance
  bool decaying = false;  // mu_lo > 0 and r2 >= 0.9
};

/// E{|G(z;x,x+r e_axis)|^t} for each r and a log-linear fit in r.
inline DecayFit decay_profile(const SiteSet& gamma, const Site& x, const std::vector<int>& distances, const MomentConfig& cfg,
                              const SingleSitePotential& u, const DisorderDistribution& rho, int axis = 0) {
  if (axis < 0 || axis >= x.dim()) throw ConfigError("decay_profile: axis out of range");
  std::vector<std::pair<Site, Site>> pairs;
  for (int r : distances) {
    Site y = x;
    y[axis] += r;
    if (!gamma.contains(y)) throw GeometryError("decay_profile: " + to_string(y) + " lies outside Gamma");
    pairs.push_back({x, y});
  }
  DecayFit fit;
  fit.values = fractional_moments(gamma, pairs, cfg, u, rho);
  std::vector<double> rx, ly;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(fit.values[i].mean > 0)) continue;
    fit.distances.push_back(distances[i]);
    rx.push_back(distances[i]);
    ly.push_back(std::log(fit.values[i].mean));
  }
  {
    std::vector<double> sorted = rx;
    std::sort(sorted.begin(), sorted.end());
    if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 4)
      throw ConfigError("decay_profile: fewer than four usable distances");
  }
  auto lf = stats::linear_fit(rx, ly);
  fit.mu = -lf.slope;
  fit.mu_lo = -lf.slope_hi;
  fit.mu_hi = -lf.slope_lo;
  fit.A = std::exp(lf.intercept);
  fit.r2 = lf.r2;
  fit.spearman = stats::spearman(rx, ly);
  fit.decaying = fit.mu_lo > 0 && fit.r2 >= 0.9;
  return fit;
}

/// Decay rate per site of the free Green function in one dimension at real
/// energy |E| > 2.
inline double free_decay_rate(double E) {
  if (!(std::abs(E) > 2)) throw ConfigError("free_decay_rate: energy inside the free spectrum");
  return std::acosh(std::abs(E) / 2);
}

// ---------------------------------------------------------------------------
// Finite-volume criterion

struct CriterionResult {
  int L = 0;
  double lambda = 0.0;
  double t = 0.0;
  double raw_sum = 0.0;  // sum over the outer boundary of W_x of E{|G_{Lambda \ W_x}(z;x,w)|^t}
  double raw_error = 0.0;
  std::size_t terms = 0;        // boundary sites connected to x
  std::size_t skipped_far = 0;  // boundary sites in other components
  double box_factor = 0.0;      // L^{3(d-1)}
  double xi = 0.0;              // Xi_s(lambda)
  double coupling = 0.0;        // lambda^{-s/|Theta|}
  std::optional<double> B_s;
  std::optional<double> b_s;    // with the supplied B_s
  double b = 0.0;               // diagnostic value with B_s = 1
  double mu_pred = 0.0;         // |ln b| / (L + diam Theta + 2)
  double A_over_C = 0.0;        // Xi_s / b, the prefactor up to the unknown C_s
  std::vector<MomentEstimate> contributions;
};

struct CriterionOptions {
  std::optional<double> B_s;
  bool exploratory = false;
};

inline CriterionResult finite_volume_criterion(const Ambient& gamma, const SiteSet& lambda, const Site& x, int L,
                                               MomentConfig cfg, const SingleSitePotential& u,
                                               const DisorderDistribution& rho, const CriterionOptions& opt = {}) {
  if (!check_assumptions(u, rho).a2 && !opt.exploratory)
    throw AssumptionError("finite_volume_criterion: u is not positive on the interior boundary of its support");
  if (opt.B_s && !(*opt.B_s > 0)) throw ConfigError("finite_volume_criterion: B_s must be positive");
  const auto geom = annulus_geometry(gamma, u.support(), x, L);
  const SiteSet rest = lambda.minus(geom.w);
  if (!rest.contains(x)) throw GeometryError("finite_volume_criterion: x is not in Lambda \\ W_x");
  const SiteSet comp = component_of(rest, x);
  const SiteSet outer = boundaries(geom.w, gamma).exterior;

  cfg.exponent.reset();
  CriterionResult out;
  out.L = L;
  out.lambda = cfg.lambda;
  out.t = cfg.t(u.size());
  std::vector<std::pair<Site, Site>> pairs;
  for (const auto& w : outer) {
    if (!lambda.contains(w)) continue;
    if (comp.contains(w)) pairs.push_back({x, w});
    else ++out.skipped_far;
  }
  out.terms = pairs.size();
  if (!pairs.empty()) out.contributions = fractional_moments(comp, pairs, cfg, u, rho);
  double var = 0.0;
  for (const auto& c : out.contributions) {
    out.raw_sum += c.mean;
    var += c.std_error * c.std_error;
  }
  out.raw_error = std::sqrt(var);

  const int d = x.dim();
  out.box_factor = std::pow(static_cast<double>(L), 3.0 * (d - 1));
  out.xi = xi_s(cfg.lambda, cfg.s, u.size());
  out.coupling = coupling_prefactor(cfg.lambda, cfg.s, u.size());
  out.b = out.box_factor * out.xi * out.coupling * out.raw_sum;
  if (opt.B_s) {
    out.B_s = opt.B_s;
    out.b_s = *opt.B_s * out.b;
  }
  out.mu_pred = std::abs(std::log(out.b)) / (L + u.diam_inf() + 2);
  out.A_over_C = out.xi / out.b;
  return out;
}

}  // namespace alloy
