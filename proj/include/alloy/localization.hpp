#pragma once

// Box regularity at real energies, certified energy scans, the two-box
// experiment, eigenvalue counting and eigenvector decay.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "alloy/error.hpp"
#include "alloy/geometry.hpp"
#include "alloy/model.hpp"
#include "alloy/parallel.hpp"
#include "alloy/rng.hpp"
#include "alloy/stats.hpp"

namespace alloy {

enum class Regularity { regular, singular, in_spectrum };

inline std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::regular: return "regular";
    case Regularity::singular: return "singular";
    case Regularity::in_spectrum: return "E-in-spectrum";
  }
  return "?";
}

struct RegularityVerdict {
  Site center;
  int L = 0;
  double E = 0.0;
  double m = 0.0;
  Regularity status = Regularity::singular;
  std::optional<Site> witness;  // boundary site attaining the maximum
  double value = 0.0;           // max over the interior boundary of |G(E;x,w)|
  double threshold = 0.0;       // exp(-mL)
  bool regular() const { return status == Regularity::regular; }
};

/// Eigendecomposition of H on the box of half-width L around x, kept for
/// repeated evaluation of G(E;x,w) at real energies.
class BoxSpectrum {
 public:
  BoxSpectrum(const Site& x, int L, const RealMatrix& H) : x_(x), L_(L), box_(box(L, x)) {
    if (H.rows() != static_cast<Eigen::Index>(box_.size()) || H.cols() != H.rows())
      throw GeometryError("BoxSpectrum: matrix does not match the box");
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(H);
    evals_ = es.eigenvalues();
    const auto rim = interior_boundary(box_);
    rim_.assign(rim.begin(), rim.end());
    const auto xi = static_cast<Eigen::Index>(box_.index(x));
    weights_.resize(static_cast<Eigen::Index>(rim_.size()), evals_.size());
    for (std::size_t r = 0; r < rim_.size(); ++r) {
      const auto wi = static_cast<Eigen::Index>(box_.index(rim_[r]));
      for (Eigen::Index n = 0; n < evals_.size(); ++n)
        weights_(static_cast<Eigen::Index>(r), n) = es.eigenvectors()(xi, n) * es.eigenvectors()(wi, n);
    }
    norm_ = evals_.cwiseAbs().maxCoeff();
  }

  BoxSpectrum(const Site& x, int L, double lambda, const SingleSitePotential& u, const DisorderField& omega)
      : BoxSpectrum(x, L, hamiltonian(box(L, x), lambda, u, omega).matrix) {}

  const Site& center() const noexcept { return x_; }
  int L() const noexcept { return L_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return evals_; }
  double norm() const noexcept { return norm_; }
  double margin() const noexcept { return 1e-12 * norm_; }

  /// Distance from [a, b] to the spectrum (0 if an eigenvalue lies inside).
  double distance(double a, double b) const {
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < evals_.size(); ++n) {
      const double e = evals_(n);
      d = std::min(d, e < a ? a - e : (e > b ? e - b : 0.0));
    }
    return d;
  }

  bool in_spectrum(double E) const { return distance(E, E) <= margin(); }

  /// max_w |G(E;x,w)| over the interior boundary and the maximising site.
  std::pair<double, Site> sup_green(double E) const {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t r = 0; r < rim_.size(); ++r) {
      double g = 0.0;
      for (Eigen::Index n = 0; n < evals_.size(); ++n) g += weights_(static_cast<Eigen::Index>(r), n) / (evals_(n) - E);
      if (std::abs(g) > best) {
        best = std::abs(g);
        arg = r;
      }
    }
    return {best, rim_[arg]};
  }

  RegularityVerdict verdict(double E, double m) const {
    RegularityVerdict v;
    v.center = x_;
    v.L = L_;
    v.E = E;
    v.m = m;
    v.threshold = std::exp(-m * L_);
    if (in_spectrum(E)) {
      v.status = Regularity::in_spectrum;
      v.value = std::numeric_limits<double>::infinity();
      return v;
    }
    auto [g, w] = sup_green(E);
    v.value = g;
    v.witness = w;
    v.status = g <= v.threshold ? Regularity::regular : Regularity::singular;
    return v;
  }

 private:
  Site x_;
  int L_;
  SiteSet box_;
  std::vector<Site> rim_;
  Eigen::VectorXd evals_;
  RealMatrix weights_;  // psi_n(x) psi_n(w) for w on the rim
  double norm_ = 0.0;
};

inline RegularityVerdict regularity(const Site& x, int L, double E, double m, const DisorderField& omega, double lambda,
                                    const SingleSitePotential& u) {
  if (L < 1) throw GeometryError("regularity: L must be at least 1");
  return BoxSpectrum(x, L, lambda, u, omega).verdict(E, m);
}

// ---------------------------------------------------------------------------
// Certified scans

struct ScanCell {
  double lo = 0.0, hi = 0.0;
  double bound = 0.0;  // upper bound on max_w |G(E;x,w)| over the cell
  bool certified = false;
};

struct ScanResult {
  std::vector<ScanCell> cells;
  double threshold = 0.0;
  double certified_length = 0.0;
  double uncertified_length = 0.0;
};

/// Splits [a, b] into ceil((b-a)/delta) equal cells. A cell is certified
/// regular when the Lipschitz envelope from its two end values stays below
/// exp(-mL); the Lipschitz constant is 1/dist(cell, spectrum)^2.
inline ScanResult certified_scan(const BoxSpectrum& spec, double a, double b, double m, double delta) {
  if (!(delta > 0)) throw ConfigError("certified_scan: delta must be positive");
  if (!(b > a)) throw ConfigError("certified_scan: empty interval");
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / delta - 1e-12));
  auto node = [&](std::size_t i) { return i == n ? b : a + (b - a) * (static_cast<double>(i) / static_cast<double>(n)); };
  ScanResult out;
  out.threshold = std::exp(-m * spec.L());
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double E = node(i);
    g[i] = spec.in_spectrum(E) ? std::numeric_limits<double>::infinity() : spec.sup_green(E).first;
  }
  for (std::size_t i = 0; i < n; ++i) {
    ScanCell c;
    c.lo = node(i);
    c.hi = node(i + 1);
    const double dist = spec.distance(c.lo, c.hi) - spec.margin();
    if (dist > 0 && std::isfinite(g[i]) && std::isfinite(g[i + 1])) {
      const double k = 1.0 / (dist * dist);
      const double h = c.hi - c.lo;
      c.bound = std::min({g[i] + k * h, g[i + 1] + k * h, 0.5 * (g[i] + g[i + 1] + k * h)});
      c.certified = c.bound <= out.threshold;
    } else {
      c.bound = std::numeric_limits<double>::infinity();
    }
    (c.certified ? out.certified_length : out.uncertified_length) += c.hi - c.lo;
    out.cells.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-box experiment

struct TwoBoxConfig {
  int L = 6;
  Site x{0};
  std::optional<Site> y;   // default: x shifted by the minimal separation along the first axis
  double a = -0.2, b = 0.2;
  double m = 0.5;
  double delta = 0.01;
  double lambda = 50;
  std::size_t samples = 500;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct TwoBoxResult {
  int L = 0;
  double lambda = 0.0;
  std::size_t successes = 0;
  std::size_t samples = 0;
  double probability = 0.0;
  stats::Interval ci;
  double uncertified_fraction = 0.0;  // mean fraction of I covered by neither box
};

inline Site default_partner(const Site& x, int L, const SingleSitePotential& u) {
  Site y = x;
  y[0] += 2 * L + u.diam_inf() + 1;
  return y;
}

/// Fraction of disorder samples for which every energy in [a, b] has at least
/// one of the two boxes certified (m, E)-regular.
inline TwoBoxResult two_box_experiment(const TwoBoxConfig& cfg, const SingleSitePotential& u, const DisorderDistribution& rho) {
  const Site y = cfg.y.value_or(default_partner(cfg.x, cfg.L, u));
  if (y.dim() != cfg.x.dim()) throw GeometryError("two_box_experiment: dimension mismatch");
  if (dist_inf(cfg.x, y) < 2 * cfg.L + u.diam_inf() + 1)
    throw GeometryError("two_box_experiment: boxes closer than 2L + diam(Theta) + 1");
  if (cfg.samples == 0) throw ConfigError("two_box_experiment: no samples");
  const SiteSet bx = box(cfg.L, cfg.x), by = box(cfg.L, y);
  const SiteSet couplings = coupling_closure(bx.unite(by), u);

  struct Outcome {
    bool event = false;
    double uncovered = 0.0;
  };
  auto one = [&](std::size_t i) {
    Engine eng = sample_engine(cfg.seed, i);
    const auto omega = DisorderField::sample(couplings, rho, eng);
    const BoxSpectrum sx(cfg.x, cfg.L, cfg.lambda, u, omega), sy(y, cfg.L, cfg.lambda, u, omega);
    const auto rx = certified_scan(sx, cfg.a, cfg.b, cfg.m, cfg.delta);
    const auto ry = certified_scan(sy, cfg.a, cfg.b, cfg.m, cfg.delta);
    Outcome o;
    for (std::size_t c = 0; c < rx.cells.size(); ++c)
      if (!rx.cells[c].certified && !ry.cells[c].certified) o.uncovered += rx.cells[c].hi - rx.cells[c].lo;
    o.event = o.uncovered == 0.0;
    o.uncovered /= cfg.b - cfg.a;
    return o;
  };
  const auto all = parallel_map(cfg.samples, std::max(1u, cfg.workers), one);
  TwoBoxResult out;
  out.L = cfg.L;
  out.lambda = cfg.lambda;
  out.samples = all.size();
  std::vector<double> unc;
  for (const auto& o : all) {
    out.successes += o.event ? 1 : 0;
    unc.push_back(o.uncovered);
  }
  out.probability = static_cast<double>(out.successes) / static_cast<double>(out.samples);
  out.ci = stats::wilson_interval(out.successes, out.samples);
  out.uncertified_fraction = pairwise_sum(unc) / static_cast<double>(unc.size());
  return out;
}

/// Length scale beyond which the two-box bound applies, 8 ln(base) / mu. The
/// base is 8 in one formulation and 2 in the other.
inline double initial_scale_threshold(double mu, double base = 8.0) {
  if (!(mu > 0)) throw ConfigError("initial_scale_threshold: mu must be positive");
  return 8.0 * std::log(base) / mu;
}

// ---------------------------------------------------------------------------
// Eigenvalue counting

struct WegnerConfig {
  int dim = 1;
  int L = 20;
  int L_alt = 0;  // second box for the volume check; 0 skips it
  double center = 0.0;
  std::vector<double> widths{0.2, 0.1, 0.05, 0.025};
  double lambda = 1.0;
  double s = 0.3;
  std::size_t samples = 500;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct WegnerResult {
  std::vector<double> widths;
  std::vector<double> mean_count;
  std::vector<double> std_error;
  std::size_t sites = 0;
  stats::LinearFit fit;  // log mean count against log width
  double exponent = 0.0;
  bool exponent_ok = false;           // exponent >= s - 0.15
  std::optional<double> density;      // count per site at the widest window, main box
  std::optional<double> density_alt;  // same for the second box
  bool volume_ok = true;              // densities within 25%
  bool pass = false;
};

namespace detail {

inline std::vector<std::vector<double>> eigen_counts(int dim, int L, const WegnerConfig& cfg, const SingleSitePotential& u,
                                                     const DisorderDistribution& rho, std::uint64_t seed) {
  const AlloyModel model(box(L, Site(dim)), u, cfg.lambda);
  auto one = [&](std::size_t i) {
    Engine eng = sample_engine(seed, i);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(model.hamiltonian(model.draw_couplings(rho, eng)), Eigen::EigenvaluesOnly);
    std::vector<double> c;
    for (double w : cfg.widths) {
      const double lo = cfg.center - w / 2, hi = cfg.center + w / 2;
      c.push_back(static_cast<double>(((es.eigenvalues().array() >= lo) && (es.eigenvalues().array() <= hi)).count()));
    }
    return c;
  };
  return parallel_map(cfg.samples, std::max(1u, cfg.workers), one);
}

}  // namespace detail

inline WegnerResult wegner_experiment(const WegnerConfig& cfg, const SingleSitePotential& u, const DisorderDistribution& rho) {
  if (cfg.widths.size() < 2) throw ConfigError("wegner_experiment: need at least two widths");
  for (double w : cfg.widths)
    if (!(w > 0)) throw ConfigError("wegner_experiment: widths must be positive");
  if (cfg.samples < 2) throw ConfigError("wegner_experiment: need at least two samples");
  WegnerResult out;
  out.widths = cfg.widths;
  out.sites = box(cfg.L, Site(cfg.dim)).size();
  const auto counts = detail::eigen_counts(cfg.dim, cfg.L, cfg, u, rho, cfg.seed);
  std::vector<double> lx, ly, col(counts.size());
  for (std::size_t k = 0; k < cfg.widths.size(); ++k) {
    for (std::size_t i = 0; i < counts.size(); ++i) col[i] = counts[i][k];
    const auto sm = stats::summarize(col);
    out.mean_count.push_back(sm.mean);
    out.std_error.push_back(sm.std_error);
    if (sm.mean > 0) {
      lx.push_back(std::log(cfg.widths[k]));
      ly.push_back(std::log(sm.mean));
    }
  }
  if (lx.size() < 2) throw ConfigError("wegner_experiment: no eigenvalues found in the windows");
  out.fit = stats::linear_fit(lx, ly);
  out.exponent = out.fit.slope;
  out.exponent_ok = out.exponent >= cfg.s - 0.15;

  const auto widest = static_cast<std::size_t>(std::max_element(cfg.widths.begin(), cfg.widths.end()) - cfg.widths.begin());
  out.density = out.mean_count[widest] / static_cast<double>(out.sites);
  if (cfg.L_alt > 0) {
    const auto alt = detail::eigen_counts(cfg.dim, cfg.L_alt, cfg, u, rho, derive_seed(cfg.seed, 0x5eed));
    double sum = 0.0;
    for (const auto& c : alt) sum += c[widest];
    out.density_alt = sum / static_cast<double>(alt.size()) / static_cast<double>(box(cfg.L_alt, Site(cfg.dim)).size());
    out.volume_ok = std::abs(*out.density_alt - *out.density) <= 0.25 * std::max(*out.density, *out.density_alt);
  }
  out.pass = out.exponent_ok && out.volume_ok;
  return out;
}

// ---------------------------------------------------------------------------
// Eigenvector decay

struct EigenRecord {
  std::size_t sample = 0;
  double energy = 0.0;
  double rate = 0.0;  // fitted decay of the amplitude envelope per unit sup-distance
  double ipr = 0.0;   // sum |psi|^4
  std::size_t points = 0;
};

struct EigenLocConfig {
  int dim = 1;
  int L = 30;
  double lambda = 60;
  std::optional<std::pair<double, double>> window;
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct EigenLocResult {
  std::vector<EigenRecord> records;
  std::size_t sites = 0;
  double median_rate = 0.0;
  double median_ipr = 0.0;
};

/// Decay rate of |psi| away from its maximum: shell maxima by sup-distance,
/// made non-increasing from the outside in, cut at 1e-12 of the peak, and
/// fitted beyond a core of radius L/4 (radius 1 if fewer than three points
/// remain).
inline std::pair<double, std::size_t> envelope_rate(const SiteSet& domain, const Eigen::VectorXd& psi, int L) {
  Eigen::Index arg = 0;
  const double peak = psi.cwiseAbs().maxCoeff(&arg);
  const Site& centre = domain[static_cast<std::size_t>(arg)];
  int rmax = 0;
  for (const auto& s : domain) rmax = std::max(rmax, dist_inf(s, centre));
  std::vector<double> shell(static_cast<std::size_t>(rmax) + 1, 0.0);
  for (std::size_t i = 0; i < domain.size(); ++i) {
    auto& v = shell[static_cast<std::size_t>(dist_inf(domain[i], centre))];
    v = std::max(v, std::abs(psi(static_cast<Eigen::Index>(i))));
  }
  for (int r = rmax - 1; r >= 0; --r) shell[r] = std::max(shell[r], shell[r + 1]);
  auto collect = [&](int core) {
    std::vector<double> x, y;
    for (int r = core; r <= rmax; ++r)
      if (shell[r] >= 1e-12 * peak) {
        x.push_back(r);
        y.push_back(std::log(shell[r]));
      }
    return std::pair{x, y};
  };
  auto [x, y] = collect(std::max(1, L / 4));
  if (x.size() < 3) std::tie(x, y) = collect(1);
  if (x.size() < 2) return {0.0, x.size()};
  return {-stats::linear_fit(x, y).slope, x.size()};
}

inline EigenLocResult eigen_localization(const EigenLocConfig& cfg, const SingleSitePotential& u, const DisorderDistribution& rho) {
  const SiteSet domain = box(cfg.L, Site(cfg.dim));
  const AlloyModel model(domain, u, cfg.lambda);
  auto one = [&](std::size_t i) {
    Engine eng = sample_engine(cfg.seed, i);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(model.hamiltonian(model.draw_couplings(rho, eng)));
    std::vector<EigenRecord> recs;
    for (Eigen::Index n = 0; n < es.eigenvalues().size(); ++n) {
      const double e = es.eigenvalues()(n);
      if (cfg.window && (e < cfg.window->first || e > cfg.window->second)) continue;
      const Eigen::VectorXd psi = es.eigenvectors().col(n);
      EigenRecord r;
      r.sample = i;
      r.energy = e;
      std::tie(r.rate, r.points) = envelope_rate(domain, psi, cfg.L);
      r.ipr = psi.array().pow(4).sum();
      recs.push_back(r);
    }
    return recs;
  };
  const auto all = parallel_map(cfg.samples, std::max(1u, cfg.workers), one);
  EigenLocResult out;
  out.sites = domain.size();
  std::vector<double> rates, iprs;
  for (const auto& v : all)
    for (const auto& r : v) {
      out.records.push_back(r);
      rates.push_back(r.rate);
      iprs.push_back(r.ipr);
    }
  if (out.records.empty()) throw ConfigError("eigen_localization: no eigenvalues in the window");
  out.median_rate = stats::median(rates);
  out.median_ipr = stats::median(iprs);
  return out;
}

// ---------------------------------------------------------------------------
// Scale sequence

class ScaleSequence {
 public:
  /// L_k = round(L_{k-1}^alpha); with p > 0 alpha must lie in (1, 2p/d).
  ScaleSequence(int L0, double alpha, std::optional<double> p = std::nullopt, int dim = 1) : L0_(L0), alpha_(alpha) {
    if (L0 < 2) throw ConfigError("ScaleSequence: L0 must be at least 2");
    if (!(alpha > 1)) throw ConfigError("ScaleSequence: alpha must exceed 1");
    if (p) {
      if (!(*p > dim)) throw ConfigError("ScaleSequence: p must exceed d");
      if (!(alpha < 2 * *p / dim)) throw ConfigError("ScaleSequence: alpha must be below 2p/d");
    }
  }

  std::vector<long long> take(std::size_t n) const {
    std::vector<long long> out;
    if (n == 0) return out;
    out.push_back(L0_);
    while (out.size() < n) {
      const double next = std::round(std::pow(static_cast<double>(out.back()), alpha_));
      if (!(next < 9e15)) throw ConfigError("ScaleSequence: overflow");
      out.push_back(static_cast<long long>(next));
    }
    return out;
  }

  int L0() const noexcept { return L0_; }
  double alpha() const noexcept { return alpha_; }

 private:
  int L0_;
  double alpha_;
};

}  // namespace alloy
