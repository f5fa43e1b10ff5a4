#pragma once

// The discrete alloy-type random operator H = -Laplacian + lambda * V_omega on
// finite subsets of Z^d, with V_omega(x) = sum_k omega_k u(x - k).

#include <cmath>
#include <complex>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "alloy/error.hpp"
#include "alloy/geometry.hpp"
#include "alloy/quadrature.hpp"
#include "alloy/rng.hpp"

namespace alloy {

using cplx = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Single-site potential

/// Finitely supported u : Z^d -> R with 0 in its support Theta.
class SingleSitePotential {
 public:
  explicit SingleSitePotential(std::vector<std::pair<Site, double>> entries) {
    if (entries.empty()) throw ModelError("single-site potential needs a non-empty support");
    const int d = entries.front().first.dim();
    std::vector<Site> sites;
    for (const auto& [s, v] : entries) {
      if (v == 0.0) throw ModelError("single-site potential value at " + to_string(s) + " is zero; list only the support");
      sites.push_back(s);
    }
    support_ = SiteSet(d, sites);
    if (support_.size() != entries.size()) throw ModelError("single-site potential lists a site twice");
    if (!support_.contains(Site(d))) throw ModelError("support of the single-site potential must contain the origin");
    values_.assign(support_.size(), 0.0);
    for (const auto& [s, v] : entries) values_[support_.index(s)] = v;
    for (double v : values_) {
      ubar_ += v;
      l1_ += std::abs(v);
      sup_ = std::max(sup_, std::abs(v));
    }
    const auto m = metrics(support_);
    n_l1_ = m.diam_l1;
    diam_inf_ = m.diam_inf;
  }

  /// One-dimensional profile with support {0, 1, ..., values.size()-1}.
  static SingleSitePotential chain(const std::vector<double>& values) {
    std::vector<std::pair<Site, double>> e;
    for (std::size_t i = 0; i < values.size(); ++i) e.push_back({Site{static_cast<int>(i)}, values[i]});
    return SingleSitePotential(std::move(e));
  }

  /// Rank-one (standard Anderson) case u = value * delta_0.
  static SingleSitePotential point(int dim, double value = 1.0) {
    return SingleSitePotential({{Site(dim), value}});
  }

  int dim() const noexcept { return support_.dim(); }
  const SiteSet& support() const noexcept { return support_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return support_.size(); }

  double operator()(const Site& k) const {
    auto i = support_.index_of(k);
    return i ? values_[*i] : 0.0;
  }

  double ubar() const noexcept { return ubar_; }        // sum of u over Z^d
  double l1_norm() const noexcept { return l1_; }
  double sup_norm() const noexcept { return sup_; }
  int n_l1() const noexcept { return n_l1_; }           // l1-diameter of Theta
  int diam_inf() const noexcept { return diam_inf_; }

  bool sign_indefinite() const {
    bool pos = false, neg = false;
    for (double v : values_) (v > 0 ? pos : neg) = true;
    return pos && neg;
  }

  /// The potential -u, which together with couplings -omega gives the same V.
  SingleSitePotential negated() const {
    std::vector<std::pair<Site, double>> e;
    for (std::size_t i = 0; i < size(); ++i) e.push_back({support_[i], -values_[i]});
    return SingleSitePotential(std::move(e));
  }

 private:
  SiteSet support_;
  std::vector<double> values_;
  double ubar_ = 0.0, l1_ = 0.0, sup_ = 0.0;
  int n_l1_ = 0, diam_inf_ = 0;
};

// ---------------------------------------------------------------------------
// Disorder distribution

enum class DensityKind { uniform, triangular, bump, table };

inline const char* to_string(DensityKind k) {
  switch (k) {
    case DensityKind::uniform: return "uniform";
    case DensityKind::triangular: return "triangular";
    case DensityKind::bump: return "bump";
    case DensityKind::table: return "table";
  }
  return "?";
}

/// Compactly supported, bounded probability density rho on R.
///
///   uniform     1/(b-a) on [a, b]; bounded but discontinuous (not W^{1,1})
///   triangular  symmetric tent on [c-w, c+w]; Lipschitz, in W^{1,1}
///   bump        (1/w) cos^2(pi (r-c) / (2w)) on [c-w, c+w]; C^1
///   table       piecewise linear through (node, value) pairs, renormalised
class DisorderDistribution {
 public:
  static DisorderDistribution uniform(double a, double b) {
    if (!(b > a)) throw ModelError("uniform density needs a < b");
    DisorderDistribution d(DensityKind::uniform);
    d.lo_ = a;
    d.hi_ = b;
    d.finish();
    return d;
  }

  static DisorderDistribution triangular(double center, double half_width) {
    if (!(half_width > 0)) throw ModelError("triangular density needs a positive half-width");
    DisorderDistribution d(DensityKind::triangular);
    d.c_ = center;
    d.w_ = half_width;
    d.lo_ = center - half_width;
    d.hi_ = center + half_width;
    d.finish();
    return d;
  }

  static DisorderDistribution bump(double center, double half_width) {
    if (!(half_width > 0)) throw ModelError("bump density needs a positive half-width");
    DisorderDistribution d(DensityKind::bump);
    d.c_ = center;
    d.w_ = half_width;
    d.lo_ = center - half_width;
    d.hi_ = center + half_width;
    d.finish();
    return d;
  }

  static DisorderDistribution table(std::vector<double> nodes, std::vector<double> values) {
    if (nodes.size() < 2 || nodes.size() != values.size()) throw ModelError("table density needs >= 2 matching nodes and values");
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      if (!(nodes[i + 1] > nodes[i])) throw ModelError("table density nodes must be strictly increasing");
    double mass = 0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) mass += 0.5 * (values[i] + values[i + 1]) * (nodes[i + 1] - nodes[i]);
    for (double v : values)
      if (v < 0) throw ModelError("table density values must be non-negative");
    if (!(mass > 0)) throw ModelError("table density has zero mass");
    DisorderDistribution d(DensityKind::table);
    for (double& v : values) v /= mass;
    d.nodes_ = std::move(nodes);
    d.values_ = std::move(values);
    d.lo_ = d.nodes_.front();
    d.hi_ = d.nodes_.back();
    d.cum_.assign(d.nodes_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < d.nodes_.size(); ++i)
      d.cum_[i + 1] = d.cum_[i] + 0.5 * (d.values_[i] + d.values_[i + 1]) * (d.nodes_[i + 1] - d.nodes_[i]);
    d.finish();
    return d;
  }

  DensityKind kind() const noexcept { return kind_; }
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }
  /// R = max(|inf supp rho|, |sup supp rho|).
  double support_radius() const noexcept { return std::max(std::abs(lo_), std::abs(hi_)); }
  double sup_norm() const noexcept { return sup_; }
  double l1_norm() const noexcept { return l1_; }
  /// ||rho'||_{L^1}; +infinity when rho has jumps (not in W^{1,1}).
  double derivative_l1() const noexcept { return dl1_; }
  bool in_w11() const noexcept { return std::isfinite(dl1_); }

  double density(double r) const {
    if (r < lo_ || r > hi_) return 0.0;
    switch (kind_) {
      case DensityKind::uniform: return 1.0 / (hi_ - lo_);
      case DensityKind::triangular: return std::max(0.0, (w_ - std::abs(r - c_)) / (w_ * w_));
      case DensityKind::bump: {
        const double cs = std::cos(std::numbers::pi * (r - c_) / (2 * w_));
        return cs * cs / w_;
      }
      case DensityKind::table: {
        std::size_t i = segment(r);
        const double t = (r - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
        return values_[i] + t * (values_[i + 1] - values_[i]);
      }
    }
    return 0.0;
  }

  /// rho' where it exists (one-sided at kinks, 0 outside the support).
  double derivative(double r) const {
    if (r <= lo_ || r >= hi_) return 0.0;
    switch (kind_) {
      case DensityKind::uniform: return 0.0;
      case DensityKind::triangular: return (r < c_ ? 1.0 : -1.0) / (w_ * w_);
      case DensityKind::bump: return -std::numbers::pi / (2 * w_ * w_) * std::sin(std::numbers::pi * (r - c_) / w_);
      case DensityKind::table: {
        std::size_t i = segment(r);
        return (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
      }
    }
    return 0.0;
  }

  double cdf(double r) const {
    if (r <= lo_) return 0.0;
    if (r >= hi_) return 1.0;
    switch (kind_) {
      case DensityKind::uniform: return (r - lo_) / (hi_ - lo_);
      case DensityKind::triangular: {
        const double t = (r - c_) / w_;
        return t <= 0 ? 0.5 * (1 + t) * (1 + t) : 1.0 - 0.5 * (1 - t) * (1 - t);
      }
      case DensityKind::bump: {
        const double t = (r - c_) / w_;
        return 0.5 * (t + 1) + std::sin(std::numbers::pi * t) / (2 * std::numbers::pi);
      }
      case DensityKind::table: {
        std::size_t i = segment(r);
        const double h = r - nodes_[i];
        const double slope = (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
        return cum_[i] + values_[i] * h + 0.5 * slope * h * h;
      }
    }
    return 0.0;
  }

  /// Inverse CDF on (0, 1).
  double quantile(double p) const {
    p = std::clamp(p, 0.0, 1.0);
    switch (kind_) {
      case DensityKind::uniform: return lo_ + p * (hi_ - lo_);
      case DensityKind::triangular:
        return p <= 0.5 ? c_ + w_ * (std::sqrt(2 * p) - 1) : c_ + w_ * (1 - std::sqrt(2 * (1 - p)));
      case DensityKind::bump: {
        // CDF is strictly increasing and smooth; safeguarded Newton.
        double a = lo_, b = hi_, r = c_ + w_ * (2 * p - 1);
        for (int it = 0; it < 100; ++it) {
          const double f = cdf(r) - p;
          if (f > 0) b = r; else a = r;
          const double rho = density(r);
          double next = rho > 0 ? r - f / rho : 0.5 * (a + b);
          if (!(next > a && next < b)) next = 0.5 * (a + b);
          if (std::abs(next - r) < 1e-15 * std::max(1.0, std::abs(r))) return next;
          r = next;
        }
        return r;
      }
      case DensityKind::table: {
        std::size_t i = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), p) - cum_.begin());
        i = std::clamp<std::size_t>(i, 1, nodes_.size() - 1) - 1;
        const double target = p - cum_[i];
        const double h = nodes_[i + 1] - nodes_[i];
        const double slope = (values_[i + 1] - values_[i]) / h;
        double x;
        if (std::abs(slope) < 1e-300) {
          x = values_[i] > 0 ? target / values_[i] : 0.0;
        } else {
          const double disc = std::max(0.0, values_[i] * values_[i] + 2 * slope * target);
          x = 2 * target / (values_[i] + std::sqrt(disc));
        }
        return nodes_[i] + std::clamp(x, 0.0, h);
      }
    }
    return 0.0;
  }

  double sample(Engine& eng) const { return quantile(uniform_open01(eng)); }

  /// Points where rho or rho' may be non-smooth.
  std::vector<double> breakpoints() const {
    switch (kind_) {
      case DensityKind::triangular: return {lo_, c_, hi_};
      case DensityKind::table: return nodes_;
      default: return {lo_, hi_};
    }
  }

  std::string describe() const {
    std::ostringstream os;
    os << std::setprecision(17) << to_string(kind_);
    switch (kind_) {
      case DensityKind::uniform: os << " " << lo_ << " " << hi_; break;
      case DensityKind::triangular:
      case DensityKind::bump: os << " " << c_ << " " << w_; break;
      case DensityKind::table:
        for (std::size_t i = 0; i < nodes_.size(); ++i) os << " " << nodes_[i] << ":" << values_[i];
        break;
    }
    return os.str();
  }

 private:
  explicit DisorderDistribution(DensityKind k) : kind_(k) {}

  std::size_t segment(double r) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    return std::clamp<std::size_t>(i, 1, nodes_.size() - 1) - 1;
  }

  void finish() {
    auto rho = [this](double r) { return density(r); };
    auto bp = breakpoints();
    l1_ = integrate(rho, lo_, hi_, bp, 1e-13).value;
    if (std::abs(l1_ - 1.0) > 1e-10) throw ModelError("density does not integrate to one (got " + std::to_string(l1_) + ")");
    sup_ = 0.0;
    if (kind_ == DensityKind::table) {
      for (double v : values_) sup_ = std::max(sup_, v);
    } else {
      sup_ = density(kind_ == DensityKind::uniform ? lo_ : c_);
    }
    const bool jumps = density(lo_) > 1e-12 * sup_ || density(hi_) > 1e-12 * sup_;
    if (jumps) {
      dl1_ = std::numeric_limits<double>::infinity();
    } else {
      auto drho = [this](double r) { return std::abs(derivative(r)); };
      dl1_ = integrate(drho, lo_, hi_, bp, 1e-12).value;
    }
  }

  DensityKind kind_;
  double lo_ = 0, hi_ = 0, c_ = 0, w_ = 0;
  std::vector<double> nodes_, values_, cum_;
  double sup_ = 0, l1_ = 0, dl1_ = 0;
};

// ---------------------------------------------------------------------------
// Assumption report

struct AssumptionReport {
  bool a1 = false;  // bounded compactly supported density
  bool a2 = false;  // u > 0 on the interior boundary of Theta
  bool b1 = false;  // rho in W^{1,1}
  bool b2 = false;  // ubar != 0
  bool sign_indefinite = false;
  double ubar = 0, u_l1 = 0;
  int n_l1 = 0, diam_inf = 0;
  double R = 0, rho_sup = 0, rho_l1 = 0, rho_prime_l1 = 0;
};

inline AssumptionReport check_assumptions(const SingleSitePotential& u, const DisorderDistribution& rho) {
  AssumptionReport r;
  r.a1 = std::isfinite(rho.sup_norm()) && std::isfinite(rho.lower()) && std::isfinite(rho.upper());
  r.a2 = true;
  for (const auto& k : interior_boundary(u.support()))
    if (!(u(k) > 0)) r.a2 = false;
  r.b1 = rho.in_w11();
  r.b2 = u.ubar() != 0.0;
  r.sign_indefinite = u.sign_indefinite();
  r.ubar = u.ubar();
  r.u_l1 = u.l1_norm();
  r.n_l1 = u.n_l1();
  r.diam_inf = u.diam_inf();
  r.R = rho.support_radius();
  r.rho_sup = rho.sup_norm();
  r.rho_l1 = rho.l1_norm();
  r.rho_prime_l1 = rho.derivative_l1();
  return r;
}

// ---------------------------------------------------------------------------
// Disorder fields and potentials

/// Sites whose coupling influences V on `region`: {k : u(x - k) != 0, x in region}.
inline SiteSet coupling_closure(const SiteSet& region, const SingleSitePotential& u) {
  std::vector<Site> v;
  v.reserve(region.size() * u.size());
  for (const auto& x : region)
    for (const auto& t : u.support()) v.push_back(x - t);
  return SiteSet(region.dim(), std::move(v));
}

/// Couplings omega_k on a finite set of sites.
class DisorderField {
 public:
  DisorderField() = default;
  DisorderField(SiteSet domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_.size()) throw ModelError("disorder field: one value per site required");
  }

  static DisorderField constant(SiteSet domain, double value) {
    std::vector<double> v(domain.size(), value);
    return DisorderField(std::move(domain), std::move(v));
  }

  /// i.i.d. draws in site order from one engine.
  static DisorderField sample(SiteSet domain, const DisorderDistribution& rho, Engine& eng) {
    std::vector<double> v(domain.size());
    for (auto& x : v) x = rho.sample(eng);
    return DisorderField(std::move(domain), std::move(v));
  }

  const SiteSet& domain() const noexcept { return domain_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  double at(const Site& k) const {
    auto i = domain_.index_of(k);
    if (!i) throw ModelError("disorder field has no coupling at site " + to_string(k));
    return values_[*i];
  }
  bool has(const Site& k) const { return domain_.contains(k); }
  void set(const Site& k, double v) { values_[domain_.index(k)] = v; }

  /// Text dump: dimension and count, then "coords... value" per line.
  void write(std::ostream& os) const {
    os << domain_.dim() << ' ' << domain_.size() << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < domain_.size(); ++i) {
      for (int j = 0; j < domain_.dim(); ++j) os << domain_[i][j] << ' ';
      os << values_[i] << '\n';
    }
  }

  static DisorderField read(std::istream& is) {
    int d = 0;
    std::size_t n = 0;
    if (!(is >> d >> n) || d < 1 || d > kMaxDim) throw ModelError("disorder field: bad header");
    std::vector<std::pair<Site, double>> e;
    for (std::size_t i = 0; i < n; ++i) {
      Site s(d);
      double v;
      for (int j = 0; j < d; ++j)
        if (!(is >> s[j])) throw ModelError("disorder field: truncated input");
      if (!(is >> v)) throw ModelError("disorder field: truncated input");
      e.push_back({s, v});
    }
    std::vector<Site> sites;
    for (auto& p : e) sites.push_back(p.first);
    SiteSet dom(d, sites);
    std::vector<double> vals(dom.size());
    for (auto& p : e) vals[dom.index(p.first)] = p.second;
    return DisorderField(std::move(dom), std::move(vals));
  }

 private:
  SiteSet domain_;
  std::vector<double> values_;
};

/// V_omega(x) = sum_{k : x - k in Theta} omega_k u(x - k), in the order of gamma.
inline std::vector<double> potential_field(const DisorderField& omega, const SingleSitePotential& u, const SiteSet& gamma) {
  std::vector<double> V(gamma.size(), 0.0);
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) acc += omega.at(gamma[i] - u.support()[t]) * u.values()[t];
    V[i] = acc;
  }
  return V;
}

// ---------------------------------------------------------------------------
// Operators

/// Square matrix whose rows and columns are labelled by a site set.
template <class Scalar>
struct BasicOperator {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  SiteSet index;
  Matrix matrix;

  std::size_t size() const noexcept { return index.size(); }
  Scalar operator()(const Site& x, const Site& y) const {
    return matrix(static_cast<Eigen::Index>(index.index(x)), static_cast<Eigen::Index>(index.index(y)));
  }
};

using RealOperator = BasicOperator<double>;
using LatticeOperator = BasicOperator<cplx>;

/// Index positions of `sub` inside `super`; throws if sub is not a subset.
inline std::vector<Eigen::Index> positions_in(const SiteSet& super, const SiteSet& sub) {
  std::vector<Eigen::Index> p;
  p.reserve(sub.size());
  for (const auto& s : sub) {
    auto i = super.index_of(s);
    if (!i) throw GeometryError("site " + to_string(s) + " is not in the operator's index set");
    p.push_back(static_cast<Eigen::Index>(*i));
  }
  return p;
}

/// P_sub A P_sub^*.
template <class Scalar>
BasicOperator<Scalar> restrict(const BasicOperator<Scalar>& op, const SiteSet& sub) {
  auto p = positions_in(op.index, sub);
  BasicOperator<Scalar> r{sub, op.matrix(p, p)};
  return r;
}

/// -Laplacian restricted to gamma: -1 on nearest-neighbour pairs.
inline RealMatrix negative_laplacian(const SiteSet& gamma) {
  const auto n = static_cast<Eigen::Index>(gamma.size());
  RealMatrix m = RealMatrix::Zero(n, n);
  for (std::size_t i = 0; i < gamma.size(); ++i)
    for (const auto& nb : neighbors(gamma[i]))
      if (auto j = gamma.index_of(nb)) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*j)) = -1.0;
  return m;
}

/// H_Gamma = -Laplacian_Gamma + lambda V_Gamma.
inline RealOperator hamiltonian(const SiteSet& gamma, double lambda, const SingleSitePotential& u, const DisorderField& omega) {
  RealOperator H{gamma, negative_laplacian(gamma)};
  const auto V = potential_field(omega, u, gamma);
  for (std::size_t i = 0; i < gamma.size(); ++i) H.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = lambda * V[i];
  return H;
}

template <class Scalar>
struct Depletion {
  BasicOperator<Scalar> depleted;  // H with hopping across the cut removed
  BasicOperator<Scalar> T;         // removed hopping: Laplacian minus depleted Laplacian
};

/// Removes every matrix element that couples `cut` with its complement.
/// With H = -Laplacian + V this gives H = H_depleted - T.
template <class Scalar>
Depletion<Scalar> deplete(const BasicOperator<Scalar>& H, const SiteSet& cut) {
  if (!H.index.includes(cut)) throw GeometryError("deplete: the cut set is not contained in the operator domain");
  Depletion<Scalar> r{H, {H.index, BasicOperator<Scalar>::Matrix::Zero(H.matrix.rows(), H.matrix.cols())}};
  std::vector<char> in(H.index.size(), 0);
  for (auto p : positions_in(H.index, cut)) in[static_cast<std::size_t>(p)] = 1;
  for (Eigen::Index i = 0; i < H.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < H.matrix.cols(); ++j)
      if (in[static_cast<std::size_t>(i)] != in[static_cast<std::size_t>(j)] && H.matrix(i, j) != Scalar(0)) {
        r.T.matrix(i, j) = -H.matrix(i, j);
        r.depleted.matrix(i, j) = Scalar(0);
      }
  return r;
}

template <class Scalar>
LatticeOperator to_complex(const BasicOperator<Scalar>& op) {
  return LatticeOperator{op.index, op.matrix.template cast<cplx>()};
}

/// Model on a fixed finite domain with the coupling stencil precomputed, for
/// assembling many Hamiltonians from fresh couplings.
class AlloyModel {
 public:
  AlloyModel(SiteSet gamma, SingleSitePotential u, double lambda)
      : gamma_(std::move(gamma)), u_(std::move(u)), lambda_(lambda), closure_(coupling_closure(gamma_, u_)),
        hopping_(negative_laplacian(gamma_)) {
    stencil_.resize(gamma_.size());
    for (std::size_t i = 0; i < gamma_.size(); ++i)
      for (std::size_t t = 0; t < u_.size(); ++t)
        stencil_[i].push_back({closure_.index(gamma_[i] - u_.support()[t]), u_.values()[t]});
  }

  const SiteSet& domain() const noexcept { return gamma_; }
  const SiteSet& closure() const noexcept { return closure_; }
  const SingleSitePotential& potential() const noexcept { return u_; }
  double lambda() const noexcept { return lambda_; }
  void set_lambda(double lambda) noexcept { lambda_ = lambda; }

  /// Couplings in closure order.
  std::vector<double> draw_couplings(const DisorderDistribution& rho, Engine& eng) const {
    std::vector<double> c(closure_.size());
    for (auto& x : c) x = rho.sample(eng);
    return c;
  }

  std::vector<double> potential_values(const std::vector<double>& couplings) const {
    std::vector<double> V(gamma_.size(), 0.0);
    for (std::size_t i = 0; i < gamma_.size(); ++i)
      for (const auto& [k, w] : stencil_[i]) V[i] += couplings[k] * w;
    return V;
  }

  RealMatrix hamiltonian(const std::vector<double>& couplings) const {
    RealMatrix H = hopping_;
    const auto V = potential_values(couplings);
    for (std::size_t i = 0; i < V.size(); ++i) H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = lambda_ * V[i];
    return H;
  }

  DisorderField field(const std::vector<double>& couplings) const { return DisorderField(closure_, couplings); }

 private:
  SiteSet gamma_;
  SingleSitePotential u_;
  double lambda_;
  SiteSet closure_;
  RealMatrix hopping_;
  std::vector<std::vector<std::pair<std::size_t, double>>> stencil_;
};

}  // namespace alloy
