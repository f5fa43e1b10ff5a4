#pragma once

// Spectral averaging bounds checked numerically: determinant averaging,
// inverse-norm averaging, monotone spectral averaging (tail and fractional
// moment forms), and the weighted construction behind the non-local a-priori
// bound for sign-indefinite single-site potentials.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "alloy/error.hpp"
#include "alloy/geometry.hpp"
#include "alloy/model.hpp"
#include "alloy/moments.hpp"
#include "alloy/quadrature.hpp"
#include "alloy/stats.hpp"

namespace alloy {

namespace detail {

inline double abs_det(const ComplexMatrix& V) {
  if (V.rows() != V.cols() || V.rows() == 0) throw AssumptionError("square non-empty matrix required");
  Eigen::JacobiSVD<ComplexMatrix> svd(V);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) >= kSingularRcond * sv(0))) throw AssumptionError("V is singular");
  return sv.prod();
}

/// Roots of r -> det(A + rV): the eigenvalues of -V^{-1} A.
inline std::vector<cplx> pencil_roots(const ComplexMatrix& A, const ComplexMatrix& V) {
  const ComplexMatrix K = -V.partialPivLu().solve(A);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(K, false);
  std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return r;
}

/// Density breakpoints plus the real parts of the roots inside the support.
inline std::vector<double> averaging_breakpoints(const DisorderDistribution& rho, const std::vector<cplx>& roots) {
  auto bp = rho.breakpoints();
  for (const auto& z : roots)
    if (z.real() > rho.lower() && z.real() < rho.upper()) bp.push_back(z.real());
  return bp;
}

inline double spectral_norm(const ComplexMatrix& M) {
  Eigen::JacobiSVD<ComplexMatrix> svd(M);
  return svd.singularValues()(0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Determinant averaging

struct DetAverageResult {
  double integral = 0.0;  // int |det(A + rV)|^{-s/n} rho(r) dr
  double error = 0.0;     // quadrature error estimate
  double bound1 = 0.0;    // optimised bound
  double bound2 = 0.0;    // two-region bound at the given kappa
  double kappa = 1.0;
  bool pass = false;
};

inline DetAverageResult det_average_check(const ComplexMatrix& A, const ComplexMatrix& V, const DisorderDistribution& rho,
                                          double s, double kappa = 1.0) {
  if (!(s > 0 && s < 1)) throw AssumptionError("det_average_check: s must lie in (0, 1)");
  if (A.rows() != V.rows() || A.cols() != V.cols()) throw AssumptionError("det_average_check: A and V differ in shape");
  const double n = static_cast<double>(A.rows());
  const double detV = detail::abs_det(V);
  const auto roots = detail::pencil_roots(A, V);
  const double log_det_v = std::log(detV);
  auto integrand = [&](double r) {
    double acc = log_det_v;
    for (const auto& z : roots) acc += std::log(std::abs(r - z));
    return std::exp(-s / n * acc) * rho.density(r);
  };
  DetAverageResult out;
  auto q = integrate(integrand, rho.lower(), rho.upper(), detail::averaging_breakpoints(rho, roots), 1e-10);
  out.integral = q.value;
  out.error = q.error;
  const double pre = std::pow(detV, -s / n);
  const double l1 = rho.l1_norm(), sup = rho.sup_norm();
  out.bound1 = pre * std::pow(l1, 1 - s) * std::pow(sup, s) * std::pow(2.0, s) * std::pow(s, -s) / (1 - s);
  out.kappa = kappa;
  out.bound2 = pre * (std::pow(kappa, -s) * l1 + 2 * std::pow(kappa, 1 - s) / (1 - s) * sup);
  out.pass = out.integral <= out.bound1 + 3 * out.error && out.bound1 <= out.bound2 * (1 + 1e-12);
  return out;
}

// ---------------------------------------------------------------------------
// Inverse-norm bounds

struct InverseNormResult {
  double inverse_norm = 0.0;  // ||V^{-1}||
  double norm_bound = 0.0;    // ||V||^{n-1} / |det V|
  double integral = 0.0;      // int_{-R}^{R} ||(A + rV)^{-1}||^{s/n} rho(r) dr
  double error = 0.0;
  double bound = 0.0;
  bool pass = false;
};

inline InverseNormResult inverse_norm_check(const ComplexMatrix& A, const ComplexMatrix& V, const DisorderDistribution& rho,
                                            double s, std::optional<double> R = std::nullopt) {
  if (!(s > 0 && s < 1)) throw AssumptionError("inverse_norm_check: s must lie in (0, 1)");
  if (A.rows() != V.rows() || A.cols() != V.cols()) throw AssumptionError("inverse_norm_check: A and V differ in shape");
  const double radius = R.value_or(rho.support_radius());
  if (rho.lower() < -radius || rho.upper() > radius) throw AssumptionError("inverse_norm_check: supp rho exceeds [-R, R]");
  const double n = static_cast<double>(A.rows());
  (void)detail::abs_det(V);

  Eigen::JacobiSVD<ComplexMatrix> svd(V);
  const auto& sv = svd.singularValues();
  const double smax = sv(0), smin = sv(sv.size() - 1);
  double prod = 1.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) prod *= sv(i);

  InverseNormResult out;
  out.inverse_norm = 1.0 / smin;
  out.norm_bound = std::pow(smax, n - 1) / prod;

  const auto roots = detail::pencil_roots(A, V);
  auto integrand = [&](double r) {
    Eigen::JacobiSVD<ComplexMatrix> m(A + r * V);
    const double sig = m.singularValues()(m.singularValues().size() - 1);
    return std::pow(sig, -s / n) * rho.density(r);
  };
  auto q = integrate(integrand, rho.lower(), rho.upper(), detail::averaging_breakpoints(rho, roots), 1e-10);
  out.integral = q.value;
  out.error = q.error;
  const double normA = detail::spectral_norm(A);
  out.bound = std::pow(rho.l1_norm(), 1 - s) * std::pow(rho.sup_norm(), s) *
              std::pow(normA + radius * smax, s * (n - 1) / n) /
              (std::pow(s, s) * std::pow(2.0, -s) * (1 - s) * std::pow(prod, s / n));
  out.pass = out.inverse_norm <= out.norm_bound * (1 + 1e-12) && out.integral <= out.bound + 3 * out.error;
  return out;
}

// ---------------------------------------------------------------------------
// Monotone spectral averaging

/// Lower bound on the constant in the monotone averaging tail estimate, from
/// the 1x1 case A = i, V = 1: sup_t t * |{r : |r + i|^{-1} > t}| = 2.
inline constexpr double kEmpiricalCW = 2.0;

struct MonotoneTailResult {
  std::vector<double> t;
  std::vector<double> measure;  // Lebesgue measure of {r : f(r) > t}
  stats::LinearFit fit;         // log measure against log t
  double implied_cw = 0.0;      // max_t t * measure / (||M1 V^{-1/2}||_HS ||M2 V^{-1/2}||_HS)
  std::vector<double> s_grid;
  std::vector<double> moments;  // int ||M1 (A + rV)^{-1} M2||^s rho(r) dr
  std::vector<double> moment_bounds;  // with the empirical constant
  bool moments_finite = false;
  bool log_convex = false;    // log I(s) convex on the equally spaced s-grid
  bool lyapunov = false;      // I(s)^{1/s} non-decreasing
  bool pass = false;          // slope within the tolerance of -1 and moment checks hold
};

inline bool is_dissipative(const ComplexMatrix& A, double tol = 1e-12) {
  const ComplexMatrix im = (A - A.adjoint()) / cplx(0, 2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(im, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * std::max(1.0, A.cwiseAbs().maxCoeff());
}

struct MonotoneTailOptions {
  std::vector<double> t_grid;  // empty: log grid deep in the 1/t regime
  std::vector<double> s_grid{0.2, 0.4, 0.6, 0.8};
  double slope_tolerance = 0.1;
  std::size_t core_points = 4000;
  std::size_t outer_points = 1500;
};

inline MonotoneTailResult monotone_tail_check(const ComplexMatrix& A, const RealMatrix& V, const ComplexMatrix& M1,
                                              const ComplexMatrix& M2, const DisorderDistribution& rho,
                                              const MonotoneTailOptions& opt = {}) {
  const auto n = A.rows();
  if (A.cols() != n || V.rows() != n || V.cols() != n || M1.cols() != n || M2.rows() != n)
    throw AssumptionError("monotone_tail_check: shape mismatch");
  if (!is_dissipative(A)) throw AssumptionError("monotone_tail_check: A is not dissipative");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && V(i, j) != 0.0) throw AssumptionError("monotone_tail_check: V must be diagonal");
  const Eigen::VectorXd v = V.diagonal();
  if (!(v.minCoeff() > 0)) throw AssumptionError("monotone_tail_check: V must be strictly positive");

  const ComplexMatrix Vc = V.cast<cplx>();
  auto f = [&](double r) { return (M1 * (A + r * Vc).partialPivLu().solve(M2)).norm(); };

  const Eigen::VectorXcd vinv = v.cwiseInverse().cast<cplx>();
  const Eigen::VectorXcd vinvsqrt = v.cwiseSqrt().cwiseInverse().cast<cplx>();
  const double c_inf = (M1 * vinv.asDiagonal() * M2).norm();
  const double hs1 = (M1 * vinvsqrt.asDiagonal()).norm();
  const double hs2 = (vinvsqrt.asDiagonal() * M2).norm();
  const double s0 = std::max(1.0, detail::spectral_norm(vinv.asDiagonal() * A));
  const double vmin = v.minCoeff();
  const double normA = detail::spectral_norm(A);
  const double m1 = detail::spectral_norm(M1), m2hs = M2.norm();

  MonotoneTailResult out;
  out.t = opt.t_grid;
  if (out.t.empty()) {
    if (!(c_inf > 0)) throw AssumptionError("monotone_tail_check: M1 V^{-1} M2 vanishes; supply a t-grid");
    const double hi = c_inf / (100 * s0), lo = c_inf / (1e4 * s0);
    for (int k = 0; k < 9; ++k) out.t.push_back(hi * std::pow(lo / hi, k / 8.0));
  }
  const double tmin = *std::min_element(out.t.begin(), out.t.end());
  const double rmax = 1.01 * (m1 * m2hs / tmin + normA) / vmin + 1.0;
  const double rcore = std::min(rmax, 2.0 * (normA / vmin + 1.0));

  // Evaluation grid: dense core, resonance points, logarithmic outer shells.
  std::vector<double> grid;
  for (std::size_t i = 0; i <= opt.core_points; ++i)
    grid.push_back(-rcore + 2 * rcore * static_cast<double>(i) / static_cast<double>(opt.core_points));
  {
    ComplexMatrix K = vinv.asDiagonal() * A;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(K, false);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = -es.eigenvalues()(i).real();
      const double w = std::max(1e-9, std::abs(es.eigenvalues()(i).imag()));
      for (double k : {-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0}) {
        const double r = c + k * w;
        if (std::abs(r) < rcore) grid.push_back(r);
      }
    }
  }
  if (rmax > rcore)
    for (std::size_t i = 1; i <= opt.outer_points; ++i) {
      const double r = rcore * std::pow(rmax / rcore, static_cast<double>(i) / static_cast<double>(opt.outer_points));
      grid.push_back(r);
      grid.push_back(-r);
    }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> fv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) fv[i] = f(grid[i]);

  auto crossing = [&](double a, double fa, double b, double t) {
    // f(a) and f(b) straddle t; bisect for the level crossing.
    const bool a_above = fa > t;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      if ((f(m) > t) == a_above) a = m; else b = m;
    }
    return 0.5 * (a + b);
  };

  std::vector<double> lx, ly;
  for (double t : out.t) {
    double meas = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const bool a = fv[i] > t, b = fv[i + 1] > t;
      if (a && b) meas += grid[i + 1] - grid[i];
      else if (a != b) {
        const double c = crossing(grid[i], fv[i], grid[i + 1], t);
        meas += a ? c - grid[i] : grid[i + 1] - c;
      }
    }
    out.measure.push_back(meas);
    if (meas > 0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(meas));
    }
    if (hs1 * hs2 > 0) out.implied_cw = std::max(out.implied_cw, t * meas / (hs1 * hs2));
  }
  if (lx.size() >= 2) out.fit = stats::linear_fit(lx, ly);

  // Fractional moments with the operator norm.
  std::vector<cplx> roots;
  {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(ComplexMatrix(vinv.asDiagonal() * A), false);
    for (Eigen::Index i = 0; i < n; ++i) roots.push_back(-es.eigenvalues()(i));
  }
  const auto bp = detail::averaging_breakpoints(rho, roots);
  const double sup = rho.sup_norm();
  const double op1 = detail::spectral_norm(M1 * vinvsqrt.asDiagonal());
  const double op2 = detail::spectral_norm(vinvsqrt.asDiagonal() * M2);
  out.s_grid = opt.s_grid;
  out.moments_finite = true;
  for (double s : out.s_grid) {
    auto integrand = [&](double r) {
      return std::pow(detail::spectral_norm(M1 * (A + r * Vc).partialPivLu().solve(M2)), s) * rho.density(r);
    };
    const double I = integrate(integrand, rho.lower(), rho.upper(), bp, 1e-9).value;
    out.moments.push_back(I);
    out.moment_bounds.push_back(std::pow(static_cast<double>(n) * kEmpiricalCW * op1 * op2 * sup, s) / (1 - s));
    if (!std::isfinite(I)) out.moments_finite = false;
  }
  out.log_convex = true;
  out.lyapunov = true;
  for (std::size_t i = 0; i + 2 < out.moments.size(); ++i) {
    const double l0 = std::log(out.moments[i]), l1 = std::log(out.moments[i + 1]), l2 = std::log(out.moments[i + 2]);
    if (2 * l1 > l0 + l2 + 1e-7) out.log_convex = false;
  }
  for (std::size_t i = 0; i + 1 < out.moments.size(); ++i)
    if (std::log(out.moments[i]) / out.s_grid[i] > std::log(out.moments[i + 1]) / out.s_grid[i + 1] + 1e-7)
      out.lyapunov = false;

  out.pass = lx.size() >= 2 && std::abs(out.fit.slope + 1.0) <= opt.slope_tolerance && out.moments_finite &&
             out.log_convex && out.lyapunov;
  return out;
}

// ---------------------------------------------------------------------------
// Weighted construction for the non-local a-priori bound

/// alpha(k) = (exp(-c|k-x|_1) + exp(-c|k-y|_1)) / 2 with
/// c = ln(1 + |ubar| / (2 ||u||_1)) / n and D = sum_k alpha(k).
struct WeightProfile {
  Site x, y;
  int dim = 1;
  double c = 0.0;
  double D = 0.0;
  double ubar = 0.0;     // |ubar|; u is replaced by -u when ubar < 0
  bool flipped = false;
  int n = 0;             // l1-diameter of Theta (1 is used when Theta is a point)

  double alpha(const Site& k) const { return 0.5 * (std::exp(-c * dist1(k, x)) + std::exp(-c * dist1(k, y))); }

  /// D in one dimension, (e^c + 1) / (e^c - 1).
  double D1() const {
    const double e = std::expm1(c);
    return (e + 2.0) / e;
  }

  /// Sum of alpha over the box of half-width N centred at x (x == y gives
  /// the full geometric series up to the truncated tail).
  double alpha_sum(int N) const {
    double acc = 0.0;
    for (const auto& k : box(N, x)) acc += alpha(k);
    return acc;
  }

  /// Upper bound on sum_k exp(-c|k-x|_1) outside box(N, x).
  double tail_bound(int N) const {
    const double q = std::exp(-c);
    const double one_dim = D1();
    const double inside = (1 + q - 2 * std::pow(q, N + 1)) / (1 - q);
    return std::pow(one_dim, dim) - std::pow(inside, dim);
  }
};

inline WeightProfile weight_profile(const SingleSitePotential& u, const Site& x, const Site& y) {
  if (u.ubar() == 0.0) throw AssumptionError("weight_profile: ubar = 0, so the non-degeneracy assumption fails");
  if (x.dim() != u.dim() || y.dim() != u.dim()) throw GeometryError("weight_profile: dimension mismatch");
  WeightProfile w;
  w.x = x;
  w.y = y;
  w.dim = u.dim();
  w.flipped = u.ubar() < 0;
  w.ubar = std::abs(u.ubar());
  w.n = std::max(1, u.n_l1());
  w.c = std::log1p(w.ubar / (2.0 * u.l1_norm())) / w.n;
  w.D = std::pow(w.D1(), w.dim);
  return w;
}

struct TransformedPotential {
  SiteSet domain;
  std::vector<double> W;      // W(k) = sum_j alpha(j) u(k - j)
  std::vector<double> alpha;
  double min_ratio = 0.0;     // min_k W(k) / alpha(k)
  std::optional<Site> witness;  // first site violating W >= alpha ubar / 2
  double W_x = 0.0, W_y = 0.0;
  bool bound_holds = false;   // W >= alpha ubar / 2 everywhere and W >= ubar / 4 at x, y
};

inline TransformedPotential w_transform(const WeightProfile& p, const SingleSitePotential& u, const SiteSet& lambda) {
  const SingleSitePotential ue = p.flipped ? u.negated() : u;
  TransformedPotential out;
  out.domain = lambda;
  out.min_ratio = std::numeric_limits<double>::infinity();
  auto W_at = [&](const Site& k) {
    double acc = 0.0;
    for (std::size_t t = 0; t < ue.size(); ++t) acc += p.alpha(k - ue.support()[t]) * ue.values()[t];
    return acc;
  };
  out.bound_holds = true;
  for (const auto& k : lambda) {
    const double w = W_at(k), a = p.alpha(k);
    out.W.push_back(w);
    out.alpha.push_back(a);
    out.min_ratio = std::min(out.min_ratio, w / a);
    if (!(w >= a * p.ubar / 2)) {
      out.bound_holds = false;
      if (!out.witness) out.witness = k;
    }
  }
  out.W_x = W_at(p.x);
  out.W_y = W_at(p.y);
  if (!(out.W_x >= p.ubar / 4) || !(out.W_y >= p.ubar / 4)) out.bound_holds = false;
  return out;
}

struct NonlocalAprioriResult {
  AssumptionReport assumptions;
  std::vector<double> lambdas;
  std::vector<MomentEstimate> estimates;
  stats::LinearFit fit;  // log E{|G|^s} against log lambda on the large-lambda half
  double s = 0.0;
  double tolerance = 0.1;
  bool pass = false;
};

/// E{|G_Gamma(z;x,y)|^s} along a lambda grid; the slope over the upper half of
/// the grid must not exceed -s + tolerance.
inline NonlocalAprioriResult nonlocal_apriori_check(const SiteSet& gamma, const Site& x, const Site& y,
                                                    std::vector<double> lambdas, const SingleSitePotential& u,
                                                    const DisorderDistribution& rho, MomentConfig cfg,
                                                    double tolerance = 0.1) {
  NonlocalAprioriResult out;
  out.assumptions = check_assumptions(u, rho);
  if (!out.assumptions.b1 || !out.assumptions.b2) {
    std::string why;
    if (!out.assumptions.b1) why += " density not in W^{1,1} (||rho'||_1 = " + std::to_string(out.assumptions.rho_prime_l1) + ")";
    if (!out.assumptions.b2) why += " ubar = 0";
    throw AssumptionError("nonlocal_apriori_check refused:" + why);
  }
  if (lambdas.size() < 4) throw ConfigError("nonlocal_apriori_check: need at least four lambda values");
  std::sort(lambdas.begin(), lambdas.end());
  out.lambdas = lambdas;
  out.s = cfg.s;
  out.tolerance = tolerance;
  cfg.exponent = cfg.s;
  for (double l : lambdas) {
    cfg.lambda = l;
    out.estimates.push_back(fractional_moment(gamma, x, y, cfg, u, rho));
  }
  std::vector<double> lx, ly;
  for (std::size_t i = lambdas.size() / 2; i < lambdas.size(); ++i) {
    lx.push_back(std::log(lambdas[i]));
    ly.push_back(std::log(out.estimates[i].mean));
  }
  out.fit = stats::linear_fit(lx, ly);
  out.pass = out.fit.slope <= -cfg.s + tolerance;
  return out;
}

}  // namespace alloy
