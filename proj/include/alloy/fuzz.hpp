#pragma once

// Randomised case generators for the identity, averaging, weighted-potential
// and Combes-Thomas checks. Case i is drawn from sample_engine(seed, i).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "alloy/averaging.hpp"
#include "alloy/geometry.hpp"
#include "alloy/model.hpp"
#include "alloy/parallel.hpp"
#include "alloy/resolvent.hpp"
#include "alloy/rng.hpp"

namespace alloy {

/// Random support inside the unit cube around the origin, origin included.
inline SingleSitePotential random_potential(Engine& eng, int dim, bool positive_mean = false) {
  while (true) {
    std::vector<std::pair<Site, double>> e;
    for (const auto& t : box(1, Site(dim))) {
      if (norm_inf(t) != 0 && uniform_int(eng, 0, 2) == 0) continue;
      double v = uniform_in(eng, -1, 1);
      if (std::abs(v) < 0.05) v = 0.5;
      e.push_back({t, v});
    }
    SingleSitePotential u(e);
    if (!positive_mean) return u;
    if (u.ubar() > 0.05) return u;
    if (u.ubar() < -0.05) return u.negated();
  }
}

struct IdentityCase {
  int dim = 1;
  RealOperator H;
  SiteSet lambda1, lambda2;  // nested pair for the Schur identities
  SiteSet cut;               // cut for the geometric identities
  cplx z;
};

/// Gamma: an interval (d = 1) or a square (d = 2) with about a tenth of the
/// sites removed, at most max_sites sites. Lambda2 is a sup-ball inside Gamma
/// and Lambda1 the part of a smaller ball with no neighbour in Gamma \ Lambda2.
inline IdentityCase random_identity_case(Engine& eng, std::size_t max_sites = 300) {
  IdentityCase c;
  c.dim = uniform_int(eng, 1, 2);
  SiteSet full(c.dim);
  if (c.dim == 1) {
    const int n = uniform_int(eng, 6, static_cast<int>(max_sites));
    full = box(n / 2, Site{0});
  } else {
    const int side_max = static_cast<int>(std::sqrt(static_cast<double>(max_sites)));
    const int half = uniform_int(eng, 1, std::max(1, (side_max - 1) / 2));
    full = box(half, Site{0, 0});
  }
  const SiteSet gamma = full.filter([&](const Site&) { return uniform_int(eng, 0, 9) != 0; });
  const SiteSet domain = gamma.empty() ? full : gamma;
  const auto u = random_potential(eng, c.dim);
  const auto omega = DisorderField::sample(coupling_closure(domain, u), DisorderDistribution::uniform(-1, 1), eng);
  c.H = hamiltonian(domain, uniform_in(eng, 0, 5), u, omega);

  const Site centre = domain[static_cast<std::size_t>(uniform_int(eng, 0, static_cast<int>(domain.size()) - 1))];
  const int r2 = uniform_int(eng, 1, 6);
  const int r1 = uniform_int(eng, 0, r2 - 1);
  c.lambda2 = domain.filter([&](const Site& s) { return dist_inf(s, centre) <= r2; });
  c.lambda1 = c.lambda2.filter([&](const Site& s) {
    if (dist_inf(s, centre) > r1) return false;
    for (const auto& n : neighbors(s))
      if (domain.contains(n) && !c.lambda2.contains(n)) return false;
    return true;
  });
  if (c.lambda1.empty()) c.lambda1 = c.lambda2;
  c.cut = domain.filter([&](const Site&) { return uniform_int(eng, 0, 1) == 1; });
  c.z = cplx(uniform_in(eng, -4, 4), uniform_in(eng, 0.05, 1.0) * (uniform_int(eng, 0, 1) ? 1 : -1));
  return c;
}

struct IdentityCaseResult {
  std::size_t index = 0;
  std::size_t sites = 0;
  int dim = 1;
  std::vector<IdentityReport> reports;
  bool pass = true;
};

inline IdentityCaseResult run_identity_case(std::uint64_t seed, std::size_t i, std::size_t max_sites, double tol) {
  Engine eng = sample_engine(seed, i);
  const auto c = random_identity_case(eng, max_sites);
  IdentityCaseResult r;
  r.index = i;
  r.sites = c.H.index.size();
  r.dim = c.dim;
  for (auto& rep : verify_schur_identities(c.H, c.lambda1, c.lambda2, c.z, tol)) r.reports.push_back(rep);
  for (auto& rep : verify_geometric_identities(c.H, c.cut, c.z, tol)) r.reports.push_back(rep);
  for (const auto& rep : r.reports) r.pass = r.pass && rep.pass;
  return r;
}

inline std::vector<IdentityCaseResult> identity_fuzz(std::size_t cases, std::uint64_t seed, std::size_t max_sites, double tol,
                                                     unsigned workers = 1) {
  return parallel_map(cases, workers, [&](std::size_t i) { return run_identity_case(seed, i, max_sites, tol); });
}

/// Changes every coupling whose translate of Theta meets Gamma only inside
/// Lambda and returns the largest change of B^Lambda relative to its size.
inline double b_independence_deviation(std::uint64_t seed, std::size_t i) {
  Engine eng = sample_engine(seed, i);
  const auto c = random_identity_case(eng, 200);
  const SiteSet& gamma = c.H.index;
  const auto u = random_potential(eng, c.dim);
  const SiteSet lambda = c.lambda2;
  const SiteSet closure = coupling_closure(gamma, u);
  auto omega = DisorderField::sample(closure, DisorderDistribution::uniform(-1, 1), eng);
  const double lam = uniform_in(eng, 0.5, 5);
  const auto B0 = schur_B(hamiltonian(gamma, lam, u, omega), lambda, c.z);
  std::size_t changed = 0;
  for (const auto& k : closure) {
    bool inside = true;
    for (const auto& t : u.support())
      if (gamma.contains(k + t) && !lambda.contains(k + t)) inside = false;
    if (inside) {
      omega.set(k, omega.at(k) + uniform_in(eng, -3, 3));
      ++changed;
    }
  }
  const auto B1 = schur_B(hamiltonian(gamma, lam, u, omega), lambda, c.z);
  if (B0.matrix.size() == 0) return 0.0;
  const double scale = std::max(B0.matrix.cwiseAbs().maxCoeff(), 1e-300);
  (void)changed;
  return (B0.matrix - B1.matrix).cwiseAbs().maxCoeff() / scale;
}

inline ComplexMatrix random_complex_matrix(Engine& eng, int n) {
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(standard_normal(eng), standard_normal(eng));
  return m;
}

/// A = S + iP with S symmetric and P positive semi-definite.
inline ComplexMatrix random_dissipative_matrix(Engine& eng, int n) {
  RealMatrix S(n, n), Q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      S(i, j) = standard_normal(eng);
      Q(i, j) = standard_normal(eng);
    }
  const RealMatrix sym = (S + S.transpose()) / 2;
  const RealMatrix P = Q * Q.transpose() / n;
  return sym.cast<cplx>() + cplx(0, 1) * P.cast<cplx>();
}

inline DisorderDistribution random_density(Engine& eng) {
  const double c = uniform_in(eng, -1, 1), w = uniform_in(eng, 0.3, 1.5);
  switch (uniform_int(eng, 0, 2)) {
    case 0: return DisorderDistribution::uniform(c - w, c + w);
    case 1: return DisorderDistribution::triangular(c, w);
    default: return DisorderDistribution::bump(c, w);
  }
}

/// Invertible V with condition number at most about 1e3.
inline ComplexMatrix random_conditioned(Engine& eng, int n) {
  while (true) {
    ComplexMatrix V = random_complex_matrix(eng, n);
    Eigen::JacobiSVD<ComplexMatrix> svd(V);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) * 1e3 >= sv(0)) return V;
  }
}

inline DetAverageResult det_average_case(std::uint64_t seed, std::size_t i, int n, double kappa = 1.0) {
  Engine eng = sample_engine(seed, i);
  const auto A = random_complex_matrix(eng, n);
  const auto V = random_conditioned(eng, n);
  return det_average_check(A, V, random_density(eng), uniform_in(eng, 0.1, 0.9), kappa);
}

inline InverseNormResult inverse_norm_case(std::uint64_t seed, std::size_t i, int n) {
  Engine eng = sample_engine(seed, i);
  const auto A = random_complex_matrix(eng, n);
  const auto V = random_conditioned(eng, n);
  const auto rho = random_density(eng);
  return inverse_norm_check(A, V, rho, uniform_in(eng, 0.1, 0.9), rho.support_radius());
}

inline MonotoneTailResult monotone_case(std::uint64_t seed, std::size_t i, double slope_tolerance = 0.1) {
  Engine eng = sample_engine(seed, i);
  const int n = uniform_int(eng, 2, 5);
  const auto A = random_dissipative_matrix(eng, n);
  RealMatrix V = RealMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) V(k, k) = uniform_in(eng, 0.3, 3.0);
  const auto M1 = random_complex_matrix(eng, n), M2 = random_complex_matrix(eng, n);
  MonotoneTailOptions opt;
  opt.slope_tolerance = slope_tolerance;
  return monotone_tail_check(A, V, M1, M2, random_density(eng), opt);
}

struct AppendixCase {
  WeightProfile profile;
  TransformedPotential transformed;
  std::size_t sites = 0;
};

inline AppendixCase appendix_case(std::uint64_t seed, std::size_t i) {
  Engine eng = sample_engine(seed, i);
  const int d = uniform_int(eng, 1, 2);
  const auto u = random_potential(eng, d, true);
  const int L = uniform_int(eng, 2, d == 1 ? 40 : 8);
  const SiteSet lambda = box(L, Site(d));
  const Site x = lambda[static_cast<std::size_t>(uniform_int(eng, 0, static_cast<int>(lambda.size()) - 1))];
  const Site y = lambda[static_cast<std::size_t>(uniform_int(eng, 0, static_cast<int>(lambda.size()) - 1))];
  AppendixCase c;
  c.profile = weight_profile(u, x, y);
  c.transformed = w_transform(c.profile, u, lambda);
  c.sites = lambda.size();
  return c;
}

struct CombesThomasCase {
  double M = 0.0;
  double gamma = 0.0;
  double K = 0.0;
  cplx z;
  CombesThomasCheck check;
};

/// |z| >= K + M with K the operator norm bound, so dist(z, spectrum) >= M.
inline CombesThomasCase combes_thomas_case(std::uint64_t seed, std::size_t i) {
  Engine eng = sample_engine(seed, i);
  const int d = uniform_int(eng, 1, 2);
  const auto u = random_potential(eng, d);
  const auto rho = random_density(eng);
  const SiteSet gamma = d == 1 ? box(uniform_int(eng, 10, 60), Site{0}) : box(uniform_int(eng, 2, 6), Site{0, 0});
  const double lam = uniform_in(eng, 0, 3);
  const auto omega = DisorderField::sample(coupling_closure(gamma, u), rho, eng);
  CombesThomasCase c;
  c.K = operator_norm_bound(d, lam, rho.support_radius(), u);
  c.M = 4.0 * d * std::exp(uniform_in(eng, 0.1, 2.0));
  const auto ct = combes_thomas(d, c.M);
  c.gamma = ct.gamma;
  const double phase = uniform_in(eng, 0, 2 * M_PI);
  c.z = std::polar(c.K + c.M + uniform_in(eng, 0, 2), phase);
  c.check = check_combes_thomas(ct, hamiltonian(gamma, lam, u, omega), c.z);
  return c;
}

}  // namespace alloy
