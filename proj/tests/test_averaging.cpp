#include <gtest/gtest.h>

#include <cmath>

#include "alloy/averaging.hpp"
#include "alloy/rng.hpp"

using namespace alloy;

namespace {

ComplexMatrix random_complex(Engine& eng, int n, double scale = 1.0) {
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * cplx(g(eng), g(eng));
  return m;
}

ComplexMatrix random_dissipative(Engine& eng, int n) {
  std::normal_distribution<double> g;
  RealMatrix S(n, n), P(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      S(i, j) = g(eng);
      P(i, j) = g(eng);
    }
  S = (S + S.transpose()).eval() / 2;
  RealMatrix Q = P * P.transpose() / n;
  return S.cast<cplx>() + cplx(0, 1) * Q.cast<cplx>();
}

}  // namespace

TEST(Averaging, DetAverageScalarClosedForm) {
  ComplexMatrix A = ComplexMatrix::Zero(1, 1), V = ComplexMatrix::Identity(1, 1);
  auto rho = DisorderDistribution::uniform(-1, 1);
  for (double s : {0.2, 0.5, 0.8}) {
    auto r = det_average_check(A, V, rho, s);
    EXPECT_NEAR(r.integral, 1.0 / (1.0 - s), 1e-7);
    EXPECT_NEAR(r.bound1, std::pow(s, -s) / (1 - s), 1e-12);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Averaging, DetAverageRandomMatrices) {
  Engine eng(11);
  const std::vector<DisorderDistribution> dens{DisorderDistribution::uniform(-2, 1), DisorderDistribution::triangular(0, 1.5),
                                               DisorderDistribution::bump(0.3, 1)};
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    auto A = random_complex(eng, n), V = random_complex(eng, n);
    auto r = det_average_check(A, V, dens[trial % 3], 0.2 + 0.02 * (trial % 30));
    EXPECT_TRUE(r.pass) << trial << " " << r.integral << " " << r.bound1;
  }
}

TEST(Averaging, TwoRegionBoundDominatesOptimised) {
  Engine eng(3);
  auto A = random_complex(eng, 3), V = random_complex(eng, 3);
  auto rho = DisorderDistribution::triangular(0, 1);
  const double s = 0.4;
  const double kstar = s * rho.l1_norm() / (2 * rho.sup_norm());
  auto at = det_average_check(A, V, rho, s, kstar);
  EXPECT_NEAR(at.bound2, at.bound1, 1e-12 * at.bound1);
  for (double k : {0.01, 0.1, 0.5, 1.0, 3.0, 50.0}) {
    auto r = det_average_check(A, V, rho, s, k);
    EXPECT_GE(r.bound2, r.bound1 * (1 - 1e-12));
  }
}

TEST(Averaging, DetAverageRejectsSingular) {
  ComplexMatrix V = ComplexMatrix::Zero(2, 2);
  V(0, 0) = 1;
  EXPECT_THROW(det_average_check(ComplexMatrix::Identity(2, 2), V, DisorderDistribution::uniform(0, 1), 0.5), AssumptionError);
  EXPECT_THROW(det_average_check(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2),
                                 DisorderDistribution::uniform(0, 1), 1.0),
               AssumptionError);
}

TEST(Averaging, InverseNormScalarEquality) {
  ComplexMatrix V(1, 1);
  V(0, 0) = cplx(0.5, -2.0);
  auto r = inverse_norm_check(ComplexMatrix::Identity(1, 1), V, DisorderDistribution::uniform(-1, 1), 0.5);
  EXPECT_NEAR(r.inverse_norm, r.norm_bound, 1e-14);
  EXPECT_TRUE(r.pass);
}

TEST(Averaging, InverseNormRandomMatrices) {
  Engine eng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    auto A = random_complex(eng, n), V = random_complex(eng, n);
    auto r = inverse_norm_check(A, V, DisorderDistribution::triangular(0.2, 1), 0.5, 2.0);
    EXPECT_TRUE(r.pass) << trial;
    EXPECT_LE(r.inverse_norm, r.norm_bound * (1 + 1e-12));
  }
  EXPECT_THROW(inverse_norm_check(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2),
                                  DisorderDistribution::uniform(0, 3), 0.5, 2.0),
               AssumptionError);
}

TEST(Averaging, MonotoneTailScalarClosedForm) {
  ComplexMatrix A(1, 1), M = ComplexMatrix::Identity(1, 1);
  A(0, 0) = cplx(0, 1);
  MonotoneTailOptions opt;
  opt.t_grid = {0.9, 0.5, 0.1, 0.01, 1e-3};
  auto r = monotone_tail_check(A, RealMatrix::Identity(1, 1), M, M, DisorderDistribution::uniform(-1, 1), opt);
  for (std::size_t i = 0; i < opt.t_grid.size(); ++i) {
    const double t = opt.t_grid[i];
    EXPECT_NEAR(r.measure[i], 2 * std::sqrt(1 / (t * t) - 1), 1e-6 * r.measure[i]) << t;
  }
  EXPECT_LE(r.implied_cw, kEmpiricalCW);
  EXPECT_GT(r.implied_cw, 1.99);
}

TEST(Averaging, MonotoneTailRandomDissipative) {
  Engine eng(17);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 3 + trial % 3;
    auto A = random_dissipative(eng, n);
    RealMatrix V = RealMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) V(i, i) = pos(eng);
    auto M1 = random_complex(eng, n), M2 = random_complex(eng, n);
    auto r = monotone_tail_check(A, V, M1, M2, DisorderDistribution::triangular(0, 1));
    EXPECT_NEAR(r.fit.slope, -1.0, 0.1) << trial;
    EXPECT_TRUE(r.moments_finite);
    EXPECT_TRUE(r.log_convex);
    EXPECT_TRUE(r.lyapunov);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Averaging, MonotoneTailRejectsBadInput) {
  ComplexMatrix A(1, 1), M = ComplexMatrix::Identity(1, 1);
  A(0, 0) = cplx(0, -1);
  auto rho = DisorderDistribution::uniform(0, 1);
  EXPECT_THROW(monotone_tail_check(A, RealMatrix::Identity(1, 1), M, M, rho), AssumptionError);
  ComplexMatrix B = ComplexMatrix::Identity(2, 2) * cplx(0, 1);
  RealMatrix V(2, 2);
  V << 1, 0.1, 0.1, 1;
  ComplexMatrix I2 = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(monotone_tail_check(B, V, I2, I2, rho), AssumptionError);
  V << 1, 0, 0, -1;
  EXPECT_THROW(monotone_tail_check(B, V, I2, I2, rho), AssumptionError);
}

TEST(Averaging, WeightProfileConstants) {
  auto u = SingleSitePotential::chain({1, -0.5});
  auto p = weight_profile(u, Site{0}, Site{3});
  EXPECT_NEAR(p.c, std::log(7.0 / 6.0), 1e-15);
  EXPECT_NEAR(p.D, 13.0, 1e-12);

  SingleSitePotential u2({{Site{0, 0}, 1.0}, {Site{1, 0}, -0.5}});
  auto p2 = weight_profile(u2, Site{0, 0}, Site{2, 1});
  EXPECT_NEAR(p2.D, 169.0, 1e-10);
  // direct lattice sum of exp(-c|k|_1)
  double direct = 0.0;
  for (const auto& k : box(300, Site{0, 0})) direct += std::exp(-p2.c * norm1(k));
  EXPECT_NEAR(direct, p2.D, 1e-8 * p2.D);
  EXPECT_NEAR(p2.alpha_sum(300), direct, 1e-8 * direct);
  EXPECT_LE(p2.tail_bound(300), 1e-8);

  EXPECT_THROW(weight_profile(SingleSitePotential::chain({1, -1}), Site{0}, Site{0}), AssumptionError);
}

TEST(Averaging, WeightProfileLipschitz) {
  auto u = SingleSitePotential::chain({1, -0.4, 0.3});
  auto p = weight_profile(u, Site{-2}, Site{5});
  const double factor = std::exp(p.c * p.n) - 1;
  for (int k = -20; k <= 20; ++k)
    for (int j = k - p.n; j <= k + p.n; ++j)
      EXPECT_LE(std::abs(p.alpha(Site{k}) - p.alpha(Site{j})), p.alpha(Site{k}) * factor + 1e-15);
}

TEST(Averaging, TransformedPotentialLowerBound) {
  Engine eng(23);
  std::uniform_real_distribution<double> val(-1, 1);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 2;
    std::vector<std::pair<Site, double>> entries;
    for (const auto& t : box(1, Site(d)))
      if (uniform_int(eng, 0, 2) > 0 || norm1(t) == 0) entries.push_back({t, val(eng)});
    if (entries.size() < 2) continue;
    entries.front().second = entries.front().second == 0 ? 0.5 : entries.front().second;
    double sum = 0;
    for (auto& e : entries) sum += e.second;
    if (std::abs(sum) < 0.05) continue;
    SingleSitePotential u(entries);
    Site x(d), y(d);
    y[0] = 3;
    auto p = weight_profile(u, x, y);
    auto w = w_transform(p, u, box(6, Site(d)));
    EXPECT_TRUE(w.bound_holds) << trial << " min ratio " << w.min_ratio;
    EXPECT_FALSE(w.witness.has_value());
    EXPECT_GE(w.min_ratio, p.ubar / 2);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Averaging, TransformedPotentialNegativeMean) {
  auto u = SingleSitePotential::chain({-1, 0.5});
  auto p = weight_profile(u, Site{0}, Site{0});
  EXPECT_TRUE(p.flipped);
  auto w = w_transform(p, u, box(10, Site{0}));
  EXPECT_TRUE(w.bound_holds);
  EXPECT_GE(w.W_x, 0.125);
}

TEST(Averaging, NonlocalRefusesWithoutRegularDensity) {
  MomentConfig cfg;
  cfg.samples = 200;
  std::vector<Site> v{Site{0}, Site{1}, Site{2}};
  EXPECT_THROW(nonlocal_apriori_check(SiteSet(1, v), Site{0}, Site{2}, {1, 2, 4, 8}, SingleSitePotential::chain({1, -0.5}),
                                      DisorderDistribution::uniform(0, 1), cfg),
               AssumptionError);
  EXPECT_THROW(nonlocal_apriori_check(SiteSet(1, v), Site{0}, Site{2}, {1, 2, 4, 8}, SingleSitePotential::chain({1, -1}),
                                      DisorderDistribution::triangular(0, 1), cfg),
               AssumptionError);
}

TEST(Averaging, NonlocalMomentDecaysInCoupling) {
  MomentConfig cfg;
  cfg.s = 0.3;
  cfg.samples = 800;
  cfg.z = cplx(0.3, 0.01);
  std::vector<Site> v;
  for (int i = 0; i < 5; ++i) v.push_back(Site{i});
  auto r = nonlocal_apriori_check(SiteSet(1, v), Site{0}, Site{4}, {1, 2, 4, 8, 16, 32, 64, 128},
                                  SingleSitePotential::chain({1, -0.5}), DisorderDistribution::triangular(0, 1), cfg);
  EXPECT_TRUE(r.pass) << r.fit.slope;
  EXPECT_LE(r.fit.slope, -cfg.s + 0.1);
}

TEST(Averaging, DetAverageUnitInterval) {
  auto r = det_average_check(ComplexMatrix::Zero(1, 1), ComplexMatrix::Identity(1, 1), DisorderDistribution::uniform(0, 1), 0.5);
  EXPECT_NEAR(r.integral, 2.0, 1e-8);
  EXPECT_NEAR(r.bound1, 4.0, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(Averaging, InverseNormDiagonalEquality) {
  ComplexMatrix V = ComplexMatrix::Zero(2, 2);
  V(0, 0) = 2.0;
  V(1, 1) = 0.5;
  auto r = inverse_norm_check(ComplexMatrix::Identity(2, 2), V, DisorderDistribution::uniform(-1, 1), 0.5);
  EXPECT_NEAR(r.inverse_norm, 2.0, 1e-14);
  EXPECT_NEAR(r.norm_bound, 2.0, 1e-14);
}

TEST(Averaging, NonlocalSmallExponentTendsToOne) {
  MomentConfig cfg;
  cfg.s = 1e-6;
  cfg.samples = 200;
  std::vector<Site> v{Site{0}, Site{1}, Site{2}};
  auto r = nonlocal_apriori_check(SiteSet(1, v), Site{0}, Site{2}, {1, 2, 4, 8}, SingleSitePotential::chain({1, -0.5}),
                                  DisorderDistribution::triangular(0, 1), cfg);
  for (const auto& e : r.estimates) EXPECT_NEAR(e.mean, 1.0, 1e-4);
}
