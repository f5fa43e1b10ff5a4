#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "alloy/resolvent.hpp"

using namespace alloy;

namespace {

SiteSet range1(int a, int b) {
  std::vector<Site> v;
  for (int x = a; x <= b; ++x) v.push_back(Site{x});
  return SiteSet(1, v);
}

// Independent dense inverse through a full-pivoting LU.
ComplexMatrix oracle_inverse(const RealMatrix& H, cplx z) {
  ComplexMatrix M = H.cast<cplx>();
  M.diagonal().array() -= z;
  return M.fullPivLu().inverse();
}

RealOperator random_operator(const SiteSet& gamma, const SingleSitePotential& u, double lambda, Engine& eng) {
  auto omega = DisorderField::sample(coupling_closure(gamma, u), DisorderDistribution::uniform(-1, 1), eng);
  return hamiltonian(gamma, lambda, u, omega);
}

const SingleSitePotential kTwoSite = SingleSitePotential::chain({1, -0.5});

}  // namespace

TEST(Resolvent, SingleSiteFree) {
  auto H = hamiltonian(range1(0, 0), 0.0, SingleSitePotential::point(1), DisorderField::constant(range1(0, 0), 0));
  auto g = green(H, cplx(0, 1), {{Site{0}, Site{0}}});
  EXPECT_NEAR(std::abs(g[0] - cplx(0, 1)), 0.0, 1e-15);
}

TEST(Resolvent, TwoSiteFree) {
  auto H = hamiltonian(range1(0, 1), 0.0, SingleSitePotential::point(1), DisorderField::constant(range1(0, 1), 0));
  auto g = green(H, cplx(0, 2), {{Site{0}, Site{1}}, {Site{0}, Site{5}}});
  EXPECT_NEAR(std::abs(g[0] - cplx(-0.2, 0)), 0.0, 1e-15);
  EXPECT_EQ(g[1], cplx(0, 0));
}

TEST(Resolvent, MatchesDenseOracleAndResidual) {
  Engine eng(21);
  auto gamma = range1(0, 7);
  auto H = random_operator(gamma, kTwoSite, 1.0, eng);
  const cplx z(0.3, 0.05);
  GreenEvaluator g(H, z);
  auto G = oracle_inverse(H.matrix, z);
  for (std::size_t i = 0; i < gamma.size(); ++i)
    for (std::size_t j = 0; j < gamma.size(); ++j)
      EXPECT_LT(std::abs(g(gamma[i], gamma[j]) - G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))), 1e-10);
  for (std::size_t j = 0; j < gamma.size(); ++j)
    EXPECT_LT(g.residual(j), 1e-10 * (1 + g.column(j).cwiseAbs().maxCoeff()));
}

TEST(Resolvent, SingularRealEnergyDetected) {
  Engine eng(5);
  auto H = random_operator(range1(0, 9), kTwoSite, 1.0, eng);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(H.matrix);
  try {
    GreenEvaluator g(H, cplx(es.eigenvalues()(3), 0));
    FAIL() << "expected a singular factorisation";
  } catch (const SingularError& e) {
    EXPECT_LT(e.rcond(), kSingularRcond);
  }
}

TEST(Resolvent, SymmetryNormAndLipschitz) {
  Engine eng(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto gamma = box(3, 2);
    auto H = random_operator(gamma, SingleSitePotential({{Site{0, 0}, 1.0}, {Site{1, 0}, -0.4}}), 2.0, eng);
    const cplx z(uniform_in(eng, -3, 3), uniform_in(eng, 0.05, 1));
    auto G = resolvent_matrix(H.matrix, z);
    EXPECT_LT((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::JacobiSVD<ComplexMatrix> svd(G);
    EXPECT_LE(svd.singularValues()(0), 1.0 / z.imag() * (1 + 1e-12));

    Eigen::SelfAdjointEigenSolver<RealMatrix> es(H.matrix, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double E = 0.5 * (ev(10) + ev(11));
    const double E2 = E + 0.1 * (ev(11) - ev(10)) * 0.5;
    auto dist = [&](double e) { return (ev.array() - e).abs().minCoeff(); };
    auto G1 = resolvent_matrix(H.matrix, E);
    auto G2 = resolvent_matrix(H.matrix, E2);
    const double bound = std::abs(E - E2) / dist(E) / dist(E2);
    EXPECT_LE((G1 - G2).cwiseAbs().maxCoeff(), bound * (1 + 1e-9));
  }
}

TEST(Resolvent, SchurBVanishesWithoutExterior) {
  Engine eng(1);
  auto gamma = range1(0, 5);
  auto H = random_operator(gamma, kTwoSite, 1.0, eng);
  auto B = schur_B(H, gamma, cplx(0, 1));
  EXPECT_EQ(B.matrix, ComplexMatrix::Zero(6, 6));
}

TEST(Resolvent, SchurBThreeSiteChain) {
  auto gamma = range1(0, 2);
  auto H = hamiltonian(gamma, 0.0, SingleSitePotential::point(1), DisorderField::constant(gamma, 0));
  const cplx z(0, 1);
  auto B = schur_B(H, range1(0, 0), z);
  // Corner entry of the free two-site resolvent: -z / (z^2 - 1) = i/2.
  EXPECT_LT(std::abs(B.matrix(0, 0) - (-z / (z * z - 1.0))), 1e-14);
  EXPECT_LT(std::abs(B.matrix(0, 0) - cplx(0, 0.5)), 1e-14);
}

TEST(Resolvent, SchurBMatchesNeighbourSum) {
  Engine eng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 2;
    auto gamma = d == 1 ? range1(0, 11) : box(2, 2).filter([](const Site& s) { return s[0] + s[1] < 3; });
    auto H = random_operator(gamma, d == 1 ? kTwoSite : SingleSitePotential::point(2), 1.5, eng);
    auto lambda = d == 1 ? range1(3, 6) : box(1, Site{0, 0}).filter([](const Site& s) { return s[0] >= 0 && s[1] >= 0; });
    const cplx z(uniform_in(eng, -1, 1), 0.2);
    auto B = schur_B(H, lambda, z);
    auto rest = gamma.minus(lambda);
    auto Grest = oracle_inverse(restrict(H, rest).matrix, z);
    auto inner = interior_boundary(lambda);
    for (std::size_t a = 0; a < lambda.size(); ++a)
      for (std::size_t b = 0; b < lambda.size(); ++b) {
        cplx expect = 0;
        if (inner.contains(lambda[a]) && inner.contains(lambda[b]))
          for (const auto& k : neighbors(lambda[a]))
            for (const auto& l : neighbors(lambda[b]))
              if (rest.contains(k) && rest.contains(l))
                expect += Grest(static_cast<Eigen::Index>(rest.index(k)), static_cast<Eigen::Index>(rest.index(l)));
        EXPECT_LT(std::abs(B.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) - expect), 1e-11);
      }
  }
}

TEST(Resolvent, SchurBIndependentOfInsideCouplings) {
  Engine eng(13);
  auto gamma = range1(0, 14);
  auto lambda = range1(5, 9);
  auto omega = DisorderField::sample(coupling_closure(gamma, kTwoSite), DisorderDistribution::uniform(-1, 1), eng);
  auto H = hamiltonian(gamma, 1.0, kTwoSite, omega);
  auto B = schur_B(H, lambda, cplx(0.1, 0.3));
  // Couplings k with k and k+1 in Lambda only touch V on Lambda.
  for (int k = 5; k <= 8; ++k) omega.set(Site{k}, omega.at(Site{k}) + 0.7);
  auto B2 = schur_B(hamiltonian(gamma, 1.0, kTwoSite, omega), lambda, cplx(0.1, 0.3));
  EXPECT_LE((B.matrix - B2.matrix).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Resolvent, SchurIdentitiesChain) {
  Engine eng(14);
  auto gamma = range1(0, 5);
  auto H = random_operator(gamma, kTwoSite, 1.0, eng);
  auto r = verify_schur_identities(H, range1(0, 1), range1(0, 3), cplx(0, 1));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_LT(r[0].deviation, 1e-10);
  EXPECT_LT(r[1].deviation, 1e-10);
  EXPECT_TRUE(r[0].pass && r[1].pass);
}

TEST(Resolvent, SchurNestedDegenerates) {
  Engine eng(15);
  auto gamma = box(3, 2);
  auto H = random_operator(gamma, SingleSitePotential::point(2), 1.0, eng);
  auto r = verify_schur_identities(H, box(1, 2), box(1, 2), cplx(0.2, 0.4));
  EXPECT_TRUE(r[0].pass);
  EXPECT_EQ(r[0].deviation, r[1].deviation);
}

TEST(Resolvent, SchurNestedHypothesisEnforced) {
  Engine eng(16);
  auto gamma = range1(0, 9);
  auto H = random_operator(gamma, kTwoSite, 1.0, eng);
  EXPECT_THROW(verify_schur_identities(H, range1(2, 4), range1(2, 6), cplx(0, 1)), AssumptionError);
}

TEST(Resolvent, SchurIdentitiesRandom2d) {
  Engine eng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto gamma = box(4, 2).filter([&](const Site&) { return uniform_int(eng, 0, 9) > 0; });
    auto l2 = box(2, 2).intersect(gamma);
    auto l1 = l2.minus(interior_boundary(l2)).filter([](const Site& s) { return std::abs(s[0]) + std::abs(s[1]) <= 1; });
    auto H = random_operator(gamma, SingleSitePotential({{Site{0, 0}, 1.0}, {Site{0, 1}, -0.5}}), 2.0, eng);
    auto r = verify_schur_identities(H, l1, l2, cplx(uniform_in(eng, -2, 2), 0.3));
    EXPECT_TRUE(r[0].pass) << r[0].relative();
    EXPECT_TRUE(r[1].pass) << r[1].relative();
  }
}

TEST(Resolvent, GeometricIdentitiesTrivialCut) {
  Engine eng(18);
  auto gamma = range1(0, 7);
  auto H = random_operator(gamma, kTwoSite, 1.0, eng);
  for (const auto& cut : {SiteSet(1, {}), gamma}) {
    auto r = verify_geometric_identities(H, cut, cplx(0.3, 0.1));
    for (const auto& x : r) {
      EXPECT_EQ(x.deviation, 0.0) << x.identity;
      EXPECT_TRUE(x.pass);
    }
  }
}

TEST(Resolvent, GeometricIdentitiesMiddleBlock) {
  Engine eng(19);
  auto gamma = range1(0, 11);
  auto H = random_operator(gamma, kTwoSite, 1.0, eng);
  auto r = verify_geometric_identities(H, range1(4, 7), cplx(0.3, 0.1));
  ASSERT_EQ(r.size(), 3u);
  for (const auto& x : r) EXPECT_LT(x.relative(), 1e-9) << x.identity;
  for (const auto& x : r) EXPECT_TRUE(x.pass) << x.identity;
}

TEST(Resolvent, SecondOrderTermsVanishAcrossAnnulus) {
  std::vector<Site> th;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) th.push_back(Site{i, j});
  th.push_back(Site{2, 2});
  SiteSet theta(2, th);
  std::vector<std::pair<Site, double>> ue;
  for (const auto& s : theta) ue.push_back({s, s == Site{0, 0} ? 1.0 : 0.3});
  SingleSitePotential u(ue);
  const int L = metrics(theta).diam_inf + 2;
  auto window = box(2 * L + 2, Site{0, 0}).filter([](const Site& s) { return s[0] >= 0; });
  auto geo = annulus_geometry(Ambient::of(window), theta, Site{0, 0}, L);
  Engine eng(20);
  auto H = random_operator(window, u, 1.0, eng);
  Site y{2 * L + 2, 0};
  ASSERT_FALSE(geo.inner.contains(y));
  auto t = second_order_terms(H, geo.hat_w, cplx(0.2, 0.1), Site{0, 0}, y);
  EXPECT_EQ(t.zeroth, cplx(0));
  EXPECT_EQ(t.first, cplx(0));
  auto G = oracle_inverse(H.matrix, cplx(0.2, 0.1));
  const auto full = G(static_cast<Eigen::Index>(window.index(Site{0, 0})), static_cast<Eigen::Index>(window.index(y)));
  EXPECT_LT(std::abs(t.second - full), 1e-12);
}

TEST(Resolvent, CombesThomasGamma) {
  EXPECT_NEAR(combes_thomas(1, 4 * std::exp(1.0)).gamma, 1.0, 1e-15);
  auto flat = combes_thomas(2, 8);
  EXPECT_EQ(flat.gamma, 0.0);
  EXPECT_FALSE(flat.decaying);
  EXPECT_THROW(combes_thomas(1, 0.5), AssumptionError);
}

TEST(Resolvent, CombesThomasBoundHolds) {
  Engine eng(22);
  auto gamma = range1(0, 63);
  auto rho = DisorderDistribution::uniform(-1, 1);
  const double K = operator_norm_bound(1, 1.0, rho.support_radius(), kTwoSite);
  auto ct = combes_thomas(1, 10.0);
  ASSERT_TRUE(ct.decaying);
  for (int s = 0; s < 10; ++s) {
    auto H = random_operator(gamma, kTwoSite, 1.0, eng);
    auto c = check_combes_thomas(ct, H, cplx(K + 10, 0.01));
    EXPECT_EQ(c.violations, 0u);
  }
}
