#pragma once

// Green functions of finite-volume operators and the exact resolvent
// identities: Schur complement (Feshbach) reductions, the first and second
// order geometric resolvent expansions, and Combes-Thomas bounds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "alloy/error.hpp"
#include "alloy/geometry.hpp"
#include "alloy/model.hpp"

namespace alloy {

/// Threshold on the reciprocal condition estimate below which (H - z) is
/// treated as singular.
inline constexpr double kSingularRcond = 1e-12;

/// Factorisation of (H - z) over a site set; columns of the resolvent are
/// solved on demand and cached.
class GreenEvaluator {
 public:
  template <class Derived>
  GreenEvaluator(SiteSet gamma, const Eigen::MatrixBase<Derived>& H, cplx z, double rcond_min = kSingularRcond)
      : gamma_(std::move(gamma)), z_(z) {
    if (static_cast<std::size_t>(H.rows()) != gamma_.size() || H.rows() != H.cols())
      throw ModelError("GreenEvaluator: operator size does not match its index set");
    shifted_ = H.template cast<cplx>();
    shifted_.diagonal().array() -= z;
    if (gamma_.empty()) return;
    lu_.compute(shifted_);
    rcond_ = lu_.rcond();
    if (!(rcond_ >= rcond_min))
      throw SingularError("H - z is singular to working precision (rcond " + std::to_string(rcond_) + ")", rcond_);
  }

  template <class Scalar>
  GreenEvaluator(const BasicOperator<Scalar>& op, cplx z, double rcond_min = kSingularRcond)
      : GreenEvaluator(op.index, op.matrix, z, rcond_min) {}

  const SiteSet& domain() const noexcept { return gamma_; }
  cplx z() const noexcept { return z_; }
  double rcond() const noexcept { return rcond_; }

  /// Column G(z; ., y) by position.
  const ComplexVector& column(std::size_t j) {
    auto it = columns_.find(j);
    if (it != columns_.end()) return it->second;
    ComplexVector e = ComplexVector::Zero(static_cast<Eigen::Index>(gamma_.size()));
    e(static_cast<Eigen::Index>(j)) = 1.0;
    return columns_.emplace(j, lu_.solve(e)).first->second;
  }

  /// G(z; x, y), zero when x or y lies outside the domain.
  cplx operator()(const Site& x, const Site& y) {
    auto i = gamma_.index_of(x);
    auto j = gamma_.index_of(y);
    if (!i || !j) return {0.0, 0.0};
    return column(*j)(static_cast<Eigen::Index>(*i));
  }

  ComplexMatrix inverse() const {
    if (gamma_.empty()) return ComplexMatrix(0, 0);
    return lu_.inverse();
  }

  /// ||(H - z) g - e_j||_inf for the cached column j.
  double residual(std::size_t j) {
    const auto& g = column(j);
    ComplexVector r = shifted_ * g;
    r(static_cast<Eigen::Index>(j)) -= 1.0;
    return r.cwiseAbs().maxCoeff();
  }

 private:
  SiteSet gamma_;
  cplx z_;
  ComplexMatrix shifted_;
  Eigen::PartialPivLU<ComplexMatrix> lu_;
  double rcond_ = 1.0;
  std::map<std::size_t, ComplexVector> columns_;
};

/// Matrix elements G(z; x, y) for each requested pair with one factorisation.
template <class Scalar>
std::vector<cplx> green(const BasicOperator<Scalar>& H, cplx z, const std::vector<std::pair<Site, Site>>& pairs) {
  GreenEvaluator g(H, z);
  std::vector<cplx> out;
  out.reserve(pairs.size());
  for (const auto& [x, y] : pairs) out.push_back(g(x, y));
  return out;
}

/// (A - z)^{-1} as a dense matrix; throws SingularError when A - z is singular.
template <class Derived>
ComplexMatrix resolvent_matrix(const Eigen::MatrixBase<Derived>& A, cplx z) {
  const auto n = A.rows();
  if (n == 0) return ComplexMatrix(0, 0);
  ComplexMatrix M = A.template cast<cplx>();
  M.diagonal().array() -= z;
  Eigen::PartialPivLU<ComplexMatrix> lu(M);
  const double rc = lu.rcond();
  if (!(rc >= kSingularRcond)) throw SingularError("resolvent_matrix: singular (rcond " + std::to_string(rc) + ")", rc);
  return lu.inverse();
}

/// Boundary operator of the Schur reduction onto `lambda`:
///   B = P_L Lap (P_{G\L})^* (H_{G\L} - z)^{-1} P_{G\L} Lap P_L^*,
/// so that P_L (H_G - z)^{-1} P_L^* = (H_L - B - z)^{-1}. Entries vanish
/// unless both sites lie on the interior boundary of lambda.
inline LatticeOperator schur_B(const RealOperator& H_gamma, const SiteSet& lambda, cplx z) {
  if (!H_gamma.index.includes(lambda)) throw GeometryError("schur_B: Lambda is not contained in Gamma");
  const SiteSet rest = H_gamma.index.minus(lambda);
  const auto pl = positions_in(H_gamma.index, lambda);
  const auto pr = positions_in(H_gamma.index, rest);
  const auto nl = static_cast<Eigen::Index>(lambda.size());
  LatticeOperator B{lambda, ComplexMatrix::Zero(nl, nl)};
  if (rest.empty() || lambda.empty()) return B;
  // Hopping block of H between Lambda and its complement; H = -Lap off the
  // diagonal, so the two sign flips cancel.
  const RealMatrix C = H_gamma.matrix(pl, pr);
  const ComplexMatrix G_rest = resolvent_matrix(H_gamma.matrix(pr, pr), z);
  B.matrix = C.cast<cplx>() * G_rest * C.transpose().cast<cplx>();
  return B;
}

/// Outcome of comparing two routes to the same operator.
struct IdentityReport {
  std::string identity;
  double deviation = 0.0;  // max absolute elementwise difference
  double scale = 0.0;      // max elementwise magnitude of the operands
  std::size_t rows = 0, cols = 0;
  double tolerance = 1e-9;
  bool pass = false;

  double relative() const { return deviation / std::max(scale, 1e-300); }
};

inline IdentityReport compare(std::string name, const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  IdentityReport r;
  r.identity = std::move(name);
  r.rows = static_cast<std::size_t>(a.rows());
  r.cols = static_cast<std::size_t>(a.cols());
  r.tolerance = tol;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("identity '" + r.identity + "': operand shapes differ");
  if (a.size() == 0) {
    r.pass = true;
    return r;
  }
  r.deviation = (a - b).cwiseAbs().maxCoeff();
  r.scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  r.pass = r.deviation <= tol * std::max(r.scale, 1e-300) || r.deviation == 0.0;
  return r;
}

/// Schur identities for Lambda1 within Lambda2 within Gamma:
///   [0] P_L1 G_Gamma P_L1^* = (H_L1 - B^{L1} - z)^{-1}
///   [1] the nested reduction through Lambda2 \ Lambda1 with B^{L2}.
/// The nested form needs the interior boundary of Lambda2 (taken inside
/// Gamma) to avoid Lambda1; Lambda1 == Lambda2 degenerates to [0].
inline std::vector<IdentityReport> verify_schur_identities(const RealOperator& H_gamma, const SiteSet& lambda1,
                                                           const SiteSet& lambda2, cplx z, double tol = 1e-9) {
  if (!lambda2.includes(lambda1) || !H_gamma.index.includes(lambda2))
    throw GeometryError("verify_schur_identities: need Lambda1 within Lambda2 within Gamma");
  const bool degenerate = lambda1 == lambda2;
  if (!degenerate) {
    // Interior boundary of Lambda2 relative to Gamma: sites with a neighbour
    // in Gamma \ Lambda2.
    for (const auto& s : lambda1)
      for (const auto& n : neighbors(s))
        if (H_gamma.index.contains(n) && !lambda2.contains(n))
          throw AssumptionError("verify_schur_identities: interior boundary of Lambda2 meets Lambda1 at " + to_string(s));
  }

  const ComplexMatrix G = resolvent_matrix(H_gamma.matrix, z);
  const auto p1 = positions_in(H_gamma.index, lambda1);
  const ComplexMatrix lhs = G(p1, p1);

  const RealOperator H1 = restrict(H_gamma, lambda1);
  const LatticeOperator B1 = schur_B(H_gamma, lambda1, z);
  const ComplexMatrix direct = resolvent_matrix(H1.matrix.cast<cplx>() - B1.matrix, z);

  std::vector<IdentityReport> out;
  out.push_back(compare("schur_reduction", lhs, direct, tol));
  if (degenerate) {
    out.push_back(compare("schur_nested", lhs, direct, tol));
    return out;
  }

  const SiteSet shell = lambda2.minus(lambda1);
  const LatticeOperator B2 = schur_B(H_gamma, lambda2, z);
  const auto s_in_2 = positions_in(lambda2, shell);
  const auto s_in_g = positions_in(H_gamma.index, shell);
  const ComplexMatrix inner_block =
      H_gamma.matrix(s_in_g, s_in_g).cast<cplx>() - B2.matrix(s_in_2, s_in_2);
  const ComplexMatrix inner = resolvent_matrix(inner_block, z);
  const ComplexMatrix hop = H_gamma.matrix(p1, s_in_g).cast<cplx>();
  const ComplexMatrix nested = resolvent_matrix(H1.matrix.cast<cplx>() - hop * inner * hop.transpose(), z);
  out.push_back(compare("schur_nested", lhs, nested, tol));
  return out;
}

/// The three terms of the second order geometric expansion at (x, y):
/// G^L, G^L T G^L and G^L T G T G^L.
struct ExpansionTerms {
  cplx zeroth, first, second;
};

struct GeometricResolvents {
  ComplexMatrix G;     // full resolvent on Gamma
  ComplexMatrix Gdep;  // resolvent of the depleted operator
  RealMatrix T;        // removed hopping
};

inline GeometricResolvents geometric_resolvents(const RealOperator& H_gamma, const SiteSet& lambda, cplx z) {
  auto dep = deplete(H_gamma, lambda);
  return {resolvent_matrix(H_gamma.matrix, z), resolvent_matrix(dep.depleted.matrix, z), dep.T.matrix};
}

inline ExpansionTerms second_order_terms(const RealOperator& H_gamma, const SiteSet& lambda, cplx z, const Site& x,
                                         const Site& y) {
  const auto r = geometric_resolvents(H_gamma, lambda, z);
  const auto i = static_cast<Eigen::Index>(H_gamma.index.index(x));
  const auto j = static_cast<Eigen::Index>(H_gamma.index.index(y));
  const ComplexMatrix T = r.T.cast<cplx>();
  const ComplexVector right = T * r.Gdep.col(j);
  const Eigen::RowVectorXcd left = r.Gdep.row(i) * T;
  ExpansionTerms t;
  t.zeroth = r.Gdep(i, j);
  t.first = (left * r.Gdep.col(j))(0, 0);
  t.second = (left * r.G * right)(0, 0);
  return t;
}

/// Geometric resolvent identities for the cut Lambda within Gamma:
///   [0] first order, both orderings: G = G^L + G T G^L = G^L + G^L T G
///   [1] second order: G = G^L + G^L T G^L + G^L T G T G^L
///   [2] depleted block structure: G^L agrees with G_L on Lambda and with
///       G_{Gamma\Lambda} on the complement, cross blocks are exactly zero,
///       and depleting the complement gives the same operator.
inline std::vector<IdentityReport> verify_geometric_identities(const RealOperator& H_gamma, const SiteSet& lambda, cplx z,
                                                               double tol = 1e-9) {
  const auto r = geometric_resolvents(H_gamma, lambda, z);
  const ComplexMatrix T = r.T.cast<cplx>();
  std::vector<IdentityReport> out;

  auto first_a = compare("first_order", r.G, r.Gdep + r.G * T * r.Gdep, tol);
  auto first_b = compare("first_order", r.G, r.Gdep + r.Gdep * T * r.G, tol);
  out.push_back(first_a.relative() >= first_b.relative() ? first_a : first_b);
  if (!(first_a.pass && first_b.pass)) out.back().pass = false;

  out.push_back(compare("second_order", r.G, r.Gdep + r.Gdep * T * r.Gdep + r.Gdep * T * r.G * T * r.Gdep, tol));

  const SiteSet rest = H_gamma.index.minus(lambda);
  const auto pl = positions_in(H_gamma.index, lambda);
  const auto pr = positions_in(H_gamma.index, rest);
  ComplexMatrix expected = ComplexMatrix::Zero(r.G.rows(), r.G.cols());
  if (!lambda.empty()) expected(pl, pl) = resolvent_matrix(H_gamma.matrix(pl, pl), z);
  if (!rest.empty()) expected(pr, pr) = resolvent_matrix(H_gamma.matrix(pr, pr), z);
  auto block = compare("depleted_blocks", r.Gdep, expected, tol);
  bool cross_zero = true;
  for (auto i : pl)
    for (auto j : pr)
      if (r.Gdep(i, j) != cplx(0) || r.Gdep(j, i) != cplx(0)) cross_zero = false;
  const auto complement = resolvent_matrix(deplete(H_gamma, rest).depleted.matrix, z);
  const bool same_as_complement = (complement - r.Gdep).cwiseAbs().maxCoeff() <= tol * std::max(block.scale, 1e-300);
  block.pass = block.pass && cross_zero && same_as_complement;
  out.push_back(block);
  return out;
}

/// Combes-Thomas decay bound |G(z;x,y)| <= (2/M) exp(-gamma |x-y|_1), valid
/// when dist(z, spectrum) >= M, with gamma = min(1, ln(M / 4d)).
struct CombesThomas {
  int dim = 1;
  double M = 1.0;
  double gamma = 0.0;
  bool decaying = false;  // gamma > 0

  double bound(const Site& x, const Site& y) const { return 2.0 / M * std::exp(-gamma * dist1(x, y)); }
};

inline CombesThomas combes_thomas(int dim, double M) {
  if (!(M >= 1.0)) throw AssumptionError("combes_thomas: M must be at least 1");
  CombesThomas ct;
  ct.dim = dim;
  ct.M = M;
  ct.gamma = std::min(1.0, std::log(M / (4.0 * dim)));
  ct.decaying = ct.gamma > 0;
  return ct;
}

struct CombesThomasCheck {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max |G| / bound
};

/// Checks the bound for every pair of sites of one operator at energy z.
inline CombesThomasCheck check_combes_thomas(const CombesThomas& ct, const RealOperator& H, cplx z) {
  const ComplexMatrix G = resolvent_matrix(H.matrix, z);
  CombesThomasCheck c;
  for (std::size_t i = 0; i < H.index.size(); ++i)
    for (std::size_t j = 0; j < H.index.size(); ++j) {
      const double g = std::abs(G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      const double b = ct.bound(H.index[i], H.index[j]);
      ++c.pairs;
      c.worst_ratio = std::max(c.worst_ratio, g / b);
      if (g > b) ++c.violations;
    }
  return c;
}

/// Upper bound on sup_omega ||H_omega|| when |omega_k| <= R.
inline double operator_norm_bound(int dim, double lambda, double R, const SingleSitePotential& u) {
  return 2.0 * dim + lambda * R * u.l1_norm();
}

}  // namespace alloy
