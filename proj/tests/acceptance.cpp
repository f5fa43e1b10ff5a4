// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "alloy/averaging.hpp"
#include "alloy/fmm.hpp"
#include "alloy/fuzz.hpp"
#include "alloy/localization.hpp"
#include "alloy/moments.hpp"
#include "alloy/stats.hpp"

using namespace alloy;

namespace {

constexpr std::uint64_t kSeed = 20240611;

// Tolerances.
constexpr double kIdentityTol = 1e-8;
constexpr double kIdentitySeconds = 300.0;
constexpr double kBIndependenceTol = 1e-12;
constexpr double kMonotoneSlopeTol = 0.1;
constexpr double kAppendixTol = 1e-12;
constexpr double kAprioriTol = 0.15;
constexpr double kAprioriSeconds = 1800.0;
constexpr double kDecayR2 = 0.9;
constexpr double kWegnerTol = 0.15;
constexpr double kVolumeTol = 0.25;
constexpr double kTwoBoxProbability = 0.9;
constexpr double kEigenRate = 0.5;
constexpr double kFreeRate = 0.1;
constexpr double kIprP = 0.01;
constexpr double kReproTol = 1e-13;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

unsigned workers() { return std::max(1u, default_workers()); }

const SingleSitePotential& theorem_u() {
  static const auto u = SingleSitePotential::chain({1, -0.5, 1});
  return u;
}

SiteSet chain(int lo, int hi) {
  std::vector<Site> v;
  for (int i = lo; i <= hi; ++i) v.push_back(Site{i});
  return SiteSet(1, std::move(v));
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome check_identities() {
  const auto t0 = Clock::now();
  const auto res = identity_fuzz(500, kSeed, 300, kIdentityTol, 1);
  const double secs = seconds_since(t0);
  std::size_t failed = 0;
  double worst = 0.0;
  for (const auto& r : res) {
    failed += !r.pass;
    for (const auto& rep : r.reports) worst = std::max(worst, rep.relative());
  }
  return {failed == 0 && secs < kIdentitySeconds,
          fmt("500 cases, %zu failed, worst relative deviation %.2e, %.1f s single-threaded", failed, worst, secs)};
}

Outcome check_b_independence() {
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) worst = std::max(worst, b_independence_deviation(derive_seed(kSeed, 2), i));
  return {worst <= kBIndependenceTol, fmt("100 cases, worst relative change %.2e", worst)};
}

Outcome check_averaging() {
  const auto seed = derive_seed(kSeed, 3);
  const unsigned w = workers();
  const auto det = parallel_map(200, w, [&](std::size_t i) { return det_average_case(seed, i, 2 + static_cast<int>(i % 4)); });
  const auto inv = parallel_map(200, w, [&](std::size_t i) {
    return inverse_norm_case(derive_seed(seed, 1), i, 2 + static_cast<int>(i % 4));
  });
  const auto mono = parallel_map(50, w, [&](std::size_t i) { return monotone_case(derive_seed(seed, 2), i, kMonotoneSlopeTol); });
  std::size_t fd = 0, fi = 0, fm = 0;
  for (const auto& r : det) fd += !r.pass;
  for (const auto& r : inv) fi += !r.pass;
  double lo = 1e300, hi = -1e300;
  for (const auto& r : mono) {
    fm += !r.pass;
    lo = std::min(lo, r.fit.slope);
    hi = std::max(hi, r.fit.slope);
  }
  return {fd + fi + fm == 0, fmt("det %zu/200 failed, inverse %zu/200 failed, monotone %zu/50 failed, slopes in [%.3f, %.3f]", fd, fi,
                                 fm, lo, hi)};
}

Outcome check_appendix() {
  std::size_t failed = 0;
  double min_ratio = 1e300;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto c = appendix_case(derive_seed(kSeed, 4), i);
    failed += !c.transformed.bound_holds;
    min_ratio = std::min(min_ratio, c.transformed.min_ratio);
  }
  const auto p = weight_profile(SingleSitePotential::chain({1, -0.5}), Site{0}, Site{5});
  const double dc = std::abs(p.c - std::log(7.0 / 6.0));
  const double dD = std::abs(p.D - 13.0);
  return {failed == 0 && dc <= kAppendixTol && dD <= kAppendixTol,
          fmt("%zu/100 cases violate the weight inequality (min ratio %.4f); |c - ln(7/6)| = %.1e, |D - 13| = %.1e", failed,
              min_ratio, dc, dD)};
}

Outcome check_apriori() {
  const auto t0 = Clock::now();
  const std::vector<double> grid{4, 8, 16, 32, 64, 128};
  MomentConfig cfg;
  cfg.samples = 10000;
  cfg.seed = derive_seed(kSeed, 5);
  cfg.workers = workers();
  cfg.theorem_mode = true;
  const auto gamma = chain(0, 8);
  AprioriOptions a;
  a.tolerance = kAprioriTol;
  const auto ra = apriori_experiment(gamma, {{Site{4}, Site{4}}, {Site{4}, Site{5}}}, grid, cfg, theorem_u(),
                                     DisorderDistribution::uniform(0, 1), a);
  AprioriOptions b = a;
  b.part_b = true;
  const auto rb = apriori_experiment(gamma, {{Site{0}, Site{0}}, {Site{0}, Site{8}}}, grid, cfg, theorem_u(),
                                     DisorderDistribution::uniform(0, 1), b);

  MomentConfig nc = cfg;
  nc.theorem_mode = false;
  nc.z = cplx(0.3, 0.01);
  const auto rn = nonlocal_apriori_check(chain(0, 4), Site{0}, Site{4}, grid, SingleSitePotential::chain({1, -0.5}),
                                         DisorderDistribution::bump(0.5, 0.5), nc, kAprioriTol);
  const double secs = seconds_since(t0);
  auto worst = [](const AprioriResult& r) {
    double s = -1e300;
    for (const auto& f : r.fits) s = std::max(s, f.slope);
    return s;
  };
  return {ra.pass && rb.pass && rn.pass && secs < kAprioriSeconds,
          fmt("local t=%.3f worst slope %.3f (bound %.3f); boundary t=%.2f worst slope %.3f (bound %.3f); "
              "non-local slope %.3f (bound %.3f); %.0f s",
              ra.exponent, worst(ra), ra.predicted + kAprioriTol, rb.exponent, worst(rb), rb.predicted + kAprioriTol,
              rn.fit.slope, -rn.s + kAprioriTol, secs)};
}

DecayFit strong_decay(double lambda, std::size_t samples, unsigned w) {
  MomentConfig cfg;
  cfg.lambda = lambda;
  cfg.s = 0.3;
  cfg.samples = samples;
  cfg.seed = derive_seed(kSeed, 6);
  cfg.workers = w;
  cfg.z = cplx(0.5, 0.01);
  std::vector<int> r;
  for (int k = 2; k <= 30; k += 4) r.push_back(k);
  return decay_profile(chain(-30, 30), Site{0}, r, cfg, theorem_u(), DisorderDistribution::uniform(0, 1));
}

bool decays(const DecayFit& f) { return f.mu_lo > 0 && f.r2 >= kDecayR2; }

Outcome check_decay() {
  const auto f = strong_decay(60, 2000, workers());
  return {decays(f), fmt("61 sites, lambda=60: mu=%.3f, 95%% CI [%.3f, %.3f], r2=%.4f", f.mu, f.mu_lo, f.mu_hi, f.r2)};
}

Outcome check_criterion() {
  MomentConfig cfg;
  cfg.samples = 2000;
  cfg.seed = derive_seed(kSeed, 7);
  cfg.workers = workers();
  cfg.z = cplx(0.5, 0.01);
  const auto gamma = chain(-30, 30);
  std::ostringstream os;
  bool monotone = true, consistent = true;
  double prev = 0.0, prev_err = 0.0;
  bool first = true;
  std::size_t small_b = 0;
  for (double l : {10.0, 20.0, 40.0, 80.0}) {
    cfg.lambda = l;
    const auto r = finite_volume_criterion(Ambient::of(gamma), gamma, Site{0}, 5, cfg, theorem_u(), DisorderDistribution::uniform(0, 1));
    if (!first && r.raw_sum > prev + 3 * std::hypot(r.raw_error, prev_err)) monotone = false;
    os << fmt("lambda=%g sum=%.4f b=%.3g", l, r.raw_sum, r.b);
    if (r.b < 1) {
      ++small_b;
      const auto f = strong_decay(l, 2000, workers());
      consistent = consistent && decays(f);
      os << fmt(" (mu_lo=%.3f r2=%.3f)", f.mu_lo, f.r2);
    }
    os << "; ";
    prev = r.raw_sum;
    prev_err = r.raw_error;
    first = false;
  }
  os << (monotone ? "decreasing" : "NOT decreasing") << fmt(", %zu grid points with b < 1", small_b);
  return {monotone && consistent, os.str()};
}

Outcome check_wegner() {
  WegnerConfig cfg;
  cfg.L = 20;
  cfg.L_alt = 40;
  cfg.lambda = 1.0;
  cfg.s = 0.3;
  cfg.samples = 1500;
  cfg.seed = derive_seed(kSeed, 8);
  cfg.workers = workers();
  const auto main = wegner_experiment(cfg, theorem_u(), DisorderDistribution::uniform(0, 1));
  const auto rank1 = wegner_experiment(cfg, SingleSitePotential::point(1), DisorderDistribution::uniform(0, 1));
  const bool vol = main.volume_ok && main.density && main.density_alt &&
                   std::abs(*main.density_alt - *main.density) <= kVolumeTol * *main.density;
  const bool ok = main.exponent >= cfg.s - kWegnerTol && vol && std::abs(rank1.exponent - 1.0) <= kWegnerTol;
  return {ok, fmt("exponent %.3f (need >= %.2f); density %.4f vs %.4f per site; rank-one exponent %.3f", main.exponent,
                  cfg.s - kWegnerTol, main.density.value_or(NAN), main.density_alt.value_or(NAN), rank1.exponent)};
}

TwoBoxResult two_box(double lambda, std::size_t samples, unsigned w) {
  TwoBoxConfig cfg;
  cfg.L = 6;
  cfg.x = Site{0};
  cfg.lambda = lambda;
  cfg.samples = samples;
  cfg.seed = derive_seed(kSeed, 9);
  cfg.workers = w;
  return two_box_experiment(cfg, theorem_u(), DisorderDistribution::uniform(0, 1));
}

Outcome check_twobox() {
  std::vector<TwoBoxResult> r;
  for (double l : {25.0, 50.0, 100.0}) r.push_back(two_box(l, 500, workers()));
  bool monotone = true;
  for (std::size_t i = 1; i < r.size(); ++i) monotone = monotone && r[i].ci.hi >= r[i - 1].ci.lo;
  std::ostringstream os;
  for (const auto& x : r) os << fmt("lambda=%g p=%.3f [%.3f, %.3f]; ", x.lambda, x.probability, x.ci.lo, x.ci.hi);
  os << (monotone ? "non-decreasing" : "DECREASING");
  return {r[1].probability >= kTwoBoxProbability && monotone, os.str()};
}

EigenLocResult eigenloc(double lambda, std::size_t samples, unsigned w) {
  EigenLocConfig cfg;
  cfg.L = 30;
  cfg.lambda = lambda;
  cfg.samples = samples;
  cfg.seed = derive_seed(kSeed, 10);
  cfg.workers = w;
  return eigen_localization(cfg, theorem_u(), DisorderDistribution::uniform(0, 1));
}

Outcome check_eigen() {
  const auto dis = eigenloc(60, 100, workers());
  const auto free = eigenloc(0, 100, workers());
  std::vector<double> a, b;
  for (const auto& r : dis.records) a.push_back(r.ipr);
  for (const auto& r : free.records) b.push_back(r.ipr);
  const double p = stats::mann_whitney_p(a, b);
  const bool ok = dis.median_rate > kEigenRate && std::abs(free.median_rate) < kFreeRate && p < kIprP &&
                  dis.median_ipr > free.median_ipr;
  return {ok, fmt("median rate %.3f (lambda=60) vs %.3f (lambda=0); median IPR %.4f vs %.4f, Mann-Whitney p=%.2e",
                  dis.median_rate, free.median_rate, dis.median_ipr, free.median_ipr, p)};
}

Outcome check_combes_thomas() {
  std::size_t violations = 0, pairs = 0, nonpositive = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const auto c = combes_thomas_case(derive_seed(kSeed, 11), i);
    nonpositive += !(c.gamma > 0);
    violations += c.check.violations;
    pairs += c.check.pairs;
    worst = std::max(worst, c.check.worst_ratio);
  }
  return {violations == 0 && nonpositive == 0,
          fmt("50 samples, %zu pairs, %zu violations, max |G|/bound %.3f", pairs, violations, worst)};
}

Outcome check_reproducibility() {
  double diff = 0.0;
  auto cmp = [&](double a, double b) { diff = std::max(diff, std::abs(a - b) / std::max(1.0, std::abs(a))); };

  const auto i1 = identity_fuzz(20, kSeed, 300, kIdentityTol, 1), i4 = identity_fuzz(20, kSeed, 300, kIdentityTol, 4);
  for (std::size_t i = 0; i < i1.size(); ++i)
    for (std::size_t k = 0; k < i1[i].reports.size(); ++k) cmp(i1[i].reports[k].deviation, i4[i].reports[k].deviation);

  const auto d1 = strong_decay(60, 400, 1), d4 = strong_decay(60, 400, 4);
  for (std::size_t k = 0; k < d1.values.size(); ++k) {
    cmp(d1.values[k].mean, d4.values[k].mean);
    cmp(d1.values[k].std_error, d4.values[k].std_error);
  }
  cmp(d1.mu, d4.mu);

  const auto t1 = two_box(50, 100, 1), t4 = two_box(50, 100, 4);
  cmp(t1.probability, t4.probability);
  cmp(t1.uncertified_fraction, t4.uncertified_fraction);

  const auto e1 = eigenloc(60, 10, 1), e4 = eigenloc(60, 10, 4);
  for (std::size_t k = 0; k < e1.records.size(); ++k) {
    cmp(e1.records[k].rate, e4.records[k].rate);
    cmp(e1.records[k].ipr, e4.records[k].ipr);
  }

  WegnerConfig w;
  w.samples = 100;
  w.L_alt = 30;
  w.seed = derive_seed(kSeed, 12);
  w.workers = 1;
  const auto w1 = wegner_experiment(w, theorem_u(), DisorderDistribution::uniform(0, 1));
  w.workers = 4;
  const auto w4 = wegner_experiment(w, theorem_u(), DisorderDistribution::uniform(0, 1));
  for (std::size_t k = 0; k < w1.mean_count.size(); ++k) cmp(w1.mean_count[k], w4.mean_count[k]);

  MomentConfig m;
  m.samples = 500;
  m.seed = derive_seed(kSeed, 13);
  m.workers = 1;
  const auto a1 = apriori_experiment(chain(0, 8), {{Site{4}, Site{4}}}, {4, 16, 64, 128}, m, theorem_u(), DisorderDistribution::uniform(0, 1));
  m.workers = 4;
  const auto a4 = apriori_experiment(chain(0, 8), {{Site{4}, Site{4}}}, {4, 16, 64, 128}, m, theorem_u(), DisorderDistribution::uniform(0, 1));
  for (std::size_t k = 0; k < a1.rows.size(); ++k) cmp(a1.rows[k].estimates[0].mean, a4.rows[k].estimates[0].mean);

  const auto c1 = det_average_case(kSeed, 7, 3), c4 = det_average_case(kSeed, 7, 3);
  cmp(c1.integral, c4.integral);

  return {diff <= kReproTol, fmt("workers 1 vs 4 across identity, decay, two-box, eigenvector, Wegner and a-priori runs: "
                                 "max relative difference %.1e",
                                 diff)};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"identity suite", check_identities},
      {"B independence", check_b_independence},
      {"averaging bounds", check_averaging},
      {"weighted potential construction", check_appendix},
      {"a-priori scaling", check_apriori},
      {"strong-disorder decay", check_decay},
      {"criterion and decay consistency", check_criterion},
      {"Wegner scaling", check_wegner},
      {"two-box regularity", check_twobox},
      {"eigenfunction localization", check_eigen},
      {"Combes-Thomas", check_combes_thomas},
      {"reproducibility", check_reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
