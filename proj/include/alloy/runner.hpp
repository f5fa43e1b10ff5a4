#pragma once

// Config-driven experiment runner: dispatches on the experiment kind, writes
// CSV/JSON artifacts into a run directory and returns the run manifest.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "alloy/averaging.hpp"
#include "alloy/config.hpp"
#include "alloy/fmm.hpp"
#include "alloy/fuzz.hpp"
#include "alloy/localization.hpp"
#include "alloy/moments.hpp"

namespace alloy {

using json = nlohmann::json;

inline constexpr const char* kCodeVersion = "alloylab 1.0.0";

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitPropertyFailed = 1,
  kExitSchema = 2,
  kExitAssumption = 3,
  kExitIo = 4,
  kExitResource = 5,
  kExitNumerical = 6,
};

namespace detail {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
    out_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  template <class... T>
  void row(const T&... v) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << v), ...);
    out_ << "\n";
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline std::string site_text(const Site& s) {
  std::ostringstream os;
  for (int i = 0; i < s.dim(); ++i) os << (i ? " " : "") << s[i];
  return os.str();
}

inline json fit_json(const stats::LinearFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"slope_lo", f.slope_lo}, {"slope_hi", f.slope_hi}, {"r2", f.r2}};
}

inline MomentConfig moment_config(const Config& cfg, unsigned workers) {
  MomentConfig m;
  m.s = cfg.real("s");
  m.z = cfg.complex("z");
  m.samples = static_cast<std::size_t>(cfg.integer("samples"));
  m.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  m.workers = workers;
  m.theorem_mode = cfg.boolean("theorem_mode");
  return m;
}

inline SiteSet domain_box(const Config& cfg) {
  const SiteSet g = box(static_cast<int>(cfg.integer("box")), Site(static_cast<int>(cfg.integer("dim"))));
  if (static_cast<long long>(g.size()) > cfg.integer("max_sites"))
    throw ResourceError("domain has " + std::to_string(g.size()) + " sites, above max_sites = " + cfg.text("max_sites"));
  return g;
}

inline Site axis_site(int dim, int offset) {
  Site s(dim);
  s[0] = offset;
  return s;
}

}  // namespace detail

struct RunOutcome {
  json manifest;
  bool pass = false;
  std::vector<std::string> failures;
};

inline unsigned resolve_workers(const Config& cfg) {
  if (const char* env = std::getenv("ALLOY_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return static_cast<unsigned>(cfg.integer("workers"));
}

inline std::filesystem::path default_output(const Config& cfg) {
  return std::filesystem::path("runs") / (cfg.kind() + "-" + hex64(fnv1a(cfg.resolved_text())).substr(0, 8));
}

namespace detail {

inline json run_identities(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  const auto cases = static_cast<std::size_t>(cfg.integer("cases"));
  const auto results = identity_fuzz(cases, static_cast<std::uint64_t>(cfg.integer("seed")),
                                     static_cast<std::size_t>(cfg.integer("case_sites")), cfg.real("tolerance"), workers);
  std::ofstream f(dir / "identities.jsonl");
  if (!f) throw IoError("cannot write identities.jsonl");
  double worst = 0.0;
  std::size_t failed = 0;
  for (const auto& r : results) {
    for (const auto& rep : r.reports) {
      f << json{{"case", r.index},           {"dim", r.dim},           {"sites", r.sites},
                {"identity", rep.identity},  {"deviation", rep.deviation}, {"relative", rep.relative()},
                {"tolerance", rep.tolerance}, {"pass", rep.pass}}
               .dump()
        << "\n";
      worst = std::max(worst, rep.relative());
    }
    if (!r.pass) {
      ++failed;
      out.failures.push_back("identity case " + std::to_string(r.index));
    }
  }
  out.manifest["outputs"].push_back("identities.jsonl");
  return {{"cases", cases}, {"failed", failed}, {"worst_relative", worst}};
}

inline json run_averaging(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  const auto cases = static_cast<std::size_t>(cfg.integer("cases"));
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  const int n = static_cast<int>(cfg.integer("n"));
  const double kappa = cfg.real("kappa");
  const double tol = cfg.real("slope_tolerance");
  const auto det = parallel_map(cases, workers, [&](std::size_t i) { return det_average_case(seed, i, n, kappa); });
  const auto inv = parallel_map(cases, workers, [&](std::size_t i) { return inverse_norm_case(derive_seed(seed, 1), i, n); });
  const auto mono = parallel_map(cases, workers, [&](std::size_t i) { return monotone_case(derive_seed(seed, 2), i, tol); });
  std::ofstream f(dir / "averaging.jsonl");
  if (!f) throw IoError("cannot write averaging.jsonl");
  std::size_t fd = 0, fi = 0, fm = 0;
  double smin = 1e300, smax = -1e300;
  for (std::size_t i = 0; i < cases; ++i) {
    f << json{{"check", "det_average"}, {"case", i}, {"integral", det[i].integral}, {"error", det[i].error},
              {"bound1", det[i].bound1}, {"bound2", det[i].bound2}, {"pass", det[i].pass}}
             .dump()
      << "\n";
    f << json{{"check", "inverse_norm"}, {"case", i},          {"inverse_norm", inv[i].inverse_norm}, {"norm_bound", inv[i].norm_bound},
              {"integral", inv[i].integral}, {"bound", inv[i].bound}, {"pass", inv[i].pass}}
             .dump()
      << "\n";
    f << json{{"check", "monotone_tail"}, {"case", i}, {"slope", mono[i].fit.slope}, {"implied_cw", mono[i].implied_cw},
              {"moments", mono[i].moments}, {"log_convex", mono[i].log_convex}, {"pass", mono[i].pass}}
             .dump()
      << "\n";
    if (!det[i].pass) ++fd, out.failures.push_back("det_average case " + std::to_string(i));
    if (!inv[i].pass) ++fi, out.failures.push_back("inverse_norm case " + std::to_string(i));
    if (!mono[i].pass) ++fm, out.failures.push_back("monotone_tail case " + std::to_string(i));
    smin = std::min(smin, mono[i].fit.slope);
    smax = std::max(smax, mono[i].fit.slope);
  }
  out.manifest["outputs"].push_back("averaging.jsonl");
  return {{"cases", cases},          {"det_failed", fd},   {"inverse_failed", fi}, {"monotone_failed", fm},
          {"monotone_slope_min", smin}, {"monotone_slope_max", smax}};
}

inline std::vector<std::pair<Site, Site>> pairs_from(const Config& cfg, const std::vector<std::pair<Site, Site>>& fallback) {
  if (!cfg.has("pairs")) return fallback;
  const auto s = cfg.sites("pairs");
  if (s.size() % 2) throw SchemaError("key 'pairs': expected an even number of sites");
  std::vector<std::pair<Site, Site>> out;
  for (std::size_t i = 0; i < s.size(); i += 2) out.push_back({s[i], s[i + 1]});
  return out;
}

inline json run_apriori(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  const SiteSet gamma = domain_box(cfg);
  const int d = static_cast<int>(cfg.integer("dim"));
  const int b = static_cast<int>(cfg.integer("box"));
  AprioriOptions opt;
  opt.part_b = cfg.boolean("part_b");
  opt.exploratory = cfg.boolean("exploratory");
  opt.tolerance = cfg.real("tolerance");
  const Site origin(d);
  const Site end = axis_site(d, -b);
  const auto pairs = opt.part_b ? pairs_from(cfg, {{end, end}}) : pairs_from(cfg, {{origin, origin}, {origin, axis_site(d, 1)}});
  const auto res = apriori_experiment(gamma, pairs, cfg.reals("lambdas"), moment_config(cfg, workers), cfg.potential(),
                                      cfg.density(), opt);
  CsvWriter csv(dir / "apriori.csv", {"lambda", "x", "y", "mean", "stderr", "samples", "t", "xi", "z_re", "z_im"});
  const auto z = cfg.complex("z");
  for (const auto& row : res.rows)
    for (const auto& e : row.estimates)
      csv.row(row.lambda, site_text(e.x), site_text(e.y), e.mean, e.std_error, e.samples, e.t, row.xi, z.real(), z.imag());
  out.manifest["outputs"].push_back("apriori.csv");
  json fits = json::array();
  for (std::size_t p = 0; p < pairs.size(); ++p)
    fits.push_back({{"x", site_text(pairs[p].first)}, {"y", site_text(pairs[p].second)}, {"fit", fit_json(res.fits[p])},
                    {"max_ratio", res.max_ratio[p]}});
  if (!res.pass) out.failures.push_back("a-priori slope above prediction or estimates increasing");
  return {{"part_b", res.part_b}, {"exponent", res.exponent}, {"predicted_slope", res.predicted}, {"tolerance", res.tolerance},
          {"fits", fits},         {"tracks", res.tracks},     {"bounded", res.bounded},            {"pass", res.pass}};
}

inline json run_decay(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  const SiteSet gamma = domain_box(cfg);
  const int d = static_cast<int>(cfg.integer("dim"));
  const int b = static_cast<int>(cfg.integer("box"));
  const Site x = cfg.has("x") ? cfg.sites("x").front() : Site(d);
  std::vector<int> dist;
  if (cfg.has("distances")) dist = cfg.integers("distances");
  else
    for (int r = 1; r <= b; r += std::max(1, b / 8)) dist.push_back(r);
  auto mc = moment_config(cfg, workers);
  mc.lambda = cfg.real("lambda");
  const auto fit = decay_profile(gamma, x, dist, mc, cfg.potential(), cfg.density(), static_cast<int>(cfg.integer("axis")));
  CsvWriter csv(dir / "decay.csv", {"distance", "mean", "stderr", "samples", "t", "lambda", "z_re", "z_im"});
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& e = fit.values[i];
    csv.row(dist[i], e.mean, e.std_error, e.samples, e.t, mc.lambda, mc.z.real(), mc.z.imag());
  }
  out.manifest["outputs"].push_back("decay.csv");
  if (!fit.decaying) out.failures.push_back("decay profile not exponentially decaying");
  return {{"lambda", mc.lambda}, {"A", fit.A},   {"mu", fit.mu},           {"mu_lo", fit.mu_lo},       {"mu_hi", fit.mu_hi},
          {"r2", fit.r2},        {"t", mc.t(cfg.potential().size())}, {"spearman", fit.spearman}, {"decaying", fit.decaying}};
}

inline json run_criterion(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  const SiteSet gamma = domain_box(cfg);
  const int d = static_cast<int>(cfg.integer("dim"));
  const Site x = cfg.has("x") ? cfg.sites("x").front() : Site(d);
  CriterionOptions opt;
  if (cfg.has("B_s")) opt.B_s = cfg.real("B_s");
  opt.exploratory = cfg.boolean("exploratory");
  auto mc = moment_config(cfg, workers);
  const int L = static_cast<int>(cfg.integer("L"));
  CsvWriter csv(dir / "criterion.csv", {"lambda", "L", "raw_sum", "raw_error", "terms", "skipped_far", "box_factor", "xi",
                                         "coupling", "b", "b_s", "mu_pred"});
  json rows = json::array();
  bool monotone = true;
  double prev = 0.0, prev_err = 0.0;
  bool first = true;
  auto lambdas = cfg.reals("lambdas");
  std::sort(lambdas.begin(), lambdas.end());
  for (double l : lambdas) {
    mc.lambda = l;
    const auto r = finite_volume_criterion(Ambient::of(gamma), gamma, x, L, mc, cfg.potential(), cfg.density(), opt);
    csv.row(l, L, r.raw_sum, r.raw_error, r.terms, r.skipped_far, r.box_factor, r.xi, r.coupling, r.b,
            r.b_s ? *r.b_s : std::nan(""), r.mu_pred);
    rows.push_back({{"lambda", l}, {"raw_sum", r.raw_sum}, {"b", r.b}, {"mu_pred", r.mu_pred}});
    if (!first && r.raw_sum > prev + 3 * std::hypot(r.raw_error, prev_err)) monotone = false;
    prev = r.raw_sum;
    prev_err = r.raw_error;
    first = false;
  }
  out.manifest["outputs"].push_back("criterion.csv");
  if (!monotone) out.failures.push_back("criterion sums not decreasing in lambda");
  return {{"L", L}, {"rows", rows}, {"monotone", monotone}};
}

inline json run_wegner(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  WegnerConfig w;
  w.dim = static_cast<int>(cfg.integer("dim"));
  w.L = static_cast<int>(cfg.integer("L"));
  w.L_alt = static_cast<int>(cfg.integer("L_alt"));
  w.widths = cfg.reals("widths");
  w.center = cfg.real("center");
  w.lambda = cfg.real("lambda");
  w.s = cfg.real("s");
  w.samples = static_cast<std::size_t>(cfg.integer("samples"));
  w.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  w.workers = workers;
  const auto r = wegner_experiment(w, cfg.potential(), cfg.density());
  CsvWriter csv(dir / "wegner.csv", {"width", "mean_count", "stderr"});
  for (std::size_t i = 0; i < r.widths.size(); ++i) csv.row(r.widths[i], r.mean_count[i], r.std_error[i]);
  out.manifest["outputs"].push_back("wegner.csv");
  if (!r.exponent_ok) out.failures.push_back("Wegner width exponent below s - 0.15");
  if (!r.volume_ok) out.failures.push_back("eigenvalue counts not linear in volume");
  json j{{"exponent", r.exponent}, {"fit", fit_json(r.fit)}, {"sites", r.sites}, {"exponent_ok", r.exponent_ok},
         {"volume_ok", r.volume_ok}, {"pass", r.pass}};
  if (r.density) j["density"] = *r.density;
  if (r.density_alt) j["density_alt"] = *r.density_alt;
  return j;
}

inline json run_twobox(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  TwoBoxConfig t;
  t.L = static_cast<int>(cfg.integer("L"));
  t.x = Site(static_cast<int>(cfg.integer("dim")));
  t.a = cfg.real("a");
  t.b = cfg.real("b");
  t.m = cfg.real("m");
  t.delta = cfg.real("delta");
  t.samples = static_cast<std::size_t>(cfg.integer("samples"));
  t.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  t.workers = workers;
  auto lambdas = cfg.reals("lambdas");
  std::sort(lambdas.begin(), lambdas.end());
  CsvWriter csv(dir / "twobox.csv", {"L", "lambda", "probability", "ci_lo", "ci_hi", "uncertified"});
  json rows = json::array();
  bool monotone = true;
  std::optional<TwoBoxResult> prev;
  for (double l : lambdas) {
    t.lambda = l;
    const auto r = two_box_experiment(t, cfg.potential(), cfg.density());
    csv.row(r.L, r.lambda, r.probability, r.ci.lo, r.ci.hi, r.uncertified_fraction);
    rows.push_back({{"lambda", l}, {"probability", r.probability}, {"ci_lo", r.ci.lo}, {"ci_hi", r.ci.hi}});
    if (prev && r.ci.hi < prev->ci.lo) monotone = false;
    prev = r;
  }
  out.manifest["outputs"].push_back("twobox.csv");
  if (!monotone) out.failures.push_back("two-box probability decreases in lambda");
  return {{"L", t.L}, {"m", t.m}, {"rows", rows}, {"monotone", monotone}};
}

inline json run_eigenloc(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  EigenLocConfig e;
  e.dim = static_cast<int>(cfg.integer("dim"));
  e.L = static_cast<int>(cfg.integer("L"));
  e.lambda = cfg.real("lambda");
  if (cfg.has("window")) {
    const auto w = cfg.reals("window");
    if (w.size() != 2) throw SchemaError("key 'window': expected 'lo hi'");
    e.window = std::pair{w[0], w[1]};
  }
  e.samples = static_cast<std::size_t>(cfg.integer("samples"));
  e.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  e.workers = workers;
  const auto r = eigen_localization(e, cfg.potential(), cfg.density());
  CsvWriter csv(dir / "eigenloc.csv", {"sample", "energy", "rate", "ipr", "points"});
  for (const auto& rec : r.records) csv.row(rec.sample, rec.energy, rec.rate, rec.ipr, rec.points);
  out.manifest["outputs"].push_back("eigenloc.csv");
  return {{"lambda", e.lambda}, {"sites", r.sites}, {"median_rate", r.median_rate}, {"median_ipr", r.median_ipr},
          {"records", r.records.size()}};
}

inline json run_nonlocal(const Config& cfg, const std::filesystem::path& dir, unsigned workers, RunOutcome& out) {
  const SiteSet gamma = domain_box(cfg);
  const int d = static_cast<int>(cfg.integer("dim"));
  const Site x = cfg.has("x") ? cfg.sites("x").front() : Site(d);
  const Site y = cfg.has("y") ? cfg.sites("y").front() : axis_site(d, 1);
  const auto r = nonlocal_apriori_check(gamma, x, y, cfg.reals("lambdas"), cfg.potential(), cfg.density(),
                                        moment_config(cfg, workers), cfg.real("tolerance"));
  CsvWriter csv(dir / "nonlocal.csv", {"lambda", "mean", "stderr", "samples", "t"});
  for (std::size_t i = 0; i < r.lambdas.size(); ++i)
    csv.row(r.lambdas[i], r.estimates[i].mean, r.estimates[i].std_error, r.estimates[i].samples, r.estimates[i].t);
  out.manifest["outputs"].push_back("nonlocal.csv");
  if (!r.pass) out.failures.push_back("non-local a-priori slope above -s + tolerance");
  return {{"s", r.s}, {"fit", fit_json(r.fit)}, {"predicted_slope", -r.s}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

}  // namespace detail

namespace detail {
inline RunOutcome run_in(const Config& cfg, const std::filesystem::path& dir, unsigned workers,
                         std::chrono::steady_clock::time_point start);
}  // namespace detail

/// Runs one experiment into `dir` (created if needed) and writes
/// config.resolved and manifest.json there.
inline RunOutcome run_experiment(const Config& cfg, const std::filesystem::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  const unsigned workers = resolve_workers(cfg);
  const bool fresh = !std::filesystem::exists(dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  try {
    return detail::run_in(cfg, dir, workers, start);
  } catch (...) {
    if (fresh) std::filesystem::remove_all(dir, ec);
    throw;
  }
}

namespace detail {

inline RunOutcome run_in(const Config& cfg, const std::filesystem::path& dir, unsigned workers,
                         std::chrono::steady_clock::time_point start) {
  {
    std::ofstream f(dir / "config.resolved");
    if (!f) throw IoError("cannot write config.resolved");
    f << cfg.resolved_text();
  }
  RunOutcome out;
  out.manifest = {{"kind", cfg.kind()},
                  {"config_hash", hex64(fnv1a(cfg.resolved_text()))},
                  {"seed", cfg.integer("seed")},
                  {"code_version", kCodeVersion},
                  {"resolved_config", "config.resolved"},
                  {"outputs", json::array()}};
  json summary;
  const auto& k = cfg.kind();
  if (k == "identities") summary = run_identities(cfg, dir, workers, out);
  else if (k == "averaging") summary = run_averaging(cfg, dir, workers, out);
  else if (k == "apriori") summary = run_apriori(cfg, dir, workers, out);
  else if (k == "decay") summary = run_decay(cfg, dir, workers, out);
  else if (k == "criterion") summary = run_criterion(cfg, dir, workers, out);
  else if (k == "wegner") summary = run_wegner(cfg, dir, workers, out);
  else if (k == "twobox") summary = run_twobox(cfg, dir, workers, out);
  else if (k == "eigenloc") summary = run_eigenloc(cfg, dir, workers, out);
  else if (k == "nonlocal-apriori") summary = run_nonlocal(cfg, dir, workers, out);
  else throw SchemaError("unknown experiment kind '" + k + "'");
  out.pass = out.failures.empty();
  out.manifest["summary"] = summary;
  out.manifest["failures"] = out.failures;
  out.manifest["pass"] = out.pass;
  out.manifest["workers"] = workers;
  out.manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream f(dir / "manifest.json");
  if (!f) throw IoError("cannot write manifest.json");
  f << out.manifest.dump(2) << "\n";
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reports

struct Report {
  std::string text;
  bool pass = true;
};

inline json load_manifest(const std::filesystem::path& p) {
  const auto file = std::filesystem::is_directory(p) ? p / "manifest.json" : p;
  std::ifstream f(file);
  if (!f) throw IoError("missing manifest " + file.string());
  try {
    json j = json::parse(f);
    for (const auto& o : j.at("outputs"))
      if (!std::filesystem::exists(file.parent_path() / o.get<std::string>()))
        throw IoError("manifest " + file.string() + " lists missing artifact " + o.get<std::string>());
    return j;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + file.string() + ": " + e.what());
  }
}

/// Markdown summary of several runs, failures first.
inline Report build_report(const std::vector<std::filesystem::path>& manifests) {
  std::vector<std::pair<std::filesystem::path, json>> runs;
  for (const auto& p : manifests) runs.push_back({p, load_manifest(p)});
  std::stable_partition(runs.begin(), runs.end(), [](const auto& r) { return !r.second.at("pass").template get<bool>(); });
  Report rep;
  std::ostringstream os;
  os << std::setprecision(6);
  os << "# Run report\n\n| run | kind | hash | pass |\n|---|---|---|---|\n";
  for (const auto& [p, j] : runs) {
    const bool ok = j.at("pass").get<bool>();
    rep.pass = rep.pass && ok;
    os << "| " << p.string() << " | " << j.at("kind").get<std::string>() << " | " << j.at("config_hash").get<std::string>()
       << " | " << (ok ? "PASS" : "FAIL") << " |\n";
  }
  for (const auto& [p, j] : runs) {
    const auto kind = j.at("kind").get<std::string>();
    const auto& s = j.at("summary");
    os << "\n## " << p.string() << " (" << kind << ")\n\n";
    for (const auto& f : j.at("failures")) os << "- FAILED: " << f.get<std::string>() << "\n";
    if (kind == "decay") {
      os << "| lambda | mu_fit | A_fit | r2 |\n|---|---|---|---|\n";
      os << "| " << s.at("lambda").get<double>() << " | " << s.at("mu").get<double>() << " | " << s.at("A").get<double>()
         << " | " << s.at("r2").get<double>() << " |\n";
    } else if (kind == "apriori") {
      os << "| x | y | slope | predicted | disagreement |\n|---|---|---|---|---|\n";
      const double pred = s.at("predicted_slope").get<double>();
      const double tol = s.at("tolerance").get<double>();
      for (const auto& f : s.at("fits")) {
        const double sl = f.at("fit").at("slope").get<double>();
        os << "| " << f.at("x").get<std::string>() << " | " << f.at("y").get<std::string>() << " | " << sl << " | " << pred
           << " | " << (std::abs(sl - pred) > tol ? "flag" : "") << " |\n";
      }
    } else if (kind == "nonlocal-apriori") {
      const double sl = s.at("fit").at("slope").get<double>();
      const double pred = s.at("predicted_slope").get<double>();
      os << "| slope | predicted |\n|---|---|\n| " << sl << " | " << pred << " |\n";
    } else if (kind == "criterion" || kind == "twobox") {
      for (const auto& r : s.at("rows")) os << "- " << r.dump() << "\n";
    } else {
      os << "```\n" << s.dump(2) << "\n```\n";
    }
  }
  rep.text = os.str();
  return rep;
}

}  // namespace alloy
