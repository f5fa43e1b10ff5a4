#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alloy/config.hpp"
#include "alloy/fuzz.hpp"
#include "alloy/geometry.hpp"
#include "alloy/runner.hpp"

using namespace alloy;
namespace fs = std::filesystem;

namespace {

unsigned env_workers(unsigned fallback) {
  if (const char* env = std::getenv("ALLOY_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return fallback;
}

int finish_run(const Config& cfg, const std::string& output) {
  const fs::path dir = !output.empty() ? fs::path(output) : cfg.has("output") ? fs::path(cfg.text("output")) : default_output(cfg);
  const auto out = run_experiment(cfg, dir);
  std::cout << out.manifest.dump(2) << "\n";
  std::cerr << (out.pass ? "PASS " : "FAIL ") << dir.string() << "\n";
  return out.pass ? kExitOk : kExitPropertyFailed;
}

/// Config for a shortcut subcommand: optional file, then --set overrides.
Config shortcut_config(const std::string& kind, const std::string& file, const std::vector<std::string>& sets) {
  std::map<std::string, std::string> raw;
  if (!file.empty()) {
    raw = Config::load(file).values();
    if (raw.at("kind") != kind) throw SchemaError("config file has kind " + raw.at("kind") + ", expected " + kind);
  }
  raw["kind"] = kind;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw SchemaError("--set expects key=value, got '" + s + "'");
    raw[detail::trim(s.substr(0, eq))] = detail::trim(s.substr(eq + 1));
  }
  return Config(std::move(raw));
}

json sites_json(const SiteSet& set) {
  json a = json::array();
  for (const auto& s : set) {
    json c = json::array();
    for (int i = 0; i < s.dim(); ++i) c.push_back(s[i]);
    a.push_back(c);
  }
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alloylab: experiments on discrete alloy-type random operators"};
  app.require_subcommand(1);

  std::string config_path, output;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output", output, "Run directory (default runs/<kind>-<hash>)");

  std::vector<std::string> manifests;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Summarise run manifests as markdown");
  report->add_option("manifests", manifests, "manifest.json files or run directories")->required();
  report->add_option("-o,--output", report_out, "Write the report to this file");

  std::size_t cases = 100, max_sites = 300;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
  unsigned workers = 1;
  auto* fuzz = app.add_subcommand("fuzz-identities", "Check the resolvent identities on random cases (JSON lines)");
  fuzz->add_option("--case-count", cases);
  fuzz->add_option("--seed", seed);
  fuzz->add_option("--tolerance", tolerance);
  fuzz->add_option("--max-sites", max_sites);
  fuzz->add_option("--workers", workers);

  int avg_n = 3;
  double kappa = 1.0, slope_tol = 0.1;
  std::string which = "all";
  auto* avg = app.add_subcommand("verify-averaging", "Check the spectral averaging bounds on random cases (JSON lines)");
  avg->add_option("--case-count", cases);
  avg->add_option("--seed", seed);
  avg->add_option("--n", avg_n, "Matrix size for the determinant and inverse checks");
  avg->add_option("--kappa", kappa);
  avg->add_option("--tolerance", slope_tol, "Slope tolerance of the monotone tail check");
  avg->add_option("--check", which)->check(CLI::IsMember({"det", "inverse", "monotone", "all"}));
  avg->add_option("--workers", workers);

  std::map<std::string, std::pair<std::string, std::vector<std::string>>> shortcut_args;
  std::map<std::string, CLI::App*> shortcuts;
  for (const std::string kind : {"wegner", "twobox", "eigenloc"}) {
    auto* sc = app.add_subcommand(kind, "Run a " + kind + " experiment from flags");
    auto& args = shortcut_args[kind];
    sc->add_option("-c,--config", args.first, "Base config file");
    sc->add_option("--set", args.second, "key=value override, repeatable");
    sc->add_option("-o,--output", output);
    shortcuts[kind] = sc;
  }

  int gdim = 1, gL = 4;
  std::vector<int> gx;
  std::vector<double> gu{1.0};
  std::string gtheta;
  auto* geo = app.add_subcommand("geometry", "Dump the annulus sets around x as JSON");
  geo->add_option("--dim", gdim);
  geo->add_option("--L", gL);
  geo->add_option("--x", gx, "Centre coordinates");
  geo->add_option("--u", gu, "Single-site values");
  geo->add_option("--theta", gtheta, "Support sites 'a b; c d' (default along the first axis)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return finish_run(Config::load(config_path), output);

    if (*report) {
      const auto rep = build_report(std::vector<fs::path>(manifests.begin(), manifests.end()));
      if (report_out.empty()) std::cout << rep.text;
      else {
        std::ofstream f(report_out);
        if (!f) throw IoError("cannot write " + report_out);
        f << rep.text;
      }
      return rep.pass ? kExitOk : kExitPropertyFailed;
    }

    if (*fuzz) {
      bool ok = true;
      for (const auto& r : identity_fuzz(cases, seed, max_sites, tolerance, env_workers(workers))) {
        json worst{{"case", r.index}, {"dim", r.dim}, {"sites", r.sites}, {"pass", r.pass}};
        json ids = json::array();
        for (const auto& rep : r.reports) ids.push_back({{"identity", rep.identity}, {"relative", rep.relative()}, {"pass", rep.pass}});
        worst["identities"] = ids;
        std::cout << worst.dump() << "\n";
        ok = ok && r.pass;
      }
      return ok ? kExitOk : kExitPropertyFailed;
    }

    if (*avg) {
      const unsigned w = env_workers(workers);
      bool ok = true;
      if (which == "det" || which == "all")
        for (const auto& r : parallel_map(cases, w, [&](std::size_t i) { return det_average_case(seed, i, avg_n, kappa); })) {
          std::cout << json{{"check", "det_average"}, {"integral", r.integral}, {"bound1", r.bound1}, {"bound2", r.bound2}, {"pass", r.pass}}.dump() << "\n";
          ok = ok && r.pass;
        }
      if (which == "inverse" || which == "all")
        for (const auto& r : parallel_map(cases, w, [&](std::size_t i) { return inverse_norm_case(derive_seed(seed, 1), i, avg_n); })) {
          std::cout << json{{"check", "inverse_norm"}, {"integral", r.integral}, {"bound", r.bound}, {"pass", r.pass}}.dump() << "\n";
          ok = ok && r.pass;
        }
      if (which == "monotone" || which == "all")
        for (const auto& r : parallel_map(cases, w, [&](std::size_t i) { return monotone_case(derive_seed(seed, 2), i, slope_tol); })) {
          std::cout << json{{"check", "monotone_tail"}, {"slope", r.fit.slope}, {"implied_cw", r.implied_cw}, {"pass", r.pass}}.dump() << "\n";
          ok = ok && r.pass;
        }
      return ok ? kExitOk : kExitPropertyFailed;
    }

    for (const auto& [kind, sc] : shortcuts)
      if (*sc) return finish_run(shortcut_config(kind, shortcut_args[kind].first, shortcut_args[kind].second), output);

    if (*geo) {
      std::map<std::string, std::string> raw{{"kind", "decay"}, {"lambda", "1"}, {"dim", std::to_string(gdim)}};
      std::string us;
      for (double v : gu) us += std::to_string(v) + " ";
      raw["u"] = us;
      if (!gtheta.empty()) raw["theta"] = gtheta;
      const Config cfg(std::move(raw));
      Site x(gdim);
      for (std::size_t i = 0; i < gx.size() && i < static_cast<std::size_t>(gdim); ++i) x[static_cast<int>(i)] = gx[i];
      const auto g = annulus_geometry(Ambient::whole(gdim), cfg.potential().support(), x, gL);
      std::cout << json{{"L", g.L},           {"x", sites_json(SiteSet(gdim, {x}))}, {"sphere", sites_json(g.sphere)},
                        {"hat_w", sites_json(g.hat_w)}, {"w", sites_json(g.w)}, {"hat_lambda", sites_json(g.hat_lambda)},
                        {"lambda", sites_json(g.lambda)}, {"inner", sites_json(g.inner)}}
                       .dump(2)
                << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const ModelError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const GeometryError& e) {
    std::cerr << "assumption failed: " << e.what() << "\n";
    return kExitAssumption;
  } catch (const AssumptionError& e) {
    std::cerr << "assumption failed: " << e.what() << "\n";
    return kExitAssumption;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const SingularError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
