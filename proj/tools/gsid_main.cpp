#include <omp.h>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "gsid/density.hpp"
#include "gsid/excitation.hpp"
#include "gsid/expression.hpp"
#include "gsid/harness.hpp"
#include "gsid/spectral.hpp"

using namespace gsid;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitVerify = 4;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> T;
  std::optional<int> runs;
  int jobs = 0;
  std::string out;
  std::string runs_out;
  int instances = 200;
  std::string Z;
  std::string Zprime;
  double c_w = 0.5;
  double min_gap = 0.5;
};

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

std::string pick(const std::string& flag, const std::string& cfg) { return flag.empty() ? cfg : flag; }

cli::RunConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  auto cfg = cli::load_config(o.config);
  if (o.seed) cfg.experiment.seed = *o.seed;
  if (o.T) cfg.experiment.T = *o.T;
  if (o.runs) cfg.ensemble.num_runs = *o.runs;
  return cfg;
}

std::vector<double> y_init_of(const cli::RunConfig& cfg) {
  return cfg.experiment.y_init.empty() ? std::vector<double>(cfg.spec().m(), 0.0) : cfg.experiment.y_init;
}

std::vector<double> theta_of(const cli::RunConfig& cfg) {
  if (cfg.experiment.theta.size() != static_cast<std::size_t>(cfg.spec().n())) {
    throw cli::KeyError("experiment.theta", "needs n = " + std::to_string(cfg.spec().n()) + " entries");
  }
  return cfg.experiment.theta;
}

Trajectory simulate_cfg(const cli::RunConfig& cfg) {
  const auto y0 = y_init_of(cfg);
  if (y0.size() != static_cast<std::size_t>(cfg.spec().m())) {
    throw cli::KeyError("experiment.y_init", "needs m = " + std::to_string(cfg.spec().m()) + " entries");
  }
  auto traj = simulate(cfg.spec(), cfg.noise, theta_of(cfg), cfg.experiment.input, y0, cfg.experiment.T,
                       cfg.experiment.seed);
  if (traj.unstable) {
    throw DomainError("simulation left the blow-up bound at t = " + std::to_string(traj.length() + 1));
  }
  return traj;
}

std::vector<std::int64_t> default_checkpoints(std::int64_t T) {
  std::vector<std::int64_t> c;
  for (std::int64_t t = 2; t <= T; t *= 2) c.push_back(t);
  if (c.empty() || c.back() != T) c.push_back(T);
  return c;
}

int cmd_simulate(const Options& o) {
  const auto cfg = load(o);
  const auto traj = simulate_cfg(cfg);
  emit(pick(o.out, cfg.output.trajectory), traj.to_jsonl());
  std::fprintf(stderr, "simulated T=%lld seed=%llu\n", static_cast<long long>(traj.length()),
               static_cast<unsigned long long>(traj.seed));
  return 0;
}

int cmd_estimate(const Options& o) {
  const auto cfg = load(o);
  const auto traj = simulate_cfg(cfg);
  GsEstimator est(cfg.spec(), cfg.estimator, cfg.noise.support());
  const auto checkpoints =
      cfg.ensemble.checkpoints.empty() ? default_checkpoints(cfg.experiment.T) : cfg.ensemble.checkpoints;
  const auto recs = run_estimator(est, traj, cfg.experiment.theta, checkpoints);
  for (auto c : checkpoints) {
    if (c > traj.length()) break;
    const auto& r = recs[static_cast<std::size_t>(c)];
    std::string th;
    for (double v : r.theta_hat) th += (th.empty() ? "" : ",") + format_double(v);
    std::fprintf(stderr, "t=%lld theta_hat=[%s] sigma2_hat=%s error=%s feasible=%lld\n", static_cast<long long>(r.t),
                 th.c_str(), format_double(r.sigma2_hat).c_str(), format_double(r.error_norm).c_str(),
                 static_cast<long long>(r.feasible_count));
  }
  emit(pick(o.out, cfg.output.estimates), estimates_to_csv(recs, cfg.spec().n()));
  return 0;
}

int cmd_ensemble(const Options& o) {
  const auto cfg = load(o);
  EnsembleConfig ec;
  ec.base_seed = cfg.experiment.seed;
  ec.num_runs = cfg.ensemble.num_runs;
  ec.T_max = cfg.experiment.T;
  ec.checkpoints = cfg.ensemble.checkpoints.empty() ? default_checkpoints(ec.T_max) : cfg.ensemble.checkpoints;
  ec.spec = cfg.spec();
  ec.noise = cfg.noise;
  ec.estimator = cfg.estimator;
  ec.policy = cfg.experiment.input;
  ec.y_init = y_init_of(cfg);
  ec.true_theta = theta_of(cfg);
  ec.jobs = o.jobs;
  const auto res = run_ensemble(ec);
  for (const auto& c : res.summary) {
    std::fprintf(stderr, "t=%lld q10=%s q50=%s q90=%s sigma2_q50=%s unstable=%d\n", static_cast<long long>(c.t),
                 format_double(c.q10).c_str(), format_double(c.q50).c_str(), format_double(c.q90).c_str(),
                 format_double(c.sigma2_q50).c_str(), c.unstable_count);
  }
  emit(pick(o.out, cfg.output.summary), res.summary_csv());
  const auto runs_path = pick(o.runs_out, cfg.output.runs);
  if (!runs_path.empty()) emit(runs_path, res.runs_jsonl());
  return 0;
}

int cmd_excitation(const Options& o) {
  const auto cfg = load(o);
  const auto& ex = cfg.excitation;
  if (!ex.search_box) throw cli::KeyError("excitation.search_box", "missing");
  const auto rep = excitation_scan(cfg.spec(), *ex.search_box, ex.samples_per_dim, ex.theta_grid_density, ex.tol);
  std::fprintf(stderr, "scanned %zu points, %zu members, lower density %s\n", rep.records.size(), rep.members.size(),
               format_double(rep.density_estimate).c_str());
  emit(pick(o.out, cfg.output.report), rep.to_json());
  return 0;
}

int cmd_spectral(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(1);
  const auto recs = spectral_suite(o.instances, seed);
  int fails = 0;
  for (const auto& r : recs) fails += r.check.holds ? 0 : 1;
  emit(o.out, to_jsonl(recs));
  std::fprintf(stderr, "%d instances, %d bound violations\n", o.instances, fails);
  return fails == 0 ? 0 : kExitVerify;
}

// "[a,b]" or "[a,b]x[c,d]x..." as a box.
Box parse_box(const std::string& s) {
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto open = s.find('[', pos);
    const auto close = s.find(']', pos);
    if (open == std::string::npos || close == std::string::npos || close < open) break;
    double a = 0.0;
    double b = 0.0;
    char comma = 0;
    std::istringstream in(s.substr(open + 1, close - open - 1));
    if (!(in >> a >> comma >> b) || comma != ',') throw ConfigError("--Z: cannot parse '" + s + "'");
    lo.push_back(a);
    hi.push_back(b);
    pos = close + 1;
  }
  if (lo.empty()) throw ConfigError("--Z: expected [a,b] or [a,b]x[c,d]");
  return Box(lo, hi);
}

std::vector<double> parse_numbers(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ConfigError("--Zprime: cannot parse '" + tok + "'");
    }
    if (tok.find_first_not_of(" \t", used) != std::string::npos) throw ConfigError("--Zprime: cannot parse '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_density(const Options& o) {
  const Box Z = parse_box(o.Z);
  DensityResult r;
  if (Z.dims() == 1) {
    // In one dimension Z' may mix points and closed intervals: "-0.5,0.5" or "[0,0.2];0.7".
    std::vector<Interval> Zp;
    std::string rest = o.Zprime;
    std::size_t b;
    while ((b = rest.find('[')) != std::string::npos) {
      const auto e = rest.find(']', b);
      if (e == std::string::npos) throw ConfigError("--Zprime: unbalanced '['");
      const auto ab = parse_numbers(rest.substr(b + 1, e - b - 1), ',');
      if (ab.size() != 2) throw ConfigError("--Zprime: interval needs two endpoints");
      Zp.push_back({ab[0], ab[1]});
      rest.erase(b, e - b + 1);
    }
    for (char& c : rest) c = c == ';' ? ',' : c;
    for (double v : parse_numbers(rest, ',')) Zp.push_back({v, v});
    r.density = lower_density(Interval{Z.lower[0], Z.upper[0]}, Zp);
  } else {
    DensityQuery q{Z, {}};
    std::stringstream ss(o.Zprime);
    std::string pt;
    while (std::getline(ss, pt, ';')) {
      auto p = parse_numbers(pt, ',');
      if (!p.empty()) q.Zprime.push_back(std::move(p));
    }
    r = lower_density(q);
  }
  std::cout << format_double(r.density) << "\n";
  return 0;
}

int cmd_counterexample(const Options& o) {
  const auto rep = counterexample_demo(o.c_w, o.T.value_or(4096), o.seed.value_or(1));
  std::fprintf(stderr, "T=%lld identical=%s feasible_sets_equal=%s theta_hat=%s max_dist=%s\n",
               static_cast<long long>(rep.T), rep.trajectories_identical ? "yes" : "no",
               rep.feasible_sets_equal ? "yes" : "no", format_double(rep.theta_hat_1[0]).c_str(),
               format_double(std::max(rep.dist_to_1, rep.dist_to_2)).c_str());
  emit(o.out, rep.to_json());
  const bool ok = rep.trajectories_identical && rep.feasible_sets_equal &&
                  std::max(rep.dist_to_1, rep.dist_to_2) >= o.min_gap;
  return ok ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-searching estimation and identifiability tools"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", o.config, "JSON run configuration")->required();
    sub->add_option("--seed", o.seed, "Seed (overrides the config)");
    sub->add_option("--jobs", o.jobs, "OpenMP threads (0: default)");
    sub->add_option("--out", o.out, "Output path (overrides the config; '-' for stdout)");
  };
  auto* sim = app.add_subcommand("simulate", "Simulate a trajectory as JSONL");
  common(sim, true);
  sim->add_option("--T", o.T, "Horizon");
  auto* est = app.add_subcommand("estimate", "Simulate and run the estimator; CSV of estimates");
  common(est, true);
  est->add_option("--T", o.T, "Horizon");
  auto* ens = app.add_subcommand("ensemble", "Monte Carlo ensemble; CSV summary");
  common(ens, true);
  ens->add_option("--T", o.T, "Horizon");
  ens->add_option("--runs", o.runs, "Number of runs");
  ens->add_option("--runs-out", o.runs_out, "Per-run JSONL path");
  auto* exc = app.add_subcommand("excitation-scan", "Sampled P' membership scan; JSON report");
  common(exc, true);
  auto* spe = app.add_subcommand("spectral-verify", "Randomized eigenvalue-bound suite; JSONL report");
  common(spe, false);
  spe->add_option("--instances", o.instances, "Number of random families");
  auto* den = app.add_subcommand("density", "Lower density of Z' in Z");
  den->add_option("--Z", o.Z, "Box, e.g. [-1,1] or [0,1]x[0,1]")->required();
  den->add_option("--Zprime", o.Zprime, "Points (1-D: comma separated; else ';' between points)")->required();
  auto* cex = app.add_subcommand("counterexample", "Non-identifiability demo for the dead-zone model");
  common(cex, false);
  cex->add_option("--cw", o.c_w, "Dead-zone width C_w");
  cex->add_option("--T", o.T, "Horizon");
  cex->add_option("--min-gap", o.min_gap, "Required max(|theta_hat - 1|, |theta_hat - 2|)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (o.jobs > 0) omp_set_num_threads(o.jobs);

  try {
    if (*sim) return cmd_simulate(o);
    if (*est) return cmd_estimate(o);
    if (*ens) return cmd_ensemble(o);
    if (*exc) return cmd_excitation(o);
    if (*spe) return cmd_spectral(o);
    if (*den) return cmd_density(o);
    if (*cex) return cmd_counterexample(o);
  } catch (const cli::KeyError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return kExitConfig;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
