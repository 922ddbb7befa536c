#include "config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace gsid::cli {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw KeyError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw KeyError(join(path, k), "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_string() && (v == "inf" || v == "infinity")) return kInf;
  if (!v.is_number()) throw KeyError(join(path, key), "expected a number");
  return v.get<double>();
}

std::int64_t get_int(const json& obj, const std::string& path, const std::string& key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw KeyError(join(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw KeyError(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_vector(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) return {};
  const auto& v = obj.at(key);
  if (!v.is_array()) throw KeyError(join(path, key), "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw KeyError(join(path, key) + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

Box get_box(const json& obj, const std::string& path) {
  check_keys(obj, path, {"lower", "upper"});
  auto lo = get_vector(obj, path, "lower");
  auto hi = get_vector(obj, path, "upper");
  if (lo.empty() || lo.size() != hi.size()) throw KeyError(path, "lower and upper must be nonempty and equally long");
  try {
    return Box(std::move(lo), std::move(hi));
  } catch (const std::exception& e) {
    throw KeyError(path, e.what());
  }
}

template <class F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const KeyError&) {
    throw;
  } catch (const std::exception& e) {
    throw KeyError(path, e.what());
  }
}

ModelKind parse_model(const json& m, const std::string& path, std::optional<GradientMode>& mode) {
  check_keys(m, path, {"kind", "b1", "b2", "c_w", "source", "n", "m", "gradient"});
  const auto kind = get_string(m, path, "kind", "");
  const auto grad = get_string(m, path, "gradient", "");
  if (grad == "analytic") {
    mode = GradientMode::Analytic;
  } else if (grad == "finite_difference") {
    mode = GradientMode::FiniteDifference;
  } else if (!grad.empty()) {
    throw KeyError(join(path, "gradient"), "expected analytic or finite_difference");
  }
  if (kind == "sin_product") return SinProduct{};
  if (kind == "power_basis") {
    return PowerBasis{static_cast<int>(get_int(m, path, "b1", 1)), static_cast<int>(get_int(m, path, "b2", 2))};
  }
  if (kind == "piecewise_remark") return PiecewiseRemark{get_number(m, path, "c_w", 1.0)};
  if (kind == "expression") {
    const auto src = get_string(m, path, "source", "");
    return wrap(join(path, "source"), [&] {
      return ModelKind{parse_expression(src, static_cast<int>(get_int(m, path, "n", 0)),
                                        static_cast<int>(get_int(m, path, "m", 0)))};
    });
  }
  throw KeyError(join(path, "kind"), "unknown model kind '" + kind + "'");
}

NoiseSpec parse_noise(const json& n, const std::string& path) {
  check_keys(n, path, {"family", "sigma", "c_w", "df", "scale", "kappa"});
  const auto fam = get_string(n, path, "family", "gaussian");
  const double kappa = get_number(n, path, "kappa", 8.0);
  return wrap(path, [&] {
    if (fam == "gaussian") return NoiseSpec(Gaussian{get_number(n, path, "sigma", 1.0)}, kappa);
    if (fam == "uniform") return NoiseSpec(UniformSymmetric{get_number(n, path, "c_w", 1.0)}, kappa);
    if (fam == "student_t") {
      return NoiseSpec(StudentT{get_number(n, path, "df", 10.0), get_number(n, path, "scale", 1.0)}, kappa);
    }
    throw KeyError(join(path, "family"), "unknown noise family '" + fam + "'");
  });
}

EstimatorConfig parse_estimator(const json& e, const std::string& path) {
  check_keys(e, path, {"lambda", "gamma", "C", "kappa", "scenario", "schedule", "c_phi_safety", "c_phi_lattice"});
  EstimatorConfig c;
  c.lambda = get_number(e, path, "lambda", c.lambda);
  c.gamma = get_number(e, path, "gamma", c.gamma);
  c.C = get_number(e, path, "C", c.C);
  c.kappa = get_number(e, path, "kappa", c.kappa);
  c.c_phi_safety = get_number(e, path, "c_phi_safety", c.c_phi_safety);
  c.c_phi_lattice = static_cast<int>(get_int(e, path, "c_phi_lattice", c.c_phi_lattice));
  if (e.contains("scenario")) {
    const auto p = join(path, "scenario");
    const auto& s = e.at("scenario");
    check_keys(s, p, {"kind", "value"});
    const auto kind = get_string(s, p, "kind", "unbounded_growing");
    const double v = get_number(s, p, "value", 0.0);
    if (kind == "known") {
      c.scenario = SigmaScenario::known(v);
    } else if (kind == "unbounded_growing") {
      c.scenario = SigmaScenario::unbounded_growing();
    } else if (kind == "bounded_by") {
      c.scenario = SigmaScenario::bounded_by(v);
    } else {
      throw KeyError(join(p, "kind"), "unknown scenario '" + kind + "'");
    }
  }
  if (e.contains("schedule")) {
    const auto p = join(path, "schedule");
    const auto& s = e.at("schedule");
    check_keys(s, p, {"kind", "ratio", "dense_until"});
    const auto kind = get_string(s, p, "kind", "geometric");
    if (kind == "every_step") {
      c.schedule = EvaluationSchedule::every_step();
    } else if (kind == "geometric") {
      c.schedule = EvaluationSchedule::geometric(get_number(s, p, "ratio", 1.25), get_int(s, p, "dense_until", 512));
      if (!(c.schedule.ratio > 1.0)) throw KeyError(join(p, "ratio"), "must be > 1");
    } else {
      throw KeyError(join(p, "kind"), "unknown schedule '" + kind + "'");
    }
  }
  wrap(path, [&] {
    c.validate();
    return 0;
  });
  return c;
}

InputPolicy parse_input(const json& in, const std::string& path) {
  check_keys(in, path, {"kind", "value", "amplitude", "period", "samples", "c_u"});
  const auto kind = get_string(in, path, "kind", "zero");
  const double c_u = get_number(in, path, "c_u", kInf);
  if (kind == "zero") return InputPolicy::zero();
  if (kind == "constant") return InputPolicy::constant(get_number(in, path, "value", 0.0), c_u);
  if (kind == "sine_sweep") {
    return InputPolicy::sine_sweep(get_number(in, path, "amplitude", 1.0), get_number(in, path, "period", 16.0), c_u);
  }
  if (kind == "playback") return InputPolicy::playback(get_vector(in, path, "samples"), c_u);
  throw KeyError(join(path, "kind"), "unknown input kind '" + kind + "'");
}

}  // namespace

const SystemSpec& RunConfig::spec() const {
  if (!system) throw KeyError("model", "missing");
  return *system;
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, "", {"model", "theta_box", "noise", "estimator", "experiment", "ensemble", "excitation", "output"});
  RunConfig cfg;
  if (doc.contains("model")) {
    if (!doc.contains("theta_box")) throw KeyError("theta_box", "required with model");
    std::optional<GradientMode> mode;
    auto model = parse_model(doc.at("model"), "model", mode);
    auto box = get_box(doc.at("theta_box"), "theta_box");
    cfg.system = wrap("model", [&] { return SystemSpec(std::move(model), std::move(box), mode); });
    if (cfg.system->theta_box().dims() != static_cast<std::size_t>(cfg.system->n())) {
      throw KeyError("theta_box", "dimension differs from the model's n = " + std::to_string(cfg.system->n()));
    }
  }
  if (doc.contains("noise")) cfg.noise = parse_noise(doc.at("noise"), "noise");
  if (doc.contains("estimator")) cfg.estimator = parse_estimator(doc.at("estimator"), "estimator");
  if (doc.contains("experiment")) {
    const std::string p = "experiment";
    const auto& e = doc.at(p);
    check_keys(e, p, {"theta", "y_init", "T", "seed", "input"});
    cfg.experiment.theta = get_vector(e, p, "theta");
    cfg.experiment.y_init = get_vector(e, p, "y_init");
    cfg.experiment.T = get_int(e, p, "T", cfg.experiment.T);
    if (cfg.experiment.T < 1) throw KeyError(join(p, "T"), "must be >= 1");
    const auto seed = get_int(e, p, "seed", 1);
    if (seed < 0) throw KeyError(join(p, "seed"), "must be >= 0");
    cfg.experiment.seed = static_cast<std::uint64_t>(seed);
    if (e.contains("input")) cfg.experiment.input = parse_input(e.at("input"), join(p, "input"));
  }
  if (doc.contains("ensemble")) {
    const std::string p = "ensemble";
    const auto& e = doc.at(p);
    check_keys(e, p, {"num_runs", "checkpoints"});
    cfg.ensemble.num_runs = static_cast<int>(get_int(e, p, "num_runs", cfg.ensemble.num_runs));
    for (double c : get_vector(e, p, "checkpoints")) cfg.ensemble.checkpoints.push_back(static_cast<std::int64_t>(c));
  }
  if (doc.contains("excitation")) {
    const std::string p = "excitation";
    const auto& e = doc.at(p);
    check_keys(e, p, {"search_box", "samples_per_dim", "theta_grid_density", "tol"});
    if (e.contains("search_box")) cfg.excitation.search_box = get_box(e.at("search_box"), join(p, "search_box"));
    cfg.excitation.samples_per_dim = static_cast<int>(get_int(e, p, "samples_per_dim", cfg.excitation.samples_per_dim));
    cfg.excitation.theta_grid_density =
        static_cast<int>(get_int(e, p, "theta_grid_density", cfg.excitation.theta_grid_density));
    cfg.excitation.tol = get_number(e, p, "tol", cfg.excitation.tol);
  }
  if (doc.contains("output")) {
    const std::string p = "output";
    const auto& o = doc.at(p);
    check_keys(o, p, {"trajectory", "estimates", "summary", "runs", "report"});
    cfg.output.trajectory = get_string(o, p, "trajectory", "");
    cfg.output.estimates = get_string(o, p, "estimates", "");
    cfg.output.summary = get_string(o, p, "summary", "");
    cfg.output.runs = get_string(o, p, "runs", "");
    cfg.output.report = get_string(o, p, "report", "");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw KeyError("<file>", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw KeyError("<file>", std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace gsid::cli
