#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nearstable/errors.hpp"
#include "nearstable/harness.hpp"

namespace nearstable {

using nlohmann::json;

namespace {

struct NamedExperiment {
  Experiment e;
  const char* name;
};

constexpr NamedExperiment kExperiments[] = {
    {Experiment::StableClt, "stable_clt"},
    {Experiment::TimeChangePoisson, "time_change_poisson"},
    {Experiment::CollateralLimit, "collateral_limit"},
    {Experiment::ChaosSweep, "chaos_sweep"},
    {Experiment::CommonNoise, "common_noise"},
    {Experiment::LimitSelfcheck, "limit_selfcheck"},
};

// The alpha = 0.5 reference model: mean-field tanh drift, tanh main jumps and
// f(x) = 1.5 + 0.5 tanh(x).
ModelSpec full_model(double alpha) {
  ModelSpec m;
  m.alpha = alpha;
  m.drift = {DriftKind::TanhMean, 0.0, 1.0, 1.0, Observable::Arctan};
  if (alpha < 1.0) {
    m.main_jump = {MainJumpKind::Tanh, 0.0, 0.3};
  }
  m.rate = {RateKind::Tanh, 0.0, 1.0, 1.0};
  m.initial = {InitialKind::Uniform, 0.0, 1.0};
  return m;
}

ModelSpec pure_collateral_model(double alpha, double c) {
  ModelSpec m;
  m.alpha = alpha;
  m.rate = {RateKind::Constant, c, c, 0.0};
  m.initial = {InitialKind::Uniform, 0.0, 1.0};
  return m;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

DriftDesc parse_drift(const json& j) {
  DriftDesc d;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") {
    d.kind = DriftKind::Zero;
  } else if (kind == "constant") {
    d.kind = DriftKind::Constant;
  } else if (kind == "tanh_mean") {
    d.kind = DriftKind::TanhMean;
  } else if (kind == "conv_tanh") {
    d.kind = DriftKind::ConvTanh;
  } else if (kind == "conv_gaussian") {
    d.kind = DriftKind::ConvGaussian;
  } else {
    throw ConfigError("unknown drift kind '" + kind + "'");
  }
  read(j, "c", d.c);
  read(j, "beta", d.beta);
  read(j, "width", d.width);
  if (j.contains("phi")) {
    const std::string phi = j.at("phi").get<std::string>();
    if (phi == "arctan") {
      d.phi = Observable::Arctan;
    } else if (phi == "tanh") {
      d.phi = Observable::Tanh;
    } else {
      throw ConfigError("unknown observable '" + phi + "'");
    }
  }
  return d;
}

MainJumpDesc parse_main_jump(const json& j) {
  MainJumpDesc d;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") {
    d.kind = MainJumpKind::Zero;
  } else if (kind == "constant") {
    d.kind = MainJumpKind::Constant;
  } else if (kind == "tanh") {
    d.kind = MainJumpKind::Tanh;
  } else {
    throw ConfigError("unknown main_jump kind '" + kind + "'");
  }
  read(j, "delta", d.delta);
  read(j, "kappa", d.kappa);
  return d;
}

RateDesc parse_rate(const json& j) {
  RateDesc d;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    d.kind = RateKind::Constant;
    read(j, "c", d.c);
  } else if (kind == "tanh") {
    d.kind = RateKind::Tanh;
    read(j, "c0", d.c0);
    read(j, "c1", d.c1);
  } else {
    throw ConfigError("unknown rate kind '" + kind + "'");
  }
  return d;
}

InitialLaw parse_initial(const json& j) {
  InitialLaw d;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "point") {
    d.kind = InitialKind::PointMass;
  } else if (kind == "uniform") {
    d.kind = InitialKind::Uniform;
  } else if (kind == "bell") {
    d.kind = InitialKind::BellIrwinHall;
  } else {
    throw ConfigError("unknown initial kind '" + kind + "'");
  }
  read(j, "center", d.center);
  read(j, "half_width", d.half_width);
  return d;
}

DoaLaw parse_doa(const json& j, const DoaLaw& fallback) {
  std::string kind = fallback.kind == DoaKind::SymmetricPareto ? "symmetric_pareto" : "asymmetric_pareto";
  double alpha = fallback.alpha;
  double x0 = fallback.x0;
  double p_plus = fallback.p_plus;
  read(j, "kind", kind);
  read(j, "alpha", alpha);
  read(j, "x0", x0);
  read(j, "p_plus", p_plus);
  if (kind == "symmetric_pareto") {
    return DoaLaw::symmetric_pareto(alpha, x0);
  }
  if (kind == "asymmetric_pareto") {
    return DoaLaw::asymmetric_pareto(alpha, p_plus, x0);
  }
  throw ConfigError("unknown doa kind '" + kind + "'");
}

json drift_json(const DriftDesc& d) {
  static const char* names[] = {"zero", "constant", "tanh_mean", "conv_tanh", "conv_gaussian"};
  return {{"kind", names[static_cast<int>(d.kind)]},
          {"c", d.c},
          {"beta", d.beta},
          {"width", d.width},
          {"phi", d.phi == Observable::Arctan ? "arctan" : "tanh"}};
}

json main_jump_json(const MainJumpDesc& d) {
  static const char* names[] = {"zero", "constant", "tanh"};
  return {{"kind", names[static_cast<int>(d.kind)]}, {"delta", d.delta}, {"kappa", d.kappa}};
}

json rate_json(const RateDesc& d) {
  if (d.kind == RateKind::Constant) {
    return {{"kind", "constant"}, {"c", d.c}};
  }
  return {{"kind", "tanh"}, {"c0", d.c0}, {"c1", d.c1}};
}

json initial_json(const InitialLaw& d) {
  static const char* names[] = {"point", "uniform", "bell"};
  return {{"kind", names[static_cast<int>(d.kind)]}, {"center", d.center}, {"half_width", d.half_width}};
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [id, name] : kExperiments) {
    if (id == e) {
      return name;
    }
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (const auto& [id, n] : kExperiments) {
    if (name == n) {
      return id;
    }
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

void ExperimentConfig::validate() const {
  model.validate();
  doa.validate();
  if (model.alpha != doa.alpha) {
    throw ConfigError("model alpha and collateral tail index differ");
  }
  if (n_grid.empty()) {
    throw ConfigError("N_grid must not be empty");
  }
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    if (n_grid[k] == 0) {
      throw ConfigError("N_grid entries must be >= 1");
    }
    if (k > 0 && n_grid[k] <= n_grid[k - 1]) {
      throw ConfigError("N_grid must be strictly increasing");
    }
  }
  if (replicas < 1) {
    throw ConfigError("replicas must be >= 1");
  }
  if (m < 1) {
    throw ConfigError("M must be >= 1");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("T must be positive");
  }
  if (!(h > 0.0)) {
    throw ConfigError("h must be positive");
  }
  if (!(drift_substep > 0.0)) {
    throw ConfigError("drift_substep must be positive");
  }
  for (double t : output_times) {
    if (!(t >= 0.0 && t <= horizon)) {
      throw ConfigError("output times must lie in [0, T]");
    }
  }
  if (threads < 1) {
    throw ConfigError("threads must be >= 1");
  }

  switch (experiment) {
    case Experiment::StableClt:
      if (!model.drift.is_zero() || !model.main_jump.is_zero() || !model.rate.is_constant()) {
        throw ConfigError("stable_clt needs the fast-path model: b = 0, psi = 0, constant f");
      }
      break;
    case Experiment::CollateralLimit:
      if (!(collateral_level > 0.0 && collateral_level <= model.f_lower() * horizon)) {
        throw ConfigError("collateral_level must lie in (0, f_lower * T] so the time change reaches it");
      }
      break;
    case Experiment::ChaosSweep:
    case Experiment::CommonNoise:
    case Experiment::LimitSelfcheck:
      if (!(h < horizon)) {
        throw ConfigError("limit step h must be smaller than T");
      }
      if (experiment == Experiment::ChaosSweep && output_times.empty()) {
        throw ConfigError("chaos_sweep needs at least one output time");
      }
      break;
    case Experiment::TimeChangePoisson:
      break;
  }
}

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig cfg;
  cfg.experiment = e;
  cfg.doa = DoaLaw::symmetric_pareto(0.5);
  switch (e) {
    case Experiment::StableClt:
      cfg.model = pure_collateral_model(0.5, 1.0);
      cfg.n_grid = {64, 512, 4096};
      cfg.replicas = 5000;
      cfg.horizon = 1.0;
      cfg.output_times = {1.0};
      break;
    case Experiment::TimeChangePoisson:
      cfg.model = full_model(0.5);
      cfg.n_grid = {100};
      cfg.replicas = 100;
      cfg.horizon = 10.0;
      cfg.output_times = {};
      break;
    case Experiment::CollateralLimit:
      cfg.model = full_model(0.5);
      cfg.model.drift = {};
      cfg.n_grid = {16, 128, 1024};
      cfg.replicas = 2000;
      cfg.horizon = 1.0;
      cfg.collateral_level = 1.0;
      cfg.output_times = {};
      break;
    case Experiment::ChaosSweep:
      cfg.model = full_model(0.5);
      cfg.n_grid = {16, 64, 256, 1024};
      cfg.replicas = 200;
      cfg.m = 2000;
      cfg.h = 1e-3;
      cfg.horizon = 1.0;
      cfg.output_times = {1.0};
      break;
    case Experiment::CommonNoise:
      cfg.model = pure_collateral_model(0.5, 1.0);
      cfg.n_grid = {16, 64, 256, 1024};
      cfg.replicas = 200;
      cfg.m = 2000;
      cfg.h = 0.1;
      cfg.horizon = 1.0;
      cfg.output_times = {1.0};
      break;
    case Experiment::LimitSelfcheck:
      cfg.model = full_model(0.5);
      cfg.n_grid = {1};
      cfg.replicas = 200;
      cfg.m = 200;
      cfg.h = 1e-2;
      cfg.horizon = 1.0;
      cfg.output_times = {1.0};
      break;
  }
  return cfg;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  try {
    if (!j.contains("experiment")) {
      throw ConfigError("config needs an 'experiment' field");
    }
    ExperimentConfig cfg = default_config(experiment_from_string(j.at("experiment").get<std::string>()));
    if (j.contains("model")) {
      const json& m = j.at("model");
      read(m, "alpha", cfg.model.alpha);
      if (m.contains("drift")) cfg.model.drift = parse_drift(m.at("drift"));
      if (m.contains("main_jump")) cfg.model.main_jump = parse_main_jump(m.at("main_jump"));
      if (m.contains("rate")) cfg.model.rate = parse_rate(m.at("rate"));
      if (m.contains("initial")) cfg.model.initial = parse_initial(m.at("initial"));
    }
    if (j.contains("doa")) {
      cfg.doa = parse_doa(j.at("doa"), cfg.doa);
    }
    read(j, "N_grid", cfg.n_grid);
    read(j, "M", cfg.m);
    read(j, "T", cfg.horizon);
    read(j, "h", cfg.h);
    read(j, "replicas", cfg.replicas);
    read(j, "limit_replicas", cfg.limit_replicas);
    read(j, "reference_samples", cfg.reference_samples);
    read(j, "output_times", cfg.output_times);
    read(j, "root_seed", cfg.root_seed);
    read(j, "out_path", cfg.out_path);
    read(j, "drift_substep", cfg.drift_substep);
    read(j, "collateral_level", cfg.collateral_level);
    read(j, "threads", cfg.threads);
    if (j.contains("thresholds")) {
      const json& t = j.at("thresholds");
      read(t, "ks_max", cfg.thresholds.ks_max);
      read(t, "ks_trend_slack", cfg.thresholds.ks_trend_slack);
      read(t, "poisson_p_min", cfg.thresholds.poisson_p_min);
      read(t, "poisson_pass_fraction", cfg.thresholds.poisson_pass_fraction);
      read(t, "common_noise_ratio", cfg.thresholds.common_noise_ratio);
      read(t, "selfcheck_ratio", cfg.thresholds.selfcheck_ratio);
    }
    return cfg;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad config field: ") + ex.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.experiment);
  j["model"] = {{"alpha", cfg.model.alpha},
                {"drift", drift_json(cfg.model.drift)},
                {"main_jump", main_jump_json(cfg.model.main_jump)},
                {"rate", rate_json(cfg.model.rate)},
                {"initial", initial_json(cfg.model.initial)}};
  j["doa"] = {{"kind", cfg.doa.kind == DoaKind::SymmetricPareto ? "symmetric_pareto" : "asymmetric_pareto"},
              {"alpha", cfg.doa.alpha},
              {"x0", cfg.doa.x0},
              {"p_plus", cfg.doa.p_plus}};
  j["N_grid"] = cfg.n_grid;
  j["M"] = cfg.m;
  j["T"] = cfg.horizon;
  j["h"] = cfg.h;
  j["replicas"] = cfg.replicas;
  j["limit_replicas"] = cfg.limit_replicas;
  j["reference_samples"] = cfg.reference_samples;
  j["output_times"] = cfg.output_times;
  j["root_seed"] = cfg.root_seed;
  j["out_path"] = cfg.out_path;
  j["drift_substep"] = cfg.drift_substep;
  j["collateral_level"] = cfg.collateral_level;
  j["threads"] = cfg.threads;
  j["thresholds"] = {{"ks_max", cfg.thresholds.ks_max},
                     {"ks_trend_slack", cfg.thresholds.ks_trend_slack},
                     {"poisson_p_min", cfg.thresholds.poisson_p_min},
                     {"poisson_pass_fraction", cfg.thresholds.poisson_pass_fraction},
                     {"common_noise_ratio", cfg.thresholds.common_noise_ratio},
                     {"selfcheck_ratio", cfg.thresholds.selfcheck_ratio}};
  return j.dump(2);
}

}  // namespace nearstable
