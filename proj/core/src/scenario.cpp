#include "gavg/scenario.hpp"

#include <cmath>

#include "gavg/testkit.hpp"

namespace gavg {

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (j.contains(key)) return j.at(key).get<T>();
  return fallback;
}

}  // namespace

ScenarioConfig parse_config(const nlohmann::json& j) {
  ScenarioConfig cfg;
  try {
    cfg.name = get_or<std::string>(j, "name", cfg.name);
    if (j.contains("group")) {
      const auto& g = j.at("group");
      cfg.family = family_from_string(
          get_or<std::string>(g, "family", to_string(cfg.family)));
      cfg.group_dim = get_or<int>(g, "dim", cfg.group_dim);
      cfg.metric_scale = get_or<double>(g, "metric_scale", cfg.metric_scale);
    }
    if (j.contains("base")) {
      const auto& b = j.at("base");
      cfg.base_dim = get_or<int>(b, "dim", cfg.base_dim);
      cfg.base_radius = get_or<double>(b, "radius", cfg.base_radius);
    }
    if (j.contains("action")) {
      const auto& a = j.at("action");
      cfg.action = get_or<std::string>(a, "kind", cfg.action);
      cfg.action_delta = get_or<double>(a, "delta", cfg.action_delta);
    }
    if (j.contains("twist")) {
      const auto& t = j.at("twist");
      cfg.twist = get_or<bool>(t, "enabled", cfg.twist);
      cfg.twist_kappa =
          get_or<std::vector<double>>(t, "kappa", cfg.twist_kappa);
    }
    if (j.contains("perturbation")) {
      const auto& p = j.at("perturbation");
      cfg.epsilon = get_or<double>(p, "epsilon", cfg.epsilon);
      cfg.seed = get_or<std::uint64_t>(p, "seed", cfg.seed);
      cfg.perturbation_group_degree =
          get_or<int>(p, "group_degree", cfg.perturbation_group_degree);
    }
    if (j.contains("representation")) {
      const auto& r = j.at("representation");
      cfg.mode = get_or<std::string>(r, "mode", cfg.mode);
      cfg.grid.group_degree =
          get_or<int>(r, "group_degree", cfg.grid.group_degree);
      cfg.grid.analysis_resolution =
          get_or<int>(r, "analysis_resolution", cfg.grid.analysis_resolution);
      cfg.grid.base_points = get_or<int>(r, "base_points", cfg.grid.base_points);
    }
    cfg.fiber_resolution = get_or<int>(j, "fiber_resolution", cfg.fiber_resolution);
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      cfg.tol = get_or<double>(s, "tol", cfg.tol);
      cfg.max_iter = get_or<int>(s, "max_iter", cfg.max_iter);
      cfg.admissible_defect =
          get_or<double>(s, "admissible_defect", cfg.admissible_defect);
      cfg.divergence_guard =
          get_or<double>(s, "divergence_guard", cfg.divergence_guard);
    }
    if (j.contains("pairs")) {
      const auto& p = j.at("pairs");
      cfg.pairs.base_grid = get_or<int>(p, "base_grid", cfg.pairs.base_grid);
      cfg.pairs.group_resolution =
          get_or<int>(p, "group_resolution", cfg.pairs.group_resolution);
      cfg.pairs.max_pairs = get_or<int>(p, "max_pairs", cfg.pairs.max_pairs);
      cfg.pairs.seed = get_or<std::uint64_t>(p, "seed", cfg.pairs.seed);
      cfg.pair_base_mode =
          get_or<std::string>(p, "base_mode", cfg.pair_base_mode);
    }
    if (j.contains("mutation")) {
      const auto& m = j.at("mutation");
      cfg.mutate = get_or<bool>(m, "enabled", cfg.mutate);
      cfg.mutation_magnitude =
          get_or<double>(m, "magnitude", cfg.mutation_magnitude);
    }
    cfg.epsilons = get_or<std::vector<double>>(j, "epsilons", cfg.epsilons);
    cfg.deterministic_output =
        get_or<bool>(j, "deterministic_output", cfg.deterministic_output);
    cfg.workers = get_or<int>(j, "workers", cfg.workers);
    cfg.output_dir = get_or<std::string>(j, "output", cfg.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

nlohmann::json emit_config(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["name"] = cfg.name;
  j["group"] = {{"family", to_string(cfg.family)},
                {"dim", cfg.group_dim},
                {"metric_scale", cfg.metric_scale}};
  j["base"] = {{"dim", cfg.base_dim}, {"radius", cfg.base_radius}};
  j["action"] = {{"kind", cfg.action}, {"delta", cfg.action_delta}};
  j["twist"] = {{"enabled", cfg.twist}, {"kappa", cfg.twist_kappa}};
  j["mutation"] = {{"enabled", cfg.mutate},
                   {"magnitude", cfg.mutation_magnitude}};
  j["perturbation"] = {{"epsilon", cfg.epsilon},
                       {"seed", cfg.seed},
                       {"group_degree", cfg.perturbation_group_degree}};
  j["representation"] = {{"mode", cfg.mode},
                         {"group_degree", cfg.grid.group_degree},
                         {"analysis_resolution", cfg.grid.analysis_resolution},
                         {"base_points", cfg.grid.base_points}};
  j["fiber_resolution"] = cfg.fiber_resolution;
  j["solver"] = {{"tol", cfg.tol},
                 {"max_iter", cfg.max_iter},
                 {"admissible_defect", cfg.admissible_defect},
                 {"divergence_guard", cfg.divergence_guard}};
  j["pairs"] = {{"base_grid", cfg.pairs.base_grid},
                {"group_resolution", cfg.pairs.group_resolution},
                {"max_pairs", cfg.pairs.max_pairs},
                {"seed", cfg.pairs.seed},
                {"base_mode", cfg.pair_base_mode}};
  j["epsilons"] = cfg.epsilons;
  j["deterministic_output"] = cfg.deterministic_output;
  j["workers"] = cfg.workers;
  j["output"] = cfg.output_dir;
  return j;
}

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.base_radius <= 0.0) throw ConfigError("base radius must be > 0");
  if (cfg.base_dim < 0) throw ConfigError("base dimension must be >= 0");
  if (cfg.epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  if (cfg.tol <= 0.0) throw ConfigError("tol must be > 0");
  if (cfg.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (cfg.fiber_resolution < 2)
    throw ConfigError("fiber resolution must be >= 2");
  if (cfg.grid.analysis_resolution < 2)
    throw ConfigError("analysis resolution must be >= 2");
  if (cfg.pairs.group_resolution < 2)
    throw ConfigError("pair group resolution must be >= 2");
  if (cfg.mode != "grid" && cfg.mode != "closed_form")
    throw ConfigError("representation mode must be grid or closed_form");
  if (cfg.action != "trivial" && cfg.action != "rotation2d" &&
      cfg.action != "near_rotation2d")
    throw ConfigError("unknown action kind: " + cfg.action);
  if (cfg.pair_base_mode != "uniform" && cfg.pair_base_mode != "chebyshev")
    throw ConfigError("pair base_mode must be uniform or chebyshev");
  if ((cfg.action == "rotation2d" || cfg.action == "near_rotation2d")) {
    if (cfg.family != GroupFamily::U1)
      throw ConfigError("rotation2d actions require the circle group");
    if (cfg.base_dim != 2)
      throw ConfigError("rotation2d actions require a 2-dimensional base");
  }
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
}

ActionFn make_action(const ScenarioConfig& cfg,
                     std::shared_ptr<const Group> group) {
  if (cfg.action == "trivial") {
    return [](const GroupPoint&, const BasePoint& x) { return x; };
  }
  const double delta = (cfg.action == "near_rotation2d") ? cfg.action_delta : 0.0;
  (void)group;
  return [delta](const GroupPoint& g, const BasePoint& x) -> BasePoint {
    const double c = g.m(0, 0).real();
    const double s = g.m(0, 0).imag();
    BasePoint y(2);
    y(0) = c * x(0) - s * x(1);
    y(1) = s * x(0) + c * x(1);
    if (delta != 0.0) {
      y(0) += delta * x(1) * x(1);
      y(1) += delta * x(0) * x(1);
    }
    return y;
  };
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  auto group =
      std::make_shared<Group>(cfg.family, cfg.group_dim, cfg.metric_scale);

  auto inner = std::make_shared<ActionChart>(group, cfg.base_dim,
                                             cfg.base_radius,
                                             make_action(cfg, group));
  std::shared_ptr<const GroupoidChart> chart = inner;
  if (cfg.twist) {
    std::vector<double> kappa = cfg.twist_kappa;
    kappa.resize(cfg.base_dim, 0.0);
    auto captured_group = group;
    CocycleFn cocycle = [captured_group, kappa](const BasePoint& x) {
      Eigen::VectorXd coords =
          Eigen::VectorXd::Zero(captured_group->algebra_dim());
      double slope = 0.0;
      for (int i = 0; i < x.size(); ++i) slope += kappa[i] * x(i);
      coords(0) = slope;
      return captured_group->exp_map(
          captured_group->algebra_from_coords(coords));
    };
    chart = std::make_shared<TwistedChart>(inner, cocycle);
  }
  if (cfg.mutate) {
    Eigen::VectorXd coords = Eigen::VectorXd::Zero(group->algebra_dim());
    coords(0) = cfg.mutation_magnitude;
    chart = std::make_shared<MutatedChart>(
        chart, group->exp_map(group->algebra_from_coords(coords)));
  }

  HaarSystem haar =
      direct_haar_system(chart, group->haar_quadrature(cfg.fiber_resolution));

  // Initial correction: the seeded unit-sup perturbation field scaled by
  // epsilon; it vanishes on the isotropy fiber when a base is present.
  auto eta = random_correction_field(group, cfg.base_dim, cfg.base_radius,
                                     cfg.perturbation_group_degree, cfg.seed);
  const double eps = cfg.epsilon;
  CandidateMap::CorrectionFn u0 = [eta, eps](const Arrow& p) {
    AlgebraVector v = eta(p);
    v.m *= eps;
    return v;
  };

  // Exact homomorphism in the same chart: for a twisted chart, transport
  // the arrow back to the untwisted coordinate; otherwise the projection.
  CandidateMap::CorrectionFn u_exact = nullptr;
  if (cfg.twist) {
    auto twisted = std::static_pointer_cast<const TwistedChart>(chart);
    auto captured_group = group;
    u_exact = [twisted, captured_group](const Arrow& p) {
      const GroupPoint hom = twisted->untwist(p).group_part;
      return captured_group->log_map(
          captured_group->multiply(hom, captured_group->inverse(p.group_part)));
    };
  }

  const bool enforce = cfg.base_dim > 0;
  CandidateMap phi0 =
      (cfg.mode == "grid")
          ? CandidateMap::grid_from_function(chart, cfg.grid, u0, enforce)
          : CandidateMap::closed_form(chart, u0);
  CandidateMap exact =
      (cfg.mode == "grid")
          ? CandidateMap::grid_from_function(chart, cfg.grid, u_exact, enforce)
          : CandidateMap::closed_form(chart, u_exact);

  std::vector<ComposablePair> pairs;
  if (cfg.pair_base_mode == "chebyshev" && cfg.base_dim > 0) {
    BaseGrid bgrid(cfg.base_dim, cfg.base_radius, cfg.pairs.base_grid);
    std::vector<BasePoint> bases;
    for (int k = 0; k < bgrid.size(); ++k) bases.push_back(bgrid.node(k));
    pairs = sample_composable_pairs(*chart, cfg.pairs, bases);
  } else {
    pairs = sample_composable_pairs(*chart, cfg.pairs);
  }

  const double floor = defect(exact, pairs, cfg.workers).sup;

  return Scenario{group,     chart, haar, phi0,
                  exact,     pairs, floor, cfg};
}

IterateOptions solver_options(const Scenario& scenario) {
  const ScenarioConfig& cfg = scenario.config;
  IterateOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  opt.admissible_defect = cfg.admissible_defect;
  opt.divergence_guard = cfg.divergence_guard;
  opt.noise_floor = scenario.noise_floor;
  opt.workers = cfg.workers;
  opt.deterministic_timing = cfg.deterministic_output;
  return opt;
}

}  // namespace gavg
