#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "gavg/averaging.hpp"
#include "gavg/haar.hpp"

namespace gavg {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Declarative description of a runnable experiment.  All defaults are
/// explicit so that the echoed config reproduces the run bit-exactly.
struct ScenarioConfig {
  std::string name = "scenario";
  GroupFamily family = GroupFamily::U1;
  int group_dim = 0;
  double metric_scale = 0.0;

  int base_dim = 2;
  double base_radius = 0.2;
  std::string action = "rotation2d";  // trivial | rotation2d | near_rotation2d
  double action_delta = 0.0;          // deviation scale for near_rotation2d
  bool twist = false;
  std::vector<double> twist_kappa;    // cocycle slope per base coordinate
  bool mutate = false;                // fault-injection fixture
  double mutation_magnitude = 0.0;

  double epsilon = 1e-2;
  std::uint64_t seed = 7;
  int perturbation_group_degree = 1;

  std::string mode = "grid";  // grid | closed_form
  GridSpec grid;
  int fiber_resolution = 6;

  double tol = 1e-9;
  int max_iter = 12;
  double admissible_defect = 0.1;
  double divergence_guard = 1.5;

  PairSampleSpec pairs;
  std::string pair_base_mode = "uniform";  // uniform | chebyshev

  bool deterministic_output = true;
  int workers = 1;
  std::string output_dir = "out";

  std::vector<double> epsilons = {3e-2, 1e-2, 3e-3};  // convergence studies
};

ScenarioConfig parse_config(const nlohmann::json& j);
nlohmann::json emit_config(const ScenarioConfig& cfg);
void validate_config(const ScenarioConfig& cfg);

/// The action described by the config (independent of any groupoid data).
ActionFn make_action(const ScenarioConfig& cfg,
                     std::shared_ptr<const Group> group);

/// Fully-built experiment: chart, invariant fiber measures, initial map,
/// the exact homomorphism in the same representation (for the noise
/// floor), and the deterministic pair sample.
struct Scenario {
  std::shared_ptr<const Group> group;
  std::shared_ptr<const GroupoidChart> chart;
  HaarSystem haar;
  CandidateMap phi0;
  CandidateMap exact_hom;
  std::vector<ComposablePair> pairs;
  double noise_floor = 0.0;
  ScenarioConfig config;
};

Scenario build_scenario(const ScenarioConfig& cfg);

IterateOptions solver_options(const Scenario& scenario);

}  // namespace gavg
