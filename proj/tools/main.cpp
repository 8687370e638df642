#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <CLI11.hpp>

#include "gavg/report.hpp"
#include "gavg/scenario.hpp"

namespace {

constexpr int kExitConfigError = 5;
constexpr int kExitFailure = 4;
constexpr double kAxiomTol = 1e-6;

struct CliArgs {
  std::string config_path;
  std::string out_override;
  int workers_override = 0;  // 0 = keep config value
  std::uint64_t seed_override = 0;
  bool seed_set = false;
};

struct LoadedConfig {
  gavg::ScenarioConfig cfg;   // with runtime overrides applied
  gavg::ScenarioConfig echo;  // as persisted (workers from the file)
};

LoadedConfig load_config(const CliArgs& args) {
  std::ifstream in(args.config_path);
  if (!in) throw gavg::ConfigError("cannot read config " + args.config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw gavg::ConfigError(std::string("config is not valid JSON: ") +
                            e.what());
  }
  gavg::ScenarioConfig cfg = gavg::parse_config(j);
  if (!args.out_override.empty()) cfg.output_dir = args.out_override;
  if (args.seed_set) cfg.seed = args.seed_override;
  LoadedConfig out{cfg, cfg};
  // The worker count never changes results, so it is not echoed back when
  // overridden from the command line; reports stay byte-identical.
  if (args.workers_override > 0) out.cfg.workers = args.workers_override;
  return out;
}

int cmd_run(const LoadedConfig& lc) {
  const auto t0 = std::chrono::steady_clock::now();
  gavg::Scenario sc = gavg::build_scenario(lc.cfg);
  gavg::IterateResult res =
      gavg::iterate(sc.phi0, sc.haar, sc.pairs, gavg::solver_options(sc));

  gavg::RunReport rep;
  rep.config_echo = gavg::emit_config(lc.echo);
  rep.trace = res.trace;
  rep.noise_floor = sc.noise_floor;
  rep.final_defect = res.trace.records.back().defect_sup;
  rep.status = res.status;
  rep.message = res.message;
  try {
    rep.order_fit = gavg::fit_convergence_order(res.trace, sc.noise_floor);
  } catch (const std::runtime_error&) {
    // too few iterations above the floor; leave the field out
  }
  if (!lc.cfg.deterministic_output) {
    rep.total_wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
  }
  gavg::write_report(rep, lc.cfg.output_dir);

  std::printf("status: %s (%s)\n", gavg::to_string(res.status).c_str(),
              res.message.c_str());
  std::printf("noise floor: %.3e\n", sc.noise_floor);
  for (const auto& r : res.trace.records) {
    std::printf("  iter %2d  defect %.6e  p95 %.6e  step %.6e\n", r.iter,
                r.defect_sup, r.defect_p95, r.step_norm);
  }
  return gavg::exit_code(res.status);
}

int cmd_check_axioms(const LoadedConfig& lc) {
  gavg::Scenario sc = gavg::build_scenario(lc.cfg);
  const gavg::AxiomReport rep =
      gavg::check_axioms(*sc.chart, 200, static_cast<unsigned>(lc.cfg.seed));
  nlohmann::ordered_json j;
  j["config"] = gavg::emit_config(lc.echo);
  j["source_target"] = rep.source_target;
  j["associativity"] = rep.associativity;
  j["unit_laws"] = rep.unit_laws;
  j["inverse_laws"] = rep.inverse_laws;
  j["max_residual"] = rep.max_residual();
  j["tolerance"] = kAxiomTol;
  std::filesystem::create_directories(lc.cfg.output_dir);
  std::ofstream(lc.cfg.output_dir + "/axioms.json") << j.dump(2) << "\n";
  std::printf("associativity %.3e  units %.3e  inverses %.3e  s/t %.3e\n",
              rep.associativity, rep.unit_laws, rep.inverse_laws,
              rep.source_target);
  if (rep.max_residual() > kAxiomTol) {
    std::fprintf(stderr, "axiom check FAILED (max residual %.3e > %.1e)\n",
                 rep.max_residual(), kAxiomTol);
    return kExitFailure;
  }
  std::printf("axiom check passed\n");
  return 0;
}

int cmd_haar_test(const LoadedConfig& lc) {
  gavg::Scenario sc = gavg::build_scenario(lc.cfg);
  const auto quad = sc.group->haar_quadrature(lc.cfg.fiber_resolution);
  // Source-independent (but group-non-invariant) reference densities: the
  // averaged system is then the unique invariant one, so it must agree with
  // the direct construction.  A source-dependent density also averages to an
  // invariant system, but a different one (invariant systems are only unique
  // up to a source reweighting), so it is not a valid cross-check.
  const gavg::HaarSystem lemma = gavg::lemma_haar_system(
      sc.chart, gavg::test_density(sc.group, 0.3, 0.0),
      gavg::test_density(sc.group, -0.2, 0.0), quad);

  std::mt19937_64 rng(lc.cfg.seed);
  const auto basket = gavg::default_test_basket(
      *sc.group, lc.cfg.base_dim, static_cast<unsigned>(lc.cfg.seed));
  const auto probes =
      gavg::sample_arrows(*sc.chart, 16, static_cast<unsigned>(lc.cfg.seed));

  double mass = 0.0, invariance = 0.0, tv = 0.0;
  for (const auto& q : probes) {
    const auto fiber = lemma.fiber(sc.chart->target(q));
    double total = 0.0;
    for (const auto& wa : fiber) total += wa.weight;
    mass = std::max(mass, std::abs(total - 1.0));
    invariance = std::max(invariance, gavg::check_invariance(lemma, q, basket));
    tv = std::max(tv, gavg::fiber_total_variation(sc.haar, lemma,
                                                  sc.chart->source(q)));
  }
  nlohmann::ordered_json j;
  j["config"] = gavg::emit_config(lc.echo);
  j["mass_residual"] = mass;
  j["invariance_residual"] = invariance;
  j["total_variation_vs_direct"] = tv;
  std::filesystem::create_directories(lc.cfg.output_dir);
  std::ofstream(lc.cfg.output_dir + "/haar.json") << j.dump(2) << "\n";
  std::printf("mass %.3e  invariance %.3e  tv-vs-direct %.3e\n", mass,
              invariance, tv);
  const bool ok = mass <= 1e-9 && invariance <= 1e-6 && tv <= 1e-5;
  if (!ok) {
    std::fprintf(stderr, "haar test FAILED\n");
    return kExitFailure;
  }
  std::printf("haar test passed\n");
  return 0;
}

int cmd_convergence_study(const LoadedConfig& lc) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::filesystem::create_directories(lc.cfg.output_dir);
  std::FILE* csv =
      std::fopen((lc.cfg.output_dir + "/study.csv").c_str(), "wb");
  if (!csv) throw std::runtime_error("cannot open study.csv");
  std::fprintf(csv, "epsilon,defect0,defect1,contraction,order,status\n");

  bool all_ok = true;
  int run_index = 0;
  for (double eps : lc.cfg.epsilons) {
    gavg::ScenarioConfig cfg = lc.cfg;
    cfg.epsilon = eps;
    gavg::Scenario sc = gavg::build_scenario(cfg);
    gavg::IterateResult res =
        gavg::iterate(sc.phi0, sc.haar, sc.pairs, gavg::solver_options(sc));
    gavg::write_trace_csv(
        res.trace,
        lc.cfg.output_dir + "/trace-" + std::to_string(run_index++) + ".csv");
    const double d0 = res.trace.records.front().defect_sup;
    const double d1 = res.trace.records.size() > 1
                          ? res.trace.records[1].defect_sup
                          : 0.0;
    const double contraction = (d0 > 0.0) ? d1 / (d0 * d0) : 0.0;
    double order = 0.0;
    try {
      order = gavg::fit_convergence_order(res.trace, sc.noise_floor).order;
    } catch (const std::runtime_error&) {
    }
    std::fprintf(csv, "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", eps, d0, d1,
                 contraction, order, gavg::to_string(res.status).c_str());
    rows.push_back({{"epsilon", eps},
                    {"defect0", d0},
                    {"defect1", d1},
                    {"contraction", contraction},
                    {"order", order},
                    {"status", gavg::to_string(res.status)}});
    std::printf("eps %.1e  defect0 %.3e  defect1 %.3e  C=%.3f  order %.3f  %s\n",
                eps, d0, d1, contraction, order,
                gavg::to_string(res.status).c_str());
    if (res.status != gavg::IterateStatus::Converged &&
        res.status != gavg::IterateStatus::NoiseFloor) {
      all_ok = false;
    }
  }
  std::fclose(csv);
  nlohmann::ordered_json j;
  j["config"] = gavg::emit_config(lc.echo);
  j["runs"] = rows;
  std::ofstream(lc.cfg.output_dir + "/study.json") << j.dump(2) << "\n";
  return all_ok ? 0 : kExitFailure;
}

int cmd_linearize(const LoadedConfig& lc) {
  gavg::Scenario sc = gavg::build_scenario(lc.cfg);
  gavg::IterateResult res =
      gavg::iterate(sc.phi0, sc.haar, sc.pairs, gavg::solver_options(sc));
  if (res.status != gavg::IterateStatus::Converged &&
      res.status != gavg::IterateStatus::NoiseFloor) {
    std::fprintf(stderr, "averaging did not converge (%s); cannot linearize\n",
                 gavg::to_string(res.status).c_str());
    return gavg::exit_code(res.status);
  }
  const gavg::InducedAction action = gavg::induced_action(res.final_map);
  const gavg::ActionAxiomReport axioms = gavg::check_action_axioms(
      *sc.group, lc.cfg.base_dim, lc.cfg.base_radius, action.map, 64,
      static_cast<unsigned>(lc.cfg.seed));

  const auto quad = sc.group->haar_quadrature(lc.cfg.fiber_resolution);
  const double fd = 1e-5 * lc.cfg.base_radius;
  const gavg::LinearModel model =
      gavg::bochner_linearize(*sc.group, action.map, lc.cfg.base_dim, quad, fd);
  const double rep_residual = gavg::representation_check(
      model, *sc.group, 256, static_cast<unsigned>(lc.cfg.seed));

  std::mt19937_64 rng(lc.cfg.seed);
  double conj_full = 0.0, conj_half = 0.0;
  for (int k = 0; k < 16; ++k) {
    const gavg::GroupPoint g = sc.group->random_point(rng);
    gavg::BasePoint x(lc.cfg.base_dim);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < lc.cfg.base_dim; ++i) x(i) = u(rng);
    if (x.size() > 0 && x.lpNorm<Eigen::Infinity>() > 0) {
      x *= 0.5 * lc.cfg.base_radius / x.lpNorm<Eigen::Infinity>();
    }
    conj_full =
        std::max(conj_full, gavg::conjugacy_residual(model, action.map, g, x));
    conj_half = std::max(
        conj_half, gavg::conjugacy_residual(model, action.map, g, 0.5 * x));
  }

  nlohmann::ordered_json j;
  j["config"] = gavg::emit_config(lc.echo);
  j["final_defect"] = res.trace.records.back().defect_sup;
  j["action_axioms"] = {{"compatibility", axioms.compatibility},
                        {"unit", axioms.unit},
                        {"fixes_origin", axioms.fixes_origin}};
  j["representation_residual"] = rep_residual;
  j["representation_condition"] = model.condition;
  j["conjugacy_residual"] = conj_full;
  j["conjugacy_residual_half_radius"] = conj_half;
  std::filesystem::create_directories(lc.cfg.output_dir);
  std::ofstream(lc.cfg.output_dir + "/linear_model.json") << j.dump(2) << "\n";

  std::printf("action axioms %.3e  representation %.3e  conjugacy %.3e\n",
              axioms.max_residual(), rep_residual, conj_full);
  if (axioms.max_residual() > 1e-5 || rep_residual > 1e-5) {
    std::fprintf(stderr, "linearization residuals too large\n");
    return kExitFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fiberwise averaging on proper groupoid charts: iterate a "
               "candidate trivialization to a homomorphism and linearize "
               "the induced action"};
  app.require_subcommand(1);

  CliArgs args;
  app.add_option("--config", args.config_path, "Path to a JSON scenario config")
      ->required();
  app.add_option("--out", args.out_override, "Override the output directory");
  app.add_option("--workers", args.workers_override,
                 "Worker thread count (results are worker-invariant)");
  auto* seed_opt =
      app.add_option("--seed", args.seed_override, "Override the scenario seed");
  app.fallthrough();

  auto* run = app.add_subcommand("run", "Full averaging pipeline");
  auto* axioms = app.add_subcommand("check-axioms", "Groupoid axiom residuals");
  auto* haar = app.add_subcommand("haar-test",
                                  "Invariant fiber measure construction checks");
  auto* study = app.add_subcommand(
      "convergence-study", "Contraction constants across perturbation scales");
  auto* linearize =
      app.add_subcommand("linearize", "Induced action and its linear model");

  CLI11_PARSE(app, argc, argv);
  args.seed_set = seed_opt->count() > 0;

  try {
    const LoadedConfig lc = load_config(args);
    if (run->parsed()) return cmd_run(lc);
    if (axioms->parsed()) return cmd_check_axioms(lc);
    if (haar->parsed()) return cmd_haar_test(lc);
    if (study->parsed()) return cmd_convergence_study(lc);
    if (linearize->parsed()) return cmd_linearize(lc);
  } catch (const gavg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitConfigError;
}
