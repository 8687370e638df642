#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "gavg/averaging.hpp"
#include "gavg/linearize.hpp"
#include "gavg/testkit.hpp"

namespace gavg {

/// Everything a run persists; self-contained (the echoed config reproduces
/// all numbers).
struct RunReport {
  nlohmann::ordered_json config_echo;
  ConvergenceTrace trace;
  double noise_floor = 0.0;
  double final_defect = 0.0;
  std::optional<OrderFit> order_fit;
  std::optional<double> haar_invariance;
  std::optional<double> haar_tv_vs_direct;
  std::optional<ActionAxiomReport> action_axioms;
  std::optional<double> representation_residual;
  IterateStatus status = IterateStatus::MaxIter;
  std::string message;
  double total_wall_ms = 0.0;  // zero when deterministic output is requested
};

/// trace.csv: iter,defect_sup,defect_p95,step_norm,wall_ms with %.17g
/// fields and LF line endings.
void write_trace_csv(const ConvergenceTrace& trace, const std::string& path);

nlohmann::ordered_json report_json(const RunReport& report);

/// Writes trace.csv, report.json and the plot-ready two-column data files
/// into out_dir (created if missing).
void write_report(const RunReport& report, const std::string& out_dir);

/// 0 converged; 2 noise floor; 3 iteration cap; 4 diverged.
int exit_code(IterateStatus status);

}  // namespace gavg
