#include "gavg/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace gavg {

namespace {

class File {
 public:
  File(const std::string& path, const char* mode) : f_(std::fopen(path.c_str(), mode)) {
    if (!f_) throw std::runtime_error("cannot open " + path);
  }
  ~File() {
    if (f_) std::fclose(f_);
  }
  std::FILE* get() const { return f_; }

 private:
  std::FILE* f_;
};

}  // namespace

void write_trace_csv(const ConvergenceTrace& trace, const std::string& path) {
  File f(path, "wb");
  std::fprintf(f.get(), "iter,defect_sup,defect_p95,step_norm,wall_ms\n");
  for (const auto& r : trace.records) {
    std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g,%.17g\n", r.iter,
                 r.defect_sup, r.defect_p95, r.step_norm, r.wall_ms);
  }
}

nlohmann::ordered_json report_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["config"] = report.config_echo;
  j["status"] = to_string(report.status);
  j["message"] = report.message;
  j["noise_floor"] = report.noise_floor;
  j["final_defect"] = report.final_defect;
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& r : report.trace.records) {
    trace.push_back({{"iter", r.iter},
                     {"defect_sup", r.defect_sup},
                     {"defect_p95", r.defect_p95},
                     {"step_norm", r.step_norm},
                     {"wall_ms", r.wall_ms}});
  }
  j["trace"] = trace;
  if (report.order_fit) {
    j["order_fit"] = {{"order", report.order_fit->order},
                      {"first_iter", report.order_fit->first_iter},
                      {"last_iter", report.order_fit->last_iter},
                      {"residual", report.order_fit->residual}};
  }
  if (report.haar_invariance) j["haar_invariance"] = *report.haar_invariance;
  if (report.haar_tv_vs_direct)
    j["haar_tv_vs_direct"] = *report.haar_tv_vs_direct;
  if (report.action_axioms) {
    j["action_axioms"] = {
        {"compatibility", report.action_axioms->compatibility},
        {"unit", report.action_axioms->unit},
        {"fixes_origin", report.action_axioms->fixes_origin}};
  }
  if (report.representation_residual)
    j["representation_residual"] = *report.representation_residual;
  j["total_wall_ms"] = report.total_wall_ms;
  j["version"] = "0.1.0";
  return j;
}

void write_report(const RunReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_trace_csv(report.trace, out_dir + "/trace.csv");
  {
    File f(out_dir + "/report.json", "wb");
    const std::string body = report_json(report).dump(2);
    std::fwrite(body.data(), 1, body.size(), f.get());
    std::fputc('\n', f.get());
  }
  {
    File f(out_dir + "/defect_vs_iteration.dat", "wb");
    for (const auto& r : report.trace.records) {
      std::fprintf(f.get(), "%d %.17g\n", r.iter, r.defect_sup);
    }
  }
  {
    File f(out_dir + "/order_fit.dat", "wb");
    const auto& rec = report.trace.records;
    for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
      if (rec[i].defect_sup > 0.0 && rec[i + 1].defect_sup > 0.0) {
        std::fprintf(f.get(), "%.17g %.17g\n", std::log(rec[i].defect_sup),
                     std::log(rec[i + 1].defect_sup));
      }
    }
  }
}

int exit_code(IterateStatus status) {
  switch (status) {
    case IterateStatus::Converged: return 0;
    case IterateStatus::NoiseFloor: return 2;
    case IterateStatus::MaxIter: return 3;
    case IterateStatus::Diverged: return 4;
  }
  return 4;
}

}  // namespace gavg
