#pragma once

#include <array>
#include <string>
#include <vector>

#include "gavg/candidate.hpp"
#include "gavg/haar.hpp"

namespace gavg {

struct DefectSample {
  double sup = 0.0;
  double p95 = 0.0;
};

/// Deterministic tensor sample of composable pairs: a uniform base grid
/// crossed with group quadrature nodes for each factor, optionally thinned
/// to max_pairs by a seeded shuffle.
struct PairSampleSpec {
  int base_grid = 3;
  int group_resolution = 3;
  int max_pairs = 20000;
  std::uint64_t seed = 2026;
};

std::vector<ComposablePair> sample_composable_pairs(const GroupoidChart& chart,
                                                    const PairSampleSpec& spec);

/// Same tensor construction over an explicit list of source base points.
std::vector<ComposablePair> sample_composable_pairs(
    const GroupoidChart& chart, const PairSampleSpec& spec,
    const std::vector<BasePoint>& bases);

/// Associativity defect field psi(p, q) = phi(pq) phi(q)^-1 phi(p)^-1.
GroupPoint defect_field(const CandidateMap& phi, const Arrow& p,
                        const Arrow& q);

DefectSample defect(const CandidateMap& phi,
                    const std::vector<ComposablePair>& pairs, int workers = 1);

/// One fiberwise averaging step: phi'(p) = exp(I(p)) phi(p) with
/// I(p) the Haar average of log(psi(p, q)) over the source fiber of p.
/// Grid maps are resampled at their analysis nodes and refit; closed-form
/// maps return a nested closed-form map.
CandidateMap average_step(const CandidateMap& phi, const HaarSystem& haar,
                          int workers = 1);

/// The three equivalent forms of the averaged value at one arrow:
///   0: source-fiber average of log(psi(p, q)), applied on the left;
///   1: the same integral after the change of variable r = p q over the
///      target fiber;
///   2: the conjugated form phi(p) exp(avg log(phi(p)^-1 psi phi(p))).
std::array<GroupPoint, 3> average_step_variants(const CandidateMap& phi,
                                                const HaarSystem& haar,
                                                const Arrow& p);

enum class IterateStatus { Converged, NoiseFloor, MaxIter, Diverged };

std::string to_string(IterateStatus s);

struct IterationRecord {
  int iter = 0;          // 1-based; record 1 is the initial map
  double defect_sup = 0.0;
  double defect_p95 = 0.0;
  double step_norm = 0.0;  // sup distance between consecutive maps, 0 at start
  double wall_ms = 0.0;
};

struct ConvergenceTrace {
  std::vector<IterationRecord> records;
};

struct IterateOptions {
  double tol = 1e-9;
  int max_iter = 12;
  double admissible_defect = 0.1;   // require Delta_1 below this to start
  double divergence_guard = 1.5;    // abort if Delta grows by this factor
  double noise_floor = 0.0;         // representation floor, 0 if exact
  int workers = 1;
  bool deterministic_timing = false;  // report 0 wall_ms for byte-stable runs
};

struct IterateResult {
  CandidateMap final_map;
  ConvergenceTrace trace;
  IterateStatus status = IterateStatus::MaxIter;
  std::string message;
};

IterateResult iterate(const CandidateMap& phi0, const HaarSystem& haar,
                      const std::vector<ComposablePair>& pairs,
                      const IterateOptions& opt);

}  // namespace gavg
