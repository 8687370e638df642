#pragma once

#include "gavg/averaging.hpp"
#include "gavg/haar.hpp"

namespace gavg {

/// Deterministic tensor sample of composable triples (p, q, r).
std::vector<ComposableTriple> sample_composable_triples(
    const GroupoidChart& chart, const PairSampleSpec& spec);

/// Max over triples of d(A1 A2 A3, psi(p,q)^-1) for
///   A1 = psi(p,q)^-1 psi(p q, r) psi(p,q),
///   A2 = phi(p) psi(q,r)^-1 phi(p)^-1,
///   A3 = psi(p, q r)^-1.
/// The identity holds exactly for any map phi, so the residual is pure
/// round-off plus chart evaluation noise.
double verify_cocycle_identity(const CandidateMap& phi,
                               const std::vector<ComposableTriple>& triples,
                               int workers = 1);

/// Seeded band-limited correction field with unit sup norm over the
/// group's analysis nodes (and, for base_dim > 0, vanishing at the origin
/// base point).  Terms are monomials of degree <= group_degree in the
/// embedding coordinates times low-order base polynomials.
CandidateMap::CorrectionFn random_correction_field(
    std::shared_ptr<const Group> group, int base_dim, double base_radius,
    int group_degree, std::uint64_t seed);

/// Degenerate d = 0 run: a near-identity self-map of the group is averaged
/// into a homomorphism through the unchanged pipeline (base = single point,
/// fiber = the group, Haar system = group Haar).  The identity constraint
/// is dropped: the limit is a genuine near-identity homomorphism.
struct GkrOptions {
  double tol = 1e-9;
  int max_iter = 12;
  GridSpec grid{10, 11, 1};
  int fiber_resolution = 8;
  int pair_resolution = 4;
  int workers = 1;
};

struct GkrResult {
  IterateResult run;
  double distance_to_identity_map = 0.0;  // sup_g d(phi(g), g)
};

GkrResult gkr_case(std::shared_ptr<const Group> group, double eps,
                   std::uint64_t seed, const GkrOptions& opt = {});

/// Calibrated constant sup ||log(exp f1 exp f2) - f1 - f2|| / (||f1|| ||f2||)
/// over seeded samples with both norms <= norm_cap.
double bch_constant(const Group& group, int sample_size, double norm_cap,
                    std::uint64_t seed);

struct OrderFit {
  double order = 0.0;
  int first_iter = 0;  // 1-based trace indices used
  int last_iter = 0;
  double residual = 0.0;  // rms residual of the log-log fit
};

/// Least-squares slope of log Delta_{n+1} against log Delta_n over the
/// iterations strictly above 3x the floor.  Throws std::runtime_error when
/// fewer than three admissible iterations remain.
OrderFit fit_convergence_order(const ConvergenceTrace& trace, double floor);

/// Finite-difference sup of first derivatives of the defect field over the
/// sampled pairs: group directions on the left factor and base directions
/// through the composable rebuild.
double c1_defect_estimate(const CandidateMap& phi,
                          const std::vector<ComposablePair>& pairs,
                          double fd_step, int workers = 1);

}  // namespace gavg
