#pragma once

#include <functional>
#include <memory>

#include "gavg/candidate.hpp"

namespace gavg {

struct NewtonOptions {
  double fd_step = 1e-6;
  double tol = 1e-10;
  int max_iter = 50;
};

/// Solve (phi, s)(p) = (g, x) for the arrow p by Newton iteration on the
/// group coordinate, starting from p = (g, x).  Throws std::runtime_error
/// when the iteration cap is hit (the operational signal that the base
/// neighborhood is too large for the trivialization to invert).
Arrow invert_trivialization(const CandidateMap& phi, const GroupPoint& g,
                            const BasePoint& x, const NewtonOptions& opt = {});

/// The action g.x = t(theta(g, x)) induced by a near-homomorphism phi,
/// with theta the inverse of (phi, s).
struct InducedAction {
  ActionFn map;
  std::shared_ptr<const GroupoidChart> chart;
};

InducedAction induced_action(const CandidateMap& phi,
                             const NewtonOptions& opt = {});

struct ActionAxiomReport {
  double compatibility = 0.0;  // |a(g, a(h, x)) - a(g h, x)|
  double unit = 0.0;           // |a(1, x) - x|
  double fixes_origin = 0.0;   // |a(g, x0)|
  double max_residual() const;
};

ActionAxiomReport check_action_axioms(const Group& group, int base_dim,
                                      double base_radius, const ActionFn& a,
                                      int samples, unsigned seed);

/// Linear model from Bochner averaging: R(g) is the derivative of a(g, .)
/// at the fixed point (central differences), h the averaged chart map
/// h(x) = sum_k w_k R(g_k)^-1 a(g_k, x).  For a true action h conjugates a
/// to the linear action of R.
struct LinearModel {
  std::function<Eigen::MatrixXd(const GroupPoint&)> representation;
  std::function<BasePoint(const BasePoint&)> chart_map;
  double condition = 0.0;  // worst conditioning of R over the quadrature
};

LinearModel bochner_linearize(const Group& group, const ActionFn& a,
                              int base_dim, const GroupQuadrature& quad,
                              double fd_step);

/// |h(a(g, x)) - R(g) h(x)| in the sup norm.
double conjugacy_residual(const LinearModel& model, const ActionFn& a,
                          const GroupPoint& g, const BasePoint& x);

/// sup over sampled (g, h) of ||R(g) R(h) - R(g h)||.
double representation_check(const LinearModel& model, const Group& group,
                            int samples, unsigned seed);

}  // namespace gavg
