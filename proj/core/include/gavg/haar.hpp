#pragma once

#include <functional>
#include <memory>

#include "gavg/groupoid.hpp"

namespace gavg {

/// Strictly positive weight function on arrows, relative to the chart's
/// reference fiber parameterization.
using FiberDensity = std::function<double(const Arrow&)>;

enum class HaarProvenance { Direct, LemmaConstructed };

/// Translation-invariant probability quadrature on every target fiber.
class HaarSystem {
 public:
  HaarSystem(std::shared_ptr<const GroupoidChart> chart, GroupQuadrature quad,
             HaarProvenance provenance, FiberDensity unnormalized_density,
             double declared_tol);

  /// Quadrature on t^-1(y); weights are positive and sum to 1 exactly
  /// (normalized per fiber).
  std::vector<WeightedArrow> fiber(const BasePoint& y) const;

  const GroupoidChart& chart() const { return *chart_; }
  std::shared_ptr<const GroupoidChart> chart_ptr() const { return chart_; }
  const GroupQuadrature& quadrature() const { return quad_; }
  HaarProvenance provenance() const { return provenance_; }
  double declared_tol() const { return declared_tol_; }

 private:
  std::shared_ptr<const GroupoidChart> chart_;
  GroupQuadrature quad_;
  HaarProvenance provenance_;
  FiberDensity density_;
  double declared_tol_;
};

/// Push-forward of the group Haar quadrature through the equivariant fiber
/// parameterization; invariance is inherited from the group quadrature.
HaarSystem direct_haar_system(std::shared_ptr<const GroupoidChart> chart,
                              const GroupQuadrature& quad);

/// Invariant system constructed from an arbitrary positive initial density
/// by averaging pulled-back densities over the source fiber and
/// renormalizing. Jacobians of the left translation maps are computed by
/// central finite differences along the fiber coordinates.
HaarSystem lemma_haar_system(std::shared_ptr<const GroupoidChart> chart,
                             const FiberDensity& mu0, const FiberDensity& nu0,
                             const GroupQuadrature& quad, double fd_step = 1e-5);

/// Max residual over the test basket of
/// |sum_{r in T(s(q))} w h(q.r) - sum_{r' in T(q)} w' h(r')|.
double check_invariance(const HaarSystem& system, const Arrow& q,
                        const std::vector<std::function<double(const Arrow&)>>& tests);

/// Smooth strictly positive non-invariant density (matrix trace plus a
/// linear base term) for exercising the lemma construction.
FiberDensity test_density(std::shared_ptr<const Group> group, double amplitude,
                          double base_slope);

/// Matrix-coefficient test functions with mild base dependence.
std::vector<std::function<double(const Arrow&)>> default_test_basket(
    const Group& group, int base_dim, unsigned seed);

/// Total variation distance between the two systems' weights on t^-1(y);
/// requires both systems to share the fiber parameterization nodes.
double fiber_total_variation(const HaarSystem& a, const HaarSystem& b,
                             const BasePoint& y);

}  // namespace gavg
