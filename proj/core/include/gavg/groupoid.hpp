#pragma once

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "gavg/group.hpp"

namespace gavg {

/// Local chart coordinate on the base, centered at the fixed point x0 = 0.
using BasePoint = Eigen::VectorXd;

/// Arrow of the groupoid in the fixed trivialization M = G x B: the base
/// coordinate is the source, the group part the fiber coordinate.
struct Arrow {
  GroupPoint group_part;
  BasePoint base;
};

struct ComposablePair {
  Arrow p, q;  // s(p) = t(q)
};

struct ComposableTriple {
  Arrow p, q, r;
};

struct AxiomReport {
  double source_target = 0.0;   // |s(p.q) - s(q)|, |t(p.q) - t(p)|
  double associativity = 0.0;   // dist((p.q).r, p.(q.r))
  double unit_laws = 0.0;
  double inverse_laws = 0.0;
  double max_residual() const;
};

/// A proper groupoid near a fixed point, presented by evaluable structure
/// maps in the trivialization M = G x B. Charts are immutable and pure.
class GroupoidChart {
 public:
  GroupoidChart(std::shared_ptr<const Group> group, int base_dim, double base_radius)
      : group_(std::move(group)), base_dim_(base_dim), base_radius_(base_radius) {}
  virtual ~GroupoidChart() = default;

  const Group& group() const { return *group_; }
  std::shared_ptr<const Group> group_ptr() const { return group_; }
  int base_dim() const { return base_dim_; }
  double base_radius() const { return base_radius_; }

  BasePoint fixed_point() const { return BasePoint::Zero(base_dim_); }

  virtual BasePoint source(const Arrow& p) const { return p.base; }
  virtual BasePoint target(const Arrow& p) const = 0;
  virtual Arrow product(const Arrow& p, const Arrow& q) const = 0;
  virtual Arrow invert(const Arrow& p) const = 0;

  /// Arrow with source x and chart group coordinate g.
  virtual Arrow make_arrow(const GroupPoint& g, const BasePoint& x) const {
    return {g, x};
  }
  /// Equivariant parameterization P_y : G -> t^-1(y).
  virtual Arrow target_fiber_arrow(const BasePoint& y, const GroupPoint& h) const = 0;
  /// Inverse of target_fiber_arrow in the group coordinate.
  virtual GroupPoint target_fiber_param(const Arrow& p) const = 0;

  Arrow unit(const BasePoint& x) const { return make_arrow(group().identity(), x); }

  bool in_base_box(const BasePoint& x, double slack = 1e-9) const;

 private:
  std::shared_ptr<const Group> group_;
  int base_dim_;
  double base_radius_;
};

/// Action of G on the base box; fixes x0 = 0.
using ActionFn = std::function<BasePoint(const GroupPoint&, const BasePoint&)>;

/// Smooth cocycle B -> G with c(x0) = 1_G.
using CocycleFn = std::function<GroupPoint(const BasePoint&)>;

/// Action groupoid G x B over B: s(g,x) = x, t(g,x) = g.x.
class ActionChart final : public GroupoidChart {
 public:
  ActionChart(std::shared_ptr<const Group> group, int base_dim, double base_radius,
              ActionFn action, double safety_factor = 4.0);

  BasePoint target(const Arrow& p) const override;
  Arrow product(const Arrow& p, const Arrow& q) const override;
  Arrow invert(const Arrow& p) const override;
  Arrow target_fiber_arrow(const BasePoint& y, const GroupPoint& h) const override;
  GroupPoint target_fiber_param(const Arrow& p) const override;

  BasePoint act(const GroupPoint& g, const BasePoint& x) const;

 private:
  ActionFn action_;
  double safety_factor_;
};

/// Conjugates a chart's trivialization by (g, x) -> (c(t(g,x)) g c(x)^-1, x);
/// isomorphic to the inner chart, but the naive projection is no longer a
/// homomorphism.
class TwistedChart final : public GroupoidChart {
 public:
  TwistedChart(std::shared_ptr<const GroupoidChart> inner, CocycleFn cocycle);

  BasePoint target(const Arrow& p) const override;
  Arrow product(const Arrow& p, const Arrow& q) const override;
  Arrow invert(const Arrow& p) const override;
  Arrow make_arrow(const GroupPoint& g, const BasePoint& x) const override;
  Arrow target_fiber_arrow(const BasePoint& y, const GroupPoint& h) const override;
  GroupPoint target_fiber_param(const Arrow& p) const override;

  Arrow twist(const Arrow& inner_arrow) const;
  Arrow untwist(const Arrow& p) const;
  const GroupoidChart& inner() const { return *inner_; }

 private:
  std::shared_ptr<const GroupoidChart> inner_;
  CocycleFn cocycle_;
};

/// Test fixture: multiplies every product's group part by a fixed extra
/// factor, breaking associativity and the unit laws.
class MutatedChart final : public GroupoidChart {
 public:
  MutatedChart(std::shared_ptr<const GroupoidChart> inner, GroupPoint extra);

  BasePoint target(const Arrow& p) const override { return inner_->target(p); }
  Arrow product(const Arrow& p, const Arrow& q) const override;
  Arrow invert(const Arrow& p) const override { return inner_->invert(p); }
  Arrow make_arrow(const GroupPoint& g, const BasePoint& x) const override {
    return inner_->make_arrow(g, x);
  }
  Arrow target_fiber_arrow(const BasePoint& y, const GroupPoint& h) const override {
    return inner_->target_fiber_arrow(y, h);
  }
  GroupPoint target_fiber_param(const Arrow& p) const override {
    return inner_->target_fiber_param(p);
  }

 private:
  std::shared_ptr<const GroupoidChart> inner_;
  GroupPoint extra_;
};

/// Distance between arrows: group distance plus sup-norm base distance.
double arrow_distance(const GroupoidChart& chart, const Arrow& a, const Arrow& b);

AxiomReport check_axioms(const GroupoidChart& chart, int sample_size, unsigned seed);

/// Sampled orbit O(x) = t(s^-1(x)).
std::vector<BasePoint> orbit(const GroupoidChart& chart, const BasePoint& x,
                             int resolution);

/// Bounding sup-norm radius of t(s^-1(D)) for D the delta-box; throws if
/// the saturation leaves the base box.
double saturate(const GroupoidChart& chart, double delta, int resolution);

struct WeightedArrow {
  Arrow arrow;
  double weight;
};

/// Target fiber t^-1(y) sampled through the chart parameterization with
/// the group quadrature weights attached.
std::vector<WeightedArrow> fiber_t(const GroupoidChart& chart, const BasePoint& y,
                                   const GroupQuadrature& quad);

/// Deterministic sample of arrows covering the chart (seeded).
std::vector<Arrow> sample_arrows(const GroupoidChart& chart, int count, unsigned seed);

}  // namespace gavg
