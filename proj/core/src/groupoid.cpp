#include "gavg/groupoid.hpp"

#include <algorithm>
#include <cmath>

namespace gavg {

namespace {
constexpr double kComposabilityTol = 1e-9;
}

double AxiomReport::max_residual() const {
  return std::max(std::max(source_target, associativity),
                  std::max(unit_laws, inverse_laws));
}

bool GroupoidChart::in_base_box(const BasePoint& x, double slack) const {
  if (x.size() != base_dim_) return false;
  return x.size() == 0 || x.lpNorm<Eigen::Infinity>() <= base_radius_ + slack;
}

// ---------------------------------------------------------------------------
// ActionChart

ActionChart::ActionChart(std::shared_ptr<const Group> group, int base_dim,
                         double base_radius, ActionFn action, double safety_factor)
    : GroupoidChart(std::move(group), base_dim, base_radius),
      action_(std::move(action)),
      safety_factor_(safety_factor) {
  // The action must fix x0.
  const BasePoint x0 = fixed_point();
  std::mt19937_64 rng(12345);
  for (int k = 0; k < 8; ++k) {
    const BasePoint moved = action_(this->group().random_point(rng), x0);
    if (base_dim > 0 && moved.lpNorm<Eigen::Infinity>() > 1e-12)
      throw std::invalid_argument("ActionChart: action does not fix x0");
  }
}

BasePoint ActionChart::act(const GroupPoint& g, const BasePoint& x) const {
  BasePoint y = action_(g, x);
  if (base_dim() > 0 &&
      y.lpNorm<Eigen::Infinity>() > safety_factor_ * base_radius()) {
    throw std::domain_error("ActionChart: action left the safety box");
  }
  return y;
}

BasePoint ActionChart::target(const Arrow& p) const {
  return act(p.group_part, p.base);
}

Arrow ActionChart::product(const Arrow& p, const Arrow& q) const {
  const BasePoint tq = target(q);
  if (base_dim() > 0 &&
      (source(p) - tq).lpNorm<Eigen::Infinity>() > kComposabilityTol)
    throw std::invalid_argument("product: arrows are not composable");
  return {group().multiply(p.group_part, q.group_part), q.base};
}

Arrow ActionChart::invert(const Arrow& p) const {
  return {group().inverse(p.group_part), target(p)};
}

Arrow ActionChart::target_fiber_arrow(const BasePoint& y, const GroupPoint& h) const {
  return {h, act(group().inverse(h), y)};
}

GroupPoint ActionChart::target_fiber_param(const Arrow& p) const {
  return p.group_part;
}

// ---------------------------------------------------------------------------
// TwistedChart

TwistedChart::TwistedChart(std::shared_ptr<const GroupoidChart> inner, CocycleFn cocycle)
    : GroupoidChart(inner->group_ptr(), inner->base_dim(), inner->base_radius()),
      inner_(std::move(inner)),
      cocycle_(std::move(cocycle)) {
  const GroupPoint c0 = cocycle_(fixed_point());
  if (group().distance_to_identity(c0) > 1e-12)
    throw std::invalid_argument("TwistedChart: cocycle does not fix 1_G at x0");
}

Arrow TwistedChart::twist(const Arrow& a) const {
  const Group& g = group();
  const GroupPoint ct = cocycle_(inner_->target(a));
  const GroupPoint cs = cocycle_(a.base);
  return {g.multiply(g.multiply(ct, a.group_part), g.inverse(cs)), a.base};
}

Arrow TwistedChart::untwist(const Arrow& p) const {
  const Group& g = group();
  const GroupPoint cs = cocycle_(p.base);
  GroupPoint cur = g.multiply(p.group_part, cs);  // guess with c(t) ~ 1
  // g = c(t(g,x))^-1 g' c(x) is a contraction for small cocycle variation.
  for (int it = 0; it < 80; ++it) {
    const GroupPoint ct = cocycle_(inner_->target({cur, p.base}));
    const GroupPoint next =
        g.multiply(g.multiply(g.inverse(ct), p.group_part), cs);
    const double step = (next.m - cur.m).norm();
    cur = next;
    if (step < 1e-15) break;
  }
  return {cur, p.base};
}

BasePoint TwistedChart::target(const Arrow& p) const {
  return inner_->target(untwist(p));
}

Arrow TwistedChart::product(const Arrow& p, const Arrow& q) const {
  return twist(inner_->product(untwist(p), untwist(q)));
}

Arrow TwistedChart::invert(const Arrow& p) const {
  return twist(inner_->invert(untwist(p)));
}

Arrow TwistedChart::make_arrow(const GroupPoint& g, const BasePoint& x) const {
  return {g, x};
}

Arrow TwistedChart::target_fiber_arrow(const BasePoint& y, const GroupPoint& h) const {
  return twist(inner_->target_fiber_arrow(y, h));
}

GroupPoint TwistedChart::target_fiber_param(const Arrow& p) const {
  return inner_->target_fiber_param(untwist(p));
}

// ---------------------------------------------------------------------------
// MutatedChart

MutatedChart::MutatedChart(std::shared_ptr<const GroupoidChart> inner, GroupPoint extra)
    : GroupoidChart(inner->group_ptr(), inner->base_dim(), inner->base_radius()),
      inner_(std::move(inner)),
      extra_(std::move(extra)) {}

Arrow MutatedChart::product(const Arrow& p, const Arrow& q) const {
  Arrow r = inner_->product(p, q);
  r.group_part = inner_->group().multiply(r.group_part, extra_);
  return r;
}

// ---------------------------------------------------------------------------
// Free operations

double arrow_distance(const GroupoidChart& chart, const Arrow& a, const Arrow& b) {
  double dg;
  try {
    dg = chart.group().distance(a.group_part, b.group_part);
  } catch (const OutOfChartError&) {
    dg = 1.0 + (a.group_part.m - b.group_part.m).norm();
  }
  const double db =
      (chart.base_dim() == 0) ? 0.0 : (a.base - b.base).lpNorm<Eigen::Infinity>();
  return dg + db;
}

std::vector<Arrow> sample_arrows(const GroupoidChart& chart, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ub(-chart.base_radius(), chart.base_radius());
  std::vector<Arrow> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    BasePoint x(chart.base_dim());
    for (int i = 0; i < chart.base_dim(); ++i) x[i] = ub(rng);
    out.push_back(chart.make_arrow(chart.group().random_point(rng), x));
  }
  return out;
}

AxiomReport check_axioms(const GroupoidChart& chart, int sample_size, unsigned seed) {
  if (sample_size < 1) throw std::invalid_argument("check_axioms: sample_size >= 1");
  AxiomReport rep;
  const Group& g = chart.group();
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const std::vector<Arrow> sample = sample_arrows(chart, sample_size, seed);
  for (const Arrow& r : sample) {
    // Build an exactly composable pair and triple over r.  A structure map
    // that produces a non-composable intermediate arrow (broken fixtures do
    // this) counts as a unit residual, not as a crash.
    const Arrow q = chart.make_arrow(g.random_point(rng), chart.target(r));
    const Arrow p = chart.make_arrow(g.random_point(rng), chart.target(q));

    try {
      const Arrow pq = chart.product(p, q);
      double st = 0.0;
      if (chart.base_dim() > 0) {
        st = std::max(
            (chart.source(pq) - chart.source(q)).lpNorm<Eigen::Infinity>(),
            (chart.target(pq) - chart.target(p)).lpNorm<Eigen::Infinity>());
      }
      rep.source_target = std::max(rep.source_target, st);

      const Arrow left = chart.product(pq, r);
      const Arrow right = chart.product(p, chart.product(q, r));
      rep.associativity =
          std::max(rep.associativity, arrow_distance(chart, left, right));
    } catch (const std::invalid_argument&) {
      rep.source_target = std::max(rep.source_target, 1.0);
      rep.associativity = std::max(rep.associativity, 1.0);
    }

    try {
      const Arrow ru = chart.product(r, chart.unit(chart.source(r)));
      const Arrow ur = chart.product(chart.unit(chart.target(r)), r);
      rep.unit_laws = std::max(rep.unit_laws, arrow_distance(chart, ru, r));
      rep.unit_laws = std::max(rep.unit_laws, arrow_distance(chart, ur, r));
    } catch (const std::invalid_argument&) {
      rep.unit_laws = std::max(rep.unit_laws, 1.0);
    }

    try {
      const Arrow rinv = chart.invert(r);
      const Arrow rr = chart.product(r, rinv);
      rep.inverse_laws = std::max(
          rep.inverse_laws,
          arrow_distance(chart, rr, chart.unit(chart.target(r))));
      rep.inverse_laws =
          std::max(rep.inverse_laws, arrow_distance(chart, chart.invert(rinv), r));
    } catch (const std::invalid_argument&) {
      rep.inverse_laws = std::max(rep.inverse_laws, 1.0);
    }
  }
  return rep;
}

std::vector<BasePoint> orbit(const GroupoidChart& chart, const BasePoint& x,
                             int resolution) {
  if (!chart.in_base_box(x))
    throw std::invalid_argument("orbit: x outside the base box");
  std::vector<BasePoint> pts;
  pts.push_back(chart.target(chart.unit(x)));
  if (chart.base_dim() == 0) return pts;
  const GroupQuadrature quad = chart.group().haar_quadrature(resolution);
  for (const GroupPoint& h : quad.nodes)
    pts.push_back(chart.target(chart.make_arrow(h, x)));
  return pts;
}

double saturate(const GroupoidChart& chart, double delta, int resolution) {
  if (delta > chart.base_radius())
    throw std::invalid_argument("saturate: delta exceeds the base radius");
  if (chart.base_dim() == 0) return 0.0;
  double radius = delta;
  const GroupQuadrature quad = chart.group().haar_quadrature(resolution);
  const int d = chart.base_dim();
  const int per_dim = std::max(2, resolution);
  std::vector<int> idx(d, 0);
  while (true) {
    BasePoint x(d);
    for (int i = 0; i < d; ++i)
      x[i] = -delta + 2.0 * delta * idx[i] / (per_dim - 1);
    for (const BasePoint& y : orbit(chart, x, resolution))
      radius = std::max(radius, y.lpNorm<Eigen::Infinity>());
    int i = 0;
    for (; i < d; ++i) {
      if (++idx[i] < per_dim) break;
      idx[i] = 0;
    }
    if (i == d) break;
  }
  if (radius > chart.base_radius() + 1e-12)
    throw std::domain_error("saturate: invariant saturation exceeds the base box");
  return radius;
}

std::vector<WeightedArrow> fiber_t(const GroupoidChart& chart, const BasePoint& y,
                                   const GroupQuadrature& quad) {
  // Targets of box-sourced arrows can leave the sup-norm box (e.g. a
  // rotated corner), so allow one extra radius before giving up.
  if (!chart.in_base_box(y, chart.base_radius()))
    throw std::invalid_argument("fiber_t: y outside the base box");
  std::vector<WeightedArrow> out;
  out.reserve(quad.nodes.size());
  for (size_t k = 0; k < quad.nodes.size(); ++k)
    out.push_back({chart.target_fiber_arrow(y, quad.nodes[k]), quad.weights[k]});
  return out;
}

}  // namespace gavg
