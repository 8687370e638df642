#include "gavg/haar.hpp"

#include <cmath>

namespace gavg {

HaarSystem::HaarSystem(std::shared_ptr<const GroupoidChart> chart, GroupQuadrature quad,
                       HaarProvenance provenance, FiberDensity unnormalized_density,
                       double declared_tol)
    : chart_(std::move(chart)),
      quad_(std::move(quad)),
      provenance_(provenance),
      density_(std::move(unnormalized_density)),
      declared_tol_(declared_tol) {}

std::vector<WeightedArrow> HaarSystem::fiber(const BasePoint& y) const {
  std::vector<WeightedArrow> nodes = fiber_t(*chart_, y, quad_);
  double total = 0.0;
  for (WeightedArrow& wa : nodes) {
    const double f = density_ ? density_(wa.arrow) : 1.0;
    if (!(f > 0.0))
      throw std::domain_error("HaarSystem: nonpositive fiber density");
    wa.weight *= f;
    total += wa.weight;
  }
  for (WeightedArrow& wa : nodes) wa.weight /= total;
  return nodes;
}

HaarSystem direct_haar_system(std::shared_ptr<const GroupoidChart> chart,
                              const GroupQuadrature& quad) {
  const double tol = quad.declared_tol;
  return HaarSystem(std::move(chart), quad, HaarProvenance::Direct, nullptr, tol);
}

namespace {

/// |det| of the left translation tau_{p.r^-1} : T(t(r)) -> T(t(p)) in the
/// fiber parameterization coordinates, by central differences at r.
double translation_jacobian(const GroupoidChart& chart, const Arrow& p,
                            const Arrow& r, double h) {
  const Group& g = chart.group();
  const int dg = g.algebra_dim();
  const Arrow q = chart.product(p, chart.invert(r));  // s(q) = t(r)
  const BasePoint yr = chart.target(r);
  const GroupPoint hr = chart.target_fiber_param(r);
  const auto image_coords = [&](const Eigen::VectorXd& delta) {
    const GroupPoint hh = g.multiply(hr, g.exp_map(g.algebra_from_coords(delta)));
    const Arrow u = chart.target_fiber_arrow(yr, hh);
    const GroupPoint out = chart.target_fiber_param(chart.product(q, u));
    return out;
  };
  const GroupPoint center = image_coords(Eigen::VectorXd::Zero(dg));
  Eigen::MatrixXd jac(dg, dg);
  for (int k = 0; k < dg; ++k) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(dg);
    delta[k] = h;
    const GroupPoint plus = image_coords(delta);
    delta[k] = -h;
    const GroupPoint minus = image_coords(delta);
    const Eigen::VectorXd dplus =
        g.algebra_coords(g.log_map(g.multiply(g.inverse(center), plus)));
    const Eigen::VectorXd dminus =
        g.algebra_coords(g.log_map(g.multiply(g.inverse(center), minus)));
    jac.col(k) = (dplus - dminus) / (2.0 * h);
  }
  return std::abs(jac.determinant());
}

}  // namespace

HaarSystem lemma_haar_system(std::shared_ptr<const GroupoidChart> chart,
                             const FiberDensity& mu0, const FiberDensity& nu0,
                             const GroupQuadrature& quad, double fd_step) {
  std::shared_ptr<const GroupoidChart> ch = chart;
  FiberDensity density = [ch, mu0, nu0, quad, fd_step](const Arrow& r) {
    const GroupoidChart& chart_ref = *ch;
    // f~(r) * mu0(r): average of pulled-back densities over S(r).
    double acc = 0.0;
    const BasePoint sr = chart_ref.source(r);
    for (size_t k = 0; k < quad.nodes.size(); ++k) {
      const Arrow p = chart_ref.make_arrow(quad.nodes[k], sr);
      const double jac = translation_jacobian(chart_ref, p, r, fd_step);
      acc += quad.weights[k] * nu0(p) * mu0(p) * jac;
    }
    if (!(acc > 0.0))
      throw std::domain_error(
          "lemma_haar_system: nonpositive density (finite differences too coarse)");
    return acc;
  };
  const double tol = std::max(quad.declared_tol, 10.0 * fd_step * fd_step);
  return HaarSystem(std::move(ch), quad, HaarProvenance::LemmaConstructed,
                    std::move(density), tol);
}

double check_invariance(const HaarSystem& system, const Arrow& q,
                        const std::vector<std::function<double(const Arrow&)>>& tests) {
  const GroupoidChart& chart = system.chart();
  const std::vector<WeightedArrow> source_fiber = system.fiber(chart.source(q));
  const std::vector<WeightedArrow> target_fiber = system.fiber(chart.target(q));
  double residual = 0.0;
  for (const auto& h : tests) {
    double lhs = 0.0, rhs = 0.0;
    for (const WeightedArrow& wa : source_fiber)
      lhs += wa.weight * h(chart.product(q, wa.arrow));
    for (const WeightedArrow& wa : target_fiber) rhs += wa.weight * h(wa.arrow);
    residual = std::max(residual, std::abs(lhs - rhs));
  }
  return residual;
}

FiberDensity test_density(std::shared_ptr<const Group> group, double amplitude,
                          double base_slope) {
  return [group, amplitude, base_slope](const Arrow& r) {
    const double tr = r.group_part.m.trace().real();
    double base = 0.0;
    for (int i = 0; i < r.base.size(); ++i) base += r.base(i);
    return 1.0 + amplitude * tr / group->matrix_dim() + base_slope * base;
  };
}

std::vector<std::function<double(const Arrow&)>> default_test_basket(
    const Group& group, int base_dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::function<double(const Arrow&)>> basket;
  basket.emplace_back([](const Arrow&) { return 1.0; });
  const int n = group.matrix_dim();
  for (int t = 0; t < 4; ++t) {
    Matrix a(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = Complex(normal(rng), normal(rng));
    Eigen::VectorXd cvec = Eigen::VectorXd::Zero(std::max(base_dim, 1));
    for (int i = 0; i < base_dim; ++i) cvec[i] = normal(rng);
    basket.emplace_back([a, cvec, base_dim](const Arrow& p) {
      double base_factor = 1.0;
      for (int i = 0; i < base_dim; ++i) base_factor += cvec[i] * p.base[i];
      return (a * p.group_part.m).trace().real() * base_factor;
    });
  }
  return basket;
}

double fiber_total_variation(const HaarSystem& a, const HaarSystem& b,
                             const BasePoint& y) {
  const std::vector<WeightedArrow> fa = a.fiber(y);
  const std::vector<WeightedArrow> fb = b.fiber(y);
  if (fa.size() != fb.size())
    throw std::invalid_argument("fiber_total_variation: incompatible systems");
  double tv = 0.0;
  for (size_t k = 0; k < fa.size(); ++k) tv += std::abs(fa[k].weight - fb[k].weight);
  return 0.5 * tv;
}

}  // namespace gavg
