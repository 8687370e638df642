#include "gavg/linearize.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gavg {

double ActionAxiomReport::max_residual() const {
  return std::max({compatibility, unit, fixes_origin});
}

Arrow invert_trivialization(const CandidateMap& phi, const GroupPoint& g,
                            const BasePoint& x, const NewtonOptions& opt) {
  const GroupoidChart& chart = phi.chart();
  const Group& G = phi.group();
  const int dim = G.algebra_dim();
  const GroupPoint g_inv = G.inverse(g);

  auto residual = [&](const GroupPoint& h) -> Eigen::VectorXd {
    const Arrow p = chart.make_arrow(h, x);
    return G.algebra_coords(G.log_map(G.multiply(g_inv, phi.evaluate(p))));
  };

  GroupPoint h = g;
  for (int it = 0; it < opt.max_iter; ++it) {
    const Eigen::VectorXd f = residual(h);
    if (G.algebra_norm(G.algebra_from_coords(f)) <= opt.tol) {
      return chart.make_arrow(h, x);
    }
    Eigen::MatrixXd jac(dim, dim);
    for (int i = 0; i < dim; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
      e(i) = opt.fd_step;
      const AlgebraVector delta = G.algebra_from_coords(e);
      const GroupPoint hp = G.multiply(h, G.exp_map(delta));
      e(i) = -opt.fd_step;
      const GroupPoint hm = G.multiply(h, G.exp_map(G.algebra_from_coords(e)));
      jac.col(i) = (residual(hp) - residual(hm)) / (2.0 * opt.fd_step);
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(-f);
    h = G.project(G.multiply(h, G.exp_map(G.algebra_from_coords(step))).m);
  }
  throw std::runtime_error(
      "trivialization inverse: Newton iteration did not converge "
      "(base neighborhood too large)");
}

InducedAction induced_action(const CandidateMap& phi,
                             const NewtonOptions& opt) {
  CandidateMap captured = phi;
  InducedAction out;
  out.chart = phi.chart_ptr();
  out.map = [captured, opt](const GroupPoint& g,
                            const BasePoint& x) -> BasePoint {
    const Arrow p = invert_trivialization(captured, g, x, opt);
    return captured.chart().target(p);
  };
  return out;
}

ActionAxiomReport check_action_axioms(const Group& group, int base_dim,
                                      double base_radius, const ActionFn& a,
                                      int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-0.5 * base_radius,
                                             0.5 * base_radius);
  ActionAxiomReport report;
  const GroupPoint id = group.identity();
  for (int k = 0; k < samples; ++k) {
    BasePoint x(base_dim);
    for (int i = 0; i < base_dim; ++i) x(i) = box(rng);
    const GroupPoint g = group.random_point(rng);
    const GroupPoint h = group.random_point(rng);

    const BasePoint lhs = a(g, a(h, x));
    const BasePoint rhs = a(group.multiply(g, h), x);
    double comp = (base_dim == 0) ? 0.0 : (lhs - rhs).lpNorm<Eigen::Infinity>();
    report.compatibility = std::max(report.compatibility, comp);

    double unit = (base_dim == 0)
                      ? 0.0
                      : (a(id, x) - x).lpNorm<Eigen::Infinity>();
    report.unit = std::max(report.unit, unit);

    const BasePoint x0 = BasePoint::Zero(base_dim);
    double fix = (base_dim == 0)
                     ? 0.0
                     : a(g, x0).lpNorm<Eigen::Infinity>();
    report.fixes_origin = std::max(report.fixes_origin, fix);
  }
  return report;
}

namespace {

Eigen::MatrixXd action_derivative(const ActionFn& a, const GroupPoint& g,
                                  int dim, double fd_step) {
  Eigen::MatrixXd deriv(dim, dim);
  for (int i = 0; i < dim; ++i) {
    BasePoint e = BasePoint::Zero(dim);
    e(i) = fd_step;
    deriv.col(i) = (a(g, e) - a(g, -e)) / (2.0 * fd_step);
  }
  return deriv;
}

}  // namespace

LinearModel bochner_linearize(const Group& /*group*/, const ActionFn& a,
                              int base_dim, const GroupQuadrature& quad,
                              double fd_step) {
  LinearModel model;
  ActionFn action = a;
  const int dim = base_dim;

  model.representation = [action, dim, fd_step](const GroupPoint& g) {
    if (dim == 0) return Eigen::MatrixXd::Identity(0, 0).eval();
    return action_derivative(action, g, dim, fd_step);
  };

  // Precompute the node averaging data once; h is then a fixed-order sum.
  struct NodeData {
    GroupPoint g;
    Eigen::MatrixXd inv_deriv;
    double weight;
  };
  auto nodes = std::make_shared<std::vector<NodeData>>();
  double worst_cond = 1.0;
  for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
    NodeData nd;
    nd.g = quad.nodes[k];
    nd.weight = quad.weights[static_cast<int>(k)];
    if (dim > 0) {
      const Eigen::MatrixXd deriv = action_derivative(action, nd.g, dim, fd_step);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(deriv);
      const double smin = svd.singularValues().minCoeff();
      const double smax = svd.singularValues().maxCoeff();
      if (smin <= 0.0) {
        throw std::runtime_error(
            "linearization failed: singular derivative at a quadrature node");
      }
      worst_cond = std::max(worst_cond, smax / smin);
      nd.inv_deriv = deriv.inverse();
    } else {
      nd.inv_deriv = Eigen::MatrixXd::Identity(0, 0);
    }
    nodes->push_back(std::move(nd));
  }
  model.condition = worst_cond;

  model.chart_map = [action, nodes, dim](const BasePoint& x) -> BasePoint {
    BasePoint out = BasePoint::Zero(dim);
    for (const auto& nd : *nodes) {
      out += nd.weight * (nd.inv_deriv * action(nd.g, x));
    }
    return out;
  };
  return model;
}

double conjugacy_residual(const LinearModel& model, const ActionFn& a,
                          const GroupPoint& g, const BasePoint& x) {
  const BasePoint lhs = model.chart_map(a(g, x));
  const BasePoint rhs = model.representation(g) * model.chart_map(x);
  if (lhs.size() == 0) return 0.0;
  return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

double representation_check(const LinearModel& model, const Group& group,
                            int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const GroupPoint g = group.random_point(rng);
    const GroupPoint h = group.random_point(rng);
    const Eigen::MatrixXd lhs =
        model.representation(g) * model.representation(h);
    const Eigen::MatrixXd rhs = model.representation(group.multiply(g, h));
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

}  // namespace gavg
