#include "gavg/averaging.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "gavg/parallel.hpp"

namespace gavg {

namespace {

double saturated_distance_to_identity(const Group& g, const GroupPoint& a) {
  try {
    return g.distance_to_identity(a);
  } catch (const OutOfChartError&) {
    return 1.0 + (a.m - Matrix::Identity(a.m.rows(), a.m.cols())).norm();
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

std::vector<ComposablePair> sample_composable_pairs(const GroupoidChart& chart,
                                                    const PairSampleSpec& spec) {
  std::vector<BasePoint> bases;
  const int d = chart.base_dim();
  if (d == 0) {
    bases.push_back(BasePoint::Zero(0));
  } else {
    const int b = std::max(1, spec.base_grid);
    const double rho = chart.base_radius();
    std::vector<double> axis;
    if (b == 1) {
      axis.push_back(0.0);
    } else {
      for (int k = 0; k < b; ++k)
        axis.push_back(-rho + 2.0 * rho * k / (b - 1));
    }
    int total = 1;
    for (int i = 0; i < d; ++i) total *= b;
    for (int j = 0; j < total; ++j) {
      BasePoint x(d);
      int idx = j;
      for (int i = 0; i < d; ++i) {
        x(i) = axis[idx % b];
        idx /= b;
      }
      bases.push_back(x);
    }
  }
  return sample_composable_pairs(chart, spec, bases);
}

std::vector<ComposablePair> sample_composable_pairs(
    const GroupoidChart& chart, const PairSampleSpec& spec,
    const std::vector<BasePoint>& bases) {
  const GroupQuadrature quad =
      chart.group().haar_quadrature(spec.group_resolution);
  std::vector<ComposablePair> pairs;
  for (const BasePoint& x : bases) {
    for (const GroupPoint& h : quad.nodes) {
      const Arrow q = chart.make_arrow(h, x);
      const BasePoint y = chart.target(q);
      for (const GroupPoint& g : quad.nodes) {
        pairs.push_back({chart.make_arrow(g, y), q});
      }
    }
  }
  if (static_cast<int>(pairs.size()) > spec.max_pairs) {
    std::mt19937_64 rng(spec.seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(spec.max_pairs);
  }
  return pairs;
}

GroupPoint defect_field(const CandidateMap& phi, const Arrow& p,
                        const Arrow& q) {
  const GroupoidChart& chart = phi.chart();
  const Group& g = phi.group();
  const Arrow pq = chart.product(p, q);
  return g.multiply(phi.evaluate(pq),
                    g.multiply(g.inverse(phi.evaluate(q)),
                               g.inverse(phi.evaluate(p))));
}

DefectSample defect(const CandidateMap& phi,
                    const std::vector<ComposablePair>& pairs, int workers) {
  const int n = static_cast<int>(pairs.size());
  if (n == 0) return {};
  const Group& g = phi.group();
  std::vector<double> values(n);
  parallel_for(n, workers, [&](int i) {
    try {
      values[i] = saturated_distance_to_identity(
          g, defect_field(phi, pairs[i].p, pairs[i].q));
    } catch (const OutOfChartError&) {
      values[i] = 1.0;
    }
  });
  DefectSample out;
  out.sup = *std::max_element(values.begin(), values.end());
  std::sort(values.begin(), values.end());
  const int idx = std::max(0, static_cast<int>(std::ceil(0.95 * n)) - 1);
  out.p95 = values[idx];
  return out;
}

CandidateMap average_step(const CandidateMap& phi, const HaarSystem& haar,
                          int workers) {
  const GroupoidChart& chart = phi.chart();
  const Group& g = phi.group();

  if (!phi.grid_mode()) {
    CandidateMap captured = phi;
    HaarSystem system = haar;
    auto new_u = [captured, system](const Arrow& p) -> AlgebraVector {
      const GroupoidChart& ch = captured.chart();
      const Group& gg = captured.group();
      const auto fiber = system.fiber(ch.source(p));
      const GroupPoint phi_p = captured.evaluate(p);
      const GroupPoint phi_p_inv = gg.inverse(phi_p);
      Matrix acc = Matrix::Zero(phi_p.m.rows(), phi_p.m.cols());
      for (const auto& wq : fiber) {
        const Arrow pq = ch.product(p, wq.arrow);
        const GroupPoint psi = gg.multiply(
            captured.evaluate(pq),
            gg.multiply(gg.inverse(captured.evaluate(wq.arrow)), phi_p_inv));
        acc += wq.weight * gg.log_map(psi).m;
      }
      const GroupPoint phat = gg.multiply(gg.exp_map(AlgebraVector{acc}), phi_p);
      return gg.log_map(gg.multiply(phat, gg.inverse(p.group_part)));
    };
    return CandidateMap::closed_form(phi.chart_ptr(), std::move(new_u));
  }

  const auto& nodes = phi.basis().analysis_nodes().nodes;
  const int n_nodes = static_cast<int>(nodes.size());
  const int dim_g = g.algebra_dim();
  const BaseGrid& bgrid = phi.base_grid();

  std::vector<Eigen::MatrixXd> new_samples(bgrid.size());
  std::vector<GroupPoint> phi_p(n_nodes), phi_p_inv(n_nodes);
  std::vector<Matrix> acc(n_nodes);

  for (int j = 0; j < bgrid.size(); ++j) {
    const BasePoint x = bgrid.node(j);
    const auto fiber = haar.fiber(x);
    parallel_for(n_nodes, workers, [&](int i) {
      const Arrow p = chart.make_arrow(nodes[i], x);
      phi_p[i] = phi.evaluate(p);
      phi_p_inv[i] = g.inverse(phi_p[i]);
      acc[i] = Matrix::Zero(phi_p[i].m.rows(), phi_p[i].m.cols());
    });
    // Fiber node outermost so every inner evaluation shares the base point
    // of the product arrow and the interpolation slab cache stays hot.
    for (const auto& wq : fiber) {
      const GroupPoint phi_q_inv = g.inverse(phi.evaluate(wq.arrow));
      parallel_for(n_nodes, workers, [&](int i) {
        const Arrow p = chart.make_arrow(nodes[i], x);
        const Arrow pq = chart.product(p, wq.arrow);
        const GroupPoint psi = g.multiply(
            phi.evaluate(pq), g.multiply(phi_q_inv, phi_p_inv[i]));
        acc[i] += wq.weight * g.log_map(psi).m;
      });
    }
    Eigen::MatrixXd s(n_nodes, dim_g);
    parallel_for(n_nodes, workers, [&](int i) {
      const GroupPoint phat =
          g.multiply(g.exp_map(AlgebraVector{acc[i]}), phi_p[i]);
      const AlgebraVector u =
          g.log_map(g.multiply(phat, g.inverse(nodes[i])));
      s.row(i) = g.algebra_coords(u).transpose();
    });
    new_samples[j] = std::move(s);
  }
  return phi.with_samples(std::move(new_samples));
}

std::array<GroupPoint, 3> average_step_variants(const CandidateMap& phi,
                                                const HaarSystem& haar,
                                                const Arrow& p) {
  const GroupoidChart& chart = phi.chart();
  const Group& g = phi.group();
  const GroupPoint phi_p = phi.evaluate(p);
  const GroupPoint phi_p_inv = g.inverse(phi_p);
  const Matrix zero = Matrix::Zero(phi_p.m.rows(), phi_p.m.cols());

  // Source-fiber form.
  Matrix acc0 = zero;
  for (const auto& wq : haar.fiber(chart.source(p))) {
    acc0 += wq.weight * g.log_map(defect_field(phi, p, wq.arrow)).m;
  }
  const GroupPoint v0 = g.multiply(g.exp_map(AlgebraVector{acc0}), phi_p);

  // Change of variable r = p q over the target fiber.
  Matrix acc1 = zero;
  const Arrow p_inv = chart.invert(p);
  for (const auto& wr : haar.fiber(chart.target(p))) {
    const Arrow q = chart.product(p_inv, wr.arrow);
    const GroupPoint psi = g.multiply(
        phi.evaluate(wr.arrow),
        g.multiply(g.inverse(phi.evaluate(q)), phi_p_inv));
    acc1 += wr.weight * g.log_map(psi).m;
  }
  const GroupPoint v1 = g.multiply(g.exp_map(AlgebraVector{acc1}), phi_p);

  // Adjoint-commuted form, applied on the right.
  Matrix acc2 = zero;
  for (const auto& wq : haar.fiber(chart.source(p))) {
    const GroupPoint conj = g.multiply(
        phi_p_inv, g.multiply(defect_field(phi, p, wq.arrow), phi_p));
    acc2 += wq.weight * g.log_map(conj).m;
  }
  const GroupPoint v2 = g.multiply(phi_p, g.exp_map(AlgebraVector{acc2}));

  return {v0, v1, v2};
}

std::string to_string(IterateStatus s) {
  switch (s) {
    case IterateStatus::Converged: return "converged";
    case IterateStatus::NoiseFloor: return "noise_floor";
    case IterateStatus::MaxIter: return "max_iter";
    case IterateStatus::Diverged: return "diverged";
  }
  return "unknown";
}

IterateResult iterate(const CandidateMap& phi0, const HaarSystem& haar,
                      const std::vector<ComposablePair>& pairs,
                      const IterateOptions& opt) {
  IterateResult result{phi0, {}, IterateStatus::MaxIter, ""};

  // Probe arrows for the step norm, thinned deterministically.
  std::vector<Arrow> probes;
  {
    const int cap = 512;
    const int n = static_cast<int>(pairs.size());
    const int stride = std::max(1, n / cap);
    for (int i = 0; i < n; i += stride) probes.push_back(pairs[i].p);
  }

  auto t0 = std::chrono::steady_clock::now();
  DefectSample cur = defect(phi0, pairs, opt.workers);
  result.trace.records.push_back(
      {1, cur.sup, cur.p95, 0.0,
       opt.deterministic_timing ? 0.0 : elapsed_ms(t0)});

  if (cur.sup <= opt.tol) {
    result.status = IterateStatus::Converged;
    result.message = "initial map already within tolerance";
    return result;
  }
  if (cur.sup > opt.admissible_defect) {
    result.status = IterateStatus::Diverged;
    result.message = "initial defect exceeds the admissibility threshold";
    return result;
  }

  const Group& g = phi0.group();
  CandidateMap phi = phi0;
  for (int n = 1; n <= opt.max_iter; ++n) {
    t0 = std::chrono::steady_clock::now();
    CandidateMap next = phi;
    try {
      next = average_step(phi, haar, opt.workers);
    } catch (const OutOfChartError& e) {
      result.status = IterateStatus::Diverged;
      result.message = std::string("averaging step left the log chart: ") +
                       e.what();
      result.final_map = phi;
      return result;
    }
    double step_norm = 0.0;
    for (const Arrow& p : probes) {
      try {
        step_norm = std::max(
            step_norm, g.distance(phi.evaluate(p), next.evaluate(p)));
      } catch (const OutOfChartError&) {
        step_norm = std::max(step_norm, 1.0);
      }
    }
    const DefectSample nxt = defect(next, pairs, opt.workers);
    result.trace.records.push_back(
        {n + 1, nxt.sup, nxt.p95, step_norm,
         opt.deterministic_timing ? 0.0 : elapsed_ms(t0)});
    result.final_map = next;

    if (nxt.sup <= opt.tol) {
      result.status = IterateStatus::Converged;
      result.message = "defect within tolerance";
      return result;
    }
    if (nxt.sup > opt.divergence_guard * cur.sup) {
      result.status = IterateStatus::Diverged;
      result.message = "defect grew beyond the divergence guard";
      return result;
    }
    if (nxt.sup >= 0.7 * cur.sup &&
        nxt.sup <= std::max(10.0 * opt.noise_floor, 1e-13)) {
      result.status = IterateStatus::NoiseFloor;
      result.message = "defect stalled at the representation floor";
      phi = next;
      return result;
    }
    phi = next;
    cur = nxt;
  }
  result.status = IterateStatus::MaxIter;
  result.message = "iteration cap reached before tolerance";
  return result;
}

}  // namespace gavg
