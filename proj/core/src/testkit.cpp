#include "gavg/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gavg/parallel.hpp"

namespace gavg {

namespace {

std::vector<BasePoint> uniform_base_grid(const GroupoidChart& chart, int b) {
  const int d = chart.base_dim();
  std::vector<BasePoint> bases;
  if (d == 0) {
    bases.push_back(BasePoint::Zero(0));
    return bases;
  }
  const double rho = chart.base_radius();
  std::vector<double> axis;
  if (b <= 1) {
    axis.push_back(0.0);
  } else {
    for (int k = 0; k < b; ++k) axis.push_back(-rho + 2.0 * rho * k / (b - 1));
  }
  int total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<int>(axis.size());
  for (int j = 0; j < total; ++j) {
    BasePoint x(d);
    int idx = j;
    for (int i = 0; i < d; ++i) {
      x(i) = axis[idx % axis.size()];
      idx /= static_cast<int>(axis.size());
    }
    bases.push_back(x);
  }
  return bases;
}

double saturated_distance(const Group& g, const GroupPoint& a,
                          const GroupPoint& b) {
  try {
    return g.distance(a, b);
  } catch (const OutOfChartError&) {
    return 1.0 + (a.m - b.m).norm();
  }
}

}  // namespace

std::vector<ComposableTriple> sample_composable_triples(
    const GroupoidChart& chart, const PairSampleSpec& spec) {
  const GroupQuadrature quad =
      chart.group().haar_quadrature(spec.group_resolution);
  const std::vector<BasePoint> bases = uniform_base_grid(chart, spec.base_grid);
  const std::size_t n = quad.nodes.size();
  const std::size_t total = bases.size() * n * n * n;
  // The full tensor can run to tens of millions of arrows; select flat
  // indices first and only materialize the kept triples.
  std::vector<std::size_t> keep;
  keep.reserve(std::min<std::size_t>(total, spec.max_pairs));
  if (total > static_cast<std::size_t>(spec.max_pairs)) {
    std::mt19937_64 rng(spec.seed);
    std::size_t needed = static_cast<std::size_t>(spec.max_pairs);
    for (std::size_t i = 0, remaining = total; needed > 0; ++i, --remaining) {
      std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
      if (pick(rng) < needed) {
        keep.push_back(i);
        --needed;
      }
    }
  } else {
    for (std::size_t i = 0; i < total; ++i) keep.push_back(i);
  }
  std::vector<ComposableTriple> triples;
  triples.reserve(keep.size());
  for (std::size_t idx : keep) {
    const GroupPoint& hp = quad.nodes[idx % n];
    idx /= n;
    const GroupPoint& hq = quad.nodes[idx % n];
    idx /= n;
    const GroupPoint& hr = quad.nodes[idx % n];
    idx /= n;
    const Arrow r = chart.make_arrow(hr, bases[idx]);
    const Arrow q = chart.make_arrow(hq, chart.target(r));
    triples.push_back({chart.make_arrow(hp, chart.target(q)), q, r});
  }
  return triples;
}

double verify_cocycle_identity(const CandidateMap& phi,
                               const std::vector<ComposableTriple>& triples,
                               int workers) {
  const GroupoidChart& chart = phi.chart();
  const Group& g = phi.group();
  const int n = static_cast<int>(triples.size());
  std::vector<double> residuals(n, 0.0);
  parallel_for(n, workers, [&](int i) {
    const Arrow& p = triples[i].p;
    const Arrow& q = triples[i].q;
    const Arrow& r = triples[i].r;
    const Arrow pq = chart.product(p, q);
    const Arrow qr = chart.product(q, r);
    const GroupPoint psi_pq = defect_field(phi, p, q);
    const GroupPoint psi_pq_inv = g.inverse(psi_pq);
    const GroupPoint a1 = g.multiply(
        psi_pq_inv, g.multiply(defect_field(phi, pq, r), psi_pq));
    const GroupPoint phi_p = phi.evaluate(p);
    const GroupPoint a2 = g.multiply(
        phi_p, g.multiply(g.inverse(defect_field(phi, q, r)),
                          g.inverse(phi_p)));
    const GroupPoint a3 = g.inverse(defect_field(phi, p, qr));
    const GroupPoint lhs = g.multiply(a1, g.multiply(a2, a3));
    residuals[i] = saturated_distance(g, lhs, psi_pq_inv);
  });
  return residuals.empty()
             ? 0.0
             : *std::max_element(residuals.begin(), residuals.end());
}

CandidateMap::CorrectionFn random_correction_field(
    std::shared_ptr<const Group> group, int base_dim, double base_radius,
    int group_degree, std::uint64_t seed) {
  struct Term {
    std::vector<int> gexp;  // exponents over embedding coordinates
    int bi = -1, bj = -1;   // base factor x_bi (* x_bj); -1 -> absent
    Eigen::VectorXd coeffs; // algebra coordinates
  };

  // Enumerate group exponent tuples of total degree <= group_degree.
  std::vector<std::vector<int>> gexps;
  {
    std::vector<int> cur;
    std::function<void()> rec = [&]() {
      if (static_cast<int>(cur.size()) == group->embedding_dim()) {
        gexps.push_back(cur);
        return;
      }
      int used = 0;
      for (int e : cur) used += e;
      for (int e = 0; e + used <= group_degree; ++e) {
        cur.push_back(e);
        rec();
        cur.pop_back();
      }
    };
    rec();
  }

  // Base factors: degree 1 and 2 monomials (none when d = 0, so that the
  // field vanishes identically at the origin when a base is present).
  std::vector<std::pair<int, int>> bfactors;
  if (base_dim == 0) {
    bfactors.push_back({-1, -1});
  } else {
    for (int i = 0; i < base_dim; ++i) bfactors.push_back({i, -1});
    for (int i = 0; i < base_dim; ++i)
      for (int j = i; j < base_dim; ++j) bfactors.push_back({i, j});
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Term> terms;
  for (const auto& ge : gexps) {
    for (const auto& bf : bfactors) {
      Term t;
      t.gexp = ge;
      t.bi = bf.first;
      t.bj = bf.second;
      t.coeffs = Eigen::VectorXd(group->algebra_dim());
      for (int k = 0; k < t.coeffs.size(); ++k) t.coeffs(k) = gauss(rng);
      terms.push_back(std::move(t));
    }
  }

  auto raw = [group, terms, group_degree](const Arrow& p) -> AlgebraVector {
    const Eigen::VectorXd gc = group->embedding_coords(p.group_part);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(group->algebra_dim());
    for (const auto& t : terms) {
      double val = 1.0;
      for (std::size_t v = 0; v < t.gexp.size(); ++v) {
        for (int e = 0; e < t.gexp[v]; ++e) val *= gc(static_cast<int>(v));
      }
      if (t.bi >= 0) val *= p.base(t.bi);
      if (t.bj >= 0) val *= p.base(t.bj);
      acc += val * t.coeffs;
    }
    return group->algebra_from_coords(acc);
  };

  // Normalize to unit sup norm over a deterministic probe set.
  double sup = 0.0;
  {
    const GroupQuadrature probe = group->haar_quadrature(4);
    std::vector<BasePoint> bases;
    if (base_dim == 0) {
      bases.push_back(BasePoint::Zero(0));
    } else {
      std::mt19937_64 brng(seed ^ 0x9e3779b97f4a7c15ULL);
      std::uniform_real_distribution<double> box(-base_radius, base_radius);
      for (int k = 0; k < 32; ++k) {
        BasePoint x(base_dim);
        for (int i = 0; i < base_dim; ++i) x(i) = box(brng);
        bases.push_back(x);
      }
    }
    for (const auto& x : bases) {
      for (const auto& g : probe.nodes) {
        sup = std::max(sup, group->algebra_norm(raw(Arrow{g, x})));
      }
    }
  }
  if (sup == 0.0) sup = 1.0;

  const double scale = 1.0 / sup;
  return [raw, scale, group](const Arrow& p) -> AlgebraVector {
    AlgebraVector v = raw(p);
    v.m *= scale;
    return v;
  };
}

GkrResult gkr_case(std::shared_ptr<const Group> group, double eps,
                   std::uint64_t seed, const GkrOptions& opt) {
  auto chart = std::make_shared<ActionChart>(
      group, 0, 1.0, [](const GroupPoint&, const BasePoint& x) { return x; });
  HaarSystem haar =
      direct_haar_system(chart, group->haar_quadrature(opt.fiber_resolution));

  auto eta = random_correction_field(group, 0, 1.0, 1, seed);
  auto u0 = [eta, eps](const Arrow& p) -> AlgebraVector {
    AlgebraVector v = eta(p);
    v.m *= eps;
    return v;
  };
  CandidateMap phi0 = CandidateMap::grid_from_function(
      chart, opt.grid, u0, /*enforce_identity=*/false);

  const auto pairs = sample_composable_pairs(
      *chart, {1, opt.pair_resolution, 20000, seed});

  IterateOptions iopt;
  iopt.tol = opt.tol;
  iopt.max_iter = opt.max_iter;
  iopt.admissible_defect = 0.3;
  iopt.workers = opt.workers;

  GkrResult out{iterate(phi0, haar, pairs, iopt), 0.0};
  out.distance_to_identity_map = out.run.final_map.max_sample_norm();
  return out;
}

double bch_constant(const Group& group, int sample_size, double norm_cap,
                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < sample_size; ++k) {
    const AlgebraVector f1 = group.random_algebra(rng, norm_cap);
    const AlgebraVector f2 = group.random_algebra(rng, norm_cap);
    const double n1 = group.algebra_norm(f1);
    const double n2 = group.algebra_norm(f2);
    if (n1 * n2 < 1e-12) continue;
    const AlgebraVector sum = group.log_map(
        group.multiply(group.exp_map(f1), group.exp_map(f2)));
    AlgebraVector diff{sum.m - f1.m - f2.m};
    worst = std::max(worst, group.algebra_norm(diff) / (n1 * n2));
  }
  return worst;
}

OrderFit fit_convergence_order(const ConvergenceTrace& trace, double floor) {
  // Roundoff in the refit pipeline saturates the defect a few orders of
  // magnitude above machine precision relative to the run's amplitude, so
  // records in that regime carry no information about the contraction order.
  double peak = 0.0;
  for (const auto& rec : trace.records) peak = std::max(peak, rec.defect_sup);
  const double arith_floor =
      std::cbrt(std::numeric_limits<double>::epsilon() *
                std::numeric_limits<double>::epsilon()) *
      peak;
  const double cutoff = 3.0 * std::max(floor, arith_floor);
  std::vector<std::pair<int, double>> admissible;
  for (const auto& rec : trace.records) {
    if (rec.defect_sup > cutoff && rec.defect_sup > 0.0) {
      admissible.push_back({rec.iter, rec.defect_sup});
    }
  }
  if (admissible.size() < 3) {
    throw std::runtime_error(
        "order fit needs at least three iterations above the floor");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i + 1 < admissible.size(); ++i) {
    if (admissible[i + 1].first != admissible[i].first + 1) continue;
    xs.push_back(std::log(admissible[i].second));
    ys.push_back(std::log(admissible[i + 1].second));
  }
  if (xs.size() < 2) {
    throw std::runtime_error(
        "order fit needs at least two consecutive admissible steps");
  }
  const int n = static_cast<int>(xs.size());
  double xbar = 0.0, ybar = 0.0;
  for (int i = 0; i < n; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= n;
  ybar /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  OrderFit fit;
  fit.order = sxy / sxx;
  fit.first_iter = admissible.front().first;
  fit.last_iter = admissible.back().first;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pred = ybar + fit.order * (xs[i] - xbar);
    ss += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double c1_defect_estimate(const CandidateMap& phi,
                          const std::vector<ComposablePair>& pairs,
                          double fd_step, int workers) {
  const GroupoidChart& chart = phi.chart();
  const Group& g = phi.group();
  const int dim_g = g.algebra_dim();
  const int dim_b = chart.base_dim();
  const int n = static_cast<int>(pairs.size());
  std::vector<double> sup(n, 0.0);

  auto log_psi = [&](const Arrow& p, const Arrow& q) {
    return g.algebra_coords(g.log_map(defect_field(phi, p, q)));
  };

  parallel_for(n, workers, [&](int i) {
    const Arrow& p = pairs[i].p;
    const Arrow& q = pairs[i].q;
    double best = 0.0;
    for (int k = 0; k < dim_g; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_g);
      e(k) = fd_step;
      const GroupPoint gp = g.multiply(
          p.group_part, g.exp_map(g.algebra_from_coords(e)));
      e(k) = -fd_step;
      const GroupPoint gm = g.multiply(
          p.group_part, g.exp_map(g.algebra_from_coords(e)));
      const Eigen::VectorXd diff =
          (log_psi(chart.make_arrow(gp, p.base), q) -
           log_psi(chart.make_arrow(gm, p.base), q)) /
          (2.0 * fd_step);
      best = std::max(best, g.algebra_norm(g.algebra_from_coords(diff)));
    }
    for (int k = 0; k < dim_b; ++k) {
      BasePoint xp = q.base, xm = q.base;
      xp(k) += fd_step;
      xm(k) -= fd_step;
      const Arrow qp = chart.make_arrow(q.group_part, xp);
      const Arrow qm = chart.make_arrow(q.group_part, xm);
      const Arrow pp = chart.make_arrow(p.group_part, chart.target(qp));
      const Arrow pm = chart.make_arrow(p.group_part, chart.target(qm));
      const Eigen::VectorXd diff =
          (log_psi(pp, qp) - log_psi(pm, qm)) / (2.0 * fd_step);
      best = std::max(best, g.algebra_norm(g.algebra_from_coords(diff)));
    }
    sup[i] = best;
  });
  return sup.empty() ? 0.0 : *std::max_element(sup.begin(), sup.end());
}

}  // namespace gavg
