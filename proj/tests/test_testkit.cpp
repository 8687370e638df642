#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include <gavg/testkit.hpp>

using namespace gavg;

namespace {

std::shared_ptr<const Group> u1() {
  return std::make_shared<const Group>(GroupFamily::U1);
}
std::shared_ptr<const Group> su2() {
  return std::make_shared<const Group>(GroupFamily::SU2);
}

std::shared_ptr<const ActionChart> rotation_chart() {
  ActionFn rot = [](const GroupPoint& g, const BasePoint& x) {
    const double th = std::arg(g.m(0, 0));
    BasePoint y(2);
    y << std::cos(th) * x[0] - std::sin(th) * x[1],
        std::sin(th) * x[0] + std::cos(th) * x[1];
    return y;
  };
  return std::make_shared<const ActionChart>(u1(), 2, 0.2, rot);
}

CandidateMap perturbed(std::shared_ptr<const GroupoidChart> chart, double eps,
                       std::uint64_t seed) {
  auto field = random_correction_field(chart->group_ptr(), chart->base_dim(),
                                       chart->base_radius(), 2, seed);
  return CandidateMap::closed_form(chart, [field, eps](const Arrow& p) {
    AlgebraVector v = field(p);
    v.m *= eps;
    return v;
  });
}

ConvergenceTrace synthetic_trace(const std::vector<double>& defects) {
  ConvergenceTrace t;
  for (std::size_t i = 0; i < defects.size(); ++i) {
    t.records.push_back({static_cast<int>(i) + 1, defects[i], defects[i], 0.0, 0.0});
  }
  return t;
}

}  // namespace

TEST_CASE("the triple identity holds to round-off for homomorphisms and perturbations") {
  auto chart = rotation_chart();
  const auto triples = sample_composable_triples(*chart, {3, 4, 4000, 1});
  REQUIRE(triples.size() >= 100);
  CHECK(verify_cocycle_identity(CandidateMap::projection(chart), triples) <= 1e-13);
  CHECK(verify_cocycle_identity(perturbed(chart, 1e-2, 3), triples) <= 1e-12);

  ActionFn triv = [](const GroupPoint&, const BasePoint& x) { return x; };
  auto nchart = std::make_shared<const ActionChart>(su2(), 2, 0.2, triv);
  const auto ntriples = sample_composable_triples(*nchart, {2, 3, 2000, 5});
  CHECK(verify_cocycle_identity(perturbed(nchart, 1e-2, 5), ntriples) <= 1e-12);
}

TEST_CASE("order fit recovers planted quadratic and linear sequences") {
  std::vector<double> quadratic;
  for (int n = 1; n <= 5; ++n) quadratic.push_back(std::pow(0.5, 1 << n));
  OrderFit fit = fit_convergence_order(synthetic_trace(quadratic), 0.0);
  CHECK(fit.order == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fit.residual <= 1e-10);

  std::vector<double> linear;
  for (int n = 1; n <= 10; ++n) linear.push_back(std::pow(0.5, n));
  fit = fit_convergence_order(synthetic_trace(linear), 0.0);
  CHECK(fit.order == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("order fit ignores the saturated tail of a trace") {
  // Quadratic decay that bottoms out at an arithmetic plateau; the plateau
  // must not drag the fitted order down.
  std::vector<double> defects = {0.25, 0.0625, 3.9e-3, 1.5e-5, 2.3e-10,
                                 5e-12, 5e-12};
  const OrderFit fit = fit_convergence_order(synthetic_trace(defects), 0.0);
  CHECK(fit.order == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("order fit demands enough admissible iterations") {
  CHECK_THROWS_AS((void)fit_convergence_order(synthetic_trace({0.1, 0.01}), 0.0),
                  std::runtime_error);
  CHECK_THROWS_AS(
      (void)fit_convergence_order(synthetic_trace({1e-12, 1e-12, 1e-12}), 1e-3),
      std::runtime_error);
}

TEST_CASE("bch residual vanishes when a factor is zero or the group abelian") {
  auto a = u1();
  // The ratio divides round-off by small norm products, so allow headroom.
  CHECK(bch_constant(*a, 500, 0.3, 7) <= 1e-9);
  // One factor zero: residual exactly zero regardless of the group.
  auto s = su2();
  std::mt19937_64 rng(9);
  const AlgebraVector f1 = s->random_algebra(rng, 0.3);
  const AlgebraVector diff{
      s->log_map(s->multiply(s->exp_map(f1), s->exp_map(s->zero_algebra()))).m -
      f1.m};
  CHECK(s->algebra_norm(diff) <= 1e-12);
}

TEST_CASE("the su2 bch constant is stable under halving the norm cap") {
  auto s = su2();
  const double c1 = bch_constant(*s, 2000, 0.3, 11);
  const double c2 = bch_constant(*s, 2000, 0.15, 11);
  CHECK(c1 > 0.0);
  CHECK(c1 / c2 <= 1.5);
  CHECK(c2 / c1 <= 1.5);
}

TEST_CASE("degenerate-base runs: zero perturbation converges immediately, abelian in one step") {
  GkrOptions opt;
  opt.grid = GridSpec{4, 16, 1};
  opt.fiber_resolution = 6;
  const GkrResult trivial = gkr_case(u1(), 0.0, 13, opt);
  CHECK(trivial.run.status == IterateStatus::Converged);
  CHECK(trivial.run.trace.records.size() == 1);
  CHECK(trivial.distance_to_identity_map <= 1e-12);

  GkrOptions aopt;
  aopt.grid = GridSpec{6, 32, 1};
  aopt.fiber_resolution = 12;
  const GkrResult abelian = gkr_case(u1(), 0.08, 13, aopt);
  CHECK(abelian.run.status == IterateStatus::Converged);
  // One averaging step: the initial record plus one iteration.
  CHECK(abelian.run.trace.records.size() <= 2);
}

TEST_CASE("the c1 defect estimate vanishes for homomorphisms and stays finite") {
  auto chart = rotation_chart();
  const auto pairs = sample_composable_pairs(*chart, {2, 3, 200, 17});
  CHECK(c1_defect_estimate(CandidateMap::projection(chart), pairs, 1e-5) <= 1e-8);
  const double c1 = c1_defect_estimate(perturbed(chart, 1e-2, 17), pairs, 1e-5);
  CHECK(c1 > 0.0);
  CHECK(c1 < 10.0);
}
