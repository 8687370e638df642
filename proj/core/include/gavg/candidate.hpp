#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "gavg/groupoid.hpp"

namespace gavg {

/// Polynomial band on the group: monomials of bounded total degree in the
/// embedding coordinates, together with a Haar-weighted least-squares fit
/// operator mapping node samples to coefficients.  The fit is computed once
/// via a truncated SVD; rank deficiency (monomials that coincide on the
/// group, e.g. through the unit-norm relation) is handled by the truncation.
class GroupBandBasis {
 public:
  GroupBandBasis(std::shared_ptr<const Group> group, int degree,
                 int analysis_resolution);

  int size() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  const GroupQuadrature& analysis_nodes() const { return quad_; }

  /// Monomial vector at a group element, length size().
  Eigen::VectorXd evaluate(const GroupPoint& g) const;

  /// size() x n_nodes operator: coefficients = fit_operator() * samples.
  const Eigen::MatrixXd& fit_operator() const { return fit_; }

 private:
  std::shared_ptr<const Group> group_;
  int degree_;
  GroupQuadrature quad_;
  std::vector<std::vector<int>> exponents_;
  Eigen::MatrixXd fit_;
};

/// Chebyshev-Lobatto tensor grid on [-radius, radius]^dim with barycentric
/// interpolation.  The per-axis point count is forced odd so the grid
/// contains the distinguished base point x0 = 0 as an exact node.
class BaseGrid {
 public:
  BaseGrid(int dim, double radius, int points_per_dim);

  int dim() const { return dim_; }
  int size() const { return size_; }
  int points_per_dim() const { return m_; }
  double radius() const { return radius_; }
  BasePoint node(int j) const;
  int origin_index() const { return origin_; }

  /// Barycentric interpolation weights at x; exact delta at grid nodes.
  Eigen::VectorXd weights(const BasePoint& x) const;

 private:
  int dim_;
  double radius_;
  int m_;
  int size_;
  int origin_;
  std::vector<double> nodes1d_;
  std::vector<double> bary1d_;
};

struct GridSpec {
  int group_degree = 6;
  int analysis_resolution = 8;
  int base_points = 5;
};

/// A candidate trivialization phi(p) = exp(u(p)) * pr_G(p), stored either as
/// a closed-form correction field u or as a band-limited polynomial fit of u
/// over (group analysis nodes) x (base grid nodes).  Grid maps refit through
/// with_samples(); closed-form maps compose functionally.  When the identity
/// constraint is active, the samples over the origin base node are zeroed so
/// phi restricted to the isotropy fiber is exactly the projection.
class CandidateMap {
 public:
  using CorrectionFn = std::function<AlgebraVector(const Arrow&)>;

  static CandidateMap projection(std::shared_ptr<const GroupoidChart> chart);
  static CandidateMap closed_form(std::shared_ptr<const GroupoidChart> chart,
                                  CorrectionFn u);
  static CandidateMap grid_from_function(
      std::shared_ptr<const GroupoidChart> chart, const GridSpec& spec,
      const CorrectionFn& u, bool enforce_identity = true);

  bool grid_mode() const { return basis_ != nullptr; }
  bool enforces_identity() const { return enforce_identity_; }
  const GroupBandBasis& basis() const { return *basis_; }
  const BaseGrid& base_grid() const { return *bgrid_; }
  const GroupoidChart& chart() const { return *chart_; }
  std::shared_ptr<const GroupoidChart> chart_ptr() const { return chart_; }
  const Group& group() const { return chart_->group(); }

  /// Grid mode: raw samples, laid out sample(i_node, :) per base node.
  /// samples[j] is n_nodes x dim_g in algebra coordinates.
  const std::vector<Eigen::MatrixXd>& samples() const { return samples_; }

  /// Build a refit copy sharing the basis and grid of *this.
  CandidateMap with_samples(std::vector<Eigen::MatrixXd> samples) const;

  /// Largest algebra norm among stored samples (grid mode only).
  double max_sample_norm() const;

  AlgebraVector correction(const Arrow& p) const;
  GroupPoint evaluate(const Arrow& p) const;

 private:
  CandidateMap() = default;
  void refit();

  std::shared_ptr<const GroupoidChart> chart_;
  CorrectionFn closed_u_;
  std::shared_ptr<const GroupBandBasis> basis_;
  std::shared_ptr<const BaseGrid> bgrid_;
  std::vector<Eigen::MatrixXd> samples_;  // per base node: n_nodes x dim_g
  std::vector<Eigen::MatrixXd> coeffs_;   // per base node: dim_g x n_basis
  bool enforce_identity_ = true;
  std::uint64_t stamp_ = 0;  // cache key for interpolation slabs
};

}  // namespace gavg
