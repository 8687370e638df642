#pragma once

#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gavg {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Thrown when a group element leaves the scaled unit log chart.
class OutOfChartError : public std::runtime_error {
 public:
  explicit OutOfChartError(const std::string& what) : std::runtime_error(what) {}
};

enum class GroupFamily { U1, SU2, SO3, SOn };

std::string to_string(GroupFamily f);
GroupFamily family_from_string(const std::string& s);

/// Element of a compact matrix group, stored as a square matrix.
struct GroupPoint {
  Matrix m;
};

/// Element of the Lie algebra (skew-Hermitian, traceless for SU families).
struct AlgebraVector {
  Matrix m;
};

/// Haar quadrature: nodes with nonnegative weights summing to 1.
struct GroupQuadrature {
  std::vector<GroupPoint> nodes;
  Eigen::VectorXd weights;
  double declared_tol = 0.0;
};

/// A compact matrix Lie group with a rescaled bi-invariant metric.
///
/// The metric scale is chosen so that the scaled unit ball in the algebra
/// maps diffeomorphically onto the scaled unit ball around the identity;
/// by default the scaled radius 1 corresponds to half the injectivity
/// radius of the family.
class Group {
 public:
  /// dim is only consulted for SOn; metric_scale == 0 selects the family
  /// default (half injectivity radius at scaled distance 1).
  explicit Group(GroupFamily family, int dim = 0, double metric_scale = 0.0);

  GroupFamily family() const { return family_; }
  int matrix_dim() const { return n_; }
  double metric_scale() const { return lambda_; }
  int algebra_dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<Matrix>& algebra_basis() const { return basis_; }

  GroupPoint identity() const;
  GroupPoint multiply(const GroupPoint& a, const GroupPoint& b) const;
  GroupPoint inverse(const GroupPoint& a) const;
  GroupPoint exp_map(const AlgebraVector& v) const;
  /// Principal logarithm; throws OutOfChartError at scaled distance >= 1.
  AlgebraVector log_map(const GroupPoint& g) const;
  /// Scaled algebra norm (metric_scale * Frobenius norm).
  double algebra_norm(const AlgebraVector& v) const;
  /// Bi-invariant distance d(a, b) = ||log(a^-1 b)||.
  double distance(const GroupPoint& a, const GroupPoint& b) const;
  double distance_to_identity(const GroupPoint& g) const;
  /// Ad_g v = g v g^-1.
  AlgebraVector adjoint(const GroupPoint& g, const AlgebraVector& v) const;

  /// Nearest group element (polar projection plus determinant fix).
  GroupPoint project(const Matrix& m) const;
  /// Projection onto the algebra (skew part, traceless/real as needed).
  AlgebraVector algebra_project(const Matrix& m) const;

  AlgebraVector algebra_from_coords(const Eigen::VectorXd& c) const;
  Eigen::VectorXd algebra_coords(const AlgebraVector& v) const;
  AlgebraVector zero_algebra() const;

  /// Real coordinates embedding the group into Euclidean space; the
  /// polynomial band-limited correction fields are monomials in these.
  int embedding_dim() const;
  Eigen::VectorXd embedding_coords(const GroupPoint& g) const;

  /// Product-rule Haar quadrature on the group; exact for matrix
  /// coefficients of degree below the resolution.
  GroupQuadrature haar_quadrature(int resolution) const;

  double unitarity_residual(const GroupPoint& g) const;
  double determinant_residual(const GroupPoint& g) const;

  AlgebraVector random_algebra(std::mt19937_64& rng, double norm_cap) const;
  GroupPoint random_point(std::mt19937_64& rng) const;

  bool same_spec(const Group& other) const;

 private:
  GroupFamily family_;
  int n_;
  double lambda_;
  std::vector<Matrix> basis_;
};

/// Legendre-Gauss nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace gavg
