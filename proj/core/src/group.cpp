#include "gavg/group.hpp"

#include <cctype>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace gavg {

namespace {

constexpr double kPi = 3.14159265358979323846;

Matrix pauli(int k) {
  Matrix s(2, 2);
  const Complex i(0.0, 1.0);
  switch (k) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -i, i, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

Matrix rot_z3(double a) {
  Matrix r = Matrix::Identity(3, 3);
  r(0, 0) = std::cos(a); r(0, 1) = -std::sin(a);
  r(1, 0) = std::sin(a); r(1, 1) = std::cos(a);
  return r;
}

Matrix rot_y3(double b) {
  Matrix r = Matrix::Identity(3, 3);
  r(0, 0) = std::cos(b); r(0, 2) = std::sin(b);
  r(2, 0) = -std::sin(b); r(2, 2) = std::cos(b);
  return r;
}

Matrix su2_rz(double a) {
  Matrix r = Matrix::Zero(2, 2);
  r(0, 0) = std::exp(Complex(0.0, -a / 2.0));
  r(1, 1) = std::exp(Complex(0.0, a / 2.0));
  return r;
}

Matrix su2_ry(double b) {
  Matrix r(2, 2);
  r << std::cos(b / 2.0), -std::sin(b / 2.0),
       std::sin(b / 2.0), std::cos(b / 2.0);
  return r;
}

}  // namespace

std::string to_string(GroupFamily f) {
  switch (f) {
    case GroupFamily::U1: return "u1";
    case GroupFamily::SU2: return "su2";
    case GroupFamily::SO3: return "so3";
    default: return "son";
  }
}

GroupFamily family_from_string(const std::string& s) {
  std::string lower = s;
  for (char& c : lower) c = static_cast<char>(std::tolower(c));
  if (lower == "u1") return GroupFamily::U1;
  if (lower == "su2") return GroupFamily::SU2;
  if (lower == "so3") return GroupFamily::SO3;
  if (lower == "son") return GroupFamily::SOn;
  throw std::invalid_argument("unknown group family: " + s);
}

Group::Group(GroupFamily family, int dim, double metric_scale)
    : family_(family) {
  const Complex i(0.0, 1.0);
  switch (family_) {
    case GroupFamily::U1: {
      n_ = 1;
      Matrix b(1, 1);
      b(0, 0) = i;
      basis_.push_back(b);
      lambda_ = 2.0 / kPi;
      break;
    }
    case GroupFamily::SU2: {
      n_ = 2;
      for (int k = 1; k <= 3; ++k) basis_.push_back(-0.5 * i * pauli(k));
      lambda_ = std::sqrt(2.0) / kPi;
      break;
    }
    case GroupFamily::SO3:
    case GroupFamily::SOn: {
      n_ = (family_ == GroupFamily::SO3) ? 3 : dim;
      if (n_ < 2) throw std::invalid_argument("SOn needs dim >= 2");
      for (int a = 0; a < n_; ++a)
        for (int b = a + 1; b < n_; ++b) {
          Matrix e = Matrix::Zero(n_, n_);
          e(a, b) = -1.0;
          e(b, a) = 1.0;
          basis_.push_back(e);
        }
      lambda_ = std::sqrt(2.0) / kPi;
      break;
    }
  }
  if (metric_scale > 0.0) lambda_ = metric_scale;
  if (lambda_ <= 0.0) throw std::invalid_argument("metric scale must be positive");
}

GroupPoint Group::identity() const { return {Matrix::Identity(n_, n_)}; }

GroupPoint Group::multiply(const GroupPoint& a, const GroupPoint& b) const {
  if (a.m.rows() != n_ || b.m.rows() != n_)
    throw std::invalid_argument("group element dimension mismatch");
  return project(a.m * b.m);
}

GroupPoint Group::inverse(const GroupPoint& a) const {
  // Unitary/orthogonal: the inverse is the conjugate transpose.
  return {a.m.adjoint()};
}

GroupPoint Group::exp_map(const AlgebraVector& v) const {
  if (family_ == GroupFamily::U1) {
    Matrix g(1, 1);
    g(0, 0) = std::exp(v.m(0, 0));
    return project(g);
  }
  if (family_ == GroupFamily::SU2) {
    // v^2 = -alpha^2 I with alpha = ||v||_F / sqrt(2).
    const double alpha = v.m.norm() / std::sqrt(2.0);
    const double c = std::cos(alpha);
    const double s = (alpha < 1e-8) ? 1.0 - alpha * alpha / 6.0
                                    : std::sin(alpha) / alpha;
    return project(c * Matrix::Identity(2, 2) + s * v.m);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(Complex(0.0, -1.0) * v.m);
  Matrix d = Matrix::Zero(n_, n_);
  for (int k = 0; k < n_; ++k)
    d(k, k) = std::exp(Complex(0.0, es.eigenvalues()[k]));
  return project(es.eigenvectors() * d * es.eigenvectors().adjoint());
}

AlgebraVector Group::log_map(const GroupPoint& g) const {
  AlgebraVector v;
  if (family_ == GroupFamily::U1) {
    Matrix m(1, 1);
    m(0, 0) = Complex(0.0, std::arg(g.m(0, 0)));
    v.m = m;
  } else if (family_ == GroupFamily::SU2) {
    const double p0 = std::min(1.0, std::max(-1.0, 0.5 * g.m.real().trace()));
    Matrix w = g.m - 0.5 * g.m.trace() * Matrix::Identity(2, 2);
    const double alpha = std::atan2(w.norm() / std::sqrt(2.0), p0);
    double f;
    if (alpha < 1e-8) {
      f = 1.0 + alpha * alpha / 6.0;
    } else if (std::sin(alpha) < 1e-12) {
      throw OutOfChartError("log_map: element at the cut locus");
    } else {
      f = alpha / std::sin(alpha);
    }
    v = algebra_project(f * w);
  } else {
    Eigen::ComplexSchur<Matrix> schur(g.m);
    const Matrix& q = schur.matrixU();
    Matrix d = Matrix::Zero(n_, n_);
    for (int k = 0; k < n_; ++k)
      d(k, k) = Complex(0.0, std::arg(schur.matrixT()(k, k)));
    v = algebra_project(q * d * q.adjoint());
  }
  const double r = algebra_norm(v);
  if (!(r < 1.0))
    throw OutOfChartError("log_map: scaled distance " + std::to_string(r) +
                          " >= 1 (outside the principal chart)");
  return v;
}

double Group::algebra_norm(const AlgebraVector& v) const {
  return lambda_ * v.m.norm();
}

double Group::distance(const GroupPoint& a, const GroupPoint& b) const {
  return algebra_norm(log_map({a.m.adjoint() * b.m}));
}

double Group::distance_to_identity(const GroupPoint& g) const {
  return algebra_norm(log_map(g));
}

AlgebraVector Group::adjoint(const GroupPoint& g, const AlgebraVector& v) const {
  return algebra_project(g.m * v.m * g.m.adjoint());
}

GroupPoint Group::project(const Matrix& m) const {
  switch (family_) {
    case GroupFamily::U1: {
      const double r = std::abs(m(0, 0));
      if (r < 1e-14) throw std::invalid_argument("cannot project zero to U(1)");
      Matrix g(1, 1);
      g(0, 0) = m(0, 0) / r;
      return {g};
    }
    case GroupFamily::SU2: {
      // Orthogonal projection onto span{I, -i sigma_k} followed by
      // normalization; exact for matrices already in that span.
      Eigen::Vector4d q;
      q[0] = 0.5 * m.trace().real();
      for (int k = 1; k <= 3; ++k) {
        Matrix bk = Complex(0.0, -1.0) * pauli(k);
        q[k] = 0.5 * (bk.adjoint() * m).trace().real();
      }
      const double r = q.norm();
      if (r < 1e-14) throw std::invalid_argument("cannot project to SU(2)");
      q /= r;
      Matrix g = q[0] * Matrix::Identity(2, 2);
      for (int k = 1; k <= 3; ++k) g += q[k] * Complex(0.0, -1.0) * pauli(k);
      return {g};
    }
    default: {
      Eigen::MatrixXd mr = m.real();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(
          mr, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::MatrixXd p = svd.matrixU() * svd.matrixV().transpose();
      if (p.determinant() < 0.0)
        throw std::invalid_argument("cannot project: nearest orthogonal matrix has det -1");
      return {p.cast<Complex>()};
    }
  }
}

AlgebraVector Group::algebra_project(const Matrix& m) const {
  Matrix a = 0.5 * (m - m.adjoint());
  if (family_ == GroupFamily::SU2)
    a -= (a.trace() / static_cast<double>(n_)) * Matrix::Identity(n_, n_);
  if (family_ == GroupFamily::SO3 || family_ == GroupFamily::SOn)
    a = a.real().cast<Complex>();
  return {a};
}

AlgebraVector Group::algebra_from_coords(const Eigen::VectorXd& c) const {
  Matrix m = Matrix::Zero(n_, n_);
  for (int k = 0; k < algebra_dim(); ++k) m += c[k] * basis_[k];
  return {m};
}

Eigen::VectorXd Group::algebra_coords(const AlgebraVector& v) const {
  Eigen::VectorXd c(algebra_dim());
  for (int k = 0; k < algebra_dim(); ++k) {
    const double nrm2 = basis_[k].squaredNorm();
    c[k] = (basis_[k].adjoint() * v.m).trace().real() / nrm2;
  }
  return c;
}

AlgebraVector Group::zero_algebra() const { return {Matrix::Zero(n_, n_)}; }

int Group::embedding_dim() const {
  switch (family_) {
    case GroupFamily::U1: return 2;
    case GroupFamily::SU2: return 4;
    default: return n_ * n_;
  }
}

Eigen::VectorXd Group::embedding_coords(const GroupPoint& g) const {
  Eigen::VectorXd c(embedding_dim());
  switch (family_) {
    case GroupFamily::U1:
      c[0] = g.m(0, 0).real();
      c[1] = g.m(0, 0).imag();
      break;
    case GroupFamily::SU2:
      c[0] = g.m(0, 0).real();
      c[1] = g.m(0, 1).imag();
      c[2] = g.m(0, 1).real();
      c[3] = g.m(0, 0).imag();
      break;
    default: {
      int idx = 0;
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b) c[idx++] = g.m(a, b).real();
    }
  }
  return c;
}

GroupQuadrature Group::haar_quadrature(int resolution) const {
  if (resolution < 2)
    throw std::invalid_argument("haar_quadrature: resolution must be >= 2");
  GroupQuadrature quad;
  const int n = resolution;
  std::vector<GroupPoint> nodes;
  std::vector<double> weights;
  switch (family_) {
    case GroupFamily::U1: {
      for (int k = 0; k < n; ++k) {
        Matrix g(1, 1);
        g(0, 0) = std::exp(Complex(0.0, 2.0 * kPi * k / n));
        nodes.push_back({g});
        weights.push_back(1.0 / n);
      }
      break;
    }
    case GroupFamily::SU2: {
      // Euler ZYZ product rule; gamma runs over the double period so that
      // half-integer matrix coefficients integrate exactly.
      std::vector<double> gl_x, gl_w;
      gauss_legendre(n, gl_x, gl_w);
      for (int a = 0; a < n; ++a) {
        const Matrix rza = su2_rz(2.0 * kPi * a / n);
        for (int b = 0; b < n; ++b) {
          const Matrix ryb = su2_ry(std::acos(gl_x[b]));
          for (int c = 0; c < 2 * n; ++c) {
            const Matrix rzc = su2_rz(4.0 * kPi * c / (2 * n));
            nodes.push_back(project(rza * ryb * rzc));
            weights.push_back((1.0 / n) * (gl_w[b] / 2.0) * (1.0 / (2 * n)));
          }
        }
      }
      break;
    }
    case GroupFamily::SO3: {
      std::vector<double> gl_x, gl_w;
      gauss_legendre(n, gl_x, gl_w);
      for (int a = 0; a < n; ++a) {
        const Matrix rza = rot_z3(2.0 * kPi * a / n);
        for (int b = 0; b < n; ++b) {
          const Matrix ryb = rot_y3(std::acos(gl_x[b]));
          for (int c = 0; c < n; ++c) {
            const Matrix rzc = rot_z3(2.0 * kPi * c / n);
            nodes.push_back(project(rza * ryb * rzc));
            weights.push_back((1.0 / n) * (gl_w[b] / 2.0) * (1.0 / n));
          }
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("haar_quadrature: unsupported family SOn");
  }
  quad.nodes = std::move(nodes);
  quad.weights = Eigen::Map<Eigen::VectorXd>(weights.data(),
                                             static_cast<Eigen::Index>(weights.size()));
  // Exact for matrix coefficients of degree < resolution; the declared
  // bound is what the invariance test basket is checked against.
  quad.declared_tol = std::max(1e-12, std::pow(10.0, -2.0 * (resolution - 1)));
  return quad;
}

double Group::unitarity_residual(const GroupPoint& g) const {
  return (g.m.adjoint() * g.m - Matrix::Identity(n_, n_)).norm();
}

double Group::determinant_residual(const GroupPoint& g) const {
  const Complex det = g.m.determinant();
  if (family_ == GroupFamily::U1) return std::abs(std::abs(det) - 1.0);
  return std::abs(det - Complex(1.0, 0.0));
}

AlgebraVector Group::random_algebra(std::mt19937_64& rng, double norm_cap) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd c(algebra_dim());
  for (int k = 0; k < algebra_dim(); ++k) c[k] = normal(rng);
  AlgebraVector v = algebra_from_coords(c);
  const double nrm = algebra_norm(v);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double radius =
      norm_cap * std::pow(unif(rng), 1.0 / algebra_dim());
  if (nrm < 1e-15) return zero_algebra();
  v.m *= radius / nrm;
  return v;
}

GroupPoint Group::random_point(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (family_) {
    case GroupFamily::U1: {
      std::uniform_real_distribution<double> unif(-kPi, kPi);
      Matrix g(1, 1);
      g(0, 0) = std::exp(Complex(0.0, unif(rng)));
      return {g};
    }
    case GroupFamily::SU2: {
      Eigen::Vector4d q;
      for (int k = 0; k < 4; ++k) q[k] = normal(rng);
      q.normalize();
      Matrix g(2, 2);
      g(0, 0) = Complex(q[0], q[3]);
      g(0, 1) = Complex(q[2], q[1]);
      g(1, 0) = Complex(-q[2], q[1]);
      g(1, 1) = Complex(q[0], -q[3]);
      return project(g);
    }
    default: {
      Eigen::MatrixXd a(n_, n_);
      for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) a(r, c) = normal(rng);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
      Eigen::MatrixXd q = qr.householderQ();
      Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int k = 0; k < n_; ++k)
        if (r(k, k) < 0.0) q.col(k) *= -1.0;
      if (q.determinant() < 0.0) q.col(n_ - 1) *= -1.0;
      return project(q.cast<Complex>());
    }
  }
}

bool Group::same_spec(const Group& other) const {
  return family_ == other.family_ && n_ == other.n_ &&
         lambda_ == other.lambda_;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

}  // namespace gavg
