#include "gavg/candidate.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace gavg {

namespace {

void enumerate_exponents(int nvars, int degree, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == nvars) {
    out.push_back(current);
    return;
  }
  int used = 0;
  for (int e : current) used += e;
  for (int e = 0; e + used <= degree; ++e) {
    current.push_back(e);
    enumerate_exponents(nvars, degree, current, out);
    current.pop_back();
  }
}

std::uint64_t next_stamp() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

}  // namespace

GroupBandBasis::GroupBandBasis(std::shared_ptr<const Group> group, int degree,
                               int analysis_resolution)
    : group_(std::move(group)), degree_(degree) {
  if (degree_ < 0) throw std::invalid_argument("band degree must be >= 0");
  quad_ = group_->haar_quadrature(analysis_resolution);
  std::vector<int> current;
  enumerate_exponents(group_->embedding_dim(), degree_, current, exponents_);

  const int n_nodes = static_cast<int>(quad_.nodes.size());
  const int n_basis = size();
  if (n_nodes < n_basis) {
    throw std::invalid_argument(
        "analysis resolution too coarse for requested band degree");
  }
  Eigen::MatrixXd design(n_nodes, n_basis);
  Eigen::VectorXd sqrt_w(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    design.row(i) = evaluate(quad_.nodes[i]).transpose();
    sqrt_w(i) = std::sqrt(quad_.weights[i]);
  }
  Eigen::MatrixXd weighted = sqrt_w.asDiagonal() * design;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(
      weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
  for (int k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff) inv_sv(k) = 1.0 / sv(k);
  }
  fit_ = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose() *
         sqrt_w.asDiagonal().toDenseMatrix();
}

Eigen::VectorXd GroupBandBasis::evaluate(const GroupPoint& g) const {
  const Eigen::VectorXd coords = group_->embedding_coords(g);
  const int nvars = static_cast<int>(coords.size());
  // Power tables: pow_table[v][e] = coords[v]^e.
  std::vector<std::vector<double>> pow_table(nvars);
  for (int v = 0; v < nvars; ++v) {
    pow_table[v].resize(degree_ + 1);
    pow_table[v][0] = 1.0;
    for (int e = 1; e <= degree_; ++e)
      pow_table[v][e] = pow_table[v][e - 1] * coords(v);
  }
  Eigen::VectorXd out(size());
  for (int k = 0; k < size(); ++k) {
    double val = 1.0;
    const auto& exps = exponents_[k];
    for (int v = 0; v < nvars; ++v) val *= pow_table[v][exps[v]];
    out(k) = val;
  }
  return out;
}

BaseGrid::BaseGrid(int dim, double radius, int points_per_dim)
    : dim_(dim), radius_(radius) {
  if (dim_ < 0) throw std::invalid_argument("base dimension must be >= 0");
  if (dim_ == 0) {
    m_ = 1;
    size_ = 1;
    origin_ = 0;
    return;
  }
  if (radius_ <= 0.0) throw std::invalid_argument("base radius must be > 0");
  m_ = std::max(3, points_per_dim);
  if (m_ % 2 == 0) ++m_;  // odd count so 0 is a node
  nodes1d_.resize(m_);
  bary1d_.resize(m_);
  const double pi = 3.14159265358979323846;
  for (int k = 0; k < m_; ++k) {
    nodes1d_[k] = radius_ * std::cos(pi * k / (m_ - 1));
    bary1d_[k] = ((k % 2 == 0) ? 1.0 : -1.0);
    if (k == 0 || k == m_ - 1) bary1d_[k] *= 0.5;
  }
  nodes1d_[(m_ - 1) / 2] = 0.0;  // exact midpoint, not cos roundoff
  size_ = 1;
  for (int i = 0; i < dim_; ++i) size_ *= m_;
  origin_ = 0;
  int stride = 1;
  for (int i = 0; i < dim_; ++i) {
    origin_ += ((m_ - 1) / 2) * stride;
    stride *= m_;
  }
}

BasePoint BaseGrid::node(int j) const {
  BasePoint x = BasePoint::Zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    x(i) = nodes1d_[j % m_];
    j /= m_;
  }
  return x;
}

Eigen::VectorXd BaseGrid::weights(const BasePoint& x) const {
  if (dim_ == 0) return Eigen::VectorXd::Ones(1);
  if (x.size() != dim_)
    throw std::invalid_argument("base point dimension mismatch");
  Eigen::MatrixXd w1d(m_, dim_);
  for (int i = 0; i < dim_; ++i) {
    int exact = -1;
    for (int k = 0; k < m_; ++k) {
      if (std::abs(x(i) - nodes1d_[k]) < 1e-14 * radius_) {
        exact = k;
        break;
      }
    }
    if (exact >= 0) {
      w1d.col(i).setZero();
      w1d(exact, i) = 1.0;
      continue;
    }
    double total = 0.0;
    for (int k = 0; k < m_; ++k) {
      const double v = bary1d_[k] / (x(i) - nodes1d_[k]);
      w1d(k, i) = v;
      total += v;
    }
    w1d.col(i) /= total;
  }
  Eigen::VectorXd out(size_);
  for (int j = 0; j < size_; ++j) {
    int idx = j;
    double val = 1.0;
    for (int i = 0; i < dim_; ++i) {
      val *= w1d(idx % m_, i);
      idx /= m_;
    }
    out(j) = val;
  }
  return out;
}

CandidateMap CandidateMap::projection(
    std::shared_ptr<const GroupoidChart> chart) {
  return closed_form(std::move(chart), nullptr);
}

CandidateMap CandidateMap::closed_form(
    std::shared_ptr<const GroupoidChart> chart, CorrectionFn u) {
  CandidateMap map;
  map.chart_ = std::move(chart);
  map.closed_u_ = std::move(u);
  map.enforce_identity_ = false;
  map.stamp_ = next_stamp();
  return map;
}

CandidateMap CandidateMap::grid_from_function(
    std::shared_ptr<const GroupoidChart> chart, const GridSpec& spec,
    const CorrectionFn& u, bool enforce_identity) {
  CandidateMap map;
  map.chart_ = std::move(chart);
  map.enforce_identity_ = enforce_identity;
  const Group& g = map.chart_->group();
  auto group_ptr = map.chart_->group_ptr();
  map.basis_ = std::make_shared<GroupBandBasis>(group_ptr, spec.group_degree,
                                                spec.analysis_resolution);
  map.bgrid_ = std::make_shared<BaseGrid>(
      map.chart_->base_dim(), map.chart_->base_radius(), spec.base_points);

  const auto& nodes = map.basis_->analysis_nodes().nodes;
  const int n_nodes = static_cast<int>(nodes.size());
  const int dim_g = g.algebra_dim();
  map.samples_.resize(map.bgrid_->size());
  for (int j = 0; j < map.bgrid_->size(); ++j) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_nodes, dim_g);
    if (!(enforce_identity && j == map.bgrid_->origin_index()) && u) {
      const BasePoint x = map.bgrid_->node(j);
      for (int i = 0; i < n_nodes; ++i) {
        const Arrow p = map.chart_->make_arrow(nodes[i], x);
        s.row(i) = g.algebra_coords(u(p)).transpose();
      }
    }
    map.samples_[j] = std::move(s);
  }
  map.refit();
  return map;
}

CandidateMap CandidateMap::with_samples(
    std::vector<Eigen::MatrixXd> samples) const {
  if (!grid_mode())
    throw std::logic_error("with_samples requires a grid-mode map");
  if (samples.size() != samples_.size())
    throw std::invalid_argument("sample layout mismatch");
  CandidateMap map;
  map.chart_ = chart_;
  map.basis_ = basis_;
  map.bgrid_ = bgrid_;
  map.enforce_identity_ = enforce_identity_;
  map.samples_ = std::move(samples);
  if (enforce_identity_) map.samples_[bgrid_->origin_index()].setZero();
  map.refit();
  return map;
}

void CandidateMap::refit() {
  stamp_ = next_stamp();
  coeffs_.resize(samples_.size());
  const Eigen::MatrixXd& fit = basis_->fit_operator();
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    coeffs_[j] = (fit * samples_[j]).transpose();  // dim_g x n_basis
  }
}

double CandidateMap::max_sample_norm() const {
  if (!grid_mode())
    throw std::logic_error("max_sample_norm requires a grid-mode map");
  const Group& g = group();
  double best = 0.0;
  for (const auto& s : samples_) {
    for (int i = 0; i < s.rows(); ++i) {
      AlgebraVector v = g.algebra_from_coords(s.row(i).transpose());
      best = std::max(best, g.algebra_norm(v));
    }
  }
  return best;
}

AlgebraVector CandidateMap::correction(const Arrow& p) const {
  const Group& g = group();
  if (!grid_mode()) {
    if (!closed_u_) return g.zero_algebra();
    return closed_u_(p);
  }
  // Contract the per-node coefficient stacks against the barycentric base
  // weights once per distinct base point; repeated fiber evaluations at the
  // same source reuse the slab.
  struct Slab {
    std::uint64_t stamp = 0;
    BasePoint x;
    Eigen::MatrixXd eff;
  };
  thread_local Slab slab;
  if (slab.stamp != stamp_ || slab.x.size() != p.base.size() ||
      slab.x != p.base) {
    const Eigen::VectorXd w = bgrid_->weights(p.base);
    Eigen::MatrixXd eff = Eigen::MatrixXd::Zero(coeffs_[0].rows(),
                                                coeffs_[0].cols());
    for (int j = 0; j < w.size(); ++j) {
      if (w(j) != 0.0) eff += w(j) * coeffs_[j];
    }
    slab.stamp = stamp_;
    slab.x = p.base;
    slab.eff = std::move(eff);
  }
  const Eigen::VectorXd mono = basis_->evaluate(p.group_part);
  return g.algebra_from_coords(slab.eff * mono);
}

GroupPoint CandidateMap::evaluate(const Arrow& p) const {
  const Group& g = group();
  return g.multiply(g.exp_map(correction(p)), p.group_part);
}

}  // namespace gavg
