// Copyright 2026 The lcpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lcpc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace lcpc {

CapExceeded::CapExceeded(const std::string& what, std::size_t requested, std::size_t cap)
    : std::runtime_error(what + " (requested dimension " + std::to_string(requested) +
                         ", cap " + std::to_string(cap) + ")"),
      requested_(requested),
      cap_(cap) {}

TensorLayout::TensorLayout(std::vector<SiteSpace> sites) : sites_(std::move(sites)) {
  std::unordered_set<int> seen;
  for (const auto& s : sites_) {
    if (s.dim < 1) {
      throw std::invalid_argument("site " + std::to_string(s.site_id) + " has dim < 1");
    }
    if (!seen.insert(s.site_id).second) {
      throw std::invalid_argument("duplicate site id " + std::to_string(s.site_id));
    }
  }
  strides_.assign(sites_.size(), 1);
  dim_ = 1;
  for (std::size_t p = sites_.size(); p-- > 0;) {
    strides_[p] = dim_;
    dim_ *= static_cast<std::size_t>(sites_[p].dim);
  }
}

bool TensorLayout::contains(int site_id) const {
  return std::any_of(sites_.begin(), sites_.end(),
                     [&](const SiteSpace& s) { return s.site_id == site_id; });
}

int TensorLayout::position_of(int site_id) const {
  for (std::size_t p = 0; p < sites_.size(); ++p) {
    if (sites_[p].site_id == site_id) return static_cast<int>(p);
  }
  throw std::invalid_argument("unknown site id " + std::to_string(site_id));
}

std::vector<int> TensorLayout::positions_of(std::span<const int> site_ids) const {
  std::vector<int> out;
  out.reserve(site_ids.size());
  for (int id : site_ids) out.push_back(position_of(id));
  return out;
}

std::size_t TensorLayout::dim_of(std::span<const int> positions) const {
  std::size_t d = 1;
  for (int p : positions) d *= static_cast<std::size_t>(sites_[p].dim);
  return d;
}

std::vector<int> TensorLayout::complement(std::span<const int> positions) const {
  std::vector<bool> in(sites_.size(), false);
  for (int p : positions) in[p] = true;
  std::vector<int> out;
  for (std::size_t p = 0; p < sites_.size(); ++p) {
    if (!in[p]) out.push_back(static_cast<int>(p));
  }
  return out;
}

std::vector<int> TensorLayout::site_ids() const {
  std::vector<int> ids;
  ids.reserve(sites_.size());
  for (const auto& s : sites_) ids.push_back(s.site_id);
  return ids;
}

namespace {

// All sums of digit*stride over the given positions, first position most significant.
std::vector<std::size_t> enumerate_offsets(const TensorLayout& layout,
                                           std::span<const int> positions) {
  std::vector<std::size_t> out{0};
  for (int p : positions) {
    const int d = layout.dim_at(p);
    const std::size_t stride = layout.stride(p);
    std::vector<std::size_t> next;
    next.reserve(out.size() * d);
    for (std::size_t o : out) {
      for (int digit = 0; digit < d; ++digit) next.push_back(o + digit * stride);
    }
    out = std::move(next);
  }
  return out;
}

void check_positions(const TensorLayout& layout, std::span<const int> positions) {
  std::vector<bool> seen(layout.num_sites(), false);
  for (int p : positions) {
    if (p < 0 || static_cast<std::size_t>(p) >= layout.num_sites()) {
      throw std::invalid_argument("position out of range");
    }
    if (seen[p]) throw std::invalid_argument("repeated position");
    seen[p] = true;
  }
}

}  // namespace

SubsystemIndex::SubsystemIndex(const TensorLayout& layout, std::span<const int> positions) {
  check_positions(layout, positions);
  offset = enumerate_offsets(layout, positions);
  const auto rest = layout.complement(positions);
  base = enumerate_offsets(layout, rest);
}

DenseOperator::DenseOperator(std::vector<SiteSpace> sites, Matrix matrix)
    : layout_(std::move(sites)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != layout_.dim() ||
      static_cast<std::size_t>(matrix_.cols()) != layout_.dim()) {
    throw std::invalid_argument("operator matrix side does not match the product of site dims");
  }
}

DenseOperator DenseOperator::identity(std::vector<SiteSpace> sites) {
  TensorLayout layout(sites);
  const auto d = static_cast<Eigen::Index>(layout.dim());
  return DenseOperator(std::move(sites), Matrix::Identity(d, d));
}

bool DenseOperator::is_hermitian(double tol) const {
  return max_abs(matrix_ - matrix_.adjoint()) <= tol;
}

bool DenseOperator::is_unitary(double tol) const {
  const auto d = matrix_.rows();
  return max_abs(matrix_.adjoint() * matrix_ - Matrix::Identity(d, d)) <= tol;
}

bool DenseOperator::is_projector(double tol) const {
  return is_hermitian(tol) && max_abs(matrix_ * matrix_ - matrix_) <= tol;
}

DenseState::DenseState(std::vector<SiteSpace> sites, Matrix rho)
    : layout_(std::move(sites)), rho_(std::move(rho)) {
  if (static_cast<std::size_t>(rho_.rows()) != layout_.dim() || rho_.rows() != rho_.cols()) {
    throw std::invalid_argument("density matrix side does not match the product of site dims");
  }
  if (layout_.dim() > kMaxDensityDim) {
    throw CapExceeded("density matrix", layout_.dim(), kMaxDensityDim);
  }
  if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > tol::kConstruction) {
    throw std::invalid_argument("density matrix trace differs from 1");
  }
  if (max_abs(rho_ - rho_.adjoint()) > tol::kConstruction) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol::kConstruction) {
    throw std::invalid_argument("density matrix is not positive semidefinite");
  }
}

DenseState DenseState::from_pure(std::vector<SiteSpace> sites, const Vector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw std::invalid_argument("zero state vector");
  const Vector v = psi / n;
  return DenseState(std::move(sites), v * v.adjoint());
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  std::vector<SiteSpace> sites = a.sites();
  for (const auto& s : b.sites()) {
    if (a.layout().contains(s.site_id)) {
      throw std::invalid_argument("kron of operators with overlapping site " +
                                  std::to_string(s.site_id));
    }
    sites.push_back(s);
  }
  const auto& A = a.matrix();
  const auto& B = b.matrix();
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index k = 0; k < A.cols(); ++k) {
      out.block(i * B.rows(), k * B.cols(), B.rows(), B.cols()) = A(i, k) * B;
    }
  }
  return DenseOperator(std::move(sites), std::move(out));
}

Matrix partial_trace(const Matrix& op, const TensorLayout& layout,
                     std::span<const int> keep_positions) {
  SubsystemIndex idx(layout, keep_positions);
  const auto dk = static_cast<Eigen::Index>(idx.offset.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a) {
    for (Eigen::Index b = 0; b < dk; ++b) {
      Complex acc = 0.0;
      for (std::size_t t : idx.base) acc += op(idx.offset[a] + t, idx.offset[b] + t);
      out(a, b) = acc;
    }
  }
  return out;
}

DenseState partial_trace(const DenseState& rho, std::span<const int> keep) {
  std::vector<int> positions = rho.layout().positions_of(keep);
  std::sort(positions.begin(), positions.end());
  std::vector<SiteSpace> kept;
  for (int p : positions) kept.push_back(rho.sites()[p]);
  return DenseState(std::move(kept), partial_trace(rho.rho(), rho.layout(), positions));
}

Matrix reduced_density(const Matrix& columns, const TensorLayout& layout,
                       std::span<const int> keep_positions) {
  if (static_cast<std::size_t>(columns.rows()) != layout.dim()) {
    throw std::invalid_argument("state dimension does not match layout");
  }
  SubsystemIndex idx(layout, keep_positions);
  const auto dk = static_cast<Eigen::Index>(idx.offset.size());
  const auto dt = static_cast<Eigen::Index>(idx.base.size());
  Matrix out = Matrix::Zero(dk, dk);
  Matrix m(dk, dt);
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    for (Eigen::Index a = 0; a < dk; ++a) {
      for (Eigen::Index t = 0; t < dt; ++t) m(a, t) = columns(idx.offset[a] + idx.base[t], c);
    }
    out.noalias() += m * m.adjoint();
  }
  return out;
}

SupportProjection support_projector(const DenseOperator& h, double tol) {
  if (!h.is_hermitian(tol::kConstruction)) {
    throw std::invalid_argument("support_projector requires a Hermitian operator");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  const auto& ev = es.eigenvalues();
  const double lmax = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
  int rank = 0;
  const auto d = h.matrix().rows();
  Matrix q = Matrix::Zero(d, d);
  if (lmax > 0.0) {
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) > tol * lmax) {
        q.noalias() += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
        ++rank;
      }
    }
  }
  return {DenseOperator(h.sites(), std::move(q)), rank, lmax};
}

Matrix support_projector(const Matrix& h, double tol, int* rank) {
  std::vector<SiteSpace> sites{{0, static_cast<int>(h.rows())}};
  auto sp = support_projector(DenseOperator(sites, h), tol);
  if (rank) *rank = sp.rank;
  return sp.projector.matrix();
}

Matrix haar_unitary(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("haar_unitary requires dim >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= (a > 0.0 ? d / a : Complex(1.0, 0.0));
  }
  return q;
}

void apply_local(Vector& psi, const TensorLayout& layout, std::span<const int> positions,
                 const Matrix& local) {
  SubsystemIndex idx(layout, positions);
  const auto d = static_cast<Eigen::Index>(idx.offset.size());
  if (local.rows() != d || local.cols() != d) {
    throw std::invalid_argument("local operator dimension mismatch");
  }
  Vector v(d), w(d);
  for (std::size_t b : idx.base) {
    for (Eigen::Index s = 0; s < d; ++s) v(s) = psi(b + idx.offset[s]);
    w.noalias() = local * v;
    for (Eigen::Index s = 0; s < d; ++s) psi(b + idx.offset[s]) = w(s);
  }
}

void apply_local_columns(Matrix& m, const TensorLayout& layout, std::span<const int> positions,
                         const Matrix& local) {
  SubsystemIndex idx(layout, positions);
  const auto d = static_cast<Eigen::Index>(idx.offset.size());
  if (local.rows() != d || local.cols() != d) {
    throw std::invalid_argument("local operator dimension mismatch");
  }
  Matrix blk(d, m.cols());
  for (std::size_t b : idx.base) {
    for (Eigen::Index s = 0; s < d; ++s) blk.row(s) = m.row(b + idx.offset[s]);
    blk = local * blk;
    for (Eigen::Index s = 0; s < d; ++s) m.row(b + idx.offset[s]) = blk.row(s);
  }
}

Matrix embed(const Matrix& local, const TensorLayout& layout, std::span<const int> positions) {
  SubsystemIndex idx(layout, positions);
  const auto d = static_cast<Eigen::Index>(layout.dim());
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t b : idx.base) {
    for (std::size_t s = 0; s < idx.offset.size(); ++s) {
      for (std::size_t t = 0; t < idx.offset.size(); ++t) {
        out(b + idx.offset[s], b + idx.offset[t]) = local(s, t);
      }
    }
  }
  return out;
}

Matrix depolarize(const Matrix& op, const TensorLayout& layout, std::span<const int> positions) {
  SubsystemIndex idx(layout, positions);
  const double inv_d = 1.0 / static_cast<double>(idx.offset.size());
  Matrix out = Matrix::Zero(op.rows(), op.cols());
  for (std::size_t b1 : idx.base) {
    for (std::size_t b2 : idx.base) {
      Complex tr = 0.0;
      for (std::size_t s : idx.offset) tr += op(b1 + s, b2 + s);
      tr *= inv_d;
      for (std::size_t s : idx.offset) out(b1 + s, b2 + s) = tr;
    }
  }
  return out;
}

Matrix apply_on_subsystem(const Matrix& op, const TensorLayout& layout,
                          std::span<const int> positions, const Channel& map) {
  SubsystemIndex idx(layout, positions);
  const auto d = static_cast<Eigen::Index>(idx.offset.size());
  Matrix out = Matrix::Zero(op.rows(), op.cols());
  Matrix blk(d, d);
  for (std::size_t b1 : idx.base) {
    for (std::size_t b2 : idx.base) {
      for (Eigen::Index s = 0; s < d; ++s) {
        for (Eigen::Index t = 0; t < d; ++t) blk(s, t) = op(b1 + idx.offset[s], b2 + idx.offset[t]);
      }
      const Matrix res = map(blk);
      for (Eigen::Index s = 0; s < d; ++s) {
        for (Eigen::Index t = 0; t < d; ++t) out(b1 + idx.offset[s], b2 + idx.offset[t]) = res(s, t);
      }
    }
  }
  return out;
}

ChannelComparison channel_equal(const Channel& c1, const Channel& c2, std::size_t window_dim,
                                double tol) {
  if (window_dim > kMaxWindowDim) {
    throw CapExceeded("channel window", window_dim, kMaxWindowDim);
  }
  const auto d = static_cast<Eigen::Index>(window_dim);
  ChannelComparison out;
  Matrix e = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      e(i, j) = 1.0;
      const double dev = max_abs(c1(e) - c2(e));
      if (dev > out.max_deviation) {
        out.max_deviation = dev;
        out.worst_row = static_cast<std::size_t>(i);
        out.worst_col = static_cast<std::size_t>(j);
      }
      e(i, j) = 0.0;
    }
  }
  out.equal = out.max_deviation < tol;
  return out;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace lcpc
