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

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lcpc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

namespace tol {
/// Structural checks: hermiticity, idempotence, commutators, trace.
inline constexpr double kConstruction = 1e-10;
/// Rank decisions, relative to the largest eigenvalue.
inline constexpr double kRank = 1e-9;
/// Certification of superoperator identities.
inline constexpr double kChannel = 1e-8;
}  // namespace tol

/// Pure state vectors (and ground-space bases) may not exceed this dimension.
inline constexpr std::size_t kMaxStateDim = std::size_t{1} << 18;
/// Explicit square matrices over a whole system (density matrices, code projectors).
inline constexpr std::size_t kMaxDensityDim = std::size_t{1} << 12;
/// Operator windows on which superoperators are built (matrix side is the square).
inline constexpr std::size_t kMaxWindowDim = std::size_t{1} << 6;

/// Thrown when a dense computation would exceed one of the caps above.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::size_t requested, std::size_t cap);
  std::size_t requested() const { return requested_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

struct SiteSpace {
  int site_id = 0;
  int dim = 1;
  bool operator==(const SiteSpace&) const = default;
};

/// Ordered tensor product of sites. The first site is the most significant
/// digit of a basis index, so kron(A, B) places A's site first.
class TensorLayout {
 public:
  TensorLayout() = default;
  explicit TensorLayout(std::vector<SiteSpace> sites);

  const std::vector<SiteSpace>& sites() const { return sites_; }
  std::size_t num_sites() const { return sites_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t stride(std::size_t pos) const { return strides_[pos]; }
  int dim_at(std::size_t pos) const { return sites_[pos].dim; }

  bool contains(int site_id) const;
  /// Position of `site_id` in the ordering; throws std::invalid_argument if absent.
  int position_of(int site_id) const;
  std::vector<int> positions_of(std::span<const int> site_ids) const;
  std::size_t dim_of(std::span<const int> positions) const;
  std::vector<int> complement(std::span<const int> positions) const;
  std::vector<int> site_ids() const;

 private:
  std::vector<SiteSpace> sites_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 1;
};

/// Index tables splitting a layout into a subsystem (given positions, in the
/// given order) and its complement: full index = base[c] + offset[s].
struct SubsystemIndex {
  SubsystemIndex(const TensorLayout& layout, std::span<const int> positions);
  std::vector<std::size_t> offset;
  std::vector<std::size_t> base;
};

class DenseOperator {
 public:
  DenseOperator(std::vector<SiteSpace> sites, Matrix matrix);
  static DenseOperator identity(std::vector<SiteSpace> sites);

  const TensorLayout& layout() const { return layout_; }
  const std::vector<SiteSpace>& sites() const { return layout_.sites(); }
  const Matrix& matrix() const { return matrix_; }
  std::size_t dim() const { return layout_.dim(); }

  bool is_hermitian(double tol = tol::kConstruction) const;
  bool is_unitary(double tol = tol::kConstruction) const;
  bool is_projector(double tol = tol::kConstruction) const;

 private:
  TensorLayout layout_;
  Matrix matrix_;
};

/// Density operator. Pure states are promoted with from_pure().
class DenseState {
 public:
  DenseState(std::vector<SiteSpace> sites, Matrix rho);
  static DenseState from_pure(std::vector<SiteSpace> sites, const Vector& psi);

  const TensorLayout& layout() const { return layout_; }
  const std::vector<SiteSpace>& sites() const { return layout_.sites(); }
  const Matrix& rho() const { return rho_; }
  std::size_t dim() const { return layout_.dim(); }

 private:
  TensorLayout layout_;
  Matrix rho_;
};

DenseOperator kron(const DenseOperator& a, const DenseOperator& b);

/// Reduced state on `keep` (site ids, output ordered as in the input state).
DenseState partial_trace(const DenseState& rho, std::span<const int> keep);

/// Tr over everything but `keep_positions`; the result is ordered as `keep_positions`.
Matrix partial_trace(const Matrix& op, const TensorLayout& layout,
                     std::span<const int> keep_positions);

/// Tr_rest of sum_i |v_i><v_i| over the columns of `columns`.
Matrix reduced_density(const Matrix& columns, const TensorLayout& layout,
                       std::span<const int> keep_positions);

struct SupportProjection {
  DenseOperator projector;
  int rank = 0;
  double lambda_max = 0.0;
};

/// Projector onto eigenvectors with eigenvalue > tol * lambda_max.
SupportProjection support_projector(const DenseOperator& h, double tol = tol::kRank);
Matrix support_projector(const Matrix& h, double tol, int* rank = nullptr);

/// Haar-random unitary: QR of a complex Ginibre matrix with R's diagonal
/// phases pushed into Q.
Matrix haar_unitary(int dim, Rng& rng);

/// psi <- (local on positions) psi, in place.
void apply_local(Vector& psi, const TensorLayout& layout, std::span<const int> positions,
                 const Matrix& local);
/// Left-multiplies every column of `m` by the embedded local operator.
void apply_local_columns(Matrix& m, const TensorLayout& layout, std::span<const int> positions,
                         const Matrix& local);
/// Embeds `local` (acting on `positions`) into the full layout as a dense matrix.
Matrix embed(const Matrix& local, const TensorLayout& layout, std::span<const int> positions);

/// Tr_S[op] (x) I_S / D_S for the subsystem S at `positions`.
Matrix depolarize(const Matrix& op, const TensorLayout& layout, std::span<const int> positions);

using Channel = std::function<Matrix(const Matrix&)>;

/// Applies a linear map defined on the subsystem at `positions` (operators
/// ordered as `positions`) to every block of `op`, identity elsewhere.
Matrix apply_on_subsystem(const Matrix& op, const TensorLayout& layout,
                          std::span<const int> positions, const Channel& map);

struct ChannelComparison {
  bool equal = false;
  double max_deviation = 0.0;
  std::size_t worst_row = 0;  // basis element |worst_row><worst_col|
  std::size_t worst_col = 0;
};

/// Compares two linear maps on the full operator basis {|i><j|} of a window.
ChannelComparison channel_equal(const Channel& c1, const Channel& c2, std::size_t window_dim,
                                double tol = tol::kChannel);

double max_abs(const Matrix& m);

}  // namespace lcpc
