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

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcpc/pauli.hpp"
#include "lcpc/tensor.hpp"

namespace lcpc {

enum class Boundary { open, periodic };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Rectangular lattice; site id = j * width + i for coordinate (i, j).
struct Lattice {
  int width = 0;
  int height = 0;
  Boundary boundary = Boundary::open;
  /// Local dimension of every site, row-major by site id.
  std::vector<int> dims;

  int num_sites() const { return width * height; }
  /// Site at (i, j); wraps on periodic lattices, -1 when outside an open one.
  int site_at(int i, int j) const;
  std::pair<int, int> coord(int site) const { return {site % width, site / width}; }
  bool operator==(const Lattice&) const = default;
};

Lattice make_lattice(int width, int height, Boundary boundary, int dim);

/// One projector P_X. For stabilizer terms `pauli` holds S_X (projector (I+S_X)/2)
/// and `op` may be left empty; it is then built on demand by term_matrix().
struct Term {
  std::string name;
  std::vector<int> support;  // ascending site ids
  Matrix op;                 // on `support`, ascending order
  std::optional<PauliOp> pauli;
};

struct CodeSpec {
  std::string family = "custom";
  Lattice lattice;
  std::vector<Term> terms;
  /// Qubits held by each site, most significant first. Empty for non-qubit codes.
  std::vector<std::vector<int>> site_qubits;
  std::size_t num_qubits = 0;
  /// Region scans may deduplicate rectangles up to lattice translations.
  bool translation_symmetric = false;

  bool is_qubit_code() const { return !site_qubits.empty(); }
  bool is_stabilizer() const;
  std::vector<SiteSpace> site_spaces() const;
  TensorLayout layout() const { return TensorLayout(site_spaces()); }
  std::size_t dim() const;
  /// Terms touching any of the given sites, ascending.
  std::vector<std::size_t> terms_touching(const std::vector<int>& sites) const;
  /// Stabilizer generators (only valid when is_stabilizer()).
  std::vector<PauliOp> stabilizers() const;
};

/// Local projector of a term on its support (built from the Pauli when needed).
Matrix term_matrix(const CodeSpec& spec, const Term& term);

/// Support of the smallest box (in lattice steps) holding every term; 0 for single-site terms.
int interaction_range(const CodeSpec& spec);

struct FamilyParams {
  int width = 3;
  int height = 3;
  std::optional<Boundary> boundary;
  int defect_x = 0;
  int defect_y = 0;
};

/// ising1d, ising2d, toric, surface, defect_toric_bhm10. The toric families are
/// built on the edge-midpoint grid (2L x 2M, empty sites of dimension 1 at vertices
/// and faces) and need coarse_grain(spec, 2) before strip work.
CodeSpec build_named_code(const std::string& name, const FamilyParams& params);
const std::vector<std::string>& named_families();
/// Block size that brings a family's terms onto 2x2 cells.
int default_block(const std::string& family);

struct PairResidual {
  std::size_t a = 0;
  std::size_t b = 0;
  double norm = 0.0;
};

struct ValidationReport {
  bool valid = false;
  bool frustration_free = false;
  double max_commutator = 0.0;
  double max_projector_residual = 0.0;
  std::optional<PairResidual> failing_pair;
  std::optional<std::size_t> failing_term;
  /// Dimension of the ground space (dense rank or 2^(n-s)).
  double ground_degeneracy = 0.0;
  std::string method;  // "stabilizer" or "dense"
  std::vector<std::string> messages;
};

/// Checks projector-ness, pairwise commutation and frustration-freeness.
ValidationReport validate(const CodeSpec& spec);

/// Dense access to a code on its full site layout (state vectors up to kMaxStateDim).
class DenseCode {
 public:
  explicit DenseCode(const CodeSpec& spec);

  const CodeSpec& spec() const { return *spec_; }
  const TensorLayout& layout() const { return layout_; }
  std::size_t dim() const { return layout_.dim(); }
  std::size_t num_terms() const { return spec_->terms.size(); }

  /// psi <- P_X psi.
  void project(std::size_t term, Vector& psi) const;
  void project_columns(std::size_t term, Matrix& m) const;
  /// <psi|P_X|psi>.
  double expectation(std::size_t term, const Vector& psi) const;
  /// P_X embedded into the full space; needs dim() <= kMaxDensityDim.
  Matrix embedded(std::size_t term) const;
  /// psi <- S psi for a Pauli on the code's qubits.
  void apply_pauli(const PauliOp& pauli, Vector& psi) const;
  /// Positions (in the layout) of a term's support.
  const std::vector<int>& positions(std::size_t term) const { return positions_[term]; }

 private:
  struct PauliMasks {
    std::size_t x = 0;
    std::size_t z = 0;
    Complex coeff{1.0, 0.0};
  };

  PauliMasks masks_for(const PauliOp& pauli) const;

  const CodeSpec* spec_;
  TensorLayout layout_;
  std::vector<int> qubit_bit_;
  std::vector<std::vector<int>> positions_;
  std::vector<std::optional<PauliMasks>> masks_;
  std::vector<Matrix> local_;
};

/// P = prod_X P_X as a dense matrix (dim <= kMaxDensityDim).
DenseOperator code_projector(const CodeSpec& spec);

/// Orthonormal basis of the ground space as columns (dim <= kMaxStateDim).
Matrix ground_basis(const CodeSpec& spec, Rng& rng);

/// sum_X (1 - Tr[P_X rho]).
double energy(const CodeSpec& spec, const DenseState& state);
double energy(const DenseCode& code, const Vector& psi);
/// Indices of terms with Tr[P_X rho] < 1 - tol.
std::vector<std::size_t> violated_terms(const DenseCode& code, const Vector& psi,
                                        double tol = 1e-9);

/// Blocks `block` x `block` sites into one supersite (axes of extent 1 stay
/// unblocked). Terms map one-to-one.
CodeSpec coarse_grain(const CodeSpec& spec, int block);

/// Strip geometry along a lattice row. Site k (1-based) of the strip is
/// strip[k-1]. constraint_terms[k] lists the terms of P_{k-1,k}: for k >= 2 the
/// terms meeting {k-1, k} whose strip footprint lies in {k-1, k}; for k = 1 the
/// terms whose footprint is exactly {1}. Index 0 is unused.
struct StripGeometry {
  int row = 0;
  std::vector<int> strip;
  std::vector<int> extended;
  std::vector<std::vector<std::size_t>> constraint_terms;
  std::vector<std::vector<int>> constraint_support;
  std::vector<std::vector<int>> right_region;
  /// Terms meeting the strip; their product is P_strip.
  std::vector<std::size_t> strip_terms;

  int length() const { return static_cast<int>(strip.size()); }
};

/// Requires every term to fit a 2x2 cell of sites.
StripGeometry strip_geometry(const CodeSpec& spec, int row);
int default_row(const CodeSpec& spec);

/// Max over k of the number of terms meeting strip sites {k-1, k, k+1}.
int c_code(const CodeSpec& spec, const StripGeometry& strip);

/// A Pauli supported on the extended strip that commutes with every term and is
/// not in the stabilizer group; prefers the strip itself and minimum weight.
/// Throws std::invalid_argument for non-stabilizer specs.
std::optional<PauliOp> strip_logical_search(const CodeSpec& spec, const StripGeometry& strip);

/// A logical Pauli (commuting with every generator) that anticommutes with
/// `logical`; nullopt when `logical` lies in the stabilizer group.
std::optional<PauliOp> conjugate_logical(const CodeSpec& spec, const PauliOp& logical);

/// Qubits held by a list of sites, in order.
std::vector<int> qubits_of(const CodeSpec& spec, const std::vector<int>& sites);

}  // namespace lcpc
