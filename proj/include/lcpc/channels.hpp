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

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "lcpc/code_model.hpp"
#include "lcpc/tensor.hpp"

namespace lcpc {

/// The geometric series over the biasing map does not converge on the input.
class NonConvergent : public std::runtime_error {
 public:
  NonConvergent(const std::string& what, double spectral_radius)
      : std::runtime_error(what), spectral_radius_(spectral_radius) {}
  double spectral_radius() const { return spectral_radius_; }

 private:
  double spectral_radius_;
};

/// Linear map on operators of a window of sites.
class SuperOp {
 public:
  SuperOp(TensorLayout window, Channel map, std::string name = {});

  const TensorLayout& window() const { return window_; }
  std::size_t dim() const { return window_.dim(); }
  const std::string& name() const { return name_; }
  Matrix operator()(const Matrix& rho) const;
  const Channel& map() const { return map_; }

  /// Matrix on column-major vectorized operators (window dim <= 32).
  Matrix to_matrix() const;
  /// Max over the basis {|i><j|} of |Tr[map(E_ij)] - delta_ij|.
  double trace_defect() const;
  /// Smallest Choi eigenvalue (window dim <= 16).
  double min_choi_eigenvalue() const;

 private:
  TensorLayout window_;
  Channel map_;
  std::string name_;
};

/// outer after inner; both on the same window. Zero intermediates short-circuit.
SuperOp compose(const SuperOp& outer, const SuperOp& inner);
SuperOp identity_map(const TensorLayout& window);

/// Explicit biasing map of iteration k on the constraint support minus site k.
struct BiasingMap {
  int k = 0;
  std::vector<int> sites;  // constraint support without the strip site
  TensorLayout layout;
  Matrix matrix;           // on vectorized operators of `layout`
  Eigen::PartialPivLU<Matrix> lu;  // of I - matrix
  /// Applies E^power (power >= 0) or (I - E)^(-n) (power = -n).
  Matrix apply(const Matrix& sigma, int power) const;
};

/// Channels of the sequential model on a window of sites (default: the
/// extended strip). Iterations are 1-based; k = 1 has no success map when the
/// strip has no terms that touch only site 1.
class StripChannels {
 public:
  StripChannels(const CodeSpec& spec, const StripGeometry& strip, std::vector<int> window = {});

  const TensorLayout& window() const { return window_; }
  const std::vector<int>& window_sites() const { return sites_; }
  int length() const { return strip_->length(); }
  bool has_constraint(int k) const;

  /// Constraint projector P_{k-1,k} on the window (identity when there is none).
  const Matrix& constraint(int k) const { return constraint_.at(k); }
  const BiasingMap& biasing(int k) const { return biasing_.at(k); }

  SuperOp depolarize(int k) const;
  SuperOp depolarize_strip() const;
  SuperOp success(int k) const;
  SuperOp failure(int k) const;
  /// P_{k-1,k} rho P_{k,k+1} (P_{l,l+1} taken as the identity at the last site).
  SuperOp literal_success(int k) const;
  /// rho -> Y[Tr_k rho] (x) I/D with Y = E^power, or (I - E)^(-n) for power = -n.
  SuperOp biased(int k, int power) const;
  /// Average action of iteration k (sum over failures, then success).
  SuperOp iteration(int k) const;
  /// Product of the iteration maps, in order.
  SuperOp sequential() const;
  /// All depolarizers, then every (I - E)^(-1), then every success projector.
  SuperOp reordered() const;

 private:
  const CodeSpec* spec_;
  const StripGeometry* strip_;
  std::vector<int> sites_;
  TensorLayout window_;
  std::vector<int> strip_pos_;  // window position of strip site k (index k)
  std::vector<Matrix> constraint_;
  std::vector<BiasingMap> biasing_;
};

struct BasicMaps {
  SuperOp depolarize;
  SuperOp success;
  SuperOp failure;
};

/// D_k, P_{k-1,k}, Q_{k-1,k} on the window = constraint support and site k.
BasicMaps build_basic_maps(const CodeSpec& spec, const StripGeometry& strip, int k);

struct BiasingReport {
  BiasingMap map;
  /// max deviation of (E (x) D_k) from D_k Q D_k over the window basis.
  double identity_deviation = 0.0;
  /// max over inputs of Tr[E(rho)] - Tr[rho] for rho = |i><i| (<= 0 when trace-nonincreasing).
  double trace_excess = 0.0;
  std::optional<double> spectral_radius;  // of the full explicit map (side <= 256)
};

BiasingReport biasing_map(const CodeSpec& spec, const StripGeometry& strip, int k);

struct ExpectedTrials {
  double value = 0.0;               // A_k
  double success_probability = 0.0;  // sum over m of p_m
  std::vector<double> success_after;  // p_0 .. p_3
  double krylov_spectral_radius = 0.0;
  int krylov_dim = 0;
  std::optional<double> spectral_radius;
  std::optional<double> induced_trace_norm;
};

/// A_k for a state of the whole code. Throws NonConvergent when the biasing map
/// restricted to the orbit of the input has spectral radius >= 1 - 1e-9.
ExpectedTrials expected_trials(const CodeSpec& spec, const StripGeometry& strip, int k, const DenseState& rho);

/// max entry of [E_{k+1} (x) D_{k+1}, P_{k-1,k}] over the basis of their joint window.
double verify_commutation(const CodeSpec& spec, const StripGeometry& strip, int k);

struct IdentityRecord {
  std::string name;
  int k = 0;
  int m = -1;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool fatal = true;
};

struct EquivalenceReport {
  std::vector<IdentityRecord> records;
  bool pass = true;
  std::size_t window_dim = 0;
};

struct EquivalenceOptions {
  bool literal_eq9 = false;  // also report the asymmetric success map (non-fatal)
  int max_failures = 3;
};

/// Certifies the channel identities of the sequential model on the extended strip.
EquivalenceReport verify_equivalence(const CodeSpec& spec, const StripGeometry& strip,
                                     const EquivalenceOptions& opts = {});

/// Applies a window map to a full-system operator (identity elsewhere).
Matrix apply_window(const SuperOp& map, const Matrix& rho, const TensorLayout& full, const std::vector<int>& window_sites);

}  // namespace lcpc
