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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcpc/tensor.hpp"

namespace lcpc {

/// Pauli operator i^phase * (x)_q sigma(x_q, z_q) with sigma(1,1) = Y.
/// Bits are packed 64 per word.
class PauliOp {
 public:
  PauliOp() = default;
  explicit PauliOp(std::size_t num_qubits);

  /// Parses "X3 Z7 Y12" (qubit indices < num_qubits). "I" or "" is the identity.
  /// A leading '-' or "+i"/"-i" prefix sets the phase.
  static PauliOp parse(std::string_view text, std::size_t num_qubits);
  static PauliOp single(std::size_t num_qubits, std::size_t qubit, char pauli);

  std::size_t num_qubits() const { return n_; }
  std::size_t num_words() const { return xs_.size(); }
  bool x(std::size_t q) const { return (xs_[q >> 6] >> (q & 63)) & 1u; }
  bool z(std::size_t q) const { return (zs_[q >> 6] >> (q & 63)) & 1u; }
  char at(std::size_t q) const;
  void set(std::size_t q, char pauli);
  void set_x(std::size_t q, bool v);
  void set_z(std::size_t q, bool v);

  /// Power of i, in [0, 4).
  int phase() const { return phase_; }
  void set_phase(int p) { phase_ = ((p % 4) + 4) % 4; }
  bool is_hermitian() const { return phase_ % 2 == 0; }
  /// +1 or -1 for Hermitian operators.
  int sign() const;

  bool commutes(const PauliOp& other) const;
  /// Ordered product this * other with exact phase.
  PauliOp operator*(const PauliOp& other) const;
  PauliOp& operator*=(const PauliOp& other);

  std::size_t weight() const;
  std::vector<int> support() const;
  bool is_identity() const;  // ignores phase
  /// Equality of the Pauli string, ignoring phase.
  bool same_string(const PauliOp& other) const;
  bool operator==(const PauliOp& other) const = default;

  /// "X3 Z7"; identity prints as "I". Phase is not included.
  std::string str() const;

  /// Dense matrix on `qubits` (first is most significant). Support must lie in `qubits`.
  Matrix to_matrix(std::span<const int> qubits) const;

  const std::vector<std::uint64_t>& x_words() const { return xs_; }
  const std::vector<std::uint64_t>& z_words() const { return zs_; }
  std::vector<std::uint64_t>& x_words() { return xs_; }
  std::vector<std::uint64_t>& z_words() { return zs_; }

 private:
  std::size_t n_ = 0;
  int phase_ = 0;
  std::vector<std::uint64_t> xs_;
  std::vector<std::uint64_t> zs_;
};

/// GF(2) rank of the stacked (x|z) rows; phases ignored.
int symplectic_rank(std::span<const PauliOp> ops);

/// True iff `op` is (up to phase) a product of `group`.
bool in_span(std::span<const PauliOp> group, const PauliOp& op);

/// Basis (up to phase) of the Paulis supported on `allowed_qubits` that commute
/// with every element of `gens`.
std::vector<PauliOp> centralizer(std::span<const PauliOp> gens,
                                 std::span<const int> allowed_qubits);

/// Pure stabilizer state kept as a tableau of n stabilizers and n destabilizers.
class StabilizerFrame {
 public:
  /// |0...0>.
  explicit StabilizerFrame(std::size_t num_qubits);

  std::size_t num_qubits() const { return n_; }
  const std::vector<PauliOp>& stabilizers() const { return stab_; }
  const std::vector<PauliOp>& destabilizers() const { return destab_; }

  /// +1 or -1 if the outcome is determined, 0 if it is uniformly random.
  int expectation(const PauliOp& op) const;
  /// Measures a Hermitian Pauli; returns +1 or -1.
  int measure(const PauliOp& op, Rng& rng);
  /// Projects onto the `outcome` eigenspace of `op` and returns its Born
  /// probability (1, 1/2 or 0). A zero-probability outcome leaves the frame unchanged.
  double force(const PauliOp& op, int outcome);
  /// Conjugates the state by a Pauli (flips signs of anticommuting stabilizers).
  void apply(const PauliOp& op);

  /// Probability that measuring every op in `measured` on Tr_Q[state] (x) I/2^|Q|
  /// returns +1, where Q = `depolarized_qubits`. The ops must commute pairwise.
  double depolarized_success_probability(std::span<const PauliOp> measured,
                                         std::span<const int> depolarized_qubits) const;

  /// |<a|b>|^2 between two frames on the same qubits.
  static double overlap(const StabilizerFrame& a, const StabilizerFrame& b);

 private:
  void rowmul(PauliOp& target, const PauliOp& source) const;

  std::size_t n_;
  std::vector<PauliOp> stab_;
  std::vector<PauliOp> destab_;
};

}  // namespace lcpc
