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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "lcpc/code_model.hpp"

using namespace lcpc;

namespace {

CodeSpec named(const std::string& name, int w, int h) {
  FamilyParams p;
  p.width = w;
  p.height = h;
  return build_named_code(name, p);
}

Matrix half_plus(const Matrix& s) { return 0.5 * (Matrix::Identity(s.rows(), s.cols()) + s); }

Vector basis_state(std::size_t dim, std::size_t index) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

int dense_rank(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(p, Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() > 0.5).count());
}

}  // namespace

TEST_CASE("Ising chain validates with degeneracy two") {
  const auto spec = named("ising1d", 4, 1);
  const auto rep = validate(spec);
  CHECK(rep.valid);
  CHECK(rep.frustration_free);
  CHECK(rep.ground_degeneracy == 2.0);
  CHECK(rep.max_commutator < 1e-10);
}

TEST_CASE("toric code on the 2x2 torus validates") {
  const auto rep = validate(named("toric", 2, 2));
  CHECK(rep.valid);
  CHECK(rep.frustration_free);
  CHECK(rep.ground_degeneracy == 4.0);
}

TEST_CASE("anticommuting terms name the failing pair") {
  CodeSpec spec;
  spec.lattice = make_lattice(3, 1, Boundary::open, 2);
  spec.site_qubits = {{0}, {1}, {2}};
  spec.num_qubits = 3;
  spec.terms.push_back({"ZZ", {0, 1}, Matrix(), PauliOp::parse("Z0 Z1", 3)});
  spec.terms.push_back({"X", {1}, Matrix(), PauliOp::parse("X1", 3)});
  const auto rep = validate(spec);
  CHECK_FALSE(rep.valid);
  REQUIRE(rep.failing_pair.has_value());
  CHECK(rep.failing_pair->a == 0);
  CHECK(rep.failing_pair->b == 1);
  CHECK(rep.failing_pair->norm > 1e-8);
}

TEST_CASE("non-projector terms are named") {
  CodeSpec spec;
  spec.lattice = make_lattice(1, 1, Boundary::open, 2);
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 0.5;
  spec.terms.push_back({"half", {0}, m, std::nullopt});
  const auto rep = validate(spec);
  CHECK_FALSE(rep.valid);
  REQUIRE(rep.failing_term.has_value());
  CHECK(*rep.failing_term == 0);
}

TEST_CASE("dense matrix terms validate without the stabilizer route") {
  CodeSpec spec;
  spec.lattice = make_lattice(2, 1, Boundary::open, 3);
  Matrix p = Matrix::Zero(9, 9);
  for (int a = 0; a < 3; ++a) p(a * 3 + a, a * 3 + a) = 1.0;  // qutrit ferromagnet bond
  spec.terms.push_back({"eq", {0, 1}, p, std::nullopt});
  const auto rep = validate(spec);
  CHECK(rep.valid);
  CHECK(rep.method == "dense");
  CHECK(rep.ground_degeneracy == 3.0);
}

TEST_CASE("ising chain of five spins has four bond terms") {
  const auto spec = named("ising1d", 5, 1);
  REQUIRE(spec.terms.size() == 4);
  for (int k = 0; k < 4; ++k) {
    REQUIRE(spec.terms[k].pauli.has_value());
    CHECK(spec.terms[k].pauli->str() == "Z" + std::to_string(k) + " Z" + std::to_string(k + 1));
    CHECK(spec.terms[k].support == std::vector<int>{k, k + 1});
  }
}

TEST_CASE("surface code 3x3 has two ground states") {
  const auto spec = named("surface", 3, 3);
  CHECK(spec.num_qubits == 9);
  CHECK(spec.terms.size() == 8);
  CHECK(symplectic_rank(spec.stabilizers()) == 8);
  const auto rep = validate(spec);
  CHECK(rep.valid);
  CHECK(rep.ground_degeneracy == 2.0);
  CHECK(dense_rank(code_projector(spec).matrix()) == 2);
}

TEST_CASE("defect code shares the toric ground space on the 3x3 torus") {
  const auto toric = named("toric", 3, 3);
  const auto defect = named("defect_toric_bhm10", 3, 3);
  CHECK(validate(defect).valid);
  Rng rng(31);
  const Matrix bt = ground_basis(toric, rng);
  const Matrix bd = ground_basis(defect, rng);
  REQUIRE(bt.cols() == 4);
  REQUIRE(bd.cols() == 4);
  // Equal projectors: each basis lies in the other's span.
  CHECK(max_abs(bd - bt * (bt.adjoint() * bd)) < 1e-10);
  CHECK(max_abs(bt - bd * (bd.adjoint() * bt)) < 1e-10);
}

TEST_CASE("code projector examples") {
  const auto ising = named("ising1d", 3, 1);
  Matrix want = Matrix::Zero(8, 8);
  want(0, 0) = want(7, 7) = 1.0;
  CHECK(max_abs(code_projector(ising).matrix() - want) < 1e-12);

  const auto toric = named("toric", 2, 2);
  const int s = symplectic_rank(toric.stabilizers());
  CHECK(dense_rank(code_projector(toric).matrix()) == (1 << (static_cast<int>(toric.num_qubits) - s)));
  CHECK(dense_rank(code_projector(toric).matrix()) == 4);

  CodeSpec one;
  one.lattice = make_lattice(1, 1, Boundary::open, 2);
  one.site_qubits = {{0}};
  one.num_qubits = 1;
  one.terms.push_back({"Z", {0}, Matrix(), PauliOp::parse("Z0", 1)});
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  CHECK(max_abs(code_projector(one).matrix() - zero) < 1e-12);
}

TEST_CASE("code projector rejects oversized codes") {
  CHECK_THROWS_AS(code_projector(named("toric", 3, 3)), CapExceeded);
}

TEST_CASE("energy examples") {
  const auto ising = named("ising1d", 4, 1);
  const DenseCode code(ising);
  CHECK(std::abs(energy(code, basis_state(16, 0))) < 1e-9);
  CHECK(std::abs(energy(code, basis_state(16, 0b0011)) - 1.0) < 1e-12);
  const auto st = DenseState::from_pure(ising.site_spaces(), basis_state(16, 0b0011));
  CHECK(std::abs(energy(ising, st) - 1.0) < 1e-12);

  const auto toric = named("toric", 2, 2);
  const DenseCode tc(toric);
  Rng rng(32);
  const Matrix g = ground_basis(toric, rng);
  Vector psi = g.col(0);
  CHECK(std::abs(energy(tc, psi)) < 1e-9);
  tc.apply_pauli(PauliOp::single(toric.num_qubits, 0, 'X'), psi);
  CHECK(std::abs(energy(tc, psi) - 2.0) < 1e-9);
  CHECK(violated_terms(tc, psi).size() == 2);
}

TEST_CASE("energy is invariant under logical operators") {
  const auto spec = named("surface", 3, 3);
  const DenseCode code(spec);
  const auto strip = strip_geometry(spec, 1);
  const auto z = strip_logical_search(spec, strip);
  REQUIRE(z.has_value());
  const auto x = conjugate_logical(spec, *z);
  REQUIRE(x.has_value());
  Rng rng(33);
  const Matrix g = ground_basis(spec, rng);
  Vector psi = g.col(0);
  code.apply_pauli(PauliOp::parse("Y4", 9), psi);
  code.apply_pauli(PauliOp::parse("X0", 9), psi);
  const double e0 = energy(code, psi);
  CHECK(e0 > 0.5);
  for (const auto& l : {*z, *x}) {
    Vector phi = psi;
    code.apply_pauli(l, phi);
    CHECK(std::abs(energy(code, phi) - e0) < 1e-10);
  }
}

TEST_CASE("code projector does not depend on term order") {
  auto spec = named("surface", 3, 3);
  const Matrix p0 = code_projector(spec).matrix();
  Rng rng(34);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(spec.terms.begin(), spec.terms.end(), rng);
    CHECK(max_abs(code_projector(spec).matrix() - p0) < 1e-10);
  }
}

TEST_CASE("stabilizer and dense degeneracies agree") {
  for (const auto& [name, w, h] : std::vector<std::tuple<std::string, int, int>>{
           {"ising1d", 6, 1}, {"ising2d", 3, 3}, {"surface", 3, 3}, {"toric", 2, 2}}) {
    const auto spec = named(name, w, h);
    const int s = symplectic_rank(spec.stabilizers());
    const int dense = dense_rank(code_projector(spec).matrix());
    CHECK_MESSAGE(dense == (1 << (static_cast<int>(spec.num_qubits) - s)), name);
  }
}

TEST_CASE("coarse graining examples") {
  const auto ising = named("ising1d", 6, 1);
  const auto same = coarse_grain(ising, 1);
  CHECK(same.lattice == ising.lattice);
  CHECK(same.terms.size() == ising.terms.size());
  CHECK(same.site_qubits == ising.site_qubits);

  const auto blocked = coarse_grain(ising, 2);
  CHECK(blocked.lattice.width == 3);
  CHECK(blocked.lattice.height == 1);
  CHECK(blocked.lattice.dims == std::vector<int>{4, 4, 4});
  CHECK(validate(blocked).ground_degeneracy == 2.0);
  CHECK(dense_rank(code_projector(blocked).matrix()) == 2);
  CHECK(max_abs(code_projector(blocked).matrix() - code_projector(ising).matrix()) < 1e-12);

  const auto toric = named("toric", 4, 4);
  CHECK(interaction_range(toric) > 1);
  const auto tb = coarse_grain(toric, 2);
  CHECK(interaction_range(tb) <= 1);
  CHECK(validate(tb).valid);

  CHECK_THROWS_AS(coarse_grain(named("ising1d", 5, 1), 2), std::invalid_argument);
}

TEST_CASE("coarse graining preserves the projector up to relabeling") {
  const auto spec = named("ising2d", 4, 2);
  const auto blocked = coarse_grain(spec, 2);
  const Matrix p = code_projector(spec).matrix();
  const Matrix pb = code_projector(blocked).matrix();
  // Blocked basis digits follow the concatenated site_qubits order.
  std::vector<int> order;
  for (const auto& qs : blocked.site_qubits) order.insert(order.end(), qs.begin(), qs.end());
  const int n = static_cast<int>(spec.num_qubits);
  auto to_original = [&](int idx) {
    int out = 0;
    for (int pos = 0; pos < n; ++pos) {
      const int bit = (idx >> (n - 1 - pos)) & 1;
      out |= bit << (n - 1 - order[pos]);
    }
    return out;
  };
  double worst = 0.0;
  for (int i = 0; i < (1 << n); ++i)
    for (int j = 0; j < (1 << n); ++j) worst = std::max(worst, std::abs(pb(i, j) - p(to_original(i), to_original(j))));
  CHECK(worst < 1e-12);
}

TEST_CASE("strip geometry on a chain") {
  const auto spec = named("ising1d", 5, 1);
  const auto g = strip_geometry(spec, 0);
  CHECK(g.length() == 5);
  CHECK(g.extended == g.strip);
  CHECK(g.constraint_terms[1].empty());
  for (int k = 2; k <= 5; ++k) {
    CHECK(g.constraint_support[k] == std::vector<int>{k - 2, k - 1});
  }
  CHECK(g.right_region[3] == std::vector<int>{2, 3, 4});
  CHECK(g.strip_terms.size() == 4);
}

TEST_CASE("strip geometry on the surface code middle row") {
  const auto spec = named("surface", 3, 3);
  const auto g = strip_geometry(spec, 1);
  CHECK(g.strip == std::vector<int>{3, 4, 5});
  std::vector<int> all(9);
  std::iota(all.begin(), all.end(), 0);
  CHECK(g.extended == all);
  for (int k = 2; k <= 3; ++k) {
    for (auto t : g.constraint_terms[k]) {
      for (int s : spec.terms[t].support) {
        const auto [x, y] = spec.lattice.coord(s);
        CHECK(std::abs(y - 1) <= 1);
        if (y == 1) CHECK((x == k - 2 || x == k - 1));
      }
    }
  }
  // Right edge: support stays inside the lattice.
  for (int s : g.constraint_support[3]) CHECK(spec.lattice.coord(s).first <= 2);
  CHECK(c_code(spec, g) >= 1);
}

TEST_CASE("strip geometry requires coarse-grained terms") {
  const auto toric = named("toric", 3, 3);
  CHECK_THROWS_AS(strip_geometry(toric, 1), std::invalid_argument);
  CHECK_NOTHROW(strip_geometry(coarse_grain(toric, 2), 1));
  CHECK_THROWS_AS(strip_geometry(named("ising1d", 3, 1), 1), std::invalid_argument);
}
