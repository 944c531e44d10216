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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "lcpc/channels.hpp"
#include "lcpc/noise.hpp"

using namespace lcpc;

namespace {

CodeSpec named(const std::string& name, int w, int h, int block = 1) {
  FamilyParams p;
  p.width = w;
  p.height = h;
  return coarse_grain(build_named_code(name, p), block);
}

DenseState ground_state(const CodeSpec& spec, const InitialState& init = {}) {
  const DenseCode code(spec);
  return DenseState::from_pure(spec.site_spaces(), prepare_dense(code, init));
}

CodeSpec qubit_chain(int n, std::vector<std::pair<std::string, std::vector<int>>> terms) {
  CodeSpec spec;
  spec.lattice = make_lattice(n, 1, Boundary::open, 2);
  spec.num_qubits = n;
  for (int q = 0; q < n; ++q) spec.site_qubits.push_back({q});
  for (auto& [text, support] : terms) spec.terms.push_back({text, support, Matrix(), PauliOp::parse(text, n)});
  return spec;
}

bool maps_equal(const SuperOp& a, const SuperOp& b, double tol = 1e-12) {
  return channel_equal(a.map(), b.map(), a.dim(), tol).equal;
}

}  // namespace

TEST_CASE("basic maps of an ising bond") {
  const auto spec = named("ising1d", 4, 1);
  const auto strip = strip_geometry(spec, 0);
  const auto maps = build_basic_maps(spec, strip, 2);
  CHECK(maps.depolarize.dim() == 4);
  CHECK(maps_equal(compose(maps.depolarize, maps.depolarize), maps.depolarize));
  CHECK(maps_equal(compose(maps.success, maps.success), maps.success));
  CHECK(maps_equal(compose(maps.success, maps.failure), SuperOp(maps.success.window(), [](const Matrix& m) {
                     return Matrix::Zero(m.rows(), m.cols()).eval();
                   })));
  const SuperOp total(maps.success.window(),
                      [&](const Matrix& m) { return (maps.success(m) + maps.failure(m)).eval(); });
  CHECK(total.trace_defect() < 1e-12);
  CHECK(maps.depolarize.trace_defect() < 1e-12);
  CHECK(maps.success.trace_defect() > 0.1);
  CHECK(maps.depolarize.min_choi_eigenvalue() > -1e-12);
  CHECK(maps.success.min_choi_eigenvalue() > -1e-12);
}

TEST_CASE("identity superoperator has the identity matrix") {
  const TensorLayout w({{0, 2}, {1, 2}});
  const auto id = identity_map(w);
  const Matrix m = id.to_matrix();
  CHECK(max_abs(m - Matrix::Identity(16, 16)) == 0.0);
  CHECK(id.trace_defect() == 0.0);
}

TEST_CASE("depolarizer equals the Haar average on a qubit") {
  const auto spec = named("ising1d", 3, 1);
  const auto strip = strip_geometry(spec, 0);
  const auto maps = build_basic_maps(spec, strip, 2);
  Rng rng(8);
  const TensorLayout& w = maps.depolarize.window();
  const int pos = w.position_of(strip.strip[1]);
  const int p[1] = {pos};
  const int samples = 20000;
  Matrix rho = Matrix::Zero(4, 4);
  rho(1, 1) = 1.0;
  Matrix acc = Matrix::Zero(4, 4);
  for (int s = 0; s < samples; ++s) {
    const Matrix u = embed(haar_unitary(2, rng), w, p);
    acc += u * rho * u.adjoint();
  }
  acc /= samples;
  CHECK(max_abs(acc - maps.depolarize(rho)) < 0.02);
}

TEST_CASE("ising biasing map halves the trace") {
  const auto spec = named("ising1d", 4, 1);
  const auto strip = strip_geometry(spec, 0);
  const auto rep = biasing_map(spec, strip, 2);
  CHECK(rep.identity_deviation < 1e-10);
  CHECK(rep.trace_excess <= 1e-12);
  const Matrix half = Matrix::Identity(2, 2) / 2.0;
  CHECK(rep.map.apply(half, 1).trace().real() == doctest::Approx(0.5));
  REQUIRE(rep.spectral_radius.has_value());
  CHECK(*rep.spectral_radius < 1.0);
}

TEST_CASE("surface biasing maps contract") {
  const auto spec = named("surface", 3, 3);
  const auto strip = strip_geometry(spec, 0);
  for (int k = 2; k <= strip.length(); ++k) {
    const auto rep = biasing_map(spec, strip, k);
    CHECK(rep.identity_deviation < 1e-10);
    REQUIRE(rep.spectral_radius.has_value());
    CHECK(*rep.spectral_radius < 1.0);
  }
}

TEST_CASE("expected trials on the ising chain is two") {
  const auto spec = named("ising1d", 4, 1);
  const auto strip = strip_geometry(spec, 0);
  const auto rho = ground_state(spec);
  for (int k = 2; k <= 4; ++k) {
    const auto a = expected_trials(spec, strip, k, rho);
    CHECK(a.value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(a.success_probability == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.success_after[0] == doctest::Approx(0.5));
    CHECK(a.success_after[1] == doctest::Approx(0.25));
  }
}

TEST_CASE("expected trials on the surface code row 0") {
  const auto spec = named("surface", 3, 3);
  const auto strip = strip_geometry(spec, 0);
  const auto rho = ground_state(spec);
  const auto a2 = expected_trials(spec, strip, 2, rho);
  CHECK(a2.value == doctest::Approx(4.0).epsilon(1e-9));
  for (int m = 0; m <= 3; ++m) CHECK(a2.success_after[m] == doctest::Approx(0.25 * std::pow(0.75, m)));
  double partial = 0.0;
  double last = 0.0;
  for (double p : a2.success_after) {
    partial += p;
    CHECK(partial >= last);
    last = partial;
  }
  CHECK(partial < 1.0);
  CHECK(a2.success_probability == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(a2.krylov_spectral_radius < 1.0);
  REQUIRE(a2.induced_trace_norm.has_value());
  CHECK(*a2.induced_trace_norm >= a2.value - 1e-9);
}

TEST_CASE("expected trials agrees with the sampled trial count") {
  const auto spec = named("surface", 3, 3);
  const auto strip = strip_geometry(spec, 0);
  const auto rho = ground_state(spec);
  NoiseConfig cfg;
  cfg.seed = 31;
  cfg.record_energy = false;
  const auto e = run_ensemble(spec, strip, cfg, 4000);
  const auto a2 = expected_trials(spec, strip, 2, rho);
  CHECK(std::abs(e.summary.mean_trials[1] - a2.value) < 5.0 * e.summary.stderr_trials[1]);
}

TEST_CASE("unreachable constraint does not converge") {
  CodeSpec spec;
  spec.lattice = make_lattice(2, 1, Boundary::open, 2);
  Matrix p = Matrix::Zero(4, 4);
  p(2, 2) = 1.0;
  p(3, 3) = 1.0;  // |1><1| on site 0, identity on site 1
  spec.terms.push_back({"one", {0, 1}, p, std::nullopt});
  const auto strip = strip_geometry(spec, 0);
  Vector psi = Vector::Zero(4);
  psi(0) = 1.0;
  const auto rho = DenseState::from_pure(spec.site_spaces(), psi);
  CHECK_THROWS_AS(expected_trials(spec, strip, 2, rho), NonConvergent);
  try {
    expected_trials(spec, strip, 2, rho);
  } catch (const NonConvergent& e) {
    CHECK(e.spectral_radius() >= 1.0 - 1e-9);
  }
}

TEST_CASE("biasing map commutes with the previous success projector") {
  for (const auto& spec : {named("surface", 3, 3), named("ising1d", 5, 1)}) {
    const auto strip = strip_geometry(spec, 0);
    for (int k = 1; k < strip.length(); ++k) CHECK(verify_commutation(spec, strip, k) < 1e-10);
  }
}

TEST_CASE("overlapping anticommuting constraints break the commutation") {
  const auto spec = qubit_chain(3, {{"Z0 Z1", {0, 1}}, {"X1 X2", {1, 2}}});
  const auto strip = strip_geometry(spec, 0);
  CHECK(verify_commutation(spec, strip, 2) > 1e-3);
}

TEST_CASE("channel identities hold on the ising chain") {
  const auto spec = named("ising1d", 3, 1);
  const auto strip = strip_geometry(spec, 0);
  EquivalenceOptions opts;
  opts.literal_eq9 = true;
  const auto rep = verify_equivalence(spec, strip, opts);
  CHECK(rep.pass);
  bool saw_sequential = false;
  for (const auto& r : rep.records) {
    if (r.fatal) CHECK_MESSAGE(r.pass, r.name << " k=" << r.k << " m=" << r.m << " dev=" << r.deviation);
    if (r.name == "sequential_vs_reordered") saw_sequential = true;
  }
  CHECK(saw_sequential);
}

TEST_CASE("channel identities hold on surface code row 0") {
  const auto spec = named("surface", 3, 3);
  const auto strip = strip_geometry(spec, 0);
  const auto rep = verify_equivalence(spec, strip);
  CHECK(rep.pass);
  CHECK(rep.window_dim == 64);
  for (const auto& r : rep.records) CHECK(r.deviation <= r.tolerance);
}

TEST_CASE("reordered channel restores the code space") {
  const auto spec = named("ising1d", 3, 1);
  const auto strip = strip_geometry(spec, 0);
  const StripChannels ch(spec, strip);
  const auto rho = ground_state(spec);
  const Matrix out = apply_window(ch.reordered(), rho.rho(), rho.layout(), ch.window_sites());
  CHECK(out.trace().real() == doctest::Approx(1.0).epsilon(1e-10));
  const Matrix p = code_projector(spec).matrix();
  CHECK((p * out).trace().real() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("oversized windows are refused") {
  const auto spec = named("surface", 5, 5);
  const auto strip = strip_geometry(spec, 0);
  CHECK_THROWS_AS(StripChannels(spec, strip), CapExceeded);
}
