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

#include "lcpc/code_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace lcpc {

std::string to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

int Lattice::site_at(int i, int j) const {
  if (boundary == Boundary::periodic) {
    i = ((i % width) + width) % width;
    j = ((j % height) + height) % height;
  } else if (i < 0 || j < 0 || i >= width || j >= height) {
    return -1;
  }
  return j * width + i;
}

Lattice make_lattice(int width, int height, Boundary boundary, int dim) {
  if (width < 1 || height < 1) throw std::invalid_argument("lattice sides must be >= 1");
  Lattice lat;
  lat.width = width;
  lat.height = height;
  lat.boundary = boundary;
  lat.dims.assign(static_cast<std::size_t>(width) * height, dim);
  return lat;
}

bool CodeSpec::is_stabilizer() const {
  if (!is_qubit_code() || terms.empty()) return false;
  return std::all_of(terms.begin(), terms.end(), [](const Term& t) { return t.pauli.has_value(); });
}

std::vector<SiteSpace> CodeSpec::site_spaces() const {
  std::vector<SiteSpace> out;
  out.reserve(lattice.dims.size());
  for (std::size_t s = 0; s < lattice.dims.size(); ++s) {
    out.push_back({static_cast<int>(s), lattice.dims[s]});
  }
  return out;
}

std::size_t CodeSpec::dim() const {
  std::size_t d = 1;
  for (int v : lattice.dims) {
    if (d > (std::size_t{1} << 40)) return d;  // saturate; callers only compare against caps
    d *= static_cast<std::size_t>(v);
  }
  return d;
}

std::vector<std::size_t> CodeSpec::terms_touching(const std::vector<int>& sites) const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& sup = terms[t].support;
    const bool hit = std::any_of(sup.begin(), sup.end(), [&](int s) {
      return std::find(sites.begin(), sites.end(), s) != sites.end();
    });
    if (hit) out.push_back(t);
  }
  return out;
}

std::vector<PauliOp> CodeSpec::stabilizers() const {
  if (!is_stabilizer()) throw std::invalid_argument("code is not a stabilizer code");
  std::vector<PauliOp> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(*t.pauli);
  return out;
}

std::vector<int> qubits_of(const CodeSpec& spec, const std::vector<int>& sites) {
  if (!spec.is_qubit_code()) throw std::invalid_argument("code has no qubit structure");
  std::vector<int> out;
  for (int s : sites) {
    const auto& q = spec.site_qubits.at(static_cast<std::size_t>(s));
    out.insert(out.end(), q.begin(), q.end());
  }
  return out;
}

Matrix term_matrix(const CodeSpec& spec, const Term& term) {
  if (term.op.size() > 0) return term.op;
  if (!term.pauli) throw std::invalid_argument("term '" + term.name + "' has no operator");
  const auto qubits = qubits_of(spec, term.support);
  const std::size_t d = std::size_t{1} << qubits.size();
  if (d > kMaxDensityDim) throw CapExceeded("term matrix for " + term.name, d, kMaxDensityDim);
  const Matrix s = term.pauli->to_matrix(qubits);
  const auto n = static_cast<Eigen::Index>(d);
  return 0.5 * (Matrix::Identity(n, n) + s);
}

namespace {

// Smallest cyclic (or linear) interval length covering the values.
int spread(std::vector<int> values, int period, bool periodic) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() <= 1) return 0;
  if (!periodic) return values.back() - values.front();
  int max_gap = period - values.back() + values.front();
  for (std::size_t a = 1; a < values.size(); ++a) max_gap = std::max(max_gap, values[a] - values[a - 1]);
  return period - max_gap;
}

int term_extent(const Lattice& lat, const Term& t) {
  std::vector<int> is, js;
  for (int s : t.support) {
    const auto [i, j] = lat.coord(s);
    is.push_back(i);
    js.push_back(j);
  }
  const bool per = lat.boundary == Boundary::periodic;
  return std::max(spread(is, lat.width, per), spread(js, lat.height, per));
}

// Row-reduced generating set with exact phases; rows are kept reduced on each
// other's pivots so a single pass reduces any operator.
class SymplecticBasis {
 public:
  explicit SymplecticBasis(std::size_t n) : n_(n) {}

  // Returns op times the rows needed to clear every pivot.
  PauliOp reduce(PauliOp op) const {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (has_bit(op, pivots_[r])) op *= rows_[r];
    }
    return op;
  }

  // Adds op; returns false if it was already in the span.
  bool add(const PauliOp& op) {
    PauliOp red = reduce(op);
    if (red.is_identity()) return false;
    const std::size_t piv = first_bit(red);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (has_bit(rows_[r], piv)) rows_[r] *= red;
    }
    rows_.push_back(std::move(red));
    pivots_.push_back(piv);
    return true;
  }

  bool contains(const PauliOp& op) const { return reduce(op).is_identity(); }
  std::size_t rank() const { return rows_.size(); }

 private:
  bool has_bit(const PauliOp& p, std::size_t b) const { return b < n_ ? p.x(b) : p.z(b - n_); }
  std::size_t first_bit(const PauliOp& p) const {
    for (std::size_t b = 0; b < 2 * n_; ++b) {
      if (has_bit(p, b)) return b;
    }
    return 2 * n_;
  }

  std::size_t n_;
  std::vector<PauliOp> rows_;
  std::vector<std::size_t> pivots_;
};

PauliOp pauli_on(std::size_t n, const std::vector<int>& qubits, char letter) {
  PauliOp p(n);
  for (int q : qubits) p.set(static_cast<std::size_t>(q), letter);
  return p;
}

void add_pauli_term(CodeSpec& spec, const std::vector<int>& qubit_site, std::string name, PauliOp p) {
  Term t;
  t.name = std::move(name);
  std::set<int> sup;
  for (int q : p.support()) sup.insert(qubit_site[q]);
  t.support.assign(sup.begin(), sup.end());
  t.pauli = std::move(p);
  spec.terms.push_back(std::move(t));
}

std::vector<int> identity_qubit_sites(CodeSpec& spec) {
  const int n = spec.lattice.num_sites();
  spec.site_qubits.resize(n);
  std::vector<int> qs(n);
  for (int s = 0; s < n; ++s) {
    spec.site_qubits[s] = {s};
    qs[s] = s;
  }
  spec.num_qubits = static_cast<std::size_t>(n);
  return qs;
}

std::string cell(int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

CodeSpec build_ising(const FamilyParams& p, bool two_d) {
  const int w = p.width;
  const int h = two_d ? p.height : 1;
  if (w < 2 || (two_d && h < 2)) throw std::invalid_argument("ising codes need at least 2 sites per side");
  CodeSpec spec;
  spec.family = two_d ? "ising2d" : "ising1d";
  spec.lattice = make_lattice(w, h, p.boundary.value_or(Boundary::open), 2);
  const auto qs = identity_qubit_sites(spec);
  const auto& lat = spec.lattice;
  std::set<std::pair<int, int>> seen;
  auto bond = [&](int a, int b) {
    if (b < 0 || a == b) return;
    const auto key = std::minmax(a, b);
    if (!seen.insert(key).second) return;
    PauliOp z(spec.num_qubits);
    z.set(a, 'Z');
    z.set(b, 'Z');
    add_pauli_term(spec, qs, "ZZ" + cell(key.first, key.second), std::move(z));
  };
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const int s = lat.site_at(i, j);
      bond(s, lat.site_at(i + 1, j));
      if (two_d) bond(s, lat.site_at(i, j + 1));
    }
  }
  return spec;
}

CodeSpec build_surface(const FamilyParams& p) {
  const int L = p.width;
  if (L < 2) throw std::invalid_argument("surface code needs side >= 2");
  CodeSpec spec;
  spec.family = "surface";
  spec.lattice = make_lattice(L, L, Boundary::open, 2);
  const auto qs = identity_qubit_sites(spec);
  for (int j = -1; j < L; ++j) {
    for (int i = -1; i < L; ++i) {
      const bool z_type = (((i + j) % 2) + 2) % 2 == 0;
      const bool bulk = i >= 0 && j >= 0 && i < L - 1 && j < L - 1;
      const bool top_bottom = (j == -1 || j == L - 1) && i >= 0 && i < L - 1;
      const bool left_right = (i == -1 || i == L - 1) && j >= 0 && j < L - 1;
      if (!(bulk || (top_bottom && !z_type) || (left_right && z_type))) continue;
      std::vector<int> qubits;
      for (int dj = 0; dj < 2; ++dj) {
        for (int di = 0; di < 2; ++di) {
          const int s = spec.lattice.site_at(i + di, j + dj);
          if (s >= 0) qubits.push_back(s);
        }
      }
      add_pauli_term(spec, qs, std::string(z_type ? "Zface" : "Xface") + cell(i, j),
                     pauli_on(spec.num_qubits, qubits, z_type ? 'Z' : 'X'));
    }
  }
  return spec;
}

struct ToricGrid {
  int L, M;
  int h(int i, int j) const { return 2 * (wrap(j, M) * L + wrap(i, L)); }
  int v(int i, int j) const { return h(i, j) + 1; }
  static int wrap(int a, int n) { return ((a % n) + n) % n; }
  std::vector<int> vertex(int i, int j) const { return {h(i, j), h(i - 1, j), v(i, j), v(i, j - 1)}; }
  std::vector<int> plaquette(int i, int j) const { return {h(i, j), h(i, j + 1), v(i, j), v(i + 1, j)}; }
};

// Edge-midpoint grid with empty vertex and face sites.
std::vector<int> toric_skeleton(CodeSpec& spec, int L, int M) {
  spec.lattice = make_lattice(2 * L, 2 * M, Boundary::periodic, 1);
  spec.site_qubits.assign(spec.lattice.num_sites(), {});
  spec.num_qubits = static_cast<std::size_t>(2 * L * M);
  std::vector<int> qubit_site(spec.num_qubits);
  const ToricGrid g{L, M};
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < L; ++i) {
      const int hs = spec.lattice.site_at(2 * i + 1, 2 * j);
      const int vs = spec.lattice.site_at(2 * i, 2 * j + 1);
      spec.lattice.dims[hs] = 2;
      spec.lattice.dims[vs] = 2;
      spec.site_qubits[hs] = {g.h(i, j)};
      spec.site_qubits[vs] = {g.v(i, j)};
      qubit_site[g.h(i, j)] = hs;
      qubit_site[g.v(i, j)] = vs;
    }
  }
  return qubit_site;
}

CodeSpec build_toric(const FamilyParams& p, bool defect) {
  const int L = p.width, M = p.height;
  if (L < 2 || M < 2) throw std::invalid_argument("toric codes need a torus of at least 2x2");
  if (p.boundary && *p.boundary != Boundary::periodic) {
    throw std::invalid_argument("toric codes are defined on periodic lattices only");
  }
  CodeSpec spec;
  spec.family = defect ? "defect_toric_bhm10" : "toric";
  const auto qs = toric_skeleton(spec, L, M);
  const ToricGrid g{L, M};
  const std::size_t n = spec.num_qubits;
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < L; ++i) {
      add_pauli_term(spec, qs, "A" + cell(i, j), pauli_on(n, g.vertex(i, j), 'X'));
    }
  }
  if (!defect) {
    spec.translation_symmetric = true;
    for (int j = 0; j < M; ++j) {
      for (int i = 0; i < L; ++i) {
        add_pauli_term(spec, qs, "B" + cell(i, j), pauli_on(n, g.plaquette(i, j), 'Z'));
      }
    }
    return spec;
  }
  if (p.defect_x < 0 || p.defect_x >= L || p.defect_y < 0 || p.defect_y >= M) {
    throw std::invalid_argument("defect plaquette outside the torus");
  }
  std::set<std::pair<int, int>> seen;
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < L; ++i) {
      const int a = j * L + i;
      const std::pair<int, int> nbrs[2] = {{ToricGrid::wrap(i + 1, L), j}, {i, ToricGrid::wrap(j + 1, M)}};
      for (const auto& [ni, nj] : nbrs) {
        const int b = nj * L + ni;
        if (a == b || !seen.insert(std::minmax(a, b)).second) continue;
        PauliOp pp = pauli_on(n, g.plaquette(i, j), 'Z') * pauli_on(n, g.plaquette(ni, nj), 'Z');
        add_pauli_term(spec, qs, "BB" + cell(i, j) + cell(ni, nj), std::move(pp));
      }
    }
  }
  add_pauli_term(spec, qs, "Bdefect" + cell(p.defect_x, p.defect_y),
                 pauli_on(n, g.plaquette(p.defect_x, p.defect_y), 'Z'));
  return spec;
}

double commutator_norm(const CodeSpec& spec, const Term& a, const Term& b) {
  if (a.pauli && b.pauli) return a.pauli->commutes(*b.pauli) ? 0.0 : 0.5;
  std::vector<int> uni;
  std::set_union(a.support.begin(), a.support.end(), b.support.begin(), b.support.end(),
                 std::back_inserter(uni));
  std::vector<SiteSpace> sites;
  for (int s : uni) sites.push_back({s, spec.lattice.dims[s]});
  TensorLayout layout(sites);
  if (layout.dim() > kMaxDensityDim) {
    throw CapExceeded("commutator of " + a.name + " and " + b.name, layout.dim(), kMaxDensityDim);
  }
  const Matrix ea = embed(term_matrix(spec, a), layout, layout.positions_of(a.support));
  const Matrix eb = embed(term_matrix(spec, b), layout, layout.positions_of(b.support));
  return max_abs(ea * eb - eb * ea);
}

}  // namespace

int interaction_range(const CodeSpec& spec) {
  int r = 0;
  for (const auto& t : spec.terms) r = std::max(r, term_extent(spec.lattice, t));
  return r;
}

CodeSpec build_named_code(const std::string& name, const FamilyParams& params) {
  if (name == "ising1d") return build_ising(params, false);
  if (name == "ising2d") return build_ising(params, true);
  if (name == "surface") return build_surface(params);
  if (name == "toric") return build_toric(params, false);
  if (name == "defect_toric_bhm10") return build_toric(params, true);
  throw std::invalid_argument("unknown code family '" + name + "'");
}

const std::vector<std::string>& named_families() {
  static const std::vector<std::string> names = {"ising1d", "ising2d", "toric", "surface",
                                                 "defect_toric_bhm10"};
  return names;
}

int default_block(const std::string& family) {
  return (family == "toric" || family == "defect_toric_bhm10") ? 2 : 1;
}

ValidationReport validate(const CodeSpec& spec) {
  ValidationReport rep;
  const auto nsites = static_cast<int>(spec.lattice.dims.size());
  if (nsites != spec.lattice.width * spec.lattice.height) {
    throw std::invalid_argument("lattice dims do not match width*height");
  }
  for (std::size_t t = 0; t < spec.terms.size(); ++t) {
    const auto& term = spec.terms[t];
    for (int s : term.support) {
      if (s < 0 || s >= nsites) throw std::invalid_argument("term " + term.name + " has an unknown site");
    }
    double residual = 0.0;
    if (term.pauli) {
      residual = term.pauli->is_hermitian() ? 0.0 : 1.0;
    } else {
      const Matrix m = term_matrix(spec, term);
      residual = std::max(max_abs(m - m.adjoint()), max_abs(m * m - m));
    }
    rep.max_projector_residual = std::max(rep.max_projector_residual, residual);
    if (residual > tol::kConstruction && !rep.failing_term) {
      rep.failing_term = t;
      rep.messages.push_back("term " + term.name + " is not a projector");
    }
  }
  for (std::size_t a = 0; a < spec.terms.size(); ++a) {
    for (std::size_t b = a + 1; b < spec.terms.size(); ++b) {
      const auto& ta = spec.terms[a];
      const auto& tb = spec.terms[b];
      std::vector<int> common;
      std::set_intersection(ta.support.begin(), ta.support.end(), tb.support.begin(), tb.support.end(),
                            std::back_inserter(common));
      if (common.empty()) continue;
      const double c = commutator_norm(spec, ta, tb);
      if (c > rep.max_commutator) rep.max_commutator = c;
      if (c > tol::kChannel && !rep.failing_pair) {
        rep.failing_pair = PairResidual{a, b, c};
        rep.messages.push_back("terms " + ta.name + " and " + tb.name + " do not commute");
      }
    }
  }
  if (rep.failing_term || rep.failing_pair) return rep;

  if (spec.is_stabilizer()) {
    rep.method = "stabilizer";
    SymplecticBasis basis(spec.num_qubits);
    bool consistent = true;
    for (const auto& t : spec.terms) {
      const PauliOp red = basis.reduce(*t.pauli);
      if (red.is_identity()) {
        if (red.phase() != 0) consistent = false;
        continue;
      }
      basis.add(*t.pauli);
    }
    rep.frustration_free = consistent;
    const double other = static_cast<double>(spec.dim()) / std::ldexp(1.0, static_cast<int>(spec.num_qubits));
    rep.ground_degeneracy =
        consistent ? std::ldexp(1.0, static_cast<int>(spec.num_qubits - basis.rank())) * other : 0.0;
  } else {
    rep.method = "dense";
    Rng rng(0x5eed);
    const Matrix g = ground_basis(spec, rng);
    rep.ground_degeneracy = static_cast<double>(g.cols());
    rep.frustration_free = g.cols() > 0;
  }
  if (!rep.frustration_free) rep.messages.push_back("ground space is empty (frustrated)");
  rep.valid = rep.frustration_free;
  return rep;
}

DenseCode::DenseCode(const CodeSpec& spec) : spec_(&spec), layout_(spec.site_spaces()) {
  if (spec.dim() > kMaxStateDim) throw CapExceeded("dense state of the code", spec.dim(), kMaxStateDim);
  bool bit_addressable = spec.is_qubit_code();
  if (bit_addressable) {
    qubit_bit_.assign(spec.num_qubits, -1);
    for (std::size_t s = 0; s < spec.site_qubits.size(); ++s) {
      const auto& qs = spec.site_qubits[s];
      if ((std::size_t{1} << qs.size()) != static_cast<std::size_t>(spec.lattice.dims[s])) {
        bit_addressable = false;
        qubit_bit_.clear();
        break;
      }
      const int low = std::countr_zero(layout_.stride(s));
      for (std::size_t t = 0; t < qs.size(); ++t) {
        qubit_bit_[qs[t]] = low + static_cast<int>(qs.size() - 1 - t);
      }
    }
  }
  positions_.reserve(spec.terms.size());
  masks_.resize(spec.terms.size());
  local_.resize(spec.terms.size());
  for (std::size_t t = 0; t < spec.terms.size(); ++t) {
    const auto& term = spec.terms[t];
    positions_.push_back(layout_.positions_of(term.support));
    if (term.pauli && bit_addressable) {
      masks_[t] = masks_for(*term.pauli);
    } else {
      local_[t] = term_matrix(spec, term);
    }
  }
}

DenseCode::PauliMasks DenseCode::masks_for(const PauliOp& pauli) const {
  static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  if (qubit_bit_.empty() || pauli.num_qubits() != qubit_bit_.size()) {
    throw std::invalid_argument("code is not addressable qubit by qubit");
  }
  PauliMasks m;
  int ys = 0;
  for (int q : pauli.support()) {
    if (qubit_bit_[q] < 0) throw std::invalid_argument("Pauli acts on a qubit outside the code's sites");
    const std::size_t bit = std::size_t{1} << qubit_bit_[q];
    if (pauli.x(q)) m.x |= bit;
    if (pauli.z(q)) m.z |= bit;
    if (pauli.x(q) && pauli.z(q)) ++ys;
  }
  m.coeff = ipow[(pauli.phase() + ys) % 4];
  return m;
}

void DenseCode::apply_pauli(const PauliOp& pauli, Vector& psi) const {
  if (static_cast<std::size_t>(psi.size()) != dim()) throw std::invalid_argument("state dimension mismatch");
  const PauliMasks m = masks_for(pauli);
  Vector out(psi.size());
  const auto d = static_cast<std::size_t>(psi.size());
  for (std::size_t b = 0; b < d; ++b) {
    const double s = (std::popcount(b & m.z) & 1) ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(b ^ m.x)) = m.coeff * s * psi(static_cast<Eigen::Index>(b));
  }
  psi = std::move(out);
}

void DenseCode::project(std::size_t term, Vector& psi) const {
  if (static_cast<std::size_t>(psi.size()) != dim()) throw std::invalid_argument("state dimension mismatch");
  if (const auto& m = masks_[term]) {
    Vector out = psi;
    const auto d = static_cast<std::size_t>(psi.size());
    for (std::size_t b = 0; b < d; ++b) {
      const double s = (std::popcount(b & m->z) & 1) ? -1.0 : 1.0;
      out(static_cast<Eigen::Index>(b ^ m->x)) += m->coeff * s * psi(static_cast<Eigen::Index>(b));
    }
    psi = 0.5 * out;
    return;
  }
  apply_local(psi, layout_, positions_[term], local_[term]);
}

void DenseCode::project_columns(std::size_t term, Matrix& m) const {
  if (masks_[term]) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      Vector v = m.col(c);
      project(term, v);
      m.col(c) = v;
    }
    return;
  }
  apply_local_columns(m, layout_, positions_[term], local_[term]);
}

double DenseCode::expectation(std::size_t term, const Vector& psi) const {
  Vector v = psi;
  project(term, v);
  return v.squaredNorm();
}

Matrix DenseCode::embedded(std::size_t term) const {
  if (dim() > kMaxDensityDim) throw CapExceeded("embedded term", dim(), kMaxDensityDim);
  if (masks_[term]) {
    const auto d = static_cast<Eigen::Index>(dim());
    Matrix m = Matrix::Identity(d, d);
    project_columns(term, m);
    return m;
  }
  return embed(local_[term], layout_, positions_[term]);
}

DenseOperator code_projector(const CodeSpec& spec) {
  if (spec.dim() > kMaxDensityDim) {
    throw CapExceeded("code projector (use the stabilizer backend)", spec.dim(), kMaxDensityDim);
  }
  DenseCode code(spec);
  const auto d = static_cast<Eigen::Index>(code.dim());
  Matrix p = Matrix::Identity(d, d);
  for (std::size_t t = 0; t < code.num_terms(); ++t) code.project_columns(t, p);
  return DenseOperator(spec.site_spaces(), std::move(p));
}

Matrix ground_basis(const CodeSpec& spec, Rng& rng) {
  DenseCode code(spec);
  const auto d = static_cast<Eigen::Index>(code.dim());
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index batch = 4;
  while (true) {
    batch = std::min<Eigen::Index>(batch, d);
    std::vector<Vector> kept;
    for (Eigen::Index c = 0; c < batch; ++c) {
      Vector v(d);
      for (Eigen::Index r = 0; r < d; ++r) v(r) = Complex(normal(rng), normal(rng));
      const double scale = v.norm();
      for (std::size_t t = 0; t < code.num_terms(); ++t) code.project(t, v);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& k : kept) v -= k * k.dot(v);
      }
      const double nv = v.norm();
      if (nv > 1e-7 * scale) kept.push_back(v / nv);
    }
    const auto rank = static_cast<Eigen::Index>(kept.size());
    if (rank < batch || batch == d) {
      Matrix out(d, rank);
      for (Eigen::Index c = 0; c < rank; ++c) out.col(c) = kept[c];
      return out;
    }
    batch *= 2;
  }
}

double energy(const CodeSpec& spec, const DenseState& state) {
  if (state.dim() != spec.dim()) throw std::invalid_argument("state dimension does not match the code");
  const TensorLayout& layout = state.layout();
  double e = 0.0;
  for (const auto& term : spec.terms) {
    const auto pos = layout.positions_of(term.support);
    const Matrix red = partial_trace(state.rho(), layout, pos);
    e += 1.0 - (term_matrix(spec, term) * red).trace().real();
  }
  return e;
}

double energy(const DenseCode& code, const Vector& psi) {
  double e = 0.0;
  for (std::size_t t = 0; t < code.num_terms(); ++t) e += 1.0 - code.expectation(t, psi);
  return e;
}

std::vector<std::size_t> violated_terms(const DenseCode& code, const Vector& psi, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < code.num_terms(); ++t) {
    if (code.expectation(t, psi) < 1.0 - tol) out.push_back(t);
  }
  return out;
}

CodeSpec coarse_grain(const CodeSpec& spec, int block) {
  if (block < 1) throw std::invalid_argument("block size must be >= 1");
  if (block == 1) return spec;
  const auto& lat = spec.lattice;
  // Axes of extent 1 (chains) are not blocked.
  const int bx = lat.width > 1 ? block : 1;
  const int by = lat.height > 1 ? block : 1;
  if (lat.width % bx != 0 || lat.height % by != 0) {
    throw std::invalid_argument("lattice " + std::to_string(lat.width) + "x" + std::to_string(lat.height) +
                                " is not divisible by block " + std::to_string(block));
  }
  CodeSpec out;
  out.family = spec.family;
  out.translation_symmetric = spec.translation_symmetric;
  out.num_qubits = spec.num_qubits;
  out.lattice = make_lattice(lat.width / bx, lat.height / by, lat.boundary, 1);
  const int n_super = out.lattice.num_sites();
  std::vector<std::vector<int>> members(n_super);
  std::vector<int> super_of(lat.num_sites());
  for (int J = 0; J < out.lattice.height; ++J) {
    for (int I = 0; I < out.lattice.width; ++I) {
      const int S = out.lattice.site_at(I, J);
      int d = 1;
      for (int dj = 0; dj < by; ++dj) {
        for (int di = 0; di < bx; ++di) {
          const int s = lat.site_at(I * bx + di, J * by + dj);
          members[S].push_back(s);
          super_of[s] = S;
          d *= lat.dims[s];
        }
      }
      out.lattice.dims[S] = d;
    }
  }
  if (spec.is_qubit_code()) {
    out.site_qubits.resize(n_super);
    for (int S = 0; S < n_super; ++S) {
      for (int s : members[S]) {
        const auto& q = spec.site_qubits[s];
        out.site_qubits[S].insert(out.site_qubits[S].end(), q.begin(), q.end());
      }
    }
  }
  for (const auto& t : spec.terms) {
    Term nt;
    nt.name = t.name;
    nt.pauli = t.pauli;
    std::set<int> sup;
    for (int s : t.support) sup.insert(super_of[s]);
    nt.support.assign(sup.begin(), sup.end());
    if (!t.pauli) {
      std::vector<SiteSpace> fine;
      for (int S : nt.support) {
        for (int s : members[S]) fine.push_back({s, lat.dims[s]});
      }
      TensorLayout layout(fine);
      if (layout.dim() > kMaxDensityDim) {
        throw CapExceeded("coarse-grained term " + t.name, layout.dim(), kMaxDensityDim);
      }
      nt.op = embed(t.op, layout, layout.positions_of(t.support));
    }
    out.terms.push_back(std::move(nt));
  }
  return out;
}

int default_row(const CodeSpec& spec) { return spec.lattice.height / 2; }

StripGeometry strip_geometry(const CodeSpec& spec, int row) {
  const auto& lat = spec.lattice;
  if (row < 0 || row >= lat.height) throw std::invalid_argument("strip row outside the lattice");
  for (const auto& t : spec.terms) {
    if (term_extent(lat, t) > 1) {
      throw std::invalid_argument("term " + t.name + " is wider than a 2x2 cell; coarse_grain first");
    }
  }
  StripGeometry g;
  g.row = row;
  for (int i = 0; i < lat.width; ++i) g.strip.push_back(lat.site_at(i, row));
  std::set<int> ext;
  for (int dj = -1; dj <= 1; ++dj) {
    for (int i = 0; i < lat.width; ++i) {
      const int s = lat.site_at(i, row + dj);
      if (s >= 0) ext.insert(s);
    }
  }
  g.extended.assign(ext.begin(), ext.end());
  const int ell = g.length();
  std::vector<int> k_of(lat.num_sites(), 0);
  for (int k = 1; k <= ell; ++k) k_of[g.strip[k - 1]] = k;

  g.constraint_terms.assign(ell + 1, {});
  g.constraint_support.assign(ell + 1, {});
  g.right_region.assign(ell + 1, {});
  for (std::size_t t = 0; t < spec.terms.size(); ++t) {
    std::vector<int> foot;
    for (int s : spec.terms[t].support) {
      if (k_of[s] > 0) foot.push_back(k_of[s]);
    }
    if (foot.empty()) continue;
    g.strip_terms.push_back(t);
    std::sort(foot.begin(), foot.end());
    if (foot.size() == 1 && foot[0] == 1) g.constraint_terms[1].push_back(t);
    for (int k = 2; k <= ell; ++k) {
      const bool inside = std::all_of(foot.begin(), foot.end(), [&](int f) { return f == k - 1 || f == k; });
      if (inside) g.constraint_terms[k].push_back(t);
    }
  }
  for (int k = 1; k <= ell; ++k) {
    std::set<int> sup;
    for (auto t : g.constraint_terms[k]) sup.insert(spec.terms[t].support.begin(), spec.terms[t].support.end());
    g.constraint_support[k].assign(sup.begin(), sup.end());
    for (int s : g.extended) {
      if (lat.coord(s).first >= k - 1) g.right_region[k].push_back(s);
    }
  }
  return g;
}

int c_code(const CodeSpec& spec, const StripGeometry& strip) {
  int best = 0;
  const int ell = strip.length();
  for (int k = 1; k <= ell; ++k) {
    std::vector<int> sites;
    for (int kk = k - 1; kk <= k + 1; ++kk) {
      if (kk >= 1 && kk <= ell) sites.push_back(strip.strip[kk - 1]);
    }
    best = std::max(best, static_cast<int>(spec.terms_touching(sites).size()));
  }
  return best;
}

std::optional<PauliOp> strip_logical_search(const CodeSpec& spec, const StripGeometry& strip) {
  if (!spec.is_stabilizer()) {
    throw std::invalid_argument("strip logical search is only supported for stabilizer codes");
  }
  const auto gens = spec.stabilizers();
  SymplecticBasis group(spec.num_qubits);
  for (const auto& g : gens) group.add(g);
  for (const auto* region : {&strip.strip, &strip.extended}) {
    const auto qubits = qubits_of(spec, *region);
    const auto basis = centralizer(gens, qubits);
    std::optional<PauliOp> best;
    auto consider = [&](const PauliOp& p) {
      if (p.is_identity() || group.contains(p)) return;
      if (!best || p.weight() < best->weight()) best = p;
    };
    if (basis.size() <= 16) {
      PauliOp cur(spec.num_qubits);
      const std::size_t total = std::size_t{1} << basis.size();
      for (std::size_t gray = 1; gray < total; ++gray) {
        const int flip = std::countr_zero(gray);
        cur *= basis[flip];
        consider(cur);
      }
    } else {
      for (const auto& p : basis) consider(p);
    }
    if (best) {
      best->set_phase(0);
      return best;
    }
  }
  return std::nullopt;
}

std::optional<PauliOp> conjugate_logical(const CodeSpec& spec, const PauliOp& logical) {
  const auto gens = spec.stabilizers();
  std::vector<int> all(spec.num_qubits);
  for (std::size_t q = 0; q < spec.num_qubits; ++q) all[q] = static_cast<int>(q);
  for (auto p : centralizer(gens, all)) {
    if (!p.commutes(logical)) {
      p.set_phase(0);
      return p;
    }
  }
  return std::nullopt;
}

}  // namespace lcpc
