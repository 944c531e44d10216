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

#include "lcpc/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lcpc {

namespace {

using Word = std::uint64_t;

std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

// Number of +i minus number of -i factors in the qubit-wise product.
int product_phase(const PauliOp& a, const PauliOp& b) {
  int g = 0;
  for (std::size_t w = 0; w < a.num_words(); ++w) {
    const Word x1 = a.x_words()[w], z1 = a.z_words()[w];
    const Word x2 = b.x_words()[w], z2 = b.z_words()[w];
    const Word X1 = x1 & ~z1, Y1 = x1 & z1, Z1 = ~x1 & z1;
    const Word X2 = x2 & ~z2, Y2 = x2 & z2, Z2 = ~x2 & z2;
    const Word plus = (X1 & Y2) | (Y1 & Z2) | (Z1 & X2);
    const Word minus = (X1 & Z2) | (Y1 & X2) | (Z1 & Y2);
    g += std::popcount(plus) - std::popcount(minus);
  }
  return g;
}

struct BitVec {
  std::vector<Word> w;
  explicit BitVec(std::size_t bits = 0) : w(words_for(bits), 0) {}
  bool get(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v) {
    if (v) {
      w[i >> 6] |= Word{1} << (i & 63);
    } else {
      w[i >> 6] &= ~(Word{1} << (i & 63));
    }
  }
  void flip(std::size_t i) { w[i >> 6] ^= Word{1} << (i & 63); }
  void operator^=(const BitVec& o) {
    for (std::size_t k = 0; k < w.size(); ++k) w[k] ^= o.w[k];
  }
  bool any() const {
    return std::any_of(w.begin(), w.end(), [](Word v) { return v != 0; });
  }
};

int gf2_rank(std::vector<BitVec> rows, std::size_t ncols) {
  int rank = 0;
  for (std::size_t c = 0; c < ncols && static_cast<std::size_t>(rank) < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && !rows[piv].get(c)) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[rank], rows[piv]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != static_cast<std::size_t>(rank) && rows[r].get(c)) rows[r] ^= rows[rank];
    }
    ++rank;
  }
  return rank;
}

// Basis of {v : row . v = 0 for all rows}.
std::vector<BitVec> gf2_kernel(std::vector<BitVec> rows, std::size_t ncols) {
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < ncols && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && !rows[piv].get(c)) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[rank], rows[piv]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != rank && rows[r].get(c)) rows[r] ^= rows[rank];
    }
    pivots.push_back(c);
    ++rank;
  }
  std::vector<bool> is_pivot(ncols, false);
  for (auto c : pivots) is_pivot[c] = true;
  std::vector<BitVec> basis;
  for (std::size_t f = 0; f < ncols; ++f) {
    if (is_pivot[f]) continue;
    BitVec v(ncols);
    v.set(f, true);
    for (std::size_t r = 0; r < rank; ++r) {
      if (rows[r].get(f)) v.set(pivots[r], true);
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

BitVec symplectic_row(const PauliOp& p) {
  const std::size_t n = p.num_qubits();
  BitVec row(2 * n);
  for (std::size_t q = 0; q < n; ++q) {
    if (p.x(q)) row.set(q, true);
    if (p.z(q)) row.set(n + q, true);
  }
  return row;
}

void check_same_size(std::span<const PauliOp> ops, std::size_t n) {
  for (const auto& op : ops) {
    if (op.num_qubits() != n) throw std::invalid_argument("Pauli operators on different qubit counts");
  }
}

}  // namespace

PauliOp::PauliOp(std::size_t num_qubits)
    : n_(num_qubits), xs_(words_for(num_qubits), 0), zs_(words_for(num_qubits), 0) {}

PauliOp PauliOp::single(std::size_t num_qubits, std::size_t qubit, char pauli) {
  PauliOp p(num_qubits);
  p.set(qubit, pauli);
  return p;
}

PauliOp PauliOp::parse(std::string_view text, std::size_t num_qubits) {
  PauliOp p(num_qubits);
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',')) ++i;
  };
  skip();
  int phase = 0;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    if (text[i] == '-') phase = 2;
    ++i;
  }
  if (i < text.size() && text[i] == 'i') {
    phase += 1;
    ++i;
  }
  skip();
  while (i < text.size()) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
    if (c != 'X' && c != 'Y' && c != 'Z' && c != 'I') {
      throw std::invalid_argument("bad Pauli string '" + std::string(text) + "'");
    }
    ++i;
    std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) {
      if (c == 'I') {
        skip();
        continue;
      }
      throw std::invalid_argument("missing qubit index in '" + std::string(text) + "'");
    }
    const std::size_t q = std::stoul(std::string(text.substr(start, i - start)));
    if (q >= num_qubits) {
      throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range");
    }
    if (p.at(q) != 'I') {
      throw std::invalid_argument("qubit " + std::to_string(q) + " repeated in Pauli string");
    }
    p.set(q, c);
    skip();
  }
  p.set_phase(phase);
  return p;
}

char PauliOp::at(std::size_t q) const {
  const bool xb = x(q), zb = z(q);
  if (xb && zb) return 'Y';
  if (xb) return 'X';
  if (zb) return 'Z';
  return 'I';
}

void PauliOp::set_x(std::size_t q, bool v) {
  if (q >= n_) throw std::out_of_range("qubit index out of range");
  if (v) {
    xs_[q >> 6] |= Word{1} << (q & 63);
  } else {
    xs_[q >> 6] &= ~(Word{1} << (q & 63));
  }
}

void PauliOp::set_z(std::size_t q, bool v) {
  if (q >= n_) throw std::out_of_range("qubit index out of range");
  if (v) {
    zs_[q >> 6] |= Word{1} << (q & 63);
  } else {
    zs_[q >> 6] &= ~(Word{1} << (q & 63));
  }
}

void PauliOp::set(std::size_t q, char pauli) {
  switch (pauli) {
    case 'I': set_x(q, false); set_z(q, false); break;
    case 'X': set_x(q, true); set_z(q, false); break;
    case 'Y': set_x(q, true); set_z(q, true); break;
    case 'Z': set_x(q, false); set_z(q, true); break;
    default: throw std::invalid_argument(std::string("unknown Pauli letter ") + pauli);
  }
}

int PauliOp::sign() const {
  if (!is_hermitian()) throw std::logic_error("sign() of a non-Hermitian Pauli");
  return phase_ == 0 ? 1 : -1;
}

bool PauliOp::commutes(const PauliOp& other) const {
  if (other.n_ != n_) throw std::invalid_argument("Pauli operators on different qubit counts");
  int parity = 0;
  for (std::size_t w = 0; w < xs_.size(); ++w) {
    parity ^= std::popcount((xs_[w] & other.zs_[w]) ^ (zs_[w] & other.xs_[w])) & 1;
  }
  return parity == 0;
}

PauliOp PauliOp::operator*(const PauliOp& other) const {
  PauliOp out = *this;
  out *= other;
  return out;
}

PauliOp& PauliOp::operator*=(const PauliOp& other) {
  if (other.n_ != n_) throw std::invalid_argument("Pauli operators on different qubit counts");
  const int g = product_phase(*this, other);
  for (std::size_t w = 0; w < xs_.size(); ++w) {
    xs_[w] ^= other.xs_[w];
    zs_[w] ^= other.zs_[w];
  }
  set_phase(phase_ + other.phase_ + g);
  return *this;
}

std::size_t PauliOp::weight() const {
  std::size_t c = 0;
  for (std::size_t w = 0; w < xs_.size(); ++w) c += std::popcount(xs_[w] | zs_[w]);
  return c;
}

std::vector<int> PauliOp::support() const {
  std::vector<int> out;
  for (std::size_t q = 0; q < n_; ++q) {
    if (x(q) || z(q)) out.push_back(static_cast<int>(q));
  }
  return out;
}

bool PauliOp::is_identity() const { return weight() == 0; }

bool PauliOp::same_string(const PauliOp& other) const {
  return n_ == other.n_ && xs_ == other.xs_ && zs_ == other.zs_;
}

std::string PauliOp::str() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t q = 0; q < n_; ++q) {
    const char c = at(q);
    if (c == 'I') continue;
    if (!first) os << ' ';
    os << c << q;
    first = false;
  }
  return first ? "I" : os.str();
}

Matrix PauliOp::to_matrix(std::span<const int> qubits) const {
  const std::size_t m = qubits.size();
  if (m > 20) throw CapExceeded("Pauli matrix", std::size_t{1} << std::min<std::size_t>(m, 63), kMaxStateDim);
  std::vector<bool> covered(n_, false);
  std::size_t xmask = 0, zmask = 0;
  int ys = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const int q = qubits[t];
    if (q < 0 || static_cast<std::size_t>(q) >= n_) throw std::invalid_argument("qubit out of range");
    covered[q] = true;
    const std::size_t bit = std::size_t{1} << (m - 1 - t);
    if (x(q)) xmask |= bit;
    if (z(q)) zmask |= bit;
    if (x(q) && z(q)) ++ys;
  }
  for (int q : support()) {
    if (!covered[q]) throw std::invalid_argument("Pauli support not contained in the given qubits");
  }
  static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Complex base = ipow[(phase_ + ys) % 4];
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << m);
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    const double s = (std::popcount(ub & zmask) & 1) ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(ub ^ xmask), b) = base * s;
  }
  return out;
}

int symplectic_rank(std::span<const PauliOp> ops) {
  if (ops.empty()) return 0;
  const std::size_t n = ops.front().num_qubits();
  check_same_size(ops, n);
  std::vector<BitVec> rows;
  rows.reserve(ops.size());
  for (const auto& p : ops) rows.push_back(symplectic_row(p));
  return gf2_rank(std::move(rows), 2 * n);
}

bool in_span(std::span<const PauliOp> group, const PauliOp& op) {
  std::vector<PauliOp> all(group.begin(), group.end());
  const int r = symplectic_rank(all);
  all.push_back(op);
  return symplectic_rank(all) == r;
}

std::vector<PauliOp> centralizer(std::span<const PauliOp> gens, std::span<const int> allowed_qubits) {
  if (gens.empty()) throw std::invalid_argument("centralizer needs at least one generator for its size");
  const std::size_t n = gens.front().num_qubits();
  check_same_size(gens, n);
  const std::size_t a = allowed_qubits.size();
  // Unknowns: x bits then z bits of the allowed qubits.
  std::vector<BitVec> rows;
  for (const auto& g : gens) {
    BitVec row(2 * a);
    for (std::size_t t = 0; t < a; ++t) {
      const int q = allowed_qubits[t];
      if (g.z(q)) row.set(t, true);
      if (g.x(q)) row.set(a + t, true);
    }
    if (row.any()) rows.push_back(std::move(row));
  }
  std::vector<PauliOp> out;
  for (const auto& v : gf2_kernel(std::move(rows), 2 * a)) {
    PauliOp p(n);
    for (std::size_t t = 0; t < a; ++t) {
      p.set_x(allowed_qubits[t], v.get(t));
      p.set_z(allowed_qubits[t], v.get(a + t));
    }
    out.push_back(std::move(p));
  }
  return out;
}

StabilizerFrame::StabilizerFrame(std::size_t num_qubits) : n_(num_qubits) {
  stab_.reserve(n_);
  destab_.reserve(n_);
  for (std::size_t q = 0; q < n_; ++q) {
    stab_.push_back(PauliOp::single(n_, q, 'Z'));
    destab_.push_back(PauliOp::single(n_, q, 'X'));
  }
}

void StabilizerFrame::rowmul(PauliOp& target, const PauliOp& source) const { target *= source; }

int StabilizerFrame::expectation(const PauliOp& op) const {
  if (op.num_qubits() != n_) throw std::invalid_argument("Pauli size differs from frame");
  if (!op.is_hermitian()) throw std::invalid_argument("expectation of a non-Hermitian Pauli");
  for (const auto& s : stab_) {
    if (!s.commutes(op)) return 0;
  }
  PauliOp acc(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (!destab_[i].commutes(op)) acc *= stab_[i];
  }
  // op = lambda * acc with lambda = i^(phase(op) - phase(acc)).
  const int diff = ((op.phase() - acc.phase()) % 4 + 4) % 4;
  if (!acc.same_string(op) || diff % 2 != 0) {
    throw std::logic_error("stabilizer tableau is inconsistent");
  }
  return diff == 0 ? 1 : -1;
}

double StabilizerFrame::force(const PauliOp& op, int outcome) {
  if (outcome != 1 && outcome != -1) throw std::invalid_argument("outcome must be +1 or -1");
  if (op.num_qubits() != n_) throw std::invalid_argument("Pauli size differs from frame");
  if (!op.is_hermitian()) throw std::invalid_argument("measurement of a non-Hermitian Pauli");
  std::size_t p = n_;
  for (std::size_t i = 0; i < n_; ++i) {
    if (!stab_[i].commutes(op)) {
      p = i;
      break;
    }
  }
  if (p == n_) return expectation(op) == outcome ? 1.0 : 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    if (i != p && !stab_[i].commutes(op)) rowmul(stab_[i], stab_[p]);
    if (i != p && !destab_[i].commutes(op)) {
      rowmul(destab_[i], stab_[p]);
      destab_[i].set_phase(0);
    }
  }
  destab_[p] = stab_[p];
  destab_[p].set_phase(0);
  stab_[p] = op;
  if (outcome == -1) stab_[p].set_phase(op.phase() + 2);
  return 0.5;
}

int StabilizerFrame::measure(const PauliOp& op, Rng& rng) {
  const int e = expectation(op);
  if (e != 0) return e;
  const int outcome = (rng() & 1u) ? -1 : 1;
  force(op, outcome);
  return outcome;
}

void StabilizerFrame::apply(const PauliOp& op) {
  if (op.num_qubits() != n_) throw std::invalid_argument("Pauli size differs from frame");
  for (auto& s : stab_) {
    if (!s.commutes(op)) s.set_phase(s.phase() + 2);
  }
}

double StabilizerFrame::depolarized_success_probability(std::span<const PauliOp> measured,
                                                        std::span<const int> depolarized_qubits) const {
  const std::size_t r = measured.size();
  if (r == 0) return 1.0;
  check_same_size(measured, n_);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      if (!measured[i].commutes(measured[j])) {
        throw std::invalid_argument("measured Paulis must commute pairwise");
      }
    }
  }
  // Expanding prod (I+S_i)/2, a subset product contributes iff it is trivial on the
  // depolarized qubits and lies in +-stab(state). Those subsets form a subspace K and
  // the sign is a character on it: the sum is |K| or 0.
  const std::size_t q = depolarized_qubits.size();
  const std::size_t m = 2 * q + n_;
  std::vector<BitVec> cols(m, BitVec(r));
  for (std::size_t i = 0; i < r; ++i) {
    const auto& s = measured[i];
    for (std::size_t t = 0; t < q; ++t) {
      cols[2 * t].set(i, s.x(depolarized_qubits[t]));
      cols[2 * t + 1].set(i, s.z(depolarized_qubits[t]));
    }
    for (std::size_t g = 0; g < n_; ++g) cols[2 * q + g].set(i, !s.commutes(stab_[g]));
  }
  const auto basis = gf2_kernel(std::move(cols), r);
  for (const auto& b : basis) {
    PauliOp prod(n_);
    for (std::size_t i = 0; i < r; ++i) {
      if (b.get(i)) prod *= measured[i];
    }
    if (expectation(prod) != 1) return 0.0;
  }
  return std::ldexp(1.0, static_cast<int>(basis.size()) - static_cast<int>(r));
}

double StabilizerFrame::overlap(const StabilizerFrame& a, const StabilizerFrame& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("frames on different qubit counts");
  StabilizerFrame work = a;
  double prob = 1.0;
  for (const auto& s : b.stab_) {
    prob *= work.force(s, 1);
    if (prob == 0.0) return 0.0;
  }
  return prob;
}

}  // namespace lcpc
