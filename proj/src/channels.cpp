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

#include "lcpc/channels.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lcpc {
namespace {

Matrix vec_to_op(const Vector& v, Eigen::Index n) {
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

Vector op_to_vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

/// A rho B, using the sparsity of rho when it has few nonzeros.
Matrix conjugate(const Matrix& a, const Matrix& rho, const Matrix& b) {
  const Eigen::Index d = rho.rows();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> nz;
  for (Eigen::Index j = 0; j < d && static_cast<Eigen::Index>(nz.size()) <= d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (rho(i, j) != Complex{}) nz.emplace_back(i, j);
    }
  }
  if (static_cast<Eigen::Index>(nz.size()) > d) return a * rho * b;
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (auto [i, j] : nz) out.noalias() += rho(i, j) * a.col(i) * b.row(j);
  return out;
}

/// sigma (on the layout minus `pos`) tensored with I/D at `pos`.
Matrix insert_identity(const Matrix& sigma, const TensorLayout& layout, int pos) {
  const std::vector<int> p{pos};
  SubsystemIndex idx(layout, p);
  const double inv = 1.0 / static_cast<double>(idx.offset.size());
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(layout.dim()), static_cast<Eigen::Index>(layout.dim()));
  const auto nb = static_cast<Eigen::Index>(idx.base.size());
  for (Eigen::Index c1 = 0; c1 < nb; ++c1) {
    for (Eigen::Index c2 = 0; c2 < nb; ++c2) {
      const Complex v = sigma(c1, c2);
      if (v == Complex{}) continue;
      for (std::size_t s : idx.offset) out(idx.base[c1] + s, idx.base[c2] + s) = v * inv;
    }
  }
  return out;
}

Matrix trace_out(const Matrix& rho, const TensorLayout& layout, int pos) {
  const std::vector<int> p{pos};
  const auto keep = layout.complement(p);
  return partial_trace(rho, layout, keep);
}

TensorLayout sub_layout(const CodeSpec& spec, const std::vector<int>& sites) {
  const auto all = spec.site_spaces();
  std::vector<SiteSpace> out;
  out.reserve(sites.size());
  for (int s : sites) out.push_back(all.at(s));
  return TensorLayout(std::move(out));
}

TensorLayout checked_window(const CodeSpec& spec, const std::vector<int>& sites) {
  TensorLayout layout = sub_layout(spec, sites);
  if (layout.dim() > kMaxWindowDim) throw CapExceeded("channel window dimension", layout.dim(), kMaxWindowDim);
  return layout;
}

/// Product of the constraint terms of iteration k on a layout containing them.
Matrix constraint_on(const CodeSpec& spec, const StripGeometry& strip, int k, const TensorLayout& layout) {
  const auto d = static_cast<Eigen::Index>(layout.dim());
  Matrix p = Matrix::Identity(d, d);
  for (auto t : strip.constraint_terms[k]) {
    const Term& term = spec.terms[t];
    const auto pos = layout.positions_of(term.support);
    p = embed(term_matrix(spec, term), layout, pos) * p;
  }
  return p;
}

std::vector<int> union_sites(std::initializer_list<const std::vector<int>*> parts) {
  std::set<int> s;
  for (const auto* p : parts) s.insert(p->begin(), p->end());
  return {s.begin(), s.end()};
}

void check_k(const StripGeometry& strip, int k) {
  if (k < 1 || k > strip.length()) throw std::invalid_argument("iteration index outside the strip");
}

BiasingMap make_biasing(const CodeSpec& spec, const StripGeometry& strip, int k) {
  check_k(strip, k);
  const int site = strip.strip[k - 1];
  const std::vector<int> site_only{site};
  const auto local_sites = union_sites({&strip.constraint_support[k], &site_only});
  BiasingMap bm;
  bm.k = k;
  for (int s : local_sites) {
    if (s != site) bm.sites.push_back(s);
  }
  bm.layout = sub_layout(spec, bm.sites);
  const TensorLayout full = sub_layout(spec, local_sites);
  const int pos = full.position_of(site);
  const auto n = static_cast<Eigen::Index>(bm.layout.dim());
  if (static_cast<std::size_t>(n * n) > kMaxWindowDim * kMaxWindowDim) {
    throw CapExceeded("biasing map side", static_cast<std::size_t>(n * n), kMaxWindowDim * kMaxWindowDim);
  }
  const Matrix p = constraint_on(spec, strip, k, full);
  const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;
  bm.matrix = Matrix::Zero(n * n, n * n);
  Matrix e = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      e(i, j) = 1.0;
      const Matrix out = trace_out(conjugate(q, insert_identity(e, full, pos), q), full, pos);
      bm.matrix.col(i + j * n) = op_to_vec(out);
      e(i, j) = 0.0;
    }
  }
  bm.lu.compute(Matrix::Identity(n * n, n * n) - bm.matrix);
  return bm;
}

}  // namespace

Matrix BiasingMap::apply(const Matrix& sigma, int power) const {
  if (sigma.isZero(0.0)) return sigma;
  Vector v = op_to_vec(sigma);
  if (power >= 0) {
    for (int i = 0; i < power; ++i) v = matrix * v;
  } else {
    for (int i = 0; i < -power; ++i) v = lu.solve(v);
  }
  return vec_to_op(v, sigma.rows());
}

SuperOp::SuperOp(TensorLayout window, Channel map, std::string name)
    : window_(std::move(window)), map_(std::move(map)), name_(std::move(name)) {}

Matrix SuperOp::operator()(const Matrix& rho) const {
  if (rho.rows() != static_cast<Eigen::Index>(dim()) || rho.cols() != rho.rows()) {
    throw std::invalid_argument("superoperator input does not match its window");
  }
  return map_(rho);
}

Matrix SuperOp::to_matrix() const {
  const auto n = static_cast<Eigen::Index>(dim());
  if (dim() > kMaxWindowDim / 2) throw CapExceeded("explicit superoperator window", dim(), kMaxWindowDim / 2);
  Matrix m(n * n, n * n);
  Matrix e = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      e(i, j) = 1.0;
      m.col(i + j * n) = op_to_vec(map_(e));
      e(i, j) = 0.0;
    }
  }
  return m;
}

double SuperOp::trace_defect() const {
  const auto n = static_cast<Eigen::Index>(dim());
  double worst = 0.0;
  Matrix e = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      e(i, j) = 1.0;
      const Complex want = i == j ? Complex{1.0} : Complex{};
      worst = std::max(worst, std::abs(map_(e).trace() - want));
      e(i, j) = 0.0;
    }
  }
  return worst;
}

double SuperOp::min_choi_eigenvalue() const {
  const auto n = static_cast<Eigen::Index>(dim());
  if (dim() > 16) throw CapExceeded("Choi matrix window", dim(), 16);
  Matrix choi(n * n, n * n);
  Matrix e = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      e(i, j) = 1.0;
      choi.block(i * n, j * n, n, n) = map_(e);
      e(i, j) = 0.0;
    }
  }
  const Matrix h = (choi + choi.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

SuperOp compose(const SuperOp& outer, const SuperOp& inner) {
  if (!(outer.window().sites() == inner.window().sites())) {
    throw std::invalid_argument("composed superoperators act on different windows");
  }
  Channel o = outer.map();
  Channel i = inner.map();
  return SuperOp(inner.window(), [o, i](const Matrix& rho) {
    Matrix mid = i(rho);
    if (mid.isZero(0.0)) return mid;
    return o(mid);
  }, outer.name() + "*" + inner.name());
}

SuperOp identity_map(const TensorLayout& window) {
  return SuperOp(window, [](const Matrix& rho) { return rho; }, "I");
}

StripChannels::StripChannels(const CodeSpec& spec, const StripGeometry& strip, std::vector<int> window)
    : spec_(&spec), strip_(&strip) {
  sites_ = window.empty() ? strip.extended : std::move(window);
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  window_ = checked_window(spec, sites_);
  const int ell = strip.length();
  strip_pos_.assign(ell + 1, -1);
  constraint_.assign(ell + 1, Matrix());
  biasing_.resize(ell + 1);
  for (int k = 1; k <= ell; ++k) {
    const int site = strip.strip[k - 1];
    if (!window_.contains(site)) continue;
    const bool inside = std::all_of(strip.constraint_support[k].begin(), strip.constraint_support[k].end(),
                                    [&](int s) { return window_.contains(s); });
    if (!inside) continue;
    strip_pos_[k] = window_.position_of(site);
    constraint_[k] = constraint_on(spec, strip, k, window_);
    biasing_[k] = make_biasing(spec, strip, k);
  }
}

bool StripChannels::has_constraint(int k) const {
  check_k(*strip_, k);
  return !strip_->constraint_terms[k].empty();
}

namespace {
int require(const std::vector<int>& pos, int k) {
  if (k < 1 || k >= static_cast<int>(pos.size()) || pos[k] < 0) {
    throw std::invalid_argument("iteration " + std::to_string(k) + " is not contained in the channel window");
  }
  return pos[k];
}
}  // namespace

SuperOp StripChannels::depolarize(int k) const {
  const int pos = require(strip_pos_, k);
  TensorLayout w = window_;
  return SuperOp(window_, [w, pos](const Matrix& rho) {
    return insert_identity(trace_out(rho, w, pos), w, pos);
  }, "D" + std::to_string(k));
}

SuperOp StripChannels::depolarize_strip() const {
  SuperOp out = identity_map(window_);
  for (int k = 1; k <= length(); ++k) {
    if (strip_pos_[k] >= 0) out = compose(depolarize(k), out);
  }
  return out;
}

SuperOp StripChannels::success(int k) const {
  require(strip_pos_, k);
  Matrix p = constraint_[k];
  return SuperOp(window_, [p](const Matrix& rho) { return conjugate(p, rho, p); }, "P" + std::to_string(k));
}

SuperOp StripChannels::failure(int k) const {
  require(strip_pos_, k);
  Matrix q = Matrix::Identity(constraint_[k].rows(), constraint_[k].cols()) - constraint_[k];
  return SuperOp(window_, [q](const Matrix& rho) { return conjugate(q, rho, q); }, "Q" + std::to_string(k));
}

SuperOp StripChannels::literal_success(int k) const {
  require(strip_pos_, k);
  Matrix left = constraint_[k];
  Matrix right = Matrix::Identity(left.rows(), left.cols());
  if (k < length()) right = constraint_.at(k + 1);
  if (right.size() == 0) throw std::invalid_argument("literal success map needs iteration k+1 in the window");
  return SuperOp(window_, [left, right](const Matrix& rho) { return conjugate(left, rho, right); },
                 "Plit" + std::to_string(k));
}

SuperOp StripChannels::biased(int k, int power) const {
  const int pos = require(strip_pos_, k);
  TensorLayout w = window_;
  std::vector<SiteSpace> rest;
  for (std::size_t i = 0; i < w.num_sites(); ++i) {
    if (static_cast<int>(i) != pos) rest.push_back(w.sites()[i]);
  }
  TensorLayout reduced(std::move(rest));
  const auto positions = reduced.positions_of(biasing_[k].sites);
  const BiasingMap* bm = &biasing_[k];
  return SuperOp(window_, [w, pos, reduced, positions, bm, power](const Matrix& rho) {
    Matrix sigma = trace_out(rho, w, pos);
    if (sigma.isZero(0.0)) return Matrix::Zero(rho.rows(), rho.cols()).eval();
    sigma = apply_on_subsystem(sigma, reduced, positions, [bm, power](const Matrix& m) { return bm->apply(m, power); });
    return insert_identity(sigma, w, pos);
  }, "E" + std::to_string(k) + "^" + std::to_string(power));
}

SuperOp StripChannels::iteration(int k) const {
  return compose(success(k), biased(k, -1));
}

SuperOp StripChannels::sequential() const {
  SuperOp out = identity_map(window_);
  for (int k = 1; k <= length(); ++k) out = compose(iteration(k), out);
  return out;
}

SuperOp StripChannels::reordered() const {
  SuperOp out = depolarize_strip();
  for (int k = 1; k <= length(); ++k) out = compose(biased(k, -1), out);
  for (int k = 1; k <= length(); ++k) out = compose(success(k), out);
  return out;
}

BasicMaps build_basic_maps(const CodeSpec& spec, const StripGeometry& strip, int k) {
  check_k(strip, k);
  const std::vector<int> site{strip.strip[k - 1]};
  StripChannels ch(spec, strip, union_sites({&strip.constraint_support[k], &site}));
  return {ch.depolarize(k), ch.success(k), ch.failure(k)};
}

BiasingReport biasing_map(const CodeSpec& spec, const StripGeometry& strip, int k) {
  check_k(strip, k);
  const std::vector<int> site{strip.strip[k - 1]};
  StripChannels ch(spec, strip, union_sites({&strip.constraint_support[k], &site}));
  BiasingReport rep{ch.biasing(k), 0.0, 0.0, std::nullopt};
  const SuperOp lhs = ch.biased(k, 1);
  const SuperOp rhs = compose(ch.depolarize(k), compose(ch.failure(k), ch.depolarize(k)));
  rep.identity_deviation = channel_equal(lhs.map(), rhs.map(), ch.window().dim()).max_deviation;
  if (rep.identity_deviation > tol::kChannel) {
    throw std::logic_error("biasing map does not satisfy its defining identity");
  }
  const auto n = static_cast<Eigen::Index>(rep.map.layout.dim());
  rep.trace_excess = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex tr = vec_to_op(rep.map.matrix.col(i + i * n), n).trace();
    rep.trace_excess = std::max(rep.trace_excess, tr.real() - 1.0);
  }
  if (rep.map.matrix.rows() <= 256) {
    Eigen::ComplexEigenSolver<Matrix> es(rep.map.matrix, false);
    rep.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return rep;
}

ExpectedTrials expected_trials(const CodeSpec& spec, const StripGeometry& strip, int k, const DenseState& rho) {
  const BiasingMap bm = make_biasing(spec, strip, k);
  const int site = strip.strip[k - 1];
  const std::vector<int> site_only{site};
  const auto local_sites = union_sites({&strip.constraint_support[k], &site_only});
  const TensorLayout local = sub_layout(spec, local_sites);
  const int pos = local.position_of(site);
  const Matrix p = constraint_on(spec, strip, k, local);
  const auto n = static_cast<Eigen::Index>(bm.layout.dim());
  const auto keep = rho.layout().positions_of(bm.sites);
  const Matrix sigma = partial_trace(rho.rho(), rho.layout(), keep);
  const Vector v0 = op_to_vec(sigma);

  auto success_of = [&](const Vector& v) {
    return (p * insert_identity(vec_to_op(v, n), local, pos)).trace().real();
  };

  ExpectedTrials out;
  Vector v = v0;
  for (int m = 0; m <= 3; ++m) {
    out.success_after.push_back(success_of(v));
    v = bm.matrix * v;
  }

  // Arnoldi basis of the orbit of sigma under the biasing map.
  const Eigen::Index side = n * n;
  const double norm0 = v0.norm();
  if (norm0 == 0.0) throw std::invalid_argument("reduced input state vanishes");
  std::vector<Vector> basis{v0 / norm0};
  while (static_cast<Eigen::Index>(basis.size()) < side) {
    Vector w = bm.matrix * basis.back();
    const double scale = std::max(1.0, w.norm());
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) w -= b.dot(w) * b;
    }
    if (w.norm() < 1e-12 * scale) break;
    basis.push_back(w / w.norm());
  }
  const auto r = static_cast<Eigen::Index>(basis.size());
  Matrix qm(side, r);
  for (Eigen::Index j = 0; j < r; ++j) qm.col(j) = basis[j];
  const Matrix h = qm.adjoint() * bm.matrix * qm;
  Eigen::ComplexEigenSolver<Matrix> es(h, false);
  out.krylov_dim = static_cast<int>(r);
  out.krylov_spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  if (out.krylov_spectral_radius >= 1.0 - 1e-9) {
    throw NonConvergent("biasing map has spectral radius " + std::to_string(out.krylov_spectral_radius) +
                            " on the input orbit",
                        out.krylov_spectral_radius);
  }
  const Matrix ih = Matrix::Identity(r, r) - h;
  Eigen::PartialPivLU<Matrix> lu(ih);
  const Vector c0 = qm.adjoint() * v0;
  const Vector x1 = qm * lu.solve(c0);
  const Vector x2 = qm * lu.solve(qm.adjoint() * x1);
  const double resid = ((x1 - bm.matrix * x1) - v0).norm();
  if (resid > 1e-10 * std::max(1.0, norm0)) {
    throw std::logic_error("linear solve residual " + std::to_string(resid) + " exceeds 1e-10");
  }
  out.success_probability = success_of(x1);
  out.value = success_of(x2);

  if (side <= 256) {
    Eigen::ComplexEigenSolver<Matrix> full(bm.matrix, false);
    out.spectral_radius = full.eigenvalues().cwiseAbs().maxCoeff();
    if (*out.spectral_radius < 1.0 - 1e-9) {
      // Adjoint of (I - E)^(-2) applied to Tr_k[P] / D gives the functional's operator.
      const std::vector<int> pk{pos};
      const auto rest = local.complement(pk);
      const Matrix b = partial_trace(p, local, rest) / static_cast<double>(local.dim_at(pos));
      const Matrix adj = (Matrix::Identity(side, side) - bm.matrix).adjoint();
      Eigen::PartialPivLU<Matrix> alu(adj);
      const Vector z = alu.solve(alu.solve(op_to_vec(b)));
      Eigen::JacobiSVD<Matrix> svd(vec_to_op(z, n));
      out.induced_trace_norm = svd.singularValues()(0);
    }
  }
  return out;
}

double verify_commutation(const CodeSpec& spec, const StripGeometry& strip, int k) {
  check_k(strip, k);
  if (k + 1 > strip.length()) throw std::invalid_argument("commutation needs iteration k+1 on the strip");
  const std::vector<int> a{strip.strip[k - 1]};
  const std::vector<int> b{strip.strip[k]};
  StripChannels ch(spec, strip, union_sites({&strip.constraint_support[k], &a, &strip.constraint_support[k + 1], &b}));
  const SuperOp e = ch.biased(k + 1, 1);
  const SuperOp p = ch.success(k);
  return channel_equal(compose(e, p).map(), compose(p, e).map(), ch.window().dim()).max_deviation;
}

EquivalenceReport verify_equivalence(const CodeSpec& spec, const StripGeometry& strip, const EquivalenceOptions& opts) {
  EquivalenceReport rep;
  const int ell = strip.length();
  auto add = [&](std::string name, int k, int m, double dev, double tolerance, bool fatal = true) {
    IdentityRecord r{std::move(name), k, m, dev, tolerance, dev < tolerance, fatal};
    if (fatal && !r.pass) rep.pass = false;
    rep.records.push_back(std::move(r));
  };
  checked_window(spec, strip.extended);

  for (int k = 1; k <= ell; ++k) {
    const std::vector<int> site{strip.strip[k - 1]};
    StripChannels ch(spec, strip, union_sites({&strip.constraint_support[k], &site}));
    const auto d = ch.window().dim();
    const Matrix& p = ch.constraint(k);
    const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;
    // Tr[A E_ij B] = (B A)_ji, so the trace balance over the basis is one matrix.
    const Matrix balance = p * p + q * q - Matrix::Identity(p.rows(), p.cols());
    add("measurement_completeness", k, -1, max_abs(balance), 1e-12);
    const SuperOp dk = ch.depolarize(k);
    add("depolarizer_idempotent", k, -1, channel_equal(compose(dk, dk).map(), dk.map(), d).max_deviation, 1e-12);
    const SuperOp dqd = compose(dk, compose(ch.failure(k), dk));
    add("biasing_identity", k, -1, channel_equal(ch.biased(k, 1).map(), dqd.map(), d).max_deviation, 1e-10);
    SuperOp chain = dk;
    for (int m = 0; m <= opts.max_failures; ++m) {
      const SuperOp lhs = compose(ch.success(k), chain);
      const SuperOp rhs = compose(ch.success(k), ch.biased(k, m));
      add("failure_sequence", k, m, channel_equal(lhs.map(), rhs.map(), d).max_deviation, tol::kChannel);
      chain = compose(dqd, chain);
    }
  }
  for (int k = 1; k < ell; ++k) {
    add("commutation", k, -1, verify_commutation(spec, strip, k), 1e-10);
    if (opts.literal_eq9) {
      const std::vector<int> a{strip.strip[k - 1]};
      const std::vector<int> b{strip.strip[k]};
      StripChannels ch(spec, strip, union_sites({&strip.constraint_support[k], &a, &strip.constraint_support[k + 1], &b}));
      const double dev = channel_equal(ch.literal_success(k).map(), ch.success(k).map(), ch.window().dim()).max_deviation;
      add("literal_success_deviation", k, -1, dev, tol::kChannel, false);
    }
  }
  StripChannels ch(spec, strip);
  rep.window_dim = ch.window().dim();
  add("sequential_vs_reordered", -1, -1,
      channel_equal(ch.sequential().map(), ch.reordered().map(), rep.window_dim).max_deviation, tol::kChannel);
  return rep;
}

Matrix apply_window(const SuperOp& map, const Matrix& rho, const TensorLayout& full, const std::vector<int>& window_sites) {
  const auto pos = full.positions_of(window_sites);
  return apply_on_subsystem(rho, full, pos, map.map());
}

}  // namespace lcpc
