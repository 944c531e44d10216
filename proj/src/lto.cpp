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

#include "lcpc/lto.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <limits>
#include <thread>

namespace lcpc {

std::vector<int> rect_sites(const Lattice& lat, const Rect& r) {
  if (r.empty()) return {};
  if (r.width < 0 || r.height < 0) throw std::invalid_argument("negative rectangle side");
  const bool per = lat.boundary == Boundary::periodic;
  auto side_ok = [&](int start, int len, int extent) {
    if (per) return len < extent || (len == extent && extent == 1);
    return start >= 0 && start + len <= extent;
  };
  if (!side_ok(r.x0, r.width, lat.width) || !side_ok(r.y0, r.height, lat.height)) {
    throw std::invalid_argument("rectangle does not fit the lattice as a simply connected region");
  }
  std::vector<int> out;
  for (int dj = 0; dj < r.height; ++dj) {
    for (int di = 0; di < r.width; ++di) out.push_back(lat.site_at(r.x0 + di, r.y0 + dj));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Rect> as_rectangle(const Lattice& lat, const std::vector<int>& sites) {
  std::vector<int> want = sites;
  std::sort(want.begin(), want.end());
  want.erase(std::unique(want.begin(), want.end()), want.end());
  if (want.empty()) return Rect{};
  const int n = static_cast<int>(want.size());
  for (int w = 1; w <= std::min(n, lat.width); ++w) {
    if (n % w != 0) continue;
    const int h = n / w;
    if (h > lat.height) continue;
    for (int y = 0; y < lat.height; ++y) {
      for (int x = 0; x < lat.width; ++x) {
        const Rect r{x, y, w, h};
        try {
          if (rect_sites(lat, r) == want) return r;
        } catch (const std::invalid_argument&) {
        }
      }
    }
  }
  return std::nullopt;
}

int site_distance(const Lattice& lat, const std::vector<int>& a, const std::vector<int>& b) {
  const bool per = lat.boundary == Boundary::periodic;
  auto axis = [&](int u, int v, int extent) {
    int d = std::abs(u - v);
    return per ? std::min(d, extent - d) : d;
  };
  int best = std::numeric_limits<int>::max();
  for (int s : a) {
    const auto [x1, y1] = lat.coord(s);
    for (int t : b) {
      const auto [x2, y2] = lat.coord(t);
      best = std::min(best, std::max(axis(x1, x2, lat.width), axis(y1, y2, lat.height)));
    }
  }
  return best;
}

namespace {

PauliOp restrict_to(const PauliOp& p, const std::vector<bool>& keep) {
  PauliOp out(p.num_qubits());
  for (int q : p.support()) {
    if (keep[q]) {
      out.set_x(q, p.x(q));
      out.set_z(q, p.z(q));
    }
  }
  return out;
}

// Rank of the subgroup of <gens> supported inside the kept qubits' complement-free part.
int inside_rank(const std::vector<PauliOp>& gens, const std::vector<bool>& inside) {
  std::vector<bool> outside(inside.size());
  for (std::size_t q = 0; q < inside.size(); ++q) outside[q] = !inside[q];
  std::vector<PauliOp> restricted;
  restricted.reserve(gens.size());
  for (const auto& g : gens) restricted.push_back(restrict_to(g, outside));
  return symplectic_rank(gens) - symplectic_rank(restricted);
}

LtoReport stabilizer_check(const CodeSpec& spec, const std::vector<int>& sites) {
  LtoReport rep;
  rep.method = "stabilizer";
  const auto gens = spec.stabilizers();
  std::vector<PauliOp> local;
  for (auto t : spec.terms_touching(sites)) local.push_back(*spec.terms[t].pauli);
  const auto qa = qubits_of(spec, sites);
  std::vector<bool> inside(spec.num_qubits, false);
  for (int q : qa) inside[q] = true;
  const int s_a = inside_rank(gens, inside);
  const int t_a = local.empty() ? 0 : inside_rank(local, inside);
  const int na = static_cast<int>(qa.size());
  if (na > 62) throw CapExceeded("region qubit count", static_cast<std::size_t>(na), 62);
  rep.rank_rho = 1LL << (na - s_a);
  rep.rank_rho_loc = 1LL << (na - t_a);
  if (t_a > s_a) throw std::logic_error("local stabilizer group larger than the global one");
  rep.kernels_equal = s_a == t_a;
  rep.rho_proportional_projector = true;
  rep.spread = 0.0;
  return rep;
}

// Restriction of the code to the sites touched by terms meeting A (other sites get dim 1).
CodeSpec local_code(const CodeSpec& spec, const std::vector<int>& sites) {
  CodeSpec sub;
  sub.family = spec.family;
  sub.lattice = spec.lattice;
  sub.num_qubits = spec.num_qubits;
  const auto touching = spec.terms_touching(sites);
  std::set<int> u(sites.begin(), sites.end());
  for (auto t : touching) u.insert(spec.terms[t].support.begin(), spec.terms[t].support.end());
  if (spec.is_qubit_code()) sub.site_qubits = spec.site_qubits;
  for (int s = 0; s < spec.lattice.num_sites(); ++s) {
    if (u.count(s)) continue;
    sub.lattice.dims[s] = 1;
    if (spec.is_qubit_code()) sub.site_qubits[s].clear();
  }
  for (auto t : touching) sub.terms.push_back(spec.terms[t]);
  return sub;
}

Matrix cross_reduced(const Vector& a, const Vector& b, const SubsystemIndex& idx) {
  const auto dk = static_cast<Eigen::Index>(idx.offset.size());
  const auto dt = static_cast<Eigen::Index>(idx.base.size());
  Matrix ma(dk, dt), mb(dk, dt);
  for (Eigen::Index s = 0; s < dk; ++s) {
    for (Eigen::Index t = 0; t < dt; ++t) {
      ma(s, t) = a(idx.offset[s] + idx.base[t]);
      mb(s, t) = b(idx.offset[s] + idx.base[t]);
    }
  }
  return ma * mb.adjoint();
}

LtoReport dense_check(const CodeSpec& spec, const std::vector<int>& sites, const Matrix& ground,
                      const LtoOptions& opts) {
  LtoReport rep;
  rep.method = "dense";
  const TensorLayout layout = spec.layout();
  const auto pos = layout.positions_of(sites);
  const std::size_t dim_a = layout.dim_of(pos);
  if (dim_a > kMaxDensityDim) throw CapExceeded("region density matrix", dim_a, kMaxDensityDim);

  Matrix rho = reduced_density(ground, layout, pos);
  const double tr = rho.trace().real();
  if (tr <= 0.0) throw std::invalid_argument("code has an empty ground space");
  rho /= tr;

  // Support of Tr_rest P_A from random vectors in the image of P_A on its own sites.
  const CodeSpec sub = local_code(spec, sites);
  DenseCode local(sub);
  const TensorLayout sub_layout = sub.layout();
  const std::size_t dim_rest = sub_layout.dim() / dim_a;
  Rng rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(local.dim());
  auto sample = [&](Eigen::Index k) {
    Matrix w(d, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      Vector v(d);
      for (Eigen::Index r = 0; r < d; ++r) v(r) = Complex(normal(rng), normal(rng));
      for (std::size_t t = 0; t < local.num_terms(); ++t) local.project(t, v);
      w.col(c) = v;
    }
    return reduced_density(w, sub_layout, pos);
  };
  Eigen::Index k = static_cast<Eigen::Index>(std::max<std::size_t>(2, dim_a / std::max<std::size_t>(1, dim_rest) + 2));
  Matrix rho_loc = sample(k);
  int rank_loc = 0;
  Matrix q_loc = support_projector(rho_loc, opts.tol, &rank_loc);
  while (true) {
    rho_loc += sample(k);
    int r2 = 0;
    Matrix q2 = support_projector(rho_loc, opts.tol, &r2);
    if (r2 == rank_loc) break;
    rank_loc = r2;
    q_loc = std::move(q2);
  }

  int rank_rho = 0;
  const Matrix q_a = support_projector(rho, opts.tol, &rank_rho);
  rep.rank_rho = rank_rho;
  rep.rank_rho_loc = rank_loc;
  if (max_abs(q_loc * q_a - q_a) > 1e-6) {
    throw std::logic_error("support of rho_A is not contained in the support of rho_A^loc");
  }
  rep.kernel_deviation = max_abs(q_a - q_loc);
  rep.kernels_equal = rank_rho == rank_loc && rep.kernel_deviation < std::max(opts.tol, tol::kChannel);

  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  double lmin = lmax;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > opts.tol * lmax) lmin = std::min(lmin, ev(i));
  }
  rep.spread = (lmax - lmin) / lmax;
  rep.rho_proportional_projector = rep.spread < std::max(opts.tol, tol::kChannel);

  const SubsystemIndex idx(layout, pos);
  const Matrix r00 = cross_reduced(ground.col(0), ground.col(0), idx);
  double dist = 0.0;
  for (Eigen::Index j = 1; j < ground.cols(); ++j) {
    dist = std::max(dist, max_abs(cross_reduced(ground.col(j), ground.col(j), idx) - r00));
    dist = std::max(dist, max_abs(cross_reduced(ground.col(0), ground.col(j), idx)));
  }
  rep.distinguishability = dist;
  return rep;
}

LtoMethod resolve(const CodeSpec& spec, LtoMethod m) {
  if (m != LtoMethod::automatic) return m;
  if (spec.dim() <= kMaxStateDim) return LtoMethod::dense;
  if (spec.is_stabilizer()) return LtoMethod::stabilizer;
  throw CapExceeded("dense LTO check", spec.dim(), kMaxStateDim);
}

LtoReport check_with(const CodeSpec& spec, const Rect& region, const LtoOptions& opts, LtoMethod method,
                     const Matrix* ground) {
  LtoReport rep;
  const auto sites = rect_sites(spec.lattice, region);
  if (sites.empty()) {
    rep.method = method == LtoMethod::dense ? "dense" : "stabilizer";
    rep.rank_rho = rep.rank_rho_loc = 1;
    rep.kernels_equal = rep.rho_proportional_projector = true;
  } else if (method == LtoMethod::stabilizer) {
    rep = stabilizer_check(spec, sites);
  } else {
    rep = dense_check(spec, sites, *ground, opts);
  }
  rep.region = region;
  rep.sites = sites;
  rep.pass = rep.kernels_equal && rep.rho_proportional_projector;
  return rep;
}

}  // namespace

LtoReport check_region(const CodeSpec& spec, const Rect& region, const LtoOptions& opts) {
  const LtoMethod method = resolve(spec, opts.method);
  if (method == LtoMethod::stabilizer && !spec.is_stabilizer()) {
    throw std::invalid_argument("stabilizer LTO check on a non-stabilizer code");
  }
  Matrix ground;
  if (method == LtoMethod::dense && !region.empty()) {
    Rng rng(opts.seed);
    ground = ground_basis(spec, rng);
  }
  return check_with(spec, region, opts, method, &ground);
}

LtoReport check_region(const CodeSpec& spec, const std::vector<int>& sites, const LtoOptions& opts) {
  const auto r = as_rectangle(spec.lattice, sites);
  if (!r) throw std::invalid_argument("region is not an axis-aligned rectangle");
  return check_region(spec, *r, opts);
}

LtoScan scan_regions(const CodeSpec& spec, int max_side, const LtoOptions& opts, int workers) {
  LtoScan scan;
  const auto& lat = spec.lattice;
  const bool per = lat.boundary == Boundary::periodic;
  const bool dedupe = per && spec.translation_symmetric;
  std::vector<Rect> rects;
  for (int h = 1; h <= max_side; ++h) {
    for (int w = 1; w <= max_side; ++w) {
      const int nx = per ? lat.width : lat.width - w + 1;
      const int ny = per ? lat.height : lat.height - h + 1;
      for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
          const Rect r{x, y, w, h};
          try {
            rect_sites(lat, r);
          } catch (const std::invalid_argument&) {
            continue;
          }
          ++scan.rectangles;
          if (dedupe && (x != 0 || y != 0)) continue;
          rects.push_back(r);
        }
      }
    }
  }
  if (rects.empty()) return scan;
  const LtoMethod method = resolve(spec, opts.method);
  Matrix ground;
  if (method == LtoMethod::dense) {
    Rng rng(opts.seed);
    ground = ground_basis(spec, rng);
  }
  scan.reports.resize(rects.size());
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(rects.size())));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < rects.size(); i += nw) {
          scan.reports[i] = check_with(spec, rects[i], opts, method, &ground);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  scan.pass = std::all_of(scan.reports.begin(), scan.reports.end(), [](const LtoReport& r) { return r.pass; });
  return scan;
}

}  // namespace lcpc
