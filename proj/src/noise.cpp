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

#include "lcpc/noise.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>
#include <type_traits>

namespace lcpc {

std::string to_string(Backend b) { return b == Backend::dense ? "dense" : "stabilizer"; }

Backend backend_from_string(const std::string& s) {
  if (s == "dense") return Backend::dense;
  if (s == "stabilizer") return Backend::stabilizer;
  throw std::invalid_argument("unknown backend '" + s + "'");
}

std::string to_string(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::success: return "success";
    case TrialOutcome::failure: return "failure";
    default: return "unmeasured";
  }
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::dead_end: return "dead_end";
    default: return "timeout";
  }
}

std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run_id) {
  std::uint64_t z = seed + run_id + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

StabilizerFrame prepare_frame(const CodeSpec& spec, const InitialState& init) {
  StabilizerFrame frame(spec.num_qubits);
  auto fix = [&](const PauliOp& p) {
    if (frame.force(p, 1) == 0.0) {
      throw std::invalid_argument("cannot prepare a +1 eigenstate of " + p.str() + " from |0...0>");
    }
  };
  for (const auto& g : spec.stabilizers()) fix(g);
  for (const auto& p : init.extra_plus) fix(p);
  return frame;
}

Vector prepare_dense(const DenseCode& code, const InitialState& init) {
  const auto d = static_cast<Eigen::Index>(code.dim());
  Vector psi = Vector::Zero(d);
  psi(0) = 1.0;
  auto project_all = [&](Vector& v) {
    for (std::size_t t = 0; t < code.num_terms(); ++t) code.project(t, v);
    for (const auto& p : init.extra_plus) {
      Vector s = v;
      code.apply_pauli(p, s);
      v = 0.5 * (v + s);
    }
  };
  project_all(psi);
  if (psi.norm() < 1e-8) {
    Rng rng(12345);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < d; ++i) psi(i) = Complex(normal(rng), normal(rng));
    project_all(psi);
  }
  const double n = psi.norm();
  if (n < 1e-8) throw std::invalid_argument("initial state projects to zero");
  return psi / n;
}

namespace {

// E_ab psi with E_ab = |a><b| on the subsystem of `idx`.
Vector transition(const Vector& psi, const SubsystemIndex& idx, std::size_t a, std::size_t b) {
  Vector out = Vector::Zero(psi.size());
  for (std::size_t base : idx.base) {
    out(static_cast<Eigen::Index>(base + idx.offset[a])) = psi(static_cast<Eigen::Index>(base + idx.offset[b]));
  }
  return out;
}

void project_terms(const DenseCode& code, const std::vector<std::size_t>& terms, Vector& v) {
  for (auto t : terms) code.project(t, v);
}

std::vector<std::size_t> all_terms(const CodeSpec& spec) {
  std::vector<std::size_t> t(spec.terms.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = i;
  return t;
}

class DenseRunner {
 public:
  DenseRunner(const DenseCode& code, const Vector& psi0, Rng& rng)
      : code_(code), psi0_(psi0), psi_(psi0), rng_(rng) {}

  void trial(int site) {
    const int pos = code_.layout().position_of(site);
    const int d = code_.layout().dim_at(pos);
    const Matrix u = haar_unitary(d, rng_);
    const int p[1] = {pos};
    apply_local(psi_, code_.layout(), p, u);
  }

  bool measure(const std::vector<std::size_t>& terms) {
    Vector phi = psi_;
    project_terms(code_, terms, phi);
    const double p = phi.squaredNorm();
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (uni(rng_) < p || 1.0 - p < 1e-14) {
      psi_ = phi / std::sqrt(p);
      return true;
    }
    psi_ = (psi_ - phi) / std::sqrt(1.0 - p);
    return false;
  }

  double energy(std::vector<int>& violated) const {
    double e = 0.0;
    for (std::size_t t = 0; t < code_.num_terms(); ++t) {
      const double ex = code_.expectation(t, psi_);
      e += 1.0 - ex;
      if (ex < 1.0 - 1e-9) violated.push_back(static_cast<int>(t));
    }
    return std::max(e, 0.0);
  }

  double eligibility(const StripGeometry& strip, int k) const { return lcpc::eligibility(code_, strip, psi_, k); }

  double ground_weight() const {
    Vector v = psi_;
    for (std::size_t t = 0; t < code_.num_terms(); ++t) code_.project(t, v);
    return v.squaredNorm();
  }
  double overlap() const { return std::norm(psi0_.dot(psi_)); }
  const Vector& state() const { return psi_; }

 private:
  const DenseCode& code_;
  const Vector& psi0_;
  Vector psi_;
  Rng& rng_;
};

class StabilizerRunner {
 public:
  StabilizerRunner(const CodeSpec& spec, const StabilizerFrame& psi0, Rng& rng)
      : spec_(spec), psi0_(psi0), frame_(psi0), rng_(rng) {}

  void trial(int site) {
    static const char letters[4] = {'I', 'X', 'Y', 'Z'};
    PauliOp p(spec_.num_qubits);
    for (int q : spec_.site_qubits[site]) p.set(q, letters[rng_() & 3u]);
    frame_.apply(p);
  }

  bool measure(const std::vector<std::size_t>& terms) {
    bool ok = true;
    for (auto t : terms) {
      if (frame_.measure(*spec_.terms[t].pauli, rng_) != 1) ok = false;
    }
    return ok;
  }

  double energy(std::vector<int>& violated) const {
    double e = 0.0;
    for (std::size_t t = 0; t < spec_.terms.size(); ++t) {
      const int s = frame_.expectation(*spec_.terms[t].pauli);
      const double ex = 0.5 * (1.0 + s);
      e += 1.0 - ex;
      if (s != 1) violated.push_back(static_cast<int>(t));
    }
    return e;
  }

  double eligibility(const StripGeometry& strip, int k) const { return lcpc::eligibility(spec_, strip, frame_, k); }

  double ground_weight() const { return frame_.depolarized_success_probability(spec_.stabilizers(), {}); }
  double overlap() const { return StabilizerFrame::overlap(psi0_, frame_); }
  const StabilizerFrame& state() const { return frame_; }

 private:
  const CodeSpec& spec_;
  const StabilizerFrame& psi0_;
  StabilizerFrame frame_;
  Rng& rng_;
};

template <class Runner>
Trajectory execute(Runner& run, const StripGeometry& strip, const NoiseConfig& cfg, std::vector<Vector>* states) {
  Trajectory traj;
  const int ell = strip.length();
  traj.trials_per_iteration.assign(ell, 0);
  auto record = [&](int k, long m, TrialOutcome o) {
    TrialRecord r;
    r.k = k;
    r.m = m;
    r.outcome = o;
    if (cfg.record_energy) {
      r.energy = run.energy(r.violated);
      traj.delta = std::max(traj.delta, r.energy);
      traj.max_violated = std::max(traj.max_violated, static_cast<int>(r.violated.size()));
    }
    traj.records.push_back(std::move(r));
  };
  for (int k = 1; k <= ell; ++k) {
    const int site = strip.strip[k - 1];
    const auto& constraint = strip.constraint_terms[k];
    if (k == 1 && constraint.empty()) {
      run.trial(site);
      traj.trials_per_iteration[0] = 1;
      record(1, 1, TrialOutcome::unmeasured);
      continue;
    }
    long m = 0;
    while (true) {
      ++m;
      run.trial(site);
      const bool ok = run.measure(constraint);
      record(k, m, ok ? TrialOutcome::success : TrialOutcome::failure);
      if (ok) break;
      if (m >= cfg.max_trials) {
        traj.trials_per_iteration[k - 1] = m;
        const double e = run.eligibility(strip, k);
        traj.stop_eligibility = e;
        traj.status = e <= 1e-10 ? RunStatus::dead_end : RunStatus::timeout;
        traj.stop_k = k;
        traj.ground_weight = run.ground_weight();
        traj.overlap = run.overlap();
        return traj;
      }
    }
    traj.trials_per_iteration[k - 1] = m;
    if constexpr (std::is_same_v<Runner, DenseRunner>) {
      if (states) states->push_back(run.state());
    }
  }
  traj.final_strip_satisfied = run.measure(strip.strip_terms);
  traj.ground_weight = run.ground_weight();
  traj.overlap = run.overlap();
  traj.status = RunStatus::completed;
  return traj;
}

void check_config(const CodeSpec& spec, const StripGeometry& strip, const NoiseConfig& cfg) {
  if (cfg.max_trials < 1) throw std::invalid_argument("max_trials must be >= 1");
  if (strip.constraint_terms.size() != strip.strip.size() + 1) throw std::invalid_argument("malformed strip");
  if (cfg.backend == Backend::stabilizer && !spec.is_stabilizer()) {
    throw std::invalid_argument("stabilizer backend needs a stabilizer code");
  }
}

Trajectory run_one(const CodeSpec& spec, const StripGeometry& strip, const NoiseConfig& cfg,
                   const DenseCode* code, const Vector* dense0, const StabilizerFrame* frame0,
                   std::uint64_t seed) {
  Rng rng(seed);
  if (cfg.backend == Backend::dense) {
    DenseRunner run(*code, *dense0, rng);
    std::vector<Vector> states;
    Trajectory t = execute(run, strip, cfg, cfg.keep_iteration_states ? &states : nullptr);
    t.final_state = run.state();
    t.iteration_states = std::move(states);
    return t;
  }
  StabilizerRunner run(spec, *frame0, rng);
  Trajectory t = execute(run, strip, cfg, nullptr);
  t.final_frame = run.state();
  return t;
}

}  // namespace

double eligibility(const DenseCode& code, const StripGeometry& strip, const Vector& psi, int k) {
  if (k < 1 || k > strip.length()) throw std::invalid_argument("iteration index out of range");
  const int pos = code.layout().position_of(strip.strip[k - 1]);
  const int p[1] = {pos};
  const SubsystemIndex idx(code.layout(), p);
  const std::size_t d = idx.offset.size();
  double acc = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      Vector v = transition(psi, idx, a, b);
      project_terms(code, strip.constraint_terms[k], v);
      acc += v.squaredNorm();
    }
  }
  return acc / static_cast<double>(d);
}

double eligibility(const CodeSpec& spec, const StripGeometry& strip, const StabilizerFrame& frame, int k) {
  if (k < 1 || k > strip.length()) throw std::invalid_argument("iteration index out of range");
  std::vector<PauliOp> ops;
  for (auto t : strip.constraint_terms[k]) ops.push_back(*spec.terms[t].pauli);
  const auto& qubits = spec.site_qubits.at(strip.strip[k - 1]);
  return frame.depolarized_success_probability(ops, qubits);
}

Trajectory run_sequential(const CodeSpec& spec, const StripGeometry& strip, const NoiseConfig& cfg,
                          const InitialState& init) {
  check_config(spec, strip, cfg);
  if (cfg.backend == Backend::dense) {
    DenseCode code(spec);
    const Vector psi0 = prepare_dense(code, init);
    return run_one(spec, strip, cfg, &code, &psi0, nullptr, cfg.seed);
  }
  const StabilizerFrame frame0 = prepare_frame(spec, init);
  return run_one(spec, strip, cfg, nullptr, nullptr, &frame0, cfg.seed);
}

EnsembleSummary summarize(std::span<const Trajectory> runs, int length) {
  EnsembleSummary s;
  s.runs = static_cast<int>(runs.size());
  s.mean_trials.assign(length, 0.0);
  s.stderr_trials.assign(length, 0.0);
  std::vector<double> sum2(length, 0.0);
  double pooled = 0.0, pooled2 = 0.0;
  long pooled_n = 0;
  double gw = 0.0, ov = 0.0, ov2 = 0.0;
  for (const auto& t : runs) {
    s.max_delta = std::max(s.max_delta, t.delta);
    s.max_violated = std::max(s.max_violated, t.max_violated);
    if (t.status == RunStatus::dead_end) {
      ++s.dead_ends;
      if (t.stop_eligibility) s.dead_end_eligibility.push_back(*t.stop_eligibility);
      continue;
    }
    if (t.status == RunStatus::timeout) {
      ++s.timeouts;
      continue;
    }
    ++s.completed;
    for (int k = 0; k < length; ++k) {
      const double m = static_cast<double>(t.trials_per_iteration[k]);
      s.mean_trials[k] += m;
      sum2[k] += m * m;
      if (k >= 1) {
        pooled += m;
        pooled2 += m * m;
        ++pooled_n;
      }
    }
    gw += t.ground_weight;
    ov += t.overlap;
    ov2 += t.overlap * t.overlap;
  }
  const double n = s.completed;
  if (n > 0) {
    for (int k = 0; k < length; ++k) {
      const double mean = s.mean_trials[k] / n;
      const double var = n > 1 ? std::max(0.0, (sum2[k] - n * mean * mean) / (n - 1)) : 0.0;
      s.mean_trials[k] = mean;
      s.stderr_trials[k] = std::sqrt(var / n);
    }
    s.mean_ground_weight = gw / n;
    s.mean_overlap = ov / n;
    const double var = n > 1 ? std::max(0.0, (ov2 - n * s.mean_overlap * s.mean_overlap) / (n - 1)) : 0.0;
    s.stderr_overlap = std::sqrt(var / n);
  }
  if (pooled_n > 0) {
    const double pn = static_cast<double>(pooled_n);
    s.mean_trials_all = pooled / pn;
    const double var = pooled_n > 1 ? std::max(0.0, (pooled2 - pn * s.mean_trials_all * s.mean_trials_all) / (pn - 1)) : 0.0;
    s.stderr_trials_all = std::sqrt(var / pn);
  }
  return s;
}

Ensemble run_ensemble(const CodeSpec& spec, const StripGeometry& strip, const NoiseConfig& cfg, int runs,
                      int workers, const InitialState& init) {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  check_config(spec, strip, cfg);
  std::optional<DenseCode> code;
  Vector psi0;
  std::optional<StabilizerFrame> frame0;
  if (cfg.backend == Backend::dense) {
    code.emplace(spec);
    psi0 = prepare_dense(*code, init);
  } else {
    frame0 = prepare_frame(spec, init);
  }
  Ensemble out;
  out.runs.resize(runs);
  const int nw = std::max(1, std::min(workers, runs));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = w; r < runs; r += nw) {
          out.runs[r] = run_one(spec, strip, cfg, code ? &*code : nullptr, &psi0, frame0 ? &*frame0 : nullptr,
                                run_seed(cfg.seed, static_cast<std::uint64_t>(r)));
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
  out.summary = summarize(out.runs, strip.length());
  return out;
}

FortuitousResult run_fortuitous(const CodeSpec& spec, const std::vector<int>& sites, const Vector& psi0,
                                long samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  DenseCode code(spec);
  if (static_cast<std::size_t>(psi0.size()) != code.dim()) throw std::invalid_argument("state dimension mismatch");
  const auto terms = all_terms(spec);
  const auto positions = code.layout().positions_of(sites);
  const bool dense_out = code.dim() <= kMaxDensityDim;
  const auto d = static_cast<Eigen::Index>(code.dim());
  FortuitousResult res;
  res.samples = samples;

  const SubsystemIndex idx(code.layout(), positions);
  const std::size_t ds = idx.offset.size();
  Matrix exact = dense_out ? Matrix::Zero(d, d) : Matrix();
  double p_exact = 0.0;
  for (std::size_t a = 0; a < ds; ++a) {
    for (std::size_t b = 0; b < ds; ++b) {
      Vector v = transition(psi0, idx, a, b);
      project_terms(code, terms, v);
      p_exact += v.squaredNorm();
      if (dense_out) exact.noalias() += v * v.adjoint();
    }
  }
  res.exact_probability = p_exact / static_cast<double>(ds);
  if (dense_out && p_exact > 0.0) res.exact_post_state = exact / exact.trace().real();

  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Matrix acc = dense_out ? Matrix::Zero(d, d) : Matrix();
  for (long s = 0; s < samples; ++s) {
    Vector psi = psi0;
    for (int pos : positions) {
      const Matrix u = haar_unitary(code.layout().dim_at(pos), rng);
      const int p[1] = {pos};
      apply_local(psi, code.layout(), p, u);
    }
    Vector phi = psi;
    project_terms(code, terms, phi);
    const double p = phi.squaredNorm();
    if (uni(rng) < p || 1.0 - p < 1e-14) {
      ++res.successes;
      if (dense_out) {
        phi /= std::sqrt(p);
        acc.noalias() += phi * phi.adjoint();
      }
    }
  }
  res.rate = static_cast<double>(res.successes) / static_cast<double>(samples);
  res.stderr_rate = std::sqrt(std::max(res.rate * (1.0 - res.rate), 0.0) / static_cast<double>(samples));
  if (res.successes == 0) {
    res.upper_bound_only = true;
    res.upper_bound = 3.0 / static_cast<double>(samples);
  } else if (dense_out) {
    res.post_state = acc / static_cast<double>(res.successes);
  }
  return res;
}

BarrierVerdict evaluate_barrier(std::span<const Trajectory> runs, const BarrierOptions& opts) {
  if (runs.empty()) throw std::invalid_argument("no trajectories to evaluate");
  BarrierVerdict v;
  double ov2 = 0.0;
  for (const auto& t : runs) {
    if (t.status != RunStatus::completed) {
      throw std::invalid_argument("trajectory did not complete (" + to_string(t.status) + " at iteration " +
                                  std::to_string(t.stop_k) + ")");
    }
    v.mean_ground_weight += t.ground_weight;
    v.mean_overlap += t.overlap;
    ov2 += t.overlap * t.overlap;
    v.delta = std::max(v.delta, t.delta);
  }
  const double n = static_cast<double>(runs.size());
  v.runs = static_cast<int>(runs.size());
  v.mean_ground_weight /= n;
  v.mean_overlap /= n;
  const double var = n > 1 ? std::max(0.0, (ov2 - n * v.mean_overlap * v.mean_overlap) / (n - 1)) : 0.0;
  v.stderr_overlap = std::sqrt(var / n);
  v.returns_to_ground = v.mean_ground_weight >= opts.ground_threshold;
  v.corrupts = v.mean_overlap <= opts.corruption_threshold;
  v.barrier_crossed = v.returns_to_ground && v.corrupts;
  return v;
}

}  // namespace lcpc
