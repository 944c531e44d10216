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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcpc/code_model.hpp"
#include "lcpc/pauli.hpp"

namespace lcpc {

enum class Backend { dense, stabilizer };
std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct NoiseConfig {
  Backend backend = Backend::stabilizer;
  long max_trials = 1000;
  std::uint64_t seed = 1;
  bool record_energy = true;
  /// Dense backend: keep the state after every iteration.
  bool keep_iteration_states = false;
};

enum class TrialOutcome { success, failure, unmeasured };
std::string to_string(TrialOutcome o);

struct TrialRecord {
  int k = 0;   // iteration, 1-based
  long m = 0;  // trial, 1-based
  TrialOutcome outcome = TrialOutcome::unmeasured;
  /// Energy above the ground energy after the trial (and its measurement).
  double energy = 0.0;
  /// Terms with Tr[P_X rho] < 1 after the trial.
  std::vector<int> violated;
};

enum class RunStatus { completed, dead_end, timeout };
std::string to_string(RunStatus s);

/// Initial state of a run: a stabilizer frame or a dense vector, plus the Paulis
/// fixed to +1 on top of the code (e.g. a logical X for the logical-plus state).
struct InitialState {
  std::vector<PauliOp> extra_plus;
};

struct Trajectory {
  RunStatus status = RunStatus::completed;
  int stop_k = 0;
  std::vector<TrialRecord> records;
  std::vector<long> trials_per_iteration;
  double delta = 0.0;
  int max_violated = 0;
  bool final_strip_satisfied = false;
  double ground_weight = 0.0;  // Tr[P rho_final]
  double overlap = 0.0;        // Tr[psi0 rho_final]
  std::optional<double> stop_eligibility;
  std::optional<Vector> final_state;
  std::optional<StabilizerFrame> final_frame;
  std::vector<Vector> iteration_states;
};

/// Ground state psi0 as a frame: |0...0> projected onto every generator (and the
/// extra Paulis) with outcome +1.
StabilizerFrame prepare_frame(const CodeSpec& spec, const InitialState& init = {});
/// Dense psi0: P (and the extra projectors) applied to |0...0>, normalized.
Vector prepare_dense(const DenseCode& code, const InitialState& init = {});

/// Tr[P_{k-1,k} (Tr_k[rho] (x) I/D)] for the current state.
double eligibility(const DenseCode& code, const StripGeometry& strip, const Vector& psi, int k);
double eligibility(const CodeSpec& spec, const StripGeometry& strip, const StabilizerFrame& frame, int k);

/// One sequential run. Iteration 1 measures P_{0,1} when the strip has
/// terms touching only site 1, otherwise it applies a single unmeasured trial.
Trajectory run_sequential(const CodeSpec& spec, const StripGeometry& strip, const NoiseConfig& cfg,
                          const InitialState& init = {});

struct EnsembleSummary {
  int runs = 0;
  int completed = 0;
  int dead_ends = 0;
  int timeouts = 0;
  /// Per iteration k (index k-1), over completed runs.
  std::vector<double> mean_trials;
  std::vector<double> stderr_trials;
  double mean_trials_all = 0.0;  // pooled over k >= 2
  double stderr_trials_all = 0.0;
  double max_delta = 0.0;
  int max_violated = 0;
  double mean_ground_weight = 0.0;
  double mean_overlap = 0.0;
  double stderr_overlap = 0.0;
  std::vector<double> dead_end_eligibility;
};

struct Ensemble {
  std::vector<Trajectory> runs;
  EnsembleSummary summary;
};

/// Runs with seeds derived from cfg.seed and the run index; result is independent
/// of the worker count.
Ensemble run_ensemble(const CodeSpec& spec, const StripGeometry& strip, const NoiseConfig& cfg, int runs,
                      int workers = 1, const InitialState& init = {});
EnsembleSummary summarize(std::span<const Trajectory> runs, int length);
std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run_id);

struct FortuitousResult {
  long samples = 0;
  long successes = 0;
  double rate = 0.0;
  double stderr_rate = 0.0;
  /// Closed form Tr[P D_strip(psi0)].
  double exact_probability = 0.0;
  bool upper_bound_only = false;
  double upper_bound = 0.0;
  /// Average post-selected state (empty above the density cap or without successes).
  Matrix post_state;
  /// P D_strip(psi0) P / Tr[...] (empty above the density cap).
  Matrix exact_post_state;
};

/// Depolarizes `sites` with Haar trials, measures the code projector and keeps +1.
FortuitousResult run_fortuitous(const CodeSpec& spec, const std::vector<int>& sites, const Vector& psi0,
                                long samples, std::uint64_t seed);

struct BarrierOptions {
  double ground_threshold = 2.0 / 3.0;
  double corruption_threshold = 1.0 / 3.0;
};

struct BarrierVerdict {
  int runs = 0;
  double mean_ground_weight = 0.0;
  double mean_overlap = 0.0;
  double stderr_overlap = 0.0;
  double delta = 0.0;
  bool returns_to_ground = false;  // mean ground weight >= ground_threshold
  bool corrupts = false;           // mean overlap <= corruption_threshold
  bool barrier_crossed = false;
};

/// Rejects trajectories that did not complete.
BarrierVerdict evaluate_barrier(std::span<const Trajectory> runs, const BarrierOptions& opts = {});

}  // namespace lcpc
