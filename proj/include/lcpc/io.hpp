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
#include <iosfwd>
#include <span>
#include <string>

#include "json.hpp"

#include "lcpc/channels.hpp"
#include "lcpc/code_model.hpp"
#include "lcpc/lto.hpp"
#include "lcpc/noise.hpp"

namespace lcpc {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Code specs as JSON. Terms carry a Pauli string ("-X0 Z3") or a matrix
/// {"re": [[...]], "im": [[...]]} on their support; doubles round-trip exactly.
Json to_json(const CodeSpec& spec);
CodeSpec spec_from_json(const Json& j);
CodeSpec load_spec(const std::string& path);
void save_spec(const CodeSpec& spec, const std::string& path);

/// FNV-1a (64 bit) of the canonical JSON text, as 16 hex digits.
std::string spec_hash(const CodeSpec& spec);
std::uint64_t fnv1a(std::string_view bytes);

std::string pauli_to_string(const PauliOp& p);

Json to_json(const ValidationReport& r);
Json to_json(const LtoReport& r);
Json to_json(const LtoScan& s);
Json to_json(const EnsembleSummary& s);
Json to_json(const BarrierVerdict& v);
Json to_json(const EquivalenceReport& r);
Json to_json(const ExpectedTrials& e);

/// One row per trial: run,k,m,outcome,energy,violated.
void write_trajectory_csv(std::ostream& os, std::span<const Trajectory> runs);

}  // namespace lcpc
