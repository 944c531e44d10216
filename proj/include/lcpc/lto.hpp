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
#include <string>
#include <vector>

#include "lcpc/code_model.hpp"

namespace lcpc {

/// Axis-aligned rectangle of sites starting at (x0, y0); wraps on periodic lattices.
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
  bool empty() const { return width == 0 || height == 0; }
  bool operator==(const Rect&) const = default;
};

/// Sites of a rectangle, ascending. Throws if it does not fit (or wraps fully around).
std::vector<int> rect_sites(const Lattice& lattice, const Rect& r);
/// The rectangle covering exactly `sites`, if there is one.
std::optional<Rect> as_rectangle(const Lattice& lattice, const std::vector<int>& sites);

enum class LtoMethod { automatic, dense, stabilizer };

struct LtoReport {
  Rect region;
  std::vector<int> sites;
  std::string method;
  bool kernels_equal = false;
  bool rho_proportional_projector = false;
  bool pass = false;
  long long rank_rho = 0;
  long long rank_rho_loc = 0;
  /// (max - min) / max over the nonzero spectrum of rho_A.
  double spread = 0.0;
  /// ||Q_A - Q_A^loc||_max of the two support projectors (dense only).
  double kernel_deviation = 0.0;
  /// max_ij ||Tr_rest |g_i><g_j| - delta_ij Tr_rest |g_0><g_0|||_max over a ground
  /// basis; positive means ground states are locally distinguishable (dense only).
  std::optional<double> distinguishability;
};

struct LtoOptions {
  double tol = tol::kRank;
  LtoMethod method = LtoMethod::automatic;
  std::uint64_t seed = 1;
};

LtoReport check_region(const CodeSpec& spec, const Rect& region, const LtoOptions& opts = {});
/// Rejects site sets that are not a rectangle.
LtoReport check_region(const CodeSpec& spec, const std::vector<int>& sites, const LtoOptions& opts = {});

struct LtoScan {
  std::vector<LtoReport> reports;
  bool pass = true;
  std::size_t rectangles = 0;  // before deduplication
};

/// Every rectangle with sides up to max_side (deduplicated by translations when
/// the code declares them). An empty scan passes vacuously.
LtoScan scan_regions(const CodeSpec& spec, int max_side, const LtoOptions& opts = {}, int workers = 1);

/// Chebyshev distance (with wrap) between the closest sites of two site sets.
int site_distance(const Lattice& lattice, const std::vector<int>& a, const std::vector<int>& b);

}  // namespace lcpc
