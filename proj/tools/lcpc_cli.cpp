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

// lcpc: batch front-end for code validation, local-order scans, noise
// ensembles and channel verification.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lcpc/channels.hpp"
#include "lcpc/code_model.hpp"
#include "lcpc/io.hpp"
#include "lcpc/lto.hpp"
#include "lcpc/noise.hpp"

namespace {

using namespace lcpc;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCap = 3;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Config {
  std::string family;
  std::string spec_path;
  int size = 3;
  int width = 0;
  int height = 0;
  int n = 0;
  std::string boundary;
  std::string defect;
  int row = -1;
  int block = 0;
  int runs = 100;
  std::uint64_t seed = 1;
  long max_trials = 1000;
  std::string backend = "stabilizer";
  std::string out = "lcpc-out";
  int workers = 1;
  int max_side = 2;
  std::string method = "auto";
  std::string initial = "ground";
  bool literal_eq9 = false;
};

Json echo(const std::string& sub, const Config& c) {
  return Json{{"subcommand", sub}, {"family", c.family},   {"spec", c.spec_path},     {"size", c.size},
              {"width", c.width},  {"height", c.height},   {"n", c.n},                {"boundary", c.boundary},
              {"defect", c.defect}, {"row", c.row},        {"block", c.block},        {"runs", c.runs},
              {"seed", c.seed},    {"max_trials", c.max_trials}, {"backend", c.backend}, {"out", c.out},
              {"workers", c.workers}, {"max_side", c.max_side}, {"method", c.method},
              {"initial", c.initial}, {"literal_eq9", c.literal_eq9}};
}

CodeSpec load_code(const Config& c) {
  if (!c.spec_path.empty() && !c.family.empty()) throw UsageError("give either --family or --spec, not both");
  if (!c.spec_path.empty()) return load_spec(c.spec_path);
  if (c.family.empty()) throw UsageError("one of --family or --spec is required");
  FamilyParams p;
  p.width = c.width > 0 ? c.width : (c.n > 0 ? c.n : c.size);
  p.height = c.height > 0 ? c.height : c.size;
  if (!c.boundary.empty()) p.boundary = boundary_from_string(c.boundary);
  if (!c.defect.empty()) {
    const auto comma = c.defect.find(',');
    if (comma == std::string::npos) throw UsageError("--defect expects x,y");
    p.defect_x = std::stoi(c.defect.substr(0, comma));
    p.defect_y = std::stoi(c.defect.substr(comma + 1));
  }
  return build_named_code(c.family, p);
}

int block_for(const Config& c, const CodeSpec& spec) {
  if (c.block > 0) return c.block;
  return c.spec_path.empty() ? default_block(spec.family) : 1;
}

/// Strip work needs every term inside a 2x2 cell; doubles the block until it is.
CodeSpec strip_ready(const Config& c, const CodeSpec& raw) {
  int b = block_for(c, raw);
  CodeSpec spec = coarse_grain(raw, b);
  while (c.block <= 0 && interaction_range(spec) > 1) {
    b *= 2;
    try {
      spec = coarse_grain(raw, b);
    } catch (const std::invalid_argument&) {
      break;
    }
  }
  return spec;
}

Json header(const std::string& sub, const Config& c, const CodeSpec& spec) {
  return Json{{"tool", "lcpc"}, {"version", kToolVersion}, {"subcommand", sub},
              {"seed", c.seed}, {"spec_hash", spec_hash(spec)}, {"family", spec.family}};
}

void write_json(const Config& c, const std::string& name, const Json& j) {
  std::filesystem::create_directories(c.out);
  std::ofstream out(std::filesystem::path(c.out) / name);
  if (!out) throw std::runtime_error("cannot write to " + c.out);
  out << j.dump(2) << '\n';
}

void write_config(const std::string& sub, const Config& c) {
  write_json(c, sub + ".config.json", echo(sub, c));
}

int cmd_validate(const Config& c) {
  const CodeSpec spec = load_code(c);
  const auto rep = validate(spec);
  Json j = header("validate", c, spec);
  j["report"] = to_json(rep);
  write_config("validate", c);
  write_json(c, "validate.json", j);
  std::cout << "valid: " << (rep.valid ? "yes" : "no") << "  degeneracy: " << rep.ground_degeneracy << '\n';
  if (rep.failing_pair) {
    std::cout << "failing pair: " << spec.terms[rep.failing_pair->a].name << " , "
              << spec.terms[rep.failing_pair->b].name << "  norm " << rep.failing_pair->norm << '\n';
  }
  for (const auto& m : rep.messages) std::cout << m << '\n';
  return rep.valid ? kExitPass : kExitFail;
}

LtoMethod method_from(const std::string& s) {
  if (s == "auto") return LtoMethod::automatic;
  if (s == "dense") return LtoMethod::dense;
  if (s == "stabilizer") return LtoMethod::stabilizer;
  throw UsageError("--method must be auto, dense or stabilizer");
}

int cmd_lto(const Config& c) {
  const CodeSpec raw = load_code(c);
  const CodeSpec spec = coarse_grain(raw, block_for(c, raw));
  if (c.max_side < 0) throw UsageError("--max-side must be non-negative");
  LtoOptions opts;
  opts.method = method_from(c.method);
  opts.seed = c.seed;
  const auto scan = scan_regions(spec, c.max_side, opts, c.workers);
  Json j = header("lto", c, raw);
  j["block"] = block_for(c, raw);
  j["scan"] = to_json(scan);
  if (scan.reports.empty()) {
    j["warning"] = "no regions checked; pass is vacuous";
    std::cerr << "warning: no regions checked; pass is vacuous\n";
  }
  write_config("lto", c);
  write_json(c, "lto.json", j);
  int failing = 0;
  for (const auto& r : scan.reports) {
    if (r.pass) continue;
    ++failing;
    std::cout << "fail: rect (" << r.region.x0 << "," << r.region.y0 << ") " << r.region.width << "x"
              << r.region.height << "  rank " << r.rank_rho << " vs " << r.rank_rho_loc << '\n';
  }
  std::cout << "regions: " << scan.reports.size() << "  failing: " << failing << "  verdict: "
            << (scan.pass ? "pass" : "fail") << '\n';
  return scan.pass ? kExitPass : kExitFail;
}

int cmd_noise(const Config& c) {
  if (c.runs <= 0) throw UsageError("--runs must be positive");
  if (c.max_trials <= 0) throw UsageError("--max-trials must be positive");
  const CodeSpec raw = load_code(c);
  const CodeSpec spec = strip_ready(c, raw);
  const int row = c.row >= 0 ? c.row : default_row(spec);
  const StripGeometry strip = strip_geometry(spec, row);
  NoiseConfig cfg;
  cfg.backend = backend_from_string(c.backend);
  cfg.max_trials = c.max_trials;
  cfg.seed = c.seed;
  InitialState init;
  if (c.initial == "logical-plus") {
    const auto logical = strip_logical_search(spec, strip);
    if (!logical) throw UsageError("the strip supports no logical operator");
    const auto conj = conjugate_logical(spec, *logical);
    if (!conj) throw std::logic_error("no conjugate logical found");
    init.extra_plus.push_back(*conj);
  } else if (c.initial != "ground") {
    throw UsageError("--initial must be ground or logical-plus");
  }
  const Ensemble ens = run_ensemble(spec, strip, cfg, c.runs, c.workers, init);
  Json j = header("noise", c, raw);
  j["strip"] = {{"row", row}, {"length", strip.length()}, {"sites", strip.strip}};
  j["c_code"] = c_code(spec, strip);
  j["summary"] = to_json(ens.summary);
  if (ens.summary.completed == ens.summary.runs) {
    j["barrier"] = to_json(evaluate_barrier(ens.runs));
  }
  write_config("noise", c);
  write_json(c, "noise.json", j);
  {
    std::ofstream csv(std::filesystem::path(c.out) / "trajectories.csv");
    write_trajectory_csv(csv, ens.runs);
  }
  const auto& s = ens.summary;
  std::cout << "runs " << s.runs << "  completed " << s.completed << "  dead-ends " << s.dead_ends
            << "  timeouts " << s.timeouts << "  mean trials (k>=2) " << s.mean_trials_all << " +- "
            << s.stderr_trials_all << "  max violated " << s.max_violated << '\n';
  return (s.dead_ends == 0 && s.timeouts == 0) ? kExitPass : kExitFail;
}

int cmd_verify_channels(const Config& c) {
  const CodeSpec raw = load_code(c);
  const CodeSpec spec = strip_ready(c, raw);
  const int row = c.row >= 0 ? c.row : default_row(spec);
  const StripGeometry strip = strip_geometry(spec, row);
  EquivalenceOptions opts;
  opts.literal_eq9 = c.literal_eq9;
  EquivalenceReport rep;
  try {
    rep = verify_equivalence(spec, strip, opts);
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "hint: the extended strip must have total dimension <= " << kMaxWindowDim
              << "; e.g. --family ising1d --n 3, or --family surface --size 3 --row 0\n";
    return kExitCap;
  }
  Json j = header("verify-channels", c, raw);
  j["strip"] = {{"row", row}, {"length", strip.length()}, {"sites", strip.strip}};
  j["identities"] = to_json(rep);

  Json trials = Json::array();
  if (spec.dim() <= kMaxDensityDim) {
    DenseCode code(spec);
    const Vector psi = prepare_dense(code);
    DenseState rho = DenseState::from_pure(spec.site_spaces(), psi);
    StripChannels ch(spec, strip);
    for (int k = 1; k <= strip.length(); ++k) {
      Json t{{"k", k}};
      try {
        t["trials"] = to_json(expected_trials(spec, strip, k, rho));
      } catch (const NonConvergent& e) {
        t["non_convergent"] = e.spectral_radius();
      }
      trials.push_back(std::move(t));
      rho = DenseState(spec.site_spaces(), apply_window(ch.iteration(k), rho.rho(), code.layout(), ch.window_sites()));
    }
  }
  j["expected_trials"] = std::move(trials);
  write_config("verify-channels", c);
  write_json(c, "verify-channels.json", j);
  for (const auto& r : rep.records) {
    if (!r.pass || !r.fatal) {
      std::cout << (r.fatal ? "FAIL " : "note ") << r.name << " k=" << r.k << " m=" << r.m << " deviation "
                << r.deviation << '\n';
    }
  }
  std::cout << "identities: " << rep.records.size() << "  window dim " << rep.window_dim << "  verdict: "
            << (rep.pass ? "pass" : "fail") << '\n';
  return rep.pass ? kExitPass : kExitFail;
}

void add_code_flags(CLI::App* sub, Config& c) {
  sub->add_option("--family", c.family, "named code family")->envname("LCPC_FAMILY");
  sub->add_option("--spec", c.spec_path, "code spec JSON file")->envname("LCPC_SPEC");
  sub->add_option("--size", c.size, "lattice side")->envname("LCPC_SIZE");
  sub->add_option("--width", c.width, "lattice width (overrides --size)");
  sub->add_option("--height", c.height, "lattice height (overrides --size)");
  sub->add_option("--n", c.n, "chain length for 1D families");
  sub->add_option("--boundary", c.boundary, "open or periodic");
  sub->add_option("--defect", c.defect, "defect plaquette x,y");
  sub->add_option("--seed", c.seed, "random seed")->envname("LCPC_SEED");
  sub->add_option("--out", c.out, "output directory")->envname("LCPC_OUT");
  sub->add_option("--workers", c.workers, "worker threads")->envname("LCPC_WORKERS")->check(CLI::PositiveNumber);
}

void add_strip_flags(CLI::App* sub, Config& c) {
  sub->add_option("--row", c.row, "strip row after coarse-graining")->envname("LCPC_ROW");
  sub->add_option("--block", c.block, "coarse-graining block size")->envname("LCPC_BLOCK");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local commuting projector codes: validation, local order, noise and channels"};
  app.require_subcommand(1);
  Config c;
  std::string chosen;

  auto* val = app.add_subcommand("validate", "check projectors, commutation and frustration-freeness");
  add_code_flags(val, c);
  val->callback([&] { chosen = "validate"; });

  auto* lto = app.add_subcommand("lto", "scan rectangles for local topological order");
  add_code_flags(lto, c);
  lto->add_option("--max-side", c.max_side, "largest rectangle side")->envname("LCPC_MAX_SIDE");
  lto->add_option("--method", c.method, "auto, dense or stabilizer");
  lto->add_option("--block", c.block, "coarse-graining block size")->envname("LCPC_BLOCK");
  lto->callback([&] { chosen = "lto"; });

  auto* noise = app.add_subcommand("noise", "run the sequential noise model");
  add_code_flags(noise, c);
  add_strip_flags(noise, c);
  noise->add_option("--runs", c.runs, "number of runs")->envname("LCPC_RUNS");
  noise->add_option("--max-trials", c.max_trials, "trial cap per iteration")->envname("LCPC_MAX_TRIALS");
  noise->add_option("--backend", c.backend, "dense or stabilizer")->envname("LCPC_BACKEND");
  noise->add_option("--initial", c.initial, "ground or logical-plus");
  noise->callback([&] { chosen = "noise"; });

  auto* ver = app.add_subcommand("verify-channels", "certify the channel identities on a strip");
  add_code_flags(ver, c);
  add_strip_flags(ver, c);
  ver->add_flag("--literal-eq9", c.literal_eq9, "also report the asymmetric success map");
  ver->callback([&] { chosen = "verify-channels"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (chosen == "validate") return cmd_validate(c);
    if (chosen == "lto") return cmd_lto(c);
    if (chosen == "noise") return cmd_noise(c);
    if (chosen == "verify-channels") return cmd_verify_channels(c);
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCap;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
