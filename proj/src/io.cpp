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

#include "lcpc/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <set>
#include <stdexcept>

namespace lcpc {
namespace {

Json matrix_json(const Matrix& m) {
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array();
    Json ii = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ii.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return Json{{"re", re}, {"im", im}};
}

Matrix matrix_from_json(const Json& j) {
  const auto& re = j.at("re");
  const auto rows = static_cast<Eigen::Index>(re.size());
  Matrix m = Matrix::Zero(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (re[i].size() != re.size()) throw std::invalid_argument("term matrix must be square");
    for (Eigen::Index j2 = 0; j2 < rows; ++j2) m(i, j2).real(re[i][j2].get<double>());
  }
  if (j.contains("im")) {
    const auto& im = j.at("im");
    if (im.size() != re.size()) throw std::invalid_argument("term matrix parts differ in shape");
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j2 = 0; j2 < rows; ++j2) m(i, j2).imag(im[i][j2].get<double>());
    }
  }
  return m;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string pauli_to_string(const PauliOp& p) {
  static const char* prefix[] = {"", "+i ", "-", "-i "};
  return prefix[p.phase()] + p.str();
}

Json to_json(const CodeSpec& spec) {
  Json j;
  j["family"] = spec.family;
  j["lattice"] = {{"width", spec.lattice.width},
                  {"height", spec.lattice.height},
                  {"boundary", to_string(spec.lattice.boundary)},
                  {"dims", spec.lattice.dims}};
  j["translation_symmetric"] = spec.translation_symmetric;
  j["num_qubits"] = spec.num_qubits;
  j["site_qubits"] = spec.site_qubits;
  Json terms = Json::array();
  for (const auto& t : spec.terms) {
    Json tj{{"name", t.name}, {"support", t.support}};
    if (t.pauli) tj["pauli"] = pauli_to_string(*t.pauli);
    if (t.op.size() > 0) tj["matrix"] = matrix_json(t.op);
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  return j;
}

CodeSpec spec_from_json(const Json& j) {
  CodeSpec spec;
  spec.family = j.value("family", std::string("custom"));
  const auto& lj = j.at("lattice");
  spec.lattice.width = lj.at("width").get<int>();
  spec.lattice.height = lj.at("height").get<int>();
  spec.lattice.boundary = boundary_from_string(lj.value("boundary", std::string("open")));
  if (spec.lattice.width <= 0 || spec.lattice.height <= 0) throw std::invalid_argument("lattice sides must be positive");
  const auto n = static_cast<std::size_t>(spec.lattice.num_sites());
  if (lj.contains("dims")) {
    spec.lattice.dims = lj.at("dims").get<std::vector<int>>();
  } else {
    spec.lattice.dims.assign(n, lj.value("dim", 2));
  }
  if (spec.lattice.dims.size() != n) throw std::invalid_argument("lattice dims do not match the site count");
  for (int d : spec.lattice.dims) {
    if (d < 1) throw std::invalid_argument("site dimensions must be positive");
  }
  spec.translation_symmetric = j.value("translation_symmetric", false);
  if (j.contains("site_qubits")) {
    spec.site_qubits = j.at("site_qubits").get<std::vector<std::vector<int>>>();
    spec.num_qubits = j.value("num_qubits", std::size_t{0});
    if (spec.num_qubits == 0) {
      for (const auto& q : spec.site_qubits) spec.num_qubits += q.size();
    }
  } else if (std::all_of(spec.lattice.dims.begin(), spec.lattice.dims.end(), [](int d) { return d == 2; })) {
    spec.site_qubits.resize(n);
    for (std::size_t s = 0; s < n; ++s) spec.site_qubits[s] = {static_cast<int>(s)};
    spec.num_qubits = n;
  }
  if (spec.is_qubit_code()) {
    if (spec.site_qubits.size() != n) throw std::invalid_argument("site_qubits does not match the site count");
    for (std::size_t s = 0; s < n; ++s) {
      if ((std::size_t{1} << spec.site_qubits[s].size()) != static_cast<std::size_t>(spec.lattice.dims[s])) {
        throw std::invalid_argument("site " + std::to_string(s) + " dimension does not match its qubits");
      }
    }
  }
  for (const auto& tj : j.at("terms")) {
    Term t;
    t.name = tj.value("name", std::string("term") + std::to_string(spec.terms.size()));
    if (tj.contains("pauli")) {
      if (!spec.is_qubit_code()) throw std::invalid_argument("Pauli term " + t.name + " needs a qubit code");
      t.pauli = PauliOp::parse(tj.at("pauli").get<std::string>(), spec.num_qubits);
    }
    if (tj.contains("support")) {
      t.support = tj.at("support").get<std::vector<int>>();
    } else if (t.pauli) {
      std::set<int> sites;
      for (int q : t.pauli->support()) {
        for (std::size_t s = 0; s < n; ++s) {
          const auto& qs = spec.site_qubits[s];
          if (std::find(qs.begin(), qs.end(), q) != qs.end()) sites.insert(static_cast<int>(s));
        }
      }
      t.support.assign(sites.begin(), sites.end());
    } else {
      throw std::invalid_argument("term " + t.name + " has neither support nor Pauli");
    }
    std::sort(t.support.begin(), t.support.end());
    for (int s : t.support) {
      if (s < 0 || static_cast<std::size_t>(s) >= n) throw std::invalid_argument("term " + t.name + " leaves the lattice");
    }
    if (tj.contains("matrix")) {
      t.op = matrix_from_json(tj.at("matrix"));
      std::size_t d = 1;
      for (int s : t.support) d *= static_cast<std::size_t>(spec.lattice.dims[s]);
      if (static_cast<std::size_t>(t.op.rows()) != d) throw std::invalid_argument("term " + t.name + " matrix has the wrong size");
    } else if (!t.pauli) {
      throw std::invalid_argument("term " + t.name + " has neither matrix nor Pauli");
    }
    spec.terms.push_back(std::move(t));
  }
  return spec;
}

CodeSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed spec file " + path + ": " + e.what());
  }
  try {
    return spec_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed spec file " + path + ": " + e.what());
  }
}

void save_spec(const CodeSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(spec).dump(2) << '\n';
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string spec_hash(const CodeSpec& spec) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(to_json(spec).dump());
  return os.str();
}

Json to_json(const ValidationReport& r) {
  Json j{{"valid", r.valid},
         {"frustration_free", r.frustration_free},
         {"method", r.method},
         {"max_commutator", r.max_commutator},
         {"max_projector_residual", r.max_projector_residual},
         {"ground_degeneracy", r.ground_degeneracy}};
  if (r.failing_pair) j["failing_pair"] = {{"a", r.failing_pair->a}, {"b", r.failing_pair->b}, {"norm", r.failing_pair->norm}};
  if (r.failing_term) j["failing_term"] = *r.failing_term;
  j["messages"] = r.messages;
  return j;
}

Json to_json(const LtoReport& r) {
  return Json{{"region", {{"x0", r.region.x0}, {"y0", r.region.y0}, {"width", r.region.width}, {"height", r.region.height}}},
              {"sites", r.sites},
              {"method", r.method},
              {"pass", r.pass},
              {"kernels_equal", r.kernels_equal},
              {"rho_proportional_projector", r.rho_proportional_projector},
              {"rank_rho", r.rank_rho},
              {"rank_rho_loc", r.rank_rho_loc},
              {"spread", r.spread},
              {"kernel_deviation", r.kernel_deviation},
              {"distinguishability", opt(r.distinguishability)}};
}

Json to_json(const LtoScan& s) {
  Json regions = Json::array();
  Json failing = Json::array();
  for (const auto& r : s.reports) {
    regions.push_back(to_json(r));
    if (!r.pass) failing.push_back(r.sites);
  }
  return Json{{"pass", s.pass}, {"rectangles", s.rectangles}, {"checked", s.reports.size()},
              {"failing_regions", failing}, {"regions", regions}};
}

Json to_json(const EnsembleSummary& s) {
  return Json{{"runs", s.runs},
              {"completed", s.completed},
              {"dead_ends", s.dead_ends},
              {"timeouts", s.timeouts},
              {"mean_trials", s.mean_trials},
              {"stderr_trials", s.stderr_trials},
              {"mean_trials_all", s.mean_trials_all},
              {"stderr_trials_all", s.stderr_trials_all},
              {"max_delta", s.max_delta},
              {"max_violated", s.max_violated},
              {"mean_ground_weight", s.mean_ground_weight},
              {"mean_overlap", s.mean_overlap},
              {"stderr_overlap", s.stderr_overlap},
              {"dead_end_eligibility", s.dead_end_eligibility}};
}

Json to_json(const BarrierVerdict& v) {
  return Json{{"runs", v.runs},
              {"mean_ground_weight", v.mean_ground_weight},
              {"mean_overlap", v.mean_overlap},
              {"stderr_overlap", v.stderr_overlap},
              {"delta", v.delta},
              {"returns_to_ground", v.returns_to_ground},
              {"corrupts", v.corrupts},
              {"barrier_crossed", v.barrier_crossed}};
}

Json to_json(const EquivalenceReport& r) {
  Json recs = Json::array();
  for (const auto& x : r.records) {
    recs.push_back(Json{{"identity", x.name}, {"k", x.k}, {"m", x.m}, {"deviation", x.deviation},
                        {"tolerance", x.tolerance}, {"pass", x.pass}, {"fatal", x.fatal}});
  }
  return Json{{"pass", r.pass}, {"window_dim", r.window_dim}, {"records", recs}};
}

Json to_json(const ExpectedTrials& e) {
  return Json{{"expected_trials", e.value},
              {"success_probability", e.success_probability},
              {"success_after", e.success_after},
              {"krylov_spectral_radius", e.krylov_spectral_radius},
              {"krylov_dim", e.krylov_dim},
              {"spectral_radius", opt(e.spectral_radius)},
              {"induced_trace_norm", opt(e.induced_trace_norm)}};
}

void write_trajectory_csv(std::ostream& os, std::span<const Trajectory> runs) {
  os << "run_id,status,k,m,outcome,energy,violated\n";
  std::ostringstream num;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& rec : runs[r].records) {
      num.str("");
      num << std::setprecision(17) << rec.energy;
      os << r << ',' << to_string(runs[r].status) << ',' << rec.k << ',' << rec.m << ','
         << to_string(rec.outcome) << ',' << num.str() << ',' << rec.violated.size() << '\n';
    }
  }
}

}  // namespace lcpc
