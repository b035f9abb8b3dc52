#include "qsynth/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qsynth {

namespace {

ordered_json json_pair(const cplx& z) { return ordered_json::array({z.real(), z.imag()}); }

double number_at(const ordered_json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw std::invalid_argument("config: \"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

std::size_t index_at(const ordered_json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned())
    throw std::invalid_argument("config: \"" + key + "\" must be a non-negative integer");
  return j.at(key).get<std::size_t>();
}

// Scalar -> replicated vector, array -> checked-length vector.
std::vector<double> coefficient_list(const ordered_json& j, const std::string& key,
                                     std::size_t count) {
  if (!j.contains(key)) throw std::invalid_argument("config: potential lacks \"" + key + "\"");
  const ordered_json& v = j.at(key);
  if (v.is_number()) return std::vector<double>(count, v.get<double>());
  if (!v.is_array() || v.size() != count)
    throw std::invalid_argument("config: \"" + key + "\" must be a scalar or an array of " +
                                std::to_string(count));
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw std::invalid_argument("config: \"" + key + "\" holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<cplx> complex_vector_from(const ordered_json& v, const std::string& key) {
  if (!v.is_array()) throw std::invalid_argument("config: \"" + key + "\" must be an array");
  std::vector<cplx> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw std::invalid_argument("config: \"" + key + "\" entries must be [re, im] pairs");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

}  // namespace

ordered_json json_complex_vector(const std::vector<cplx>& v) {
  ordered_json out = ordered_json::array();
  for (const auto& z : v) out.push_back(json_pair(z));
  return out;
}

ordered_json json_sparse_vector(const SparseVec& v) {
  ordered_json out = ordered_json::array();
  for (const auto& [index, z] : v)
    out.push_back(ordered_json::array({index, z.real(), z.imag()}));
  return out;
}

ordered_json json_spectrum(const Spectrum& s) {
  ordered_json out;
  out["frequencies"] = s.frequencies;
  out["magnitudes"] = s.magnitudes;
  out["phases"] = s.phases;
  return out;
}

ordered_json json_state(const DenseState& s) {
  ordered_json out;
  ordered_json parts = ordered_json::array();
  for (const auto& p : s.parts) parts.push_back({{"name", p.name}, {"dim", p.dim}});
  out["parts"] = parts;
  out["normalized"] = s.normalized;
  out["amplitudes"] = json_complex_vector(s.amplitudes.entries);
  return out;
}

ordered_json json_chain_summary(const MPSForm& chain) {
  ordered_json out;
  ordered_json dims = ordered_json::array();
  for (const auto& site : chain.sites) dims.push_back(site.shape[2]);
  if (!dims.empty()) dims.erase(dims.size() - 1);  // final bond is always 1
  out["bond_dimensions"] = dims;
  out["bond_weights"] = chain.bond_weights;
  out["truncation_error"] = chain.truncation_error;
  return out;
}

ordered_json json_stage_notes(const std::vector<StageNote>& notes) {
  ordered_json out = ordered_json::array();
  for (const auto& n : notes) out.push_back({{"stage", n.stage}, {"note", n.note}});
  return out;
}

ordered_json json_factoring(const FactoringTranscript& t) {
  ordered_json out;
  out["n"] = t.n;
  out["a"] = t.a;
  out["q"] = t.q;
  out["m"] = t.m;
  out["classical_shortcut"] = t.classical_shortcut;
  out["success"] = t.success;
  out["period"] = t.period;
  out["factors"] = ordered_json::array({t.factors.first, t.factors.second});
  out["note"] = t.note;
  out["rng_draws"] = t.rng_draws;
  ordered_json attempts = ordered_json::array();
  for (const auto& at : t.attempts) {
    ordered_json a;
    a["measured_w"] = at.measured_w;
    a["w_probability"] = at.w_probability;
    a["collapsed_support"] = at.collapsed_support;
    a["qft_distribution"] = at.qft_distribution;
    a["measured_v"] = at.measured_v;
    a["v_probability"] = at.v_probability;
    ordered_json conv = ordered_json::array();
    for (const auto& [num, den] : at.convergents) conv.push_back(ordered_json::array({num, den}));
    a["convergents"] = conv;
    a["period"] = at.period;
    a["note"] = at.note;
    attempts.push_back(std::move(a));
  }
  out["attempts"] = attempts;
  out["stage1"] = json_sparse_vector(t.stage1);
  out["stage2"] = json_sparse_vector(t.stage2);
  out["stage3"] = json_complex_vector(t.stage3);
  out["qft_register"] = json_complex_vector(t.qft_register);
  return out;
}

ordered_json json_template(const HSPTranscript& t) {
  ordered_json out;
  out["kind"] = hsp_kind_name(t.instance.kind);
  out["q"] = t.instance.q;
  out["m"] = t.instance.m;
  out["success"] = t.success;
  out["conclusion"] = t.conclusion;
  out["recovered"] = t.recovered;
  out["rng_draws"] = t.rng_draws;
  ordered_json runs = ordered_json::array();
  for (const auto& r : t.runs) {
    ordered_json jr;
    jr["measured_w"] = r.measured_w;
    jr["w_probability"] = r.w_probability;
    jr["measured_y"] = r.measured_y;
    jr["y_probability"] = r.y_probability;
    jr["collapsed"] = json_complex_vector(r.collapsed);
    jr["final_register"] = json_complex_vector(r.final_register);
    runs.push_back(std::move(jr));
  }
  out["runs"] = runs;
  out["factoring"] = t.factoring ? json_factoring(*t.factoring) : ordered_json(nullptr);
  return out;
}

ordered_json json_dimer(const DimerReport& r) {
  ordered_json out;
  out["alphas"] = r.alphas;
  out["measured_k"] = r.measured_k;
  out["outcome_probabilities"] = r.outcome_probabilities;
  out["probability_total"] = r.probability_total;
  out["projection_probability"] = r.projection_probability;
  out["superposition_outcome"] = r.superposition_outcome;
  out["post_state"] = json_state(r.post_state);
  out["superposition_post"] = json_state(r.superposition_post);
  out["post_spectrum"] = json_spectrum(r.post_spectrum);
  out["superposition_spectrum"] = json_spectrum(r.superposition_spectrum);
  out["stages"] = json_stage_notes(r.stages);
  return out;
}

ordered_json json_wire(const WireReport& r) {
  ordered_json out;
  out["n_modes"] = r.n_modes;
  out["measured_k"] = r.measured_k;
  out["chain"] = json_chain_summary(r.chain);
  out["truncation_error"] = r.truncation_error;
  out["first_mode_probabilities"] = r.first_mode_probabilities;
  out["first_mode_outcome"] = r.first_mode_outcome;
  out["chi_norm"] = r.chi_norm;
  out["window_outcome"] = r.window_outcome;
  out["final_state"] = json_complex_vector(r.final_state);
  out["formal_state"] = json_complex_vector(r.formal_state);
  out["route_gap"] = r.route_gap;
  out["dense_gap"] = r.dense_gap;
  out["end_spectrum"] = json_spectrum(r.end_spectrum);
  out["stages"] = json_stage_notes(r.stages);
  return out;
}

std::string hsp_kind_name(HSPKind kind) {
  switch (kind) {
    case HSPKind::deutsch: return "deutsch";
    case HSPKind::deutsch_jozsa: return "deutsch_jozsa";
    case HSPKind::bernstein_vazirani: return "bernstein_vazirani";
    case HSPKind::simon: return "simon";
    case HSPKind::shor: return "shor";
  }
  return "unknown";
}

std::string csv_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += row[c];
    }
    out += '\n';
  }
  return out;
}

WireScenario scenario_from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: scenario must be a JSON object");
  WireScenario s;
  if (j.contains("n_modes")) s.n_modes = index_at(j, "n_modes");

  if (j.contains("grids")) {
    const ordered_json& g = j.at("grids");
    if (!g.is_array() || g.empty())
      throw std::invalid_argument("config: \"grids\" must be a non-empty array");
    std::vector<Grid1D> grids;
    for (const auto& e : g) {
      Grid1D grid;
      grid.n_points = index_at(e, "points");
      grid.x_min = number_at(e, "x_min");
      grid.x_max = number_at(e, "x_max");
      grids.push_back(grid);
    }
    if (s.n_modes == 0) s.n_modes = grids.size();
    if (grids.size() == 1) grids.assign(s.n_modes, grids[0]);
    s.grids = std::move(grids);
  }

  int sources = 0;
  if (j.contains("potential")) {
    ++sources;
    if (s.n_modes == 0)
      throw std::invalid_argument("config: a potential scenario needs \"n_modes\" or \"grids\"");
    const ordered_json& p = j.at("potential");
    if (p.is_string() && p.get<std::string>() == "default") {
      s.potential = default_potential(s.n_modes);
    } else if (p.is_object()) {
      ModelPotential mp;
      mp.barrier = coefficient_list(p, "barrier", s.n_modes);
      mp.well = coefficient_list(p, "well", s.n_modes);
      mp.harmonic = p.contains("harmonic") ? coefficient_list(p, "harmonic", s.n_modes)
                                           : std::vector<double>(s.n_modes, 0.0);
      mp.couplings = coefficient_list(p, "couplings", s.n_modes - 1);
      s.potential = std::move(mp);
    } else {
      throw std::invalid_argument("config: \"potential\" must be \"default\" or an object");
    }
  }
  if (j.contains("alphas")) {
    ++sources;
    const ordered_json& a = j.at("alphas");
    if (!a.is_array()) throw std::invalid_argument("config: \"alphas\" must be an array");
    for (const auto& x : a) {
      if (!x.is_number()) throw std::invalid_argument("config: \"alphas\" holds a non-number");
      s.explicit_alphas.push_back(x.get<double>());
    }
    if (s.n_modes == 0) s.n_modes = 2;
  }
  if (j.contains("state")) {
    ++sources;
    s.explicit_state = state_from_json(j.at("state"));
    if (s.n_modes == 0) s.n_modes = s.explicit_state->parts.size();
  }
  if (sources != 1)
    throw std::invalid_argument(
        "config: give exactly one of \"potential\", \"alphas\", or \"state\"");

  if (j.contains("measured_k")) s.measured_k = index_at(j, "measured_k");
  if (j.contains("max_bond")) s.max_bond = index_at(j, "max_bond");
  if (j.contains("rel_tol")) s.rel_tol = number_at(j, "rel_tol");

  if (j.contains("beta") && !j.at("beta").is_string()) {
    const ordered_json& b = j.at("beta");
    if (!b.is_object() || !b.contains("shape") || !b.contains("entries"))
      throw std::invalid_argument("config: \"beta\" needs \"shape\" and \"entries\"");
    std::vector<std::size_t> shape;
    for (const auto& d : b.at("shape")) {
      if (!d.is_number_unsigned())
        throw std::invalid_argument("config: \"beta\" shape must hold non-negative integers");
      shape.push_back(d.get<std::size_t>());
    }
    DenseTensor t(shape);
    const std::vector<cplx> entries = complex_vector_from(b.at("entries"), "beta entries");
    if (entries.size() != t.entries.size())
      throw std::invalid_argument("config: \"beta\" entries do not fill the declared shape");
    t.entries = entries;
    s.beta = std::move(t);
  }
  return s;
}

bool wants_uniform_window(const ordered_json& j) {
  if (!j.contains("beta")) return true;
  const ordered_json& b = j.at("beta");
  if (b.is_string()) {
    if (b.get<std::string>() != "uniform")
      throw std::invalid_argument("config: \"beta\" string form must be \"uniform\"");
    return true;
  }
  return false;
}

DenseState state_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("parts") || !j.contains("amplitudes"))
    throw std::invalid_argument("config: a state needs \"parts\" and \"amplitudes\"");
  DenseState s;
  std::vector<std::size_t> shape;
  for (const auto& p : j.at("parts")) {
    if (!p.is_object() || !p.contains("name") || !p.at("name").is_string())
      throw std::invalid_argument("config: each part needs a string \"name\"");
    PartLabel label;
    label.name = p.at("name").get<std::string>();
    label.dim = index_at(p, "dim");
    shape.push_back(label.dim);
    s.parts.push_back(std::move(label));
  }
  s.amplitudes = DenseTensor(shape);
  const std::vector<cplx> entries = complex_vector_from(j.at("amplitudes"), "amplitudes");
  if (entries.size() != s.amplitudes.entries.size())
    throw std::invalid_argument("config: amplitude count does not match the part dims");
  s.amplitudes.entries = entries;
  double norm2 = 0.0;
  for (const auto& z : s.amplitudes.entries) norm2 += std::norm(z);
  s.normalized = std::fabs(norm2 - 1.0) <= 1e-10;
  validate_state(s);
  return s;
}

}  // namespace qsynth
