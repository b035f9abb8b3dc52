#include "qsynth/cli.hpp"

#include "CLI11.hpp"
#include "qsynth/hsp.hpp"
#include "qsynth/serialization.hpp"
#include "qsynth/states.hpp"
#include "qsynth/waterwire.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsynth {

namespace {

namespace fs = std::filesystem;

// Failures while writing artifacts map to exit 2 like other config problems.
struct WriteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WriteError("cannot write " + path.string());
  out << bytes;
  out.flush();
  if (!out) throw WriteError("write failed for " + path.string());
}

ordered_json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot read " + path);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config: " + path + ": " + std::string(e.what()));
  }
}

std::size_t parse_unsigned(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  std::size_t value = 0;
  try {
    value = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + " must be a non-negative integer, got \"" + text + "\"");
  }
  if (pos != text.size())
    throw std::invalid_argument(what + " must be a non-negative integer, got \"" + text + "\"");
  return value;
}

// "w=4,v=12;w=2,v=8" -> one (w, v/y) pair per pass.
MeasurementScript parse_script(const std::string& text) {
  MeasurementScript script;
  std::size_t start = 0;
  while (true) {
    const std::size_t stop = text.find(';', start);
    const std::string pass =
        text.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
    const std::size_t comma = pass.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("script: each pass needs \"w=..,v=..\", got \"" + pass + "\"");
    const std::string first = pass.substr(0, comma);
    const std::string second = pass.substr(comma + 1);
    if (first.rfind("w=", 0) != 0)
      throw std::invalid_argument("script: pass must start with \"w=\", got \"" + pass + "\"");
    if (second.rfind("v=", 0) != 0 && second.rfind("y=", 0) != 0)
      throw std::invalid_argument("script: second entry must be \"v=\" or \"y=\", got \"" + pass +
                                  "\"");
    script.emplace_back(parse_unsigned(first.substr(2), "script: w"),
                        parse_unsigned(second.substr(2), "script: v"));
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return script;
}

std::size_t parse_bits(const std::string& text, const std::string& what) {
  if (text.empty()) throw std::invalid_argument(what + " must be a non-empty bitstring");
  if (text.size() > 20) throw std::invalid_argument(what + " is wider than 20 bits");
  std::size_t value = 0;
  for (char ch : text) {
    if (ch != '0' && ch != '1')
      throw std::invalid_argument(what + " must be a bitstring, got \"" + text + "\"");
    value = value * 2 + static_cast<std::size_t>(ch - '0');
  }
  return value;
}

std::vector<std::size_t> parse_table(const std::string& text) {
  std::vector<std::size_t> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t stop = text.find(',', start);
    const std::string cell =
        text.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
    values.push_back(parse_unsigned(cell, "--table entry"));
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return values;
}

HSPInstance instance_from(const RunConfig& c) {
  if (c.kind.empty()) throw std::invalid_argument("hsp needs --kind");
  std::string kind = c.kind;
  if (kind == "dj") kind = "deutsch_jozsa";
  if (kind == "bv") kind = "bernstein_vazirani";

  HSPInstance inst;
  if (kind == "deutsch")
    inst.kind = HSPKind::deutsch;
  else if (kind == "deutsch_jozsa")
    inst.kind = HSPKind::deutsch_jozsa;
  else if (kind == "bernstein_vazirani")
    inst.kind = HSPKind::bernstein_vazirani;
  else if (kind == "simon")
    inst.kind = HSPKind::simon;
  else if (kind == "shor")
    throw std::invalid_argument("use the shor subcommand for factoring runs");
  else
    throw std::invalid_argument("hsp: unknown kind \"" + c.kind +
                                "\" (deutsch, dj, bv, simon)");

  if (inst.kind == HSPKind::deutsch || inst.kind == HSPKind::deutsch_jozsa) {
    if (c.table.empty())
      throw std::invalid_argument("the deutsch family needs --table with 2^q bit values");
    inst.table = parse_table(c.table);
    std::size_t q = 0;
    while ((std::size_t{1} << q) < inst.table.size()) ++q;
    if ((std::size_t{1} << q) != inst.table.size())
      throw std::invalid_argument("--table length must be a power of two");
    if (c.q != 0 && c.q != q)
      throw std::invalid_argument("--q disagrees with the table length");
    inst.q = q;
    inst.m = 1;
  } else {
    if (c.secret.empty()) throw std::invalid_argument(kind + " needs --secret");
    inst.secret = parse_bits(c.secret, "--secret");
    if (c.q != 0 && c.q != c.secret.size())
      throw std::invalid_argument("--q disagrees with the secret length");
    inst.q = c.q != 0 ? c.q : c.secret.size();
    inst.m = inst.kind == HSPKind::simon ? (inst.q > 0 ? inst.q - 1 : 0) : 1;
  }
  return inst;
}

std::string bit_text(std::size_t value, std::size_t width) {
  std::string out(width, '0');
  for (std::size_t b = 0; b < width; ++b)
    if (value & (std::size_t{1} << (width - 1 - b))) out[b] = '1';
  return out;
}

struct WireInput {
  WireScenario scenario;
  bool uniform_window = true;
  std::string source;
};

WireInput wire_input_from(const RunConfig& c) {
  WireInput in;
  if (!c.config_path.empty()) {
    const ordered_json j = load_json(c.config_path);
    in.scenario = scenario_from_json(j);
    in.uniform_window = wants_uniform_window(j);
  } else if (c.subcommand == "dimer") {
    in.scenario.n_modes = 2;
    in.scenario.grids.assign(2, Grid1D{32, -2.5, 2.5});
    in.scenario.potential = default_potential(2);
  } else if (c.subcommand == "pentamer") {
    in.scenario.n_modes = 4;
    in.scenario.grids.assign(4, Grid1D{8, -2.5, 2.5});
    in.scenario.potential = default_potential(4);
  } else {
    if (!c.modes) throw std::invalid_argument("wire needs --modes or --config");
    in.scenario.n_modes = *c.modes;
    in.scenario.grids.assign(*c.modes, Grid1D{8, -2.5, 2.5});
    in.scenario.potential = default_potential(*c.modes);
  }
  if (c.subcommand == "wire" && c.modes && in.scenario.n_modes != *c.modes)
    throw std::invalid_argument("wire: --modes disagrees with the config scenario");
  if (c.measured_k) in.scenario.measured_k = *c.measured_k;
  in.source = in.scenario.potential             ? "potential"
              : !in.scenario.explicit_alphas.empty() ? "alphas"
                                                     : "state";
  return in;
}

std::pair<DenseState, std::size_t> schmidt_input_from(const RunConfig& c) {
  const ordered_json j = load_json(c.config_path);
  if (!j.is_object() || !j.contains("state"))
    throw std::invalid_argument("config: schmidt needs a \"state\" object");
  DenseState state = state_from_json(j.at("state"));
  std::size_t cut = 1;
  if (j.contains("cut")) {
    if (!j.at("cut").is_number_unsigned())
      throw std::invalid_argument("config: \"cut\" must be a non-negative integer");
    cut = j.at("cut").get<std::size_t>();
  }
  if (c.cut) cut = *c.cut;
  return {std::move(state), cut};
}

ordered_json envelope(const RunConfig& c) {
  ordered_json out;
  out["subcommand"] = c.subcommand;
  out["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
  out["script"] = c.script ? ordered_json(*c.script) : ordered_json(nullptr);
  out["config"] = c.config_path.empty() ? ordered_json(nullptr) : ordered_json(c.config_path);
  out["trials"] = c.trials;
  out["format"] = c.format;
  return out;
}

std::string spectrum_csv(const Spectrum& s) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < s.frequencies.size(); ++i)
    rows.push_back({std::to_string(s.frequencies[i]), csv_number(s.magnitudes[i]),
                    csv_number(s.phases[i])});
  return csv_table({"frequency", "magnitude", "phase"}, rows);
}

std::string probabilities_csv(const std::vector<double>& p, const std::string& label) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < p.size(); ++i)
    rows.push_back({std::to_string(i), csv_number(p[i])});
  return csv_table({label, "probability"}, rows);
}

using Tables = std::vector<std::pair<std::string, std::string>>;

void write_artifacts(const RunConfig& c, const ordered_json& transcript, const Tables& tables) {
  const fs::path dir(c.output_dir);
  if (c.format != "csv") write_file(dir / "transcript.json", transcript.dump(2) + "\n");
  if (c.format != "json")
    for (const auto& [name, bytes] : tables) write_file(dir / name, bytes);
}

int run_shor(const RunConfig& c) {
  std::vector<FactoringTranscript> results;
  if (c.script) {
    results.push_back(shor_factor(c.n, c.a, parse_script(*c.script)));
  } else {
    const std::uint64_t seed = c.seed.value_or(0);
    for (std::size_t t = 0; t < c.trials; ++t)
      results.push_back(shor_factor(c.n, c.a, seed, t));
  }

  ordered_json tr = envelope(c);
  tr["n"] = c.n;
  tr["a"] = c.a;
  std::size_t successes = 0;
  std::uint64_t draws = 0;
  ordered_json runs = ordered_json::array();
  for (std::size_t t = 0; t < results.size(); ++t) {
    successes += results[t].success ? 1 : 0;
    draws += results[t].rng_draws;
    ordered_json jr;
    jr["trial"] = t;
    jr["stream"] = t;
    jr.update(json_factoring(results[t]));
    runs.push_back(std::move(jr));
  }
  tr["successes"] = successes;
  tr["rng_draws"] = draws;
  tr["runs"] = runs;

  Tables tables;
  std::vector<std::vector<std::string>> attempt_rows;
  for (std::size_t t = 0; t < results.size(); ++t)
    for (std::size_t i = 0; i < results[t].attempts.size(); ++i) {
      const FactoringAttempt& at = results[t].attempts[i];
      attempt_rows.push_back({std::to_string(t), std::to_string(i), std::to_string(at.measured_w),
                              csv_number(at.w_probability), std::to_string(at.measured_v),
                              csv_number(at.v_probability), std::to_string(at.period)});
    }
  tables.emplace_back("attempts.csv",
                      csv_table({"trial", "attempt", "measured_w", "w_probability", "measured_v",
                                 "v_probability", "period"},
                                attempt_rows));
  if (!results.back().attempts.empty())
    tables.emplace_back(
        "qft.csv", probabilities_csv(results.back().attempts.back().qft_distribution, "v"));

  write_artifacts(c, tr, tables);
  if (successes != results.size()) {
    std::cerr << "error: " << (results.size() - successes) << " of " << results.size()
              << " factoring trial(s) failed\n";
    return 3;
  }
  return 0;
}

int run_hsp(const RunConfig& c) {
  const HSPInstance inst = instance_from(c);
  std::vector<HSPTranscript> results;
  if (c.script) {
    results.push_back(run_template(inst, parse_script(*c.script)));
  } else {
    const std::uint64_t seed = c.seed.value_or(0);
    for (std::size_t t = 0; t < c.trials; ++t) results.push_back(run_template(inst, seed, t));
  }

  ordered_json tr = envelope(c);
  tr["kind"] = hsp_kind_name(inst.kind);
  tr["q"] = inst.q;
  tr["m"] = inst.m;
  if (inst.kind == HSPKind::bernstein_vazirani || inst.kind == HSPKind::simon)
    tr["secret"] = c.secret;
  else
    tr["table"] = inst.table;

  std::size_t successes = 0;
  std::uint64_t draws = 0;
  ordered_json runs = ordered_json::array();
  for (std::size_t t = 0; t < results.size(); ++t) {
    successes += results[t].success ? 1 : 0;
    draws += results[t].rng_draws;
    ordered_json jr;
    jr["trial"] = t;
    jr["stream"] = t;
    jr.update(json_template(results[t]));
    if (inst.kind == HSPKind::bernstein_vazirani || inst.kind == HSPKind::simon)
      jr["recovered_bits"] = bit_text(results[t].recovered, inst.q);
    runs.push_back(std::move(jr));
  }
  tr["successes"] = successes;
  tr["rng_draws"] = draws;
  tr["runs"] = runs;

  Tables tables;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < results.size(); ++t)
    for (std::size_t i = 0; i < results[t].runs.size(); ++i) {
      const HSPRun& r = results[t].runs[i];
      rows.push_back({std::to_string(t), std::to_string(i), std::to_string(r.measured_w),
                      csv_number(r.w_probability), std::to_string(r.measured_y),
                      csv_number(r.y_probability)});
    }
  tables.emplace_back("runs.csv", csv_table({"trial", "run", "measured_w", "w_probability",
                                             "measured_y", "y_probability"},
                                            rows));

  write_artifacts(c, tr, tables);
  if (successes != results.size()) {
    std::cerr << "error: " << (results.size() - successes) << " of " << results.size()
              << " template run(s) failed\n";
    return 3;
  }
  return 0;
}

int run_dimer(const RunConfig& c) {
  WireInput in = wire_input_from(c);
  const DimerReport rep = dimer_scenario(in.scenario);

  ordered_json tr = envelope(c);
  ordered_json sc;
  sc["n_modes"] = in.scenario.n_modes;
  sc["source"] = in.source;
  tr["scenario"] = sc;
  tr["rng_draws"] = 0;
  tr.update(json_dimer(rep));

  Tables tables;
  tables.emplace_back("outcomes.csv", probabilities_csv(rep.outcome_probabilities, "family"));
  tables.emplace_back("spectrum.csv", spectrum_csv(rep.post_spectrum));
  tables.emplace_back("superposition_spectrum.csv", spectrum_csv(rep.superposition_spectrum));
  write_artifacts(c, tr, tables);
  return 0;
}

int run_wire(const RunConfig& c) {
  WireInput in = wire_input_from(c);
  WireScenario& s = in.scenario;
  const std::size_t nm = s.n_modes;

  // The uniform interior window is sized from the resolved chain; potential
  // scenarios solve the ground state once and continue as an explicit state.
  if (nm > 2 && in.uniform_window && s.beta.rank() == 0) {
    if (s.potential) {
      DenseState psi = ground_state(build_hamiltonian(s), s.grids);
      s.potential.reset();
      s.explicit_state = std::move(psi);
    }
    if (s.explicit_state) {
      const MPSForm probe = mps_from_dense(*s.explicit_state, s.rel_tol, s.max_bond);
      std::vector<std::size_t> shape;
      for (std::size_t t = 0; t + 2 < nm; ++t) shape.push_back(probe.sites[t + 1].shape[2]);
      DenseTensor ones(shape);
      for (auto& z : ones.entries) z = cplx(1.0);
      s.beta = std::move(ones);
    }
  }

  const WireReport rep =
      c.subcommand == "pentamer" ? pentamer_scenario(s) : wire_generalize(nm, s);

  ordered_json tr = envelope(c);
  ordered_json sc;
  sc["n_modes"] = nm;
  sc["source"] = in.source;
  sc["uniform_window"] = in.uniform_window;
  tr["scenario"] = sc;
  tr["rng_draws"] = 0;
  tr.update(json_wire(rep));

  Tables tables;
  tables.emplace_back("first_mode.csv",
                      probabilities_csv(rep.first_mode_probabilities, "family"));
  std::vector<std::vector<std::string>> state_rows;
  for (std::size_t i = 0; i < rep.final_state.size(); ++i)
    state_rows.push_back({std::to_string(i), csv_number(rep.final_state[i].real()),
                          csv_number(rep.final_state[i].imag())});
  tables.emplace_back("end_state.csv", csv_table({"index", "re", "im"}, state_rows));
  tables.emplace_back("end_spectrum.csv", spectrum_csv(rep.end_spectrum));
  write_artifacts(c, tr, tables);
  return 0;
}

int run_schmidt(const RunConfig& c) {
  auto [state, cut] = schmidt_input_from(c);
  const SchmidtForm split = schmidt_decompose(state, cut);

  ordered_json tr = envelope(c);
  tr["cut"] = cut;
  tr["rank"] = split.alphas.size();
  tr["alphas"] = split.alphas;
  double total = 0.0;
  for (double a : split.alphas) total += a * a;
  tr["weight_total"] = total;
  tr["rng_draws"] = 0;

  Tables tables;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < split.alphas.size(); ++i)
    rows.push_back({std::to_string(i), csv_number(split.alphas[i])});
  tables.emplace_back("alphas.csv", csv_table({"index", "alpha"}, rows));
  write_artifacts(c, tr, tables);
  return 0;
}

}  // namespace

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> issues;
  const bool known = c.subcommand == "shor" || c.subcommand == "hsp" || c.subcommand == "dimer" ||
                     c.subcommand == "pentamer" || c.subcommand == "wire" ||
                     c.subcommand == "schmidt";
  if (!known) {
    issues.push_back("unknown subcommand \"" + c.subcommand + "\"");
    return issues;
  }

  if (c.format != "json" && c.format != "csv" && c.format != "both")
    issues.push_back("--format must be json, csv, or both");
  if (c.trials == 0) issues.push_back("--trials must be at least 1");
  if (c.seed && c.script) issues.push_back("give either --seed or --script, not both");
  if (c.script && c.trials > 1) issues.push_back("a scripted run takes a single trial");

  const bool sampling = c.subcommand == "shor" || c.subcommand == "hsp";
  if (!sampling) {
    if (c.script) issues.push_back("--script applies to shor and hsp runs");
    if (c.trials > 1) issues.push_back("--trials applies to shor and hsp runs");
  } else if (c.script) {
    try {
      parse_script(*c.script);
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }
  }

  if (c.subcommand == "shor") {
    if (c.n == 0) issues.push_back("shor needs --n");
    if (c.a == 0) issues.push_back("shor needs --a");
    if (c.n != 0 && c.a != 0) {
      HSPInstance inst;
      inst.kind = HSPKind::shor;
      inst.modulus = c.n;
      inst.base = c.a;
      std::size_t bits = 0;
      while ((std::size_t{1} << bits) < c.n) ++bits;
      inst.q = bits;
      inst.m = bits;
      try {
        validate_instance(inst);
      } catch (const std::exception& e) {
        issues.push_back(e.what());
      }
    }
  } else if (c.subcommand == "hsp") {
    try {
      validate_instance(instance_from(c));
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }
  } else if (c.subcommand == "schmidt") {
    if (c.config_path.empty()) {
      issues.push_back("schmidt needs --config with a state");
    } else {
      try {
        auto [state, cut] = schmidt_input_from(c);
        if (cut < 1 || cut >= state.parts.size())
          issues.push_back("cut must lie between 1 and parts - 1");
      } catch (const std::exception& e) {
        issues.push_back(e.what());
      }
    }
  } else {
    try {
      const WireInput in = wire_input_from(c);
      validate_scenario(in.scenario);
      if (c.subcommand == "dimer" && in.scenario.n_modes != 2)
        issues.push_back("dimer: scenario must have exactly 2 modes");
      if (c.subcommand == "pentamer" && in.scenario.n_modes != 4)
        issues.push_back("pentamer: scenario must have exactly 4 modes");
      if (in.scenario.potential) {
        std::size_t joint = 1;
        for (const auto& g : in.scenario.grids) joint *= g.n_points;
        if (joint > 4096)
          issues.push_back("joint grid size " + std::to_string(joint) +
                           " exceeds 4096; shrink the grids");
      }
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }
  }
  return issues;
}

int run(const RunConfig& c) {
  const std::vector<std::string> issues = validate(c);
  if (!issues.empty()) {
    for (const auto& text : issues) std::cerr << "error: " << text << "\n";
    return 2;
  }

  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << c.output_dir << ": " << ec.message()
              << "\n";
    return 2;
  }

  try {
    if (c.subcommand == "shor") return run_shor(c);
    if (c.subcommand == "hsp") return run_hsp(c);
    if (c.subcommand == "dimer") return run_dimer(c);
    if (c.subcommand == "schmidt") return run_schmidt(c);
    return run_wire(c);
  } catch (const WriteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int cli_main(int argc, const char* const* argv) {
  RunConfig config;
  CLI::App app{"grid-mode and hidden-subgroup scenario runner"};
  app.require_subcommand(1);

  const auto add_common = [&config](CLI::App* sc) {
    sc->add_option("--seed", config.seed, "64-bit seed for sampled outcomes");
    sc->add_option("--script", config.script, "scripted outcomes, e.g. w=4,v=12");
    sc->add_option("--config", config.config_path, "scenario JSON file");
    sc->add_option("--out", config.output_dir, "output directory")->capture_default_str();
    sc->add_option("--format", config.format, "json | csv | both")->capture_default_str();
    sc->add_option("--trials", config.trials, "seeded repetitions")->capture_default_str();
  };

  CLI::App* shor = app.add_subcommand("shor", "factor an odd composite");
  shor->add_option("--n", config.n, "modulus to factor");
  shor->add_option("--a", config.a, "base with 1 < a < N");
  add_common(shor);

  CLI::App* hsp = app.add_subcommand("hsp", "run a hidden-subgroup template instance");
  hsp->add_option("--kind", config.kind, "deutsch | dj | bv | simon");
  hsp->add_option("--q", config.q, "input register bits");
  hsp->add_option("--secret", config.secret, "bitstring secret (bv, simon)");
  hsp->add_option("--table", config.table, "comma-separated f values (deutsch family)");
  add_common(hsp);

  CLI::App* dimer = app.add_subcommand("dimer", "two-mode readout analysis");
  dimer->add_option("--measured-k", config.measured_k, "first-mode family index");
  add_common(dimer);

  CLI::App* pentamer = app.add_subcommand("pentamer", "four-mode chain readout");
  pentamer->add_option("--measured-k", config.measured_k, "first-mode family index");
  add_common(pentamer);

  CLI::App* wire = app.add_subcommand("wire", "n-mode chain readout");
  wire->add_option("--modes", config.modes, "mode count");
  wire->add_option("--measured-k", config.measured_k, "first-mode family index");
  add_common(wire);

  CLI::App* schmidt = app.add_subcommand("schmidt", "decompose a configured state");
  schmidt->add_option("--cut", config.cut, "parts left of the bipartition");
  add_common(schmidt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  config.subcommand = app.get_subcommands().front()->get_name();
  return run(config);
}

}  // namespace qsynth
