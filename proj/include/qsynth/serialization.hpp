#pragma once
// Transcript serialization: ordered-JSON builders for run reports, fixed
// layout CSV tables, and parsers for the --config scenario files. Key order
// and float formatting are pinned so identical runs emit identical bytes.

#include "json.hpp"
#include "qsynth/hsp.hpp"
#include "qsynth/measurement.hpp"
#include "qsynth/states.hpp"
#include "qsynth/waterwire.hpp"

#include <string>
#include <vector>

namespace qsynth {

using ordered_json = nlohmann::ordered_json;

// Complex vectors serialize as [[re, im], ...]; sparse slices as
// [[basis_index, re, im], ...].
ordered_json json_complex_vector(const std::vector<cplx>& v);
ordered_json json_sparse_vector(const SparseVec& v);

ordered_json json_spectrum(const Spectrum& s);
ordered_json json_state(const DenseState& s);

// Bond dimensions, bond weights, and truncation error; site tensors stay out
// of transcripts.
ordered_json json_chain_summary(const MPSForm& chain);

ordered_json json_stage_notes(const std::vector<StageNote>& notes);
ordered_json json_factoring(const FactoringTranscript& t);
ordered_json json_template(const HSPTranscript& t);
ordered_json json_dimer(const DimerReport& r);
ordered_json json_wire(const WireReport& r);

std::string hsp_kind_name(HSPKind kind);

// Floats as %.17g (round-trip exact); rows joined with ',' and terminated
// with '\n'.
std::string csv_number(double x);
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

// Scenario schema for dimer/pentamer/wire configs:
//   n_modes            integer (optional when the subcommand fixes it)
//   grids              [{"points", "x_min", "x_max"}, ...]; one entry is
//                      replicated across all modes
//   potential          "default" or {"barrier", "well", "harmonic",
//                      "couplings"}, each an array or a scalar to replicate
//   alphas             bare two-mode Schmidt weights
//   state              explicit dense state (see state_from_json)
//   measured_k         first-mode family index
//   beta               {"shape": [...], "entries": [[re, im], ...]}; omitted
//                      or "uniform" means equal weights over the actual bonds
//   max_bond, rel_tol  chain conversion controls
// Exactly one of potential/alphas/state may be present. Throws
// std::invalid_argument naming the offending key.
WireScenario scenario_from_json(const ordered_json& j);

// True when the config asks for the uniform interior window (beta omitted or
// the string "uniform"); the runner sizes it from the resolved chain.
bool wants_uniform_window(const ordered_json& j);

// {"parts": [{"name", "dim"}, ...], "amplitudes": [[re, im], ...]} with
// amplitudes row-major over the part dims.
DenseState state_from_json(const ordered_json& j);

}  // namespace qsynth
