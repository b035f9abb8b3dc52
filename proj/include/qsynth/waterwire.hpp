#pragma once
// Grid models of coupled vibrational modes on a chain: double-well potentials
// with bilinear nearest-neighbour coupling, ground states on the joint grid,
// and measurement pipelines that read out one end of the chain after
// projecting the interior onto a weighted subspace window.

#include <optional>
#include <string>
#include <vector>

#include "qsynth/linalg.hpp"
#include "qsynth/measurement.hpp"
#include "qsynth/states.hpp"

namespace qsynth {

// One discretized coordinate: n_points interior samples of [x_min, x_max]
// with hard-wall boundaries at both ends.
struct Grid1D {
  std::size_t n_points = 0;
  double x_min = 0.0;
  double x_max = 0.0;

  double spacing() const { return (x_max - x_min) / static_cast<double>(n_points + 1); }
  double point(std::size_t i) const { return x_min + static_cast<double>(i + 1) * spacing(); }
};

// Per-mode potential b ((x/w)^2 - 1)^2 + c x^2 plus bilinear couplings
// lambda_g x_g x_{g+1} between chain neighbours. Units have hbar = m = 1.
struct ModelPotential {
  std::vector<double> barrier;    // b, one per mode
  std::vector<double> well;       // w, one per mode
  std::vector<double> harmonic;   // c, one per mode
  std::vector<double> couplings;  // lambda, one per adjacent pair
};

// b = 5, w = 1, c = 0, lambda = 0.2 on every mode/pair.
ModelPotential default_potential(std::size_t n_modes);

// A chain scenario draws its state from exactly one source: a model potential
// on grids (ground state), an explicit dense state, an explicit chain (MPS)
// state, or bare Schmidt weights (the two-mode arithmetic mode, where both
// local bases are abstract family labels).
struct WireScenario {
  std::size_t n_modes = 0;
  std::vector<Grid1D> grids;
  std::optional<ModelPotential> potential;
  std::optional<DenseState> explicit_state;
  std::optional<MPSForm> explicit_chain;
  std::vector<double> explicit_alphas;

  std::size_t measured_k = 0;  // first-mode family index to project onto
  DenseTensor beta;            // interior window weights, rank n_modes - 2
  std::size_t max_bond = unbounded_rank;
  double rel_tol = 1e-12;  // truncation for the dense -> chain conversion
};

struct StageNote {
  std::string stage;
  std::string note;
};

// Two-mode analysis: the Schmidt split, a projective readout of every
// first-mode family member, the (psi_1 + psi_2)/sqrt(2) superposition
// readout, and the spectra of both post-states.
struct DimerReport {
  std::vector<double> alphas;
  std::size_t measured_k = 0;
  std::vector<double> outcome_probabilities;  // one per family member
  double probability_total = 0.0;             // sum over the complete family
  double projection_probability = 0.0;        // outcome_probabilities[measured_k]
  DenseState post_state;                      // raw alpha_k psi^2_k
  double superposition_outcome = 0.0;
  DenseState superposition_post;  // raw (a1 psi^2_1 + a2 psi^2_2)/sqrt 2
  Spectrum post_spectrum;
  Spectrum superposition_spectrum;
  std::vector<StageNote> stages;
};

// Chain analysis: measure the first mode onto family member k, project the
// interior modes onto the beta-weighted window state, and report the
// surviving end-mode state from the chain contraction, from a staged dense
// contraction (when the joint grid fits), and from the closed-form product of
// bond weights.
struct WireReport {
  std::size_t n_modes = 0;
  MPSForm chain;
  double truncation_error = 0.0;
  std::size_t measured_k = 0;
  std::vector<double> first_mode_probabilities;  // complete-family readout
  double first_mode_outcome = 0.0;               // [measured_k]
  double chi_norm = 0.0;    // grid norm divided out of the window state
  double window_outcome = 0.0;  // 2-norm of the raw end-mode state
  std::vector<cplx> final_state;   // raw end-mode amplitudes, chain route
  std::vector<cplx> formal_state;  // closed-form coefficient route
  double route_gap = 0.0;          // max |final_state - formal_state|
  double dense_gap = -1.0;         // chain route vs staged dense route, -1 if skipped
  Spectrum end_spectrum;           // of the normalized end-mode state
  std::vector<StageNote> stages;
};

// Structural validation of grids, potential shape, and source exclusivity.
void validate_scenario(const WireScenario& scenario);

// Kinetic stencil (second-order central differences, hard walls) plus the
// model potential on the joint grid. Joint dimension is capped at 4096.
DenseMatrix build_hamiltonian(const WireScenario& scenario);

// Lowest eigenvector reshaped onto the mode grids, with the global phase
// fixed so the largest-magnitude amplitude is real-positive.
DenseState ground_state(const DenseMatrix& h, const std::vector<Grid1D>& grids);

DimerReport dimer_scenario(const WireScenario& scenario);

// wire_generalize with exactly 4 modes.
WireReport pentamer_scenario(const WireScenario& scenario);

WireReport wire_generalize(std::size_t n_modes, const WireScenario& scenario);

}  // namespace qsynth
