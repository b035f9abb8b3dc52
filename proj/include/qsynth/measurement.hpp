#pragma once

#include "qsynth/linalg.hpp"
#include "qsynth/states.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qsynth {

// Outcome of projecting one part onto a measurement ket. post_state keeps the
// raw contraction (norm^2 = probability); post_state_normalized divides the
// norm out, except for probability below 1e-20 where it stays the raw
// near-zero state flagged unnormalized.
struct MeasurementRecord {
  PartLabel part;
  std::size_t outcome_index = 0;
  double probability = 0.0;
  DenseState post_state;
  DenseState post_state_normalized;
};

// Counted outcomes of repeated single-part measurements.
struct SampleSet {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::map<std::size_t, std::size_t> counts;
};

// Discrete Fourier spectrum; phases lie in (-pi, pi].
struct Spectrum {
  std::vector<std::size_t> frequencies;
  std::vector<double> magnitudes;
  std::vector<double> phases;
};

// Contracts <ket| against the named part (remaining parts keep their order).
// The ket must be normalized; the state itself may be unnormalized, in which
// case `probability` is the raw squared norm of the contraction.
MeasurementRecord project(const DenseState& state, const std::string& part,
                          const std::vector<cplx>& ket, std::size_t outcome_index = 0);

// Measurement in the rotated basis of `change`: outcome k projects onto the
// ket sum_j conj(d(k, j)) |j>, so the row-k coefficients are kicked into the
// remaining parts.
MeasurementRecord generalized_measure(const DenseState& state, const BasisChange& change,
                                      std::size_t outcome);

// Projects the listed parts onto the joint state chi (a tensor over those
// parts' dims, axes in list order, normalized within 1e-10) and returns the
// unnormalized state of the remaining parts.
DenseState subspace_project(const DenseState& state, const std::vector<std::string>& parts,
                            const DenseTensor& chi);

// Chain-form variant: the listed parts must be consecutive in chain order, so
// the window can be contracted without rebuilding the joint amplitudes.
// Non-consecutive windows are rejected; densify first in that case.
DenseState subspace_project(const MPSForm& mps, const std::vector<std::string>& parts,
                            const DenseTensor& chi);

// Draws n outcomes of measuring `part` in the given orthonormal basis
// (columns) from the exact outcome distribution. One generator draw per
// sample; identical (state, basis, n, seed) give identical counts.
SampleSet sample(const DenseState& state, const std::string& part, const DenseMatrix& basis,
                 std::size_t n, std::uint64_t seed);

// Unitary DFT with the convention F[v] = (1/sqrt(M)) sum_x e^{+2 pi i v x / M} c[x].
std::vector<cplx> unitary_dft(const std::vector<cplx>& c);

// Runs unitary_dft and reports per-frequency magnitude and phase.
Spectrum fourier_analyze(const std::vector<cplx>& coefficients);

}  // namespace qsynth
