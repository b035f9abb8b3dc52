#pragma once

#include "qsynth/linalg.hpp"
#include "qsynth/states.hpp"

#include <cstddef>
#include <vector>

namespace qsynth {

// A global operator written as a sum over terms, each term acting as an
// independent factor on every part: G = sum_alpha (x)_gamma terms[alpha][gamma].
// Individual factors are unconstrained; `unitary_total` asserts that the
// assembled sum is unitary and is verified whenever the sum is assembled.
struct ProductOperatorSum {
  std::vector<PartLabel> parts;
  std::vector<std::vector<DenseMatrix>> terms;
  bool unitary_total = false;
};

// Final-state expansion over per-part bases: c_a(j, alpha) = <a_j|U^A_alpha|a_0>,
// c_b likewise, and coupled(j, j') = sum_alpha c_a(j, alpha) * c_b(j', alpha).
struct CoefficientExpansion {
  DenseMatrix c_a;
  DenseMatrix c_b;
  DenseMatrix coupled;
};

// Structural checks: one square factor per part in every term, finite entries.
void validate_ops(const ProductOperatorSum& ops);

// Dense sum of Kronecker products. Joint dimension is capped at 4096; larger
// operators must be applied term-wise through evolve. When the sum is flagged
// unitary_total the result is verified unitary within 1e-9.
DenseMatrix assemble_global(const ProductOperatorSum& ops);

// Applies each term factor-wise to the matching part axis and sums the terms
// in order. The result keeps the normalized flag only when the input had it
// and the operator sum is flagged unitary_total.
DenseState evolve(const DenseState& state, const ProductOperatorSum& ops);

// Expands evolve(state0, ops) over per-part orthonormal bases given as matrix
// columns. state0 must be a two-part product state and each basis complete.
CoefficientExpansion expand_coefficients(const DenseState& state0, const ProductOperatorSum& ops,
                                         const DenseMatrix& basis_a, const DenseMatrix& basis_b);

// Factors exp(-i h t) across the bipartition given by `parts` into a product
// operator sum. Terms with singular weight below rel_tol * (largest weight)
// are dropped and at most max_terms are kept; the term count is the
// correlation measure of the propagator. unitary_total is set when the kept
// terms reproduce the exponential to within 1e-9 of its Frobenius norm.
ProductOperatorSum propagator_from_hamiltonian(const DenseMatrix& h, double t_over_hbar,
                                               const std::vector<PartLabel>& parts,
                                               std::size_t max_terms = unbounded_rank,
                                               double rel_tol = 1e-12);

}  // namespace qsynth
