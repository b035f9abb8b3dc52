#pragma once
// Multipartite state representations: dense amplitude tensors over labeled
// parts, bipartite Schmidt forms, and matrix product states, plus the
// conversions among them. Local bases are abstract orthonormal labels; what
// the labels mean (grid points, bitstrings) is the caller's business.

#include <string>
#include <vector>

#include "qsynth/linalg.hpp"

namespace qsynth {

struct PartLabel {
  std::string name;
  std::size_t dim = 0;
};

struct DenseState {
  std::vector<PartLabel> parts;
  DenseTensor amplitudes;  // shape = part dims
  // Unit norm is promised only when this flag is set; unnormalized
  // intermediates (post-measurement states) carry it off.
  bool normalized = true;
};

double state_norm(const DenseState& s);

// Throws when dims/shape disagree, names collide, entries are non-finite, or
// the normalized flag lies by more than 1e-10.
void validate_state(const DenseState& s);

std::size_t part_index(const DenseState& s, const std::string& name);

// Bipartite Schmidt data across a cut (`cut` = number of parts on the left).
// left_states/right_states hold the orthonormal families as columns, so the
// source state is sum_i alphas[i] * left_col(i) (x) right_col(i).
struct SchmidtForm {
  std::size_t cut = 1;
  std::vector<double> alphas;  // descending, non-negative
  DenseMatrix left_states;
  DenseMatrix right_states;
};

// Open-boundary MPS in left-canonical gauge. Site tensors have shape
// (bond_in, physical, bond_out) with boundary bonds of dimension 1; every
// site except the last has orthonormal columns when reshaped to
// (bond_in * physical) x bond_out, and the last site carries the remaining
// weight (unit norm for an untruncated normalized source). bond_weights[c]
// holds the Schmidt values across interior bond c; they are bookkeeping for
// downstream consumers and are NOT contraction factors.
struct MPSForm {
  std::vector<PartLabel> parts;
  std::vector<DenseTensor> sites;
  std::vector<std::vector<double>> bond_weights;
  double truncation_error = 0.0;
};

// A rotated measurement basis for one part. Row k of d holds the bra of
// outcome k in the part's current basis: d(k, j) = <chi_k | psi_j>.
struct BasisChange {
  PartLabel part;
  DenseMatrix d;
};

// Outer product of normalized local vectors. Default part names P1..Pn.
DenseState product_state(const std::vector<std::vector<cplx>>& locals,
                         const std::vector<std::string>& names = {});

// which = 1: (|0>|1> +/- |1>|0>)/sqrt(2); which = 2: (|0>|0> +/- |1>|1>)/sqrt(2).
DenseState bell_state(int which, int sign);

SchmidtForm schmidt_decompose(const DenseState& state, std::size_t cut);

MPSForm mps_from_dense(const DenseState& state, double rel_tol = 1e-12,
                       std::size_t max_bond = unbounded_rank);

DenseState dense_from_mps(const MPSForm& mps);

}  // namespace qsynth
