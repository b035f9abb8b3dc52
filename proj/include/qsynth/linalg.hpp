#pragma once
// Dense complex linear algebra kernel: matrices, tensors, SVD, Hermitian
// eigendecomposition, contraction, and Hermitian matrix exponentials.
// Self-contained 64-bit floating point, no external numerical dependency.
// Every routine is deterministic: fixed sweep orders and a fixed
// singular-vector sign convention keep golden values bit-stable.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace qsynth {

using cplx = std::complex<double>;

// Row-major complex matrix.
struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<cplx> entries;  // rows * cols, row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c) {}

  cplx& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

// Dense tensor in lexicographic (last-axis-fastest) order. An empty shape is
// a scalar holding exactly one entry.
struct DenseTensor {
  std::vector<std::size_t> shape;
  std::vector<cplx> entries;

  DenseTensor() : entries(1) {}
  explicit DenseTensor(std::vector<std::size_t> s);

  std::size_t size() const { return entries.size(); }
  std::size_t rank() const { return shape.size(); }
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

// Basic matrix utilities.
DenseMatrix identity(std::size_t n);
DenseMatrix adjoint(const DenseMatrix& a);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_norm(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
bool all_finite(const DenseMatrix& a);

// Reorders tensor axes; perm[k] names the input axis that becomes output axis k.
DenseTensor permute_axes(const DenseTensor& t, const std::vector<std::size_t>& perm);

// Standard tensor contraction over the listed (axis-of-a, axis-of-b) pairs.
// Output shape: uncontracted axes of a (in order) followed by uncontracted
// axes of b. Full pairings yield a scalar (empty shape).
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<std::size_t, std::size_t>>& axis_pairs);

inline constexpr std::size_t unbounded_rank = std::numeric_limits<std::size_t>::max();

// Thin SVD with truncation bookkeeping. `left` holds left singular vectors as
// columns, `right_dagger` holds conjugated right singular vectors as rows, so
// a = left * diag(singular_values) * right_dagger up to truncation_error.
struct SVDResult {
  DenseMatrix left;
  std::vector<double> singular_values;  // descending, non-negative
  DenseMatrix right_dagger;
  double truncation_error = 0.0;  // sqrt(sum of squared discarded values)

  std::size_t rank() const { return singular_values.size(); }
};

// One-sided Jacobi SVD. After the full decomposition, values below
// rel_tol * sigma_0 are discarded and the rank is capped at max_rank;
// truncation_error accounts for every discard. Sign convention: the first
// entry of each left singular vector with magnitude > 1e-12 is made
// real-positive (the compensating phase goes into right_dagger). Degenerate
// singular values are ordered by the first-nonzero-component rule on the
// left vectors so ties resolve identically on every platform.
SVDResult svd(const DenseMatrix& a, std::size_t max_rank = unbounded_rank,
              double rel_tol = 1e-12);

struct EigResult {
  std::vector<double> eigenvalues;  // ascending
  DenseMatrix eigenvectors;         // columns, unitary
};

// Hermitian eigendecomposition via Householder tridiagonalization and
// implicit-shift QL. Inputs must be Hermitian within 1e-10 elementwise.
// A purely real input takes a real-arithmetic fast path.
EigResult hermitian_eig(const DenseMatrix& h);

// Lowest eigenpair only: same reduction, but eigenvalue-only iteration plus
// tridiagonal inverse iteration instead of full eigenvector accumulation.
// Roughly 3x faster than hermitian_eig on large real matrices, which makes
// grid ground states affordable.
std::pair<double, std::vector<cplx>> lowest_eigenpair(const DenseMatrix& h);

// exp(-i * h * t_over_hbar) for Hermitian h, built from hermitian_eig.
DenseMatrix matrix_exponential_i(const DenseMatrix& h, double t_over_hbar);

}  // namespace qsynth
