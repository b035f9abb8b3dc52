#include "qsynth/evolution.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qsynth {

namespace {

constexpr std::size_t dense_assembly_bound = 4096;

std::size_t joint_dim(const std::vector<PartLabel>& parts) {
  std::size_t n = 1;
  for (const PartLabel& p : parts) n *= p.dim;
  return n;
}

// out[..., i, ...] = sum_j m(i, j) t[..., j, ...] along `axis`.
DenseTensor apply_factor(const DenseTensor& t, const DenseMatrix& m, std::size_t axis) {
  const std::size_t d = t.shape[axis];
  std::size_t inner = 1;
  for (std::size_t k = axis + 1; k < t.shape.size(); ++k) inner *= t.shape[k];
  const std::size_t outer = t.size() / (d * inner);

  DenseTensor out(t.shape);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t dst = (o * d + i) * inner;
      for (std::size_t j = 0; j < d; ++j) {
        const cplx w = m(i, j);
        if (w == cplx(0.0, 0.0)) continue;
        const std::size_t src = (o * d + j) * inner;
        for (std::size_t in = 0; in < inner; ++in) out.entries[dst + in] += w * t.entries[src + in];
      }
    }
  return out;
}

double unitarity_defect(const DenseMatrix& g) {
  const DenseMatrix gram = matmul(adjoint(g), g);
  double worst = 0.0;
  for (std::size_t i = 0; i < gram.rows; ++i)
    for (std::size_t j = 0; j < gram.cols; ++j)
      worst = std::max(worst, std::abs(gram(i, j) - (i == j ? cplx(1.0) : cplx(0.0))));
  return worst;
}

void require_orthonormal_basis(const DenseMatrix& basis, std::size_t dim, const std::string& which) {
  if (basis.rows != dim || basis.cols != dim)
    throw std::invalid_argument("expand_coefficients: basis " + which + " must be " +
                                std::to_string(dim) + "x" + std::to_string(dim));
  const DenseMatrix gram = matmul(adjoint(basis), basis);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      if (std::abs(gram(i, j) - (i == j ? cplx(1.0) : cplx(0.0))) > 1e-10)
        throw std::invalid_argument("expand_coefficients: basis " + which +
                                    " is rank-deficient or not orthonormal");
}

}  // namespace

void validate_ops(const ProductOperatorSum& ops) {
  if (ops.parts.empty()) throw std::invalid_argument("operator sum: needs at least one part");
  if (ops.terms.empty()) throw std::invalid_argument("operator sum: needs at least one term");
  for (std::size_t a = 0; a < ops.terms.size(); ++a) {
    if (ops.terms[a].size() != ops.parts.size())
      throw std::invalid_argument("operator sum: term " + std::to_string(a) +
                                  " does not cover every part");
    for (std::size_t g = 0; g < ops.parts.size(); ++g) {
      const DenseMatrix& f = ops.terms[a][g];
      if (f.rows != ops.parts[g].dim || f.cols != ops.parts[g].dim)
        throw std::invalid_argument("operator sum: term " + std::to_string(a) + " factor for part " +
                                    ops.parts[g].name + " is not square of dim " +
                                    std::to_string(ops.parts[g].dim));
      if (!all_finite(f))
        throw std::invalid_argument("operator sum: non-finite factor entry");
    }
  }
}

DenseMatrix assemble_global(const ProductOperatorSum& ops) {
  validate_ops(ops);
  const std::size_t n = joint_dim(ops.parts);
  if (n > dense_assembly_bound)
    throw std::invalid_argument("assemble_global: joint dimension " + std::to_string(n) +
                                " exceeds " + std::to_string(dense_assembly_bound) +
                                "; apply the terms factor-wise with evolve instead");

  DenseMatrix global(n, n);
  for (const auto& term : ops.terms) {
    DenseMatrix acc = term[0];
    for (std::size_t g = 1; g < term.size(); ++g) acc = kron(acc, term[g]);
    for (std::size_t i = 0; i < global.entries.size(); ++i) global.entries[i] += acc.entries[i];
  }

  if (ops.unitary_total && unitarity_defect(global) > 1e-9)
    throw std::invalid_argument("assemble_global: sum flagged unitary_total but is not unitary");
  return global;
}

DenseState evolve(const DenseState& state, const ProductOperatorSum& ops) {
  validate_state(state);
  validate_ops(ops);
  if (ops.parts.size() != state.parts.size())
    throw std::invalid_argument("evolve: operator covers " + std::to_string(ops.parts.size()) +
                                " parts but the state has " + std::to_string(state.parts.size()));
  for (std::size_t g = 0; g < state.parts.size(); ++g)
    if (ops.parts[g].name != state.parts[g].name || ops.parts[g].dim != state.parts[g].dim)
      throw std::invalid_argument("evolve: part " + std::to_string(g) +
                                  " disagrees between operator and state");

  DenseState out;
  out.parts = state.parts;
  out.amplitudes = DenseTensor(state.amplitudes.shape);
  for (const auto& term : ops.terms) {
    DenseTensor piece = state.amplitudes;
    for (std::size_t g = 0; g < term.size(); ++g) piece = apply_factor(piece, term[g], g);
    for (std::size_t i = 0; i < out.amplitudes.entries.size(); ++i)
      out.amplitudes.entries[i] += piece.entries[i];
  }
  out.normalized = state.normalized && ops.unitary_total;
  if (out.normalized && std::fabs(state_norm(out) - 1.0) > 1e-9)
    throw std::runtime_error("evolve: unitary_total operator failed to conserve the norm");
  return out;
}

CoefficientExpansion expand_coefficients(const DenseState& state0, const ProductOperatorSum& ops,
                                         const DenseMatrix& basis_a, const DenseMatrix& basis_b) {
  validate_state(state0);
  validate_ops(ops);
  if (state0.parts.size() != 2 || ops.parts.size() != 2)
    throw std::invalid_argument("expand_coefficients: needs a two-part state and operator");
  const std::size_t da = state0.parts[0].dim;
  const std::size_t db = state0.parts[1].dim;
  require_orthonormal_basis(basis_a, da, state0.parts[0].name);
  require_orthonormal_basis(basis_b, db, state0.parts[1].name);

  const SchmidtForm split = schmidt_decompose(state0, 1);
  if (split.alphas.size() != 1)
    throw std::invalid_argument("expand_coefficients: state0 is not a product state");
  std::vector<cplx> psi_a(da), psi_b(db);
  for (std::size_t x = 0; x < da; ++x) psi_a[x] = split.left_states(x, 0);
  for (std::size_t x = 0; x < db; ++x) psi_b[x] = split.alphas[0] * split.right_states(x, 0);

  const std::size_t nterms = ops.terms.size();
  CoefficientExpansion out;
  out.c_a = DenseMatrix(da, nterms);
  out.c_b = DenseMatrix(db, nterms);
  for (std::size_t alpha = 0; alpha < nterms; ++alpha) {
    for (std::size_t j = 0; j < da; ++j) {
      cplx c(0.0, 0.0);
      for (std::size_t x = 0; x < da; ++x)
        for (std::size_t y = 0; y < da; ++y)
          c += std::conj(basis_a(x, j)) * ops.terms[alpha][0](x, y) * psi_a[y];
      out.c_a(j, alpha) = c;
    }
    for (std::size_t j = 0; j < db; ++j) {
      cplx c(0.0, 0.0);
      for (std::size_t x = 0; x < db; ++x)
        for (std::size_t y = 0; y < db; ++y)
          c += std::conj(basis_b(x, j)) * ops.terms[alpha][1](x, y) * psi_b[y];
      out.c_b(j, alpha) = c;
    }
  }

  out.coupled = DenseMatrix(da, db);
  for (std::size_t j = 0; j < da; ++j)
    for (std::size_t jp = 0; jp < db; ++jp) {
      cplx c(0.0, 0.0);
      for (std::size_t alpha = 0; alpha < nterms; ++alpha)
        c += out.c_a(j, alpha) * out.c_b(jp, alpha);
      out.coupled(j, jp) = c;
    }
  return out;
}

ProductOperatorSum propagator_from_hamiltonian(const DenseMatrix& h, double t_over_hbar,
                                               const std::vector<PartLabel>& parts,
                                               std::size_t max_terms, double rel_tol) {
  if (parts.size() != 2)
    throw std::invalid_argument(
        "propagator_from_hamiltonian: only bipartite factorizations are supported; evolve "
        "multipart systems with the dense exponential directly");
  const std::size_t da = parts[0].dim;
  const std::size_t db = parts[1].dim;
  if (da * db != h.rows || h.rows != h.cols)
    throw std::invalid_argument("propagator_from_hamiltonian: h must be square over dim " +
                                std::to_string(da * db));
  if (da * db > dense_assembly_bound)
    throw std::invalid_argument("propagator_from_hamiltonian: joint dimension exceeds " +
                                std::to_string(dense_assembly_bound));

  const DenseMatrix u = matrix_exponential_i(h, t_over_hbar);

  // Reshuffle U[(a b), (a' b')] into R[(a a'), (b b')] so that the singular
  // families of R are vectorized per-part factors.
  DenseMatrix r(da * da, db * db);
  for (std::size_t a = 0; a < da; ++a)
    for (std::size_t ap = 0; ap < da; ++ap)
      for (std::size_t b = 0; b < db; ++b)
        for (std::size_t bp = 0; bp < db; ++bp)
          r(a * da + ap, b * db + bp) = u(a * db + b, ap * db + bp);

  const SVDResult dec = svd(r, max_terms, rel_tol);

  ProductOperatorSum ops;
  ops.parts = parts;
  for (std::size_t alpha = 0; alpha < dec.rank(); ++alpha) {
    const double scale = std::sqrt(dec.singular_values[alpha]);
    DenseMatrix fa(da, da), fb(db, db);
    for (std::size_t a = 0; a < da; ++a)
      for (std::size_t ap = 0; ap < da; ++ap) fa(a, ap) = scale * dec.left(a * da + ap, alpha);
    for (std::size_t b = 0; b < db; ++b)
      for (std::size_t bp = 0; bp < db; ++bp) fb(b, bp) = scale * dec.right_dagger(alpha, b * db + bp);
    ops.terms.push_back({fa, fb});
  }
  ops.unitary_total = dec.truncation_error <= 1e-9 * frobenius_norm(u);
  return ops;
}

}  // namespace qsynth
