#include "qsynth/measurement.hpp"

#include "qsynth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qsynth {

namespace {

double vector_norm(const std::vector<cplx>& v) {
  double n2 = 0.0;
  for (const cplx& z : v) n2 += std::norm(z);
  return std::sqrt(n2);
}

// Resolves the listed part names to axes and checks chi against their dims.
std::vector<std::size_t> window_axes(const std::vector<PartLabel>& parts,
                                     const std::vector<std::string>& names,
                                     const DenseTensor& chi) {
  if (names.empty()) throw std::invalid_argument("subspace_project: no parts listed");
  if (names.size() >= parts.size())
    throw std::invalid_argument("subspace_project: at least one part must remain");
  if (chi.rank() != names.size())
    throw std::invalid_argument("subspace_project: chi must have one axis per listed part");

  std::vector<std::size_t> axes;
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::size_t axis = parts.size();
    for (std::size_t g = 0; g < parts.size(); ++g)
      if (parts[g].name == names[k]) axis = g;
    if (axis == parts.size())
      throw std::invalid_argument("subspace_project: unknown part " + names[k]);
    if (std::find(axes.begin(), axes.end(), axis) != axes.end())
      throw std::invalid_argument("subspace_project: part " + names[k] + " listed twice");
    if (chi.shape[k] != parts[axis].dim)
      throw std::invalid_argument("subspace_project: chi axis " + std::to_string(k) +
                                  " does not match the dim of part " + names[k]);
    axes.push_back(axis);
  }
  if (std::fabs(vector_norm(chi.entries) - 1.0) > 1e-10)
    throw std::invalid_argument("subspace_project: chi is not normalized");
  return axes;
}

DenseTensor conjugate(const DenseTensor& t) {
  DenseTensor out = t;
  for (cplx& z : out.entries) z = std::conj(z);
  return out;
}

}  // namespace

MeasurementRecord project(const DenseState& state, const std::string& part,
                          const std::vector<cplx>& ket, std::size_t outcome_index) {
  validate_state(state);
  const std::size_t axis = part_index(state, part);
  if (state.parts.size() < 2)
    throw std::invalid_argument("project: cannot remove the only part");
  if (ket.size() != state.parts[axis].dim)
    throw std::invalid_argument("project: ket length does not match the dim of part " + part);
  if (std::fabs(vector_norm(ket) - 1.0) > 1e-10)
    throw std::invalid_argument("project: measurement ket is not normalized");

  MeasurementRecord rec;
  rec.part = state.parts[axis];
  rec.outcome_index = outcome_index;
  for (std::size_t g = 0; g < state.parts.size(); ++g)
    if (g != axis) rec.post_state.parts.push_back(state.parts[g]);

  const std::size_t d = ket.size();
  std::size_t inner = 1;
  for (std::size_t k = axis + 1; k < state.amplitudes.shape.size(); ++k)
    inner *= state.amplitudes.shape[k];
  const std::size_t outer = state.amplitudes.size() / (d * inner);

  std::vector<std::size_t> rest_shape;
  for (std::size_t g = 0; g < state.parts.size(); ++g)
    if (g != axis) rest_shape.push_back(state.parts[g].dim);
  rec.post_state.amplitudes = DenseTensor(rest_shape);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < d; ++i) {
      const cplx w = std::conj(ket[i]);
      if (w == cplx(0.0, 0.0)) continue;
      const std::size_t src = (o * d + i) * inner;
      for (std::size_t in = 0; in < inner; ++in)
        rec.post_state.amplitudes.entries[o * inner + in] += w * state.amplitudes.entries[src + in];
    }

  const double norm = vector_norm(rec.post_state.amplitudes.entries);
  rec.probability = norm * norm;
  rec.post_state.normalized = std::fabs(norm - 1.0) <= 1e-10;
  rec.post_state_normalized = rec.post_state;
  if (rec.probability >= 1e-20) {
    for (cplx& z : rec.post_state_normalized.amplitudes.entries) z /= norm;
    rec.post_state_normalized.normalized = true;
  }
  return rec;
}

MeasurementRecord generalized_measure(const DenseState& state, const BasisChange& change,
                                      std::size_t outcome) {
  const std::size_t dim = change.part.dim;
  if (change.d.rows <= outcome || change.d.cols != dim)
    throw std::invalid_argument("generalized_measure: outcome row " + std::to_string(outcome) +
                                " is outside the basis table");
  std::vector<cplx> ket(dim);
  for (std::size_t j = 0; j < dim; ++j) ket[j] = std::conj(change.d(outcome, j));
  return project(state, change.part.name, ket, outcome);
}

DenseState subspace_project(const DenseState& state, const std::vector<std::string>& parts,
                            const DenseTensor& chi) {
  validate_state(state);
  const std::vector<std::size_t> axes = window_axes(state.parts, parts, chi);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < axes.size(); ++k) pairs.push_back({axes[k], k});

  DenseState out;
  for (std::size_t g = 0; g < state.parts.size(); ++g)
    if (std::find(axes.begin(), axes.end(), g) == axes.end()) out.parts.push_back(state.parts[g]);
  out.amplitudes = contract(state.amplitudes, conjugate(chi), pairs);
  out.normalized = std::fabs(vector_norm(out.amplitudes.entries) - 1.0) <= 1e-10;
  return out;
}

DenseState subspace_project(const MPSForm& mps, const std::vector<std::string>& parts,
                            const DenseTensor& chi) {
  const std::vector<std::size_t> axes = window_axes(mps.parts, parts, chi);
  for (std::size_t k = 1; k < axes.size(); ++k)
    if (axes[k] != axes[k - 1] + 1)
      throw std::invalid_argument(
          "subspace_project: listed parts are not consecutive in the chain; rebuild the dense "
          "state with dense_from_mps and project that instead");
  const std::size_t first = axes.front();
  const std::size_t last = axes.back();

  // Window sites fold into a bond_in x bond_out matrix under <chi|.
  DenseTensor window = conjugate(chi);
  for (std::size_t g = first; g <= last; ++g) {
    // window axes: (contracted-away chi axes...), bond; chi axis 0 pairs with
    // the site's physical axis, the accumulated bond with the site's bond_in.
    if (g == first)
      window = contract(window, mps.sites[g], {{0, 1}});
    else
      window = contract(window, mps.sites[g], {{0, 1}, {window.rank() - 1, 0}});
  }
  // Result shape: (bond_in of first site, bond_out of last site).

  DenseTensor acc({1});
  acc.entries[0] = 1.0;
  for (std::size_t g = 0; g < first; ++g)
    acc = contract(acc, mps.sites[g], {{acc.rank() - 1, 0}});
  acc = contract(acc, window, {{acc.rank() - 1, 0}});
  for (std::size_t g = last + 1; g < mps.sites.size(); ++g)
    acc = contract(acc, mps.sites[g], {{acc.rank() - 1, 0}});

  DenseState out;
  std::vector<std::size_t> rest_shape;
  for (std::size_t g = 0; g < mps.parts.size(); ++g)
    if (g < first || g > last) {
      out.parts.push_back(mps.parts[g]);
      rest_shape.push_back(mps.parts[g].dim);
    }
  // Drop the leading and trailing unit bond axes.
  out.amplitudes = DenseTensor(rest_shape);
  out.amplitudes.entries = acc.entries;
  out.normalized = std::fabs(vector_norm(out.amplitudes.entries) - 1.0) <= 1e-10;
  return out;
}

SampleSet sample(const DenseState& state, const std::string& part, const DenseMatrix& basis,
                 std::size_t n, std::uint64_t seed) {
  validate_state(state);
  if (n < 1) throw std::invalid_argument("sample: n must be at least 1");
  const std::size_t axis = part_index(state, part);
  const std::size_t dim = state.parts[axis].dim;
  if (basis.rows != dim || basis.cols != dim)
    throw std::invalid_argument("sample: basis must be " + std::to_string(dim) + "x" +
                                std::to_string(dim));
  const DenseMatrix gram = matmul(adjoint(basis), basis);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      if (std::abs(gram(i, j) - (i == j ? cplx(1.0) : cplx(0.0))) > 1e-10)
        throw std::invalid_argument("sample: basis is not a complete orthonormal family");

  std::vector<double> cumulative(dim);
  double total = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    std::vector<cplx> ket(dim);
    for (std::size_t i = 0; i < dim; ++i) ket[i] = basis(i, j);
    total += project(state, part, ket, j).probability;
    cumulative[j] = total;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("sample: outcome probabilities sum to " + std::to_string(total));

  SampleSet out;
  out.seed = seed;
  out.n = n;
  CounterRng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.next_double() * total;
    std::size_t j = 0;
    while (j + 1 < dim && u >= cumulative[j]) ++j;
    ++out.counts[j];
  }
  return out;
}

std::vector<cplx> unitary_dft(const std::vector<cplx>& c) {
  const std::size_t m = c.size();
  if (m < 1) throw std::invalid_argument("unitary_dft: empty input");
  std::vector<cplx> twiddle(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
    twiddle[k] = cplx(std::cos(angle), std::sin(angle));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<cplx> f(m);
  for (std::size_t v = 0; v < m; ++v) {
    cplx acc(0.0, 0.0);
    for (std::size_t x = 0; x < m; ++x) acc += twiddle[(v * x) % m] * c[x];
    f[v] = scale * acc;
  }
  return f;
}

Spectrum fourier_analyze(const std::vector<cplx>& coefficients) {
  const std::vector<cplx> f = unitary_dft(coefficients);
  Spectrum out;
  out.frequencies.resize(f.size());
  out.magnitudes.resize(f.size());
  out.phases.resize(f.size());
  for (std::size_t v = 0; v < f.size(); ++v) {
    out.frequencies[v] = v;
    out.magnitudes[v] = std::abs(f[v]);
    double phase = std::arg(f[v]);
    if (phase <= -std::numbers::pi) phase = std::numbers::pi;
    out.phases[v] = phase;
  }
  return out;
}

}  // namespace qsynth
