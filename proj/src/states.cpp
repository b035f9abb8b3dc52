#include "qsynth/states.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace qsynth {

double state_norm(const DenseState& s) {
  double n2 = 0.0;
  for (const cplx& z : s.amplitudes.entries) n2 += std::norm(z);
  return std::sqrt(n2);
}

void validate_state(const DenseState& s) {
  if (s.parts.empty()) throw std::invalid_argument("state: needs at least one part");
  std::vector<std::size_t> dims;
  std::set<std::string> names;
  for (const PartLabel& p : s.parts) {
    if (p.dim < 1) throw std::invalid_argument("state: part " + p.name + " has dim 0");
    if (!names.insert(p.name).second)
      throw std::invalid_argument("state: duplicate part name " + p.name);
    dims.push_back(p.dim);
  }
  if (s.amplitudes.shape != dims)
    throw std::invalid_argument("state: amplitude shape disagrees with part dims");
  for (const cplx& z : s.amplitudes.entries)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument("state: non-finite amplitude");
  if (s.normalized && std::fabs(state_norm(s) - 1.0) > 1e-10)
    throw std::invalid_argument("state: flagged normalized but norm is " +
                                std::to_string(state_norm(s)));
}

std::size_t part_index(const DenseState& s, const std::string& name) {
  for (std::size_t i = 0; i < s.parts.size(); ++i)
    if (s.parts[i].name == name) return i;
  throw std::invalid_argument("state: unknown part " + name);
}

DenseState product_state(const std::vector<std::vector<cplx>>& locals,
                         const std::vector<std::string>& names) {
  if (locals.empty()) throw std::invalid_argument("product_state: no local vectors");
  if (!names.empty() && names.size() != locals.size())
    throw std::invalid_argument("product_state: name/vector count mismatch");

  DenseState out;
  std::vector<std::size_t> dims;
  for (std::size_t k = 0; k < locals.size(); ++k) {
    double n2 = 0.0;
    for (const cplx& z : locals[k]) n2 += std::norm(z);
    if (std::fabs(std::sqrt(n2) - 1.0) > 1e-10)
      throw std::invalid_argument("product_state: local vector " + std::to_string(k) +
                                  " is not normalized");
    out.parts.push_back({names.empty() ? "P" + std::to_string(k + 1) : names[k],
                         locals[k].size()});
    dims.push_back(locals[k].size());
  }

  out.amplitudes = DenseTensor(dims);
  for (std::size_t lin = 0; lin < out.amplitudes.size(); ++lin) {
    std::size_t rem = lin;
    cplx v(1.0, 0.0);
    for (std::size_t k = locals.size(); k-- > 0;) {
      v *= locals[k][rem % dims[k]];
      rem /= dims[k];
    }
    out.amplitudes.entries[lin] = v;
  }
  out.normalized = true;
  validate_state(out);
  return out;
}

DenseState bell_state(int which, int sign) {
  if ((which != 1 && which != 2) || (sign != 1 && sign != -1))
    throw std::invalid_argument("bell_state: which must be 1|2 and sign +1|-1");
  DenseState s;
  s.parts = {{"A", 2}, {"B", 2}};
  s.amplitudes = DenseTensor({2, 2});
  const double v = 1.0 / std::sqrt(2.0);
  if (which == 1) {
    s.amplitudes.entries[1] = v;         // |0>|1>
    s.amplitudes.entries[2] = sign * v;  // |1>|0>
  } else {
    s.amplitudes.entries[0] = v;         // |0>|0>
    s.amplitudes.entries[3] = sign * v;  // |1>|1>
  }
  s.normalized = true;
  return s;
}

namespace {

// Flattens amplitudes to a (left block) x (right block) matrix at `cut`.
DenseMatrix cut_matrix(const DenseState& state, std::size_t cut) {
  std::size_t dl = 1, dr = 1;
  for (std::size_t k = 0; k < cut; ++k) dl *= state.parts[k].dim;
  for (std::size_t k = cut; k < state.parts.size(); ++k) dr *= state.parts[k].dim;
  DenseMatrix m(dl, dr);
  m.entries = state.amplitudes.entries;  // row-major == lexicographic
  return m;
}

}  // namespace

SchmidtForm schmidt_decompose(const DenseState& state, std::size_t cut) {
  validate_state(state);
  if (cut < 1 || cut >= state.parts.size())
    throw std::invalid_argument("schmidt_decompose: cut must split the parts in two");

  const SVDResult r = svd(cut_matrix(state, cut));
  SchmidtForm out;
  out.cut = cut;
  out.alphas = r.singular_values;
  out.left_states = r.left;
  // Right family columns are the unconjugated rows of right_dagger, so the
  // state rebuilds as sum_i alpha_i |left_i> (x) |right_i>.
  out.right_states = DenseMatrix(r.right_dagger.cols, r.rank());
  for (std::size_t i = 0; i < r.rank(); ++i)
    for (std::size_t b = 0; b < r.right_dagger.cols; ++b)
      out.right_states(b, i) = r.right_dagger(i, b);
  return out;
}

MPSForm mps_from_dense(const DenseState& state, double rel_tol, std::size_t max_bond) {
  validate_state(state);
  if (!state.normalized)
    throw std::invalid_argument("mps_from_dense: source state must be normalized");

  MPSForm out;
  out.parts = state.parts;
  const std::size_t np = state.parts.size();

  // Sweep left to right, splitting one site off the remainder each step.
  DenseMatrix rem(1, state.amplitudes.size());
  rem.entries = state.amplitudes.entries;
  std::size_t bond_in = 1;
  double trunc2 = 0.0;
  for (std::size_t g = 0; g + 1 < np; ++g) {
    const std::size_t d = state.parts[g].dim;
    const std::size_t rest = rem.cols / d;
    DenseMatrix m(bond_in * d, rest);
    m.entries = rem.entries;
    const SVDResult r = svd(m, max_bond, rel_tol);

    DenseTensor site({bond_in, d, r.rank()});
    for (std::size_t i = 0; i < bond_in * d; ++i)
      for (std::size_t j = 0; j < r.rank(); ++j)
        site.entries[i * r.rank() + j] = r.left(i, j);
    out.sites.push_back(std::move(site));
    out.bond_weights.push_back(r.singular_values);
    trunc2 += r.truncation_error * r.truncation_error;

    rem = DenseMatrix(r.rank(), rest);
    for (std::size_t i = 0; i < r.rank(); ++i)
      for (std::size_t j = 0; j < rest; ++j)
        rem(i, j) = r.singular_values[i] * r.right_dagger(i, j);
    bond_in = r.rank();
  }
  // Terminal site keeps the remaining weight; terminal bond has dimension 1.
  DenseTensor last({bond_in, state.parts.back().dim, 1});
  last.entries = rem.entries;
  out.sites.push_back(std::move(last));
  out.truncation_error = std::sqrt(trunc2);
  return out;
}

DenseState dense_from_mps(const MPSForm& mps) {
  if (mps.sites.empty()) throw std::invalid_argument("dense_from_mps: empty chain");
  if (mps.sites.size() != mps.parts.size())
    throw std::invalid_argument("dense_from_mps: site/part count mismatch");
  for (std::size_t g = 0; g < mps.sites.size(); ++g)
    if (mps.sites[g].rank() != 3 || mps.sites[g].shape[1] != mps.parts[g].dim)
      throw std::invalid_argument("dense_from_mps: site " + std::to_string(g) +
                                  " has the wrong shape");
  if (mps.sites.front().shape[0] != 1 || mps.sites.back().shape[2] != 1)
    throw std::invalid_argument("dense_from_mps: boundary bonds must have dimension 1");

  // Running contraction carries shape (d1, ..., dg, bond).
  DenseTensor cur = mps.sites[0];
  cur.shape = {mps.sites[0].shape[1], mps.sites[0].shape[2]};  // drop the unit bond-in
  for (std::size_t g = 1; g < mps.sites.size(); ++g)
    cur = contract(cur, mps.sites[g], {{cur.rank() - 1, 0}});

  DenseState out;
  out.parts = mps.parts;
  std::vector<std::size_t> dims;
  for (const PartLabel& p : mps.parts) dims.push_back(p.dim);
  out.amplitudes = DenseTensor(dims);
  out.amplitudes.entries = cur.entries;  // trailing unit bond folds away
  out.normalized = std::fabs(state_norm(out) - 1.0) <= 1e-10;
  return out;
}

}  // namespace qsynth
