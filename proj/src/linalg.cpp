#include "qsynth/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace qsynth {

namespace {

constexpr double kTiny = 1e-300;

double abs2(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

// Scalar helpers so the eigensolver core can be instantiated for both
// double (real-symmetric fast path) and cplx.
inline double conj_s(double x) { return x; }
inline cplx conj_s(cplx x) { return std::conj(x); }
inline double real_s(double x) { return x; }
inline double real_s(cplx x) { return x.real(); }
inline double abs_s(double x) { return std::fabs(x); }
inline double abs_s(cplx x) { return std::abs(x); }

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> s)
    : shape(std::move(s)), entries(shape_product(shape)) {}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

DenseMatrix identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix adjoint(const DenseMatrix& a) {
  DenseMatrix m(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) m(j, i) = std::conj(a(i, j));
  return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                std::to_string(a.cols) + " vs " + std::to_string(b.rows) + ")");
  DenseMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      const cplx* brow = &b.entries[k * b.cols];
      cplx* crow = &c.entries[i * b.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows * b.rows, a.cols * b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx(0.0, 0.0)) continue;
      for (std::size_t k = 0; k < b.rows; ++k)
        for (std::size_t l = 0; l < b.cols; ++l)
          c(i * b.rows + k, j * b.cols + l) = aij * b(k, l);
    }
  return c;
}

double frobenius_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (const cplx& z : a.entries) s += abs2(z);
  return std::sqrt(s);
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    m = std::max(m, std::abs(a.entries[i] - b.entries[i]));
  return m;
}

bool all_finite(const DenseMatrix& a) {
  for (const cplx& z : a.entries)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

DenseTensor permute_axes(const DenseTensor& t, const std::vector<std::size_t>& perm) {
  if (perm.size() != t.rank()) throw std::invalid_argument("permute_axes: wrong permutation size");
  const std::size_t r = t.rank();
  std::vector<std::size_t> out_shape(r);
  for (std::size_t k = 0; k < r; ++k) out_shape[k] = t.shape[perm[k]];

  // Strides of the input tensor.
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t k = r; k-- > 1;) in_stride[k - 1] = in_stride[k] * t.shape[k];

  DenseTensor out(out_shape);
  if (r == 0) {
    out.entries = t.entries;
    return out;
  }
  std::vector<std::size_t> idx(r, 0);  // multi-index over the output
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    std::size_t src = 0;
    for (std::size_t k = 0; k < r; ++k) src += idx[k] * in_stride[perm[k]];
    out.entries[lin] = t.entries[src];
    for (std::size_t k = r; k-- > 0;) {
      if (++idx[k] < out_shape[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<std::size_t, std::size_t>>& axis_pairs) {
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  for (const auto& [ax, bx] : axis_pairs) {
    if (ax >= a.rank() || bx >= b.rank() || used_a[ax] || used_b[bx])
      throw std::invalid_argument("contract: bad axis pair (" + std::to_string(ax) + ", " +
                                  std::to_string(bx) + ")");
    if (a.shape[ax] != b.shape[bx])
      throw std::invalid_argument("contract: dimension mismatch on axis pair (" +
                                  std::to_string(ax) + ", " + std::to_string(bx) + "): " +
                                  std::to_string(a.shape[ax]) + " vs " +
                                  std::to_string(b.shape[bx]));
    used_a[ax] = used_b[bx] = true;
  }

  std::vector<std::size_t> free_a, free_b, perm_a, perm_b;
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (!used_a[k]) {
      free_a.push_back(a.shape[k]);
      perm_a.push_back(k);
    }
  for (const auto& p : axis_pairs) perm_a.push_back(p.first);
  for (const auto& p : axis_pairs) perm_b.push_back(p.second);
  for (std::size_t k = 0; k < b.rank(); ++k)
    if (!used_b[k]) {
      free_b.push_back(b.shape[k]);
      perm_b.push_back(k);
    }

  const DenseTensor pa = permute_axes(a, perm_a);
  const DenseTensor pb = permute_axes(b, perm_b);

  std::size_t m = shape_product(free_a), n = shape_product(free_b), kk = 1;
  for (const auto& p : axis_pairs) kk *= a.shape[p.first];

  std::vector<std::size_t> out_shape = free_a;
  out_shape.insert(out_shape.end(), free_b.begin(), free_b.end());
  DenseTensor out(out_shape);
  // (m x kk) * (kk x n), row-major.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < kk; ++k) {
      const cplx aik = pa.entries[i * kk + k];
      if (aik == cplx(0.0, 0.0)) continue;
      const cplx* brow = &pb.entries[k * n];
      cplx* crow = &out.entries[i * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVD: one-sided Jacobi on the tall orientation.
// ---------------------------------------------------------------------------

namespace {

// Orthogonalizes the columns of `cols` in place with complex Jacobi rotations,
// accumulating the applied rotations into `v` (also stored as columns).
void jacobi_orthogonalize(std::vector<std::vector<cplx>>& cols,
                          std::vector<std::vector<cplx>>& v) {
  const std::size_t n = cols.size();
  if (n < 2) return;
  const double tol = 1e-14;
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0;
        cplx apq(0.0, 0.0);
        const std::size_t m = cols[p].size();
        for (std::size_t i = 0; i < m; ++i) {
          app += abs2(cols[p][i]);
          aqq += abs2(cols[q][i]);
          apq += std::conj(cols[p][i]) * cols[q][i];
        }
        const double off = std::abs(apq);
        if (off <= tol * std::sqrt(app * aqq) || off < kTiny) continue;
        rotated = true;
        // Zero the (p,q) Gram entry: phase-align, then a real Jacobi rotation.
        const cplx phase = apq / off;
        const double tau = (aqq - app) / (2.0 * off);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const cplx ph_conj = std::conj(phase);
        for (std::size_t i = 0; i < m; ++i) {
          const cplx bp = cols[p][i], bq = cols[q][i];
          cols[p][i] = c * bp - s * ph_conj * bq;
          cols[q][i] = s * phase * bp + c * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const cplx vp = v[p][i], vq = v[q][i];
          v[p][i] = c * vp - s * ph_conj * vq;
          v[q][i] = s * phase * vp + c * vq;
        }
      }
    }
    if (!rotated) return;
  }
}

// Deterministic ordering for (numerically) equal singular values: first by
// the left vector's first-nonzero index, then lexicographically by (re, im).
bool left_vector_before(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  auto first_big = [](const std::vector<cplx>& u) {
    for (std::size_t i = 0; i < u.size(); ++i)
      if (std::abs(u[i]) > 1e-12) return i;
    return u.size();
  };
  const std::size_t fa = first_big(a), fb = first_big(b);
  if (fa != fb) return fa < fb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::fabs(a[i].real() - b[i].real()) > 1e-12) return a[i].real() > b[i].real();
    if (std::fabs(a[i].imag() - b[i].imag()) > 1e-12) return a[i].imag() > b[i].imag();
  }
  return false;
}

// Replaces a numerically-zero column by the first canonical vector orthogonal
// to every column in `fixed` (Gram-Schmidt against them), so truncation-free
// results keep orthonormal factors even for rank-deficient input.
std::vector<cplx> orthonormal_fill(const std::vector<std::vector<cplx>>& fixed,
                                   std::size_t dim, const std::vector<bool>& is_fixed) {
  for (std::size_t e = 0; e < dim; ++e) {
    std::vector<cplx> cand(dim, cplx(0.0, 0.0));
    cand[e] = 1.0;
    for (std::size_t j = 0; j < fixed.size(); ++j) {
      if (!is_fixed[j]) continue;
      cplx ov(0.0, 0.0);
      for (std::size_t i = 0; i < dim; ++i) ov += std::conj(fixed[j][i]) * cand[i];
      for (std::size_t i = 0; i < dim; ++i) cand[i] -= ov * fixed[j][i];
    }
    double nrm2 = 0.0;
    for (const cplx& z : cand) nrm2 += abs2(z);
    if (nrm2 > 0.25) {  // candidate survives projection; safe to normalize
      const double inv = 1.0 / std::sqrt(nrm2);
      for (cplx& z : cand) z *= inv;
      return cand;
    }
  }
  throw std::runtime_error("svd: failed to complete an orthonormal basis");
}

}  // namespace

SVDResult svd(const DenseMatrix& a, std::size_t max_rank, double rel_tol) {
  if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("svd: empty matrix");
  if (!all_finite(a)) throw std::invalid_argument("svd: input has non-finite entries");
  if (!(rel_tol >= 0.0 && rel_tol < 1.0))
    throw std::invalid_argument("svd: rel_tol must lie in [0, 1)");
  if (max_rank == 0) throw std::invalid_argument("svd: max_rank must be positive");

  const bool transposed = a.rows < a.cols;
  const DenseMatrix& src = a;
  const std::size_t m = transposed ? a.cols : a.rows;  // tall dimension
  const std::size_t n = transposed ? a.rows : a.cols;

  // Work on B (m x n, m >= n) held as columns; B = a or B = a^dagger.
  std::vector<std::vector<cplx>> cols(n, std::vector<cplx>(m));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      cols[j][i] = transposed ? std::conj(src(j, i)) : src(i, j);

  std::vector<std::vector<cplx>> rot(n, std::vector<cplx>(n, cplx(0.0, 0.0)));
  for (std::size_t j = 0; j < n; ++j) rot[j][j] = 1.0;

  jacobi_orthogonalize(cols, rot);

  // Singular values and normalized tall-side vectors.
  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s2 = 0.0;
    for (const cplx& z : cols[j]) s2 += abs2(z);
    sig[j] = std::sqrt(s2);
  }
  const double sig_max = *std::max_element(sig.begin(), sig.end());
  const double zero_cut = sig_max * 1e-15;

  std::vector<std::vector<cplx>> u(n);
  std::vector<bool> u_ok(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    if (sig[j] > zero_cut && sig[j] > kTiny) {
      u[j] = cols[j];
      const double inv = 1.0 / sig[j];
      for (cplx& z : u[j]) z *= inv;
      u_ok[j] = true;
    } else {
      sig[j] = 0.0;
      u[j].assign(m, cplx(0.0, 0.0));  // filled in later if kept
    }
  }

  // The left factor of the original matrix: u columns when a was tall,
  // rotation columns when it was wide. Phase-fix the *left* columns and push
  // the compensating phase onto the other side so the product is unchanged.
  // The other side is copied out conjugated (it becomes right_dagger), so the
  // compensation there is also a factor f: conj(f * w) = conj(f) * conj(w).
  auto& left_cols = transposed ? rot : u;
  auto& other_cols = transposed ? u : rot;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t k = left_cols[j].size();
    for (std::size_t i = 0; i < left_cols[j].size(); ++i)
      if (std::abs(left_cols[j][i]) > 1e-12) {
        k = i;
        break;
      }
    if (k == left_cols[j].size()) continue;
    const cplx f = std::conj(left_cols[j][k]) / std::abs(left_cols[j][k]);
    for (cplx& z : left_cols[j]) z *= f;
    for (cplx& z : other_cols[j]) z *= f;
  }

  // Descending order with the deterministic tie rule.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (std::fabs(sig[x] - sig[y]) > 1e-12 * (sig_max > 0 ? sig_max : 1.0))
      return sig[x] > sig[y];
    return left_vector_before(left_cols[x], left_cols[y]);
  });

  // Truncate: values below rel_tol * sigma_0 go first, then the rank cap.
  const double cut = rel_tol * sig[order[0]];
  std::size_t keep = 0;
  while (keep < n && sig[order[keep]] >= cut) ++keep;
  if (keep == 0) keep = 1;  // the leading value always survives
  keep = std::min(keep, std::min(max_rank, n));

  double discarded = 0.0;
  for (std::size_t j = keep; j < n; ++j) discarded += sig[order[j]] * sig[order[j]];

  // Complete orthonormal sets for kept zero-sigma columns of u. These carry
  // no weight, so the sign convention can be applied without compensation.
  {
    std::vector<bool> fixed(n, false);
    for (std::size_t j = 0; j < n; ++j) fixed[j] = u_ok[j];
    for (std::size_t r = 0; r < keep; ++r) {
      const std::size_t j = order[r];
      if (!u_ok[j]) {
        u[j] = orthonormal_fill(u, m, fixed);
        for (std::size_t i = 0; i < m; ++i)
          if (std::abs(u[j][i]) > 1e-12) {
            const cplx f = std::conj(u[j][i]) / std::abs(u[j][i]);
            for (cplx& z : u[j]) z *= f;
            break;
          }
        u_ok[j] = fixed[j] = true;
      }
    }
  }

  SVDResult out;
  out.singular_values.resize(keep);
  out.truncation_error = std::sqrt(discarded);
  const std::size_t lrows = transposed ? n : m;  // original row count
  const std::size_t rcols = transposed ? m : n;  // original col count
  out.left = DenseMatrix(lrows, keep);
  out.right_dagger = DenseMatrix(keep, rcols);
  for (std::size_t r = 0; r < keep; ++r) {
    const std::size_t j = order[r];
    out.singular_values[r] = sig[j];
    if (!transposed) {
      for (std::size_t i = 0; i < m; ++i) out.left(i, r) = u[j][i];
      for (std::size_t i = 0; i < n; ++i) out.right_dagger(r, i) = std::conj(rot[j][i]);
    } else {
      // a = rot * diag(sig) * u^dagger
      for (std::size_t i = 0; i < n; ++i) out.left(i, r) = rot[j][i];
      for (std::size_t i = 0; i < m; ++i) out.right_dagger(r, i) = std::conj(u[j][i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver: Householder tridiagonalization + implicit-shift QL.
// ---------------------------------------------------------------------------

namespace {

// Reduces the Hermitian matrix held in the lower triangle of `w` (row-major,
// n x n) to a real tridiagonal (d, e). Householder vectors stay packed in the
// columns of `w` below the subdiagonal; `sub` keeps the complex subdiagonal
// before phase alignment, `vn2` the reflector norms (0 = trivial step).
template <typename S>
void householder_reduce(std::vector<S>& w, std::size_t n, std::vector<double>& d,
                        std::vector<S>& sub, std::vector<double>& vn2) {
  std::vector<S> hv(n), uu(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm2 += abs_s(w[i * n + k]) * abs_s(w[i * n + k]);
    const double xnorm = std::sqrt(xnorm2);
    vn2[k] = 0.0;
    if (xnorm < kTiny) {
      sub[k] = w[(k + 1) * n + k];
      continue;
    }
    const S pivot = w[(k + 1) * n + k];
    const double pabs = abs_s(pivot);
    S phase;
    if constexpr (std::is_same_v<S, double>) {
      phase = (pabs > 0.0 && pivot < 0.0) ? -1.0 : 1.0;
    } else {
      phase = pabs > 0.0 ? pivot / pabs : S(1.0);
    }
    const S beta = -phase * xnorm;  // new subdiagonal entry
    w[(k + 1) * n + k] -= beta;     // v = x - beta*e1, stored in place
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += abs_s(w[i * n + k]) * abs_s(w[i * n + k]);
    sub[k] = beta;
    if (vnorm2 < kTiny) continue;
    vn2[k] = vnorm2;

    // Trailing Hermitian block update: B <- B - v u^+ - u v^+ with
    // u = (2/v2) (B v - v (v^+ B v) / v2); only the lower triangle is kept.
    const std::size_t nb = n - (k + 1);
    S* v = hv.data();
    for (std::size_t i = 0; i < nb; ++i) v[i] = w[(k + 1 + i) * n + k];
    S* u = uu.data();
    for (std::size_t i = 0; i < nb; ++i) u[i] = S(0.0);
    for (std::size_t i = 0; i < nb; ++i) {
      const S* row = &w[(k + 1 + i) * n + (k + 1)];
      S acc = S(0.0);
      const S vi = v[i];
      for (std::size_t j = 0; j < i; ++j) {
        acc += row[j] * v[j];
        u[j] += conj_s(row[j]) * vi;
      }
      u[i] += acc + row[i] * vi;
    }
    const double scale = 2.0 / vnorm2;
    S vu = S(0.0);
    for (std::size_t i = 0; i < nb; ++i) vu += conj_s(v[i]) * u[i];
    const double kappa = scale * scale * 0.5 * real_s(vu);
    for (std::size_t i = 0; i < nb; ++i) u[i] = scale * u[i] - kappa * v[i];
    for (std::size_t i = 0; i < nb; ++i) {
      S* row = &w[(k + 1 + i) * n + (k + 1)];
      const S vi = v[i], ui = u[i];
      for (std::size_t j = 0; j <= i; ++j) row[j] -= vi * conj_s(u[j]) + ui * conj_s(v[j]);
    }
  }
  if (n >= 2) sub[n - 2] = w[(n - 1) * n + (n - 2)];
  for (std::size_t i = 0; i < n; ++i) d[i] = real_s(w[i * n + i]);
}

// Phase-aligns the complex subdiagonal to non-negative reals; out_phase[j] is
// the diagonal unitary that must scale column j of any accumulated basis.
template <typename S>
void phase_align(const std::vector<S>& sub, std::size_t n, std::vector<double>& e,
                 std::vector<S>& out_phase) {
  out_phase.assign(n, S(1.0));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = abs_s(sub[k]);
    e[k] = a;
    if (a > kTiny)
      out_phase[k + 1] = (sub[k] / a) * out_phase[k];
    else
      out_phase[k + 1] = out_phase[k];
  }
}

// Implicit-shift QL on the real tridiagonal (d, e); when z is non-null its
// columns are rotated along, turning the tridiagonalizing basis into
// eigenvectors. e has length n with e[n-1] scratch.
template <typename S>
void ql_implicit(std::vector<double>& d, std::vector<double>& e, std::size_t n,
                 std::vector<S>* z) {
  if (n == 0) return;
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    std::size_t iter = 0;
    while (true) {
      std::size_t m = l;
      while (m + 1 < n) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
        ++m;
      }
      if (m == l) break;
      if (++iter > 64) throw std::runtime_error("hermitian_eig: QL failed to converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (z) {
          S* zz = z->data();
          for (std::size_t k = 0; k < n; ++k) {
            const S fz = zz[k * n + (i + 1)];
            zz[k * n + (i + 1)] = s * zz[k * n + i] + c * fz;
            zz[k * n + i] = c * zz[k * n + i] - s * fz;
          }
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

// Accumulates the tridiagonalizing unitary Q = H_0 ... H_{n-3} * diag(phase)
// from the packed reflectors.
template <typename S>
std::vector<S> accumulate_q(const std::vector<S>& w, std::size_t n,
                            const std::vector<double>& vn2, const std::vector<S>& phase) {
  std::vector<S> q(n * n, S(0.0));
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = S(1.0);
  for (std::size_t k = n >= 3 ? n - 2 : 0; k-- > 0;) {
    if (vn2[k] <= 0.0) continue;
    const double scale = 2.0 / vn2[k];
    for (std::size_t c = k + 1; c < n; ++c) {
      S acc = S(0.0);
      for (std::size_t i = k + 1; i < n; ++i) acc += conj_s(w[i * n + k]) * q[i * n + c];
      acc *= scale;
      for (std::size_t i = k + 1; i < n; ++i) q[i * n + c] -= acc * w[i * n + k];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const S p = phase[j];
    for (std::size_t i = 0; i < n; ++i) q[i * n + j] *= p;
  }
  return q;
}

// Applies Q (packed reflectors + phases) to a vector: y <- Q y.
template <typename S>
void apply_q(const std::vector<S>& w, std::size_t n, const std::vector<double>& vn2,
             const std::vector<S>& phase, std::vector<S>& y) {
  for (std::size_t j = 0; j < n; ++j) y[j] *= phase[j];
  for (std::size_t k = n >= 3 ? n - 2 : 0; k-- > 0;) {
    if (vn2[k] <= 0.0) continue;
    const double scale = 2.0 / vn2[k];
    S acc = S(0.0);
    for (std::size_t i = k + 1; i < n; ++i) acc += conj_s(w[i * n + k]) * y[i];
    acc *= scale;
    for (std::size_t i = k + 1; i < n; ++i) y[i] -= acc * w[i * n + k];
  }
}

// One inverse-iteration pass for the shifted tridiagonal (d - mu, e): solves
// (T - mu) y = x with partially pivoted elimination on the three bands.
void tridiag_solve(const std::vector<double>& d, const std::vector<double>& e, double mu,
                   std::vector<double>& x) {
  const std::size_t n = d.size();
  std::vector<double> diag(n), sup1(n, 0.0), sup2(n, 0.0), sub(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = d[i] - mu;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sup1[i] = e[i];
    sub[i] = e[i];
  }
  const double safe = std::numeric_limits<double>::epsilon() *
                      (std::fabs(mu) + 1.0) * 16.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::fabs(sub[i]) > std::fabs(diag[i])) {
      std::swap(diag[i], sub[i]);
      std::swap(sup1[i], diag[i + 1]);
      std::swap(sup2[i], sup1[i + 1]);
      std::swap(x[i], x[i + 1]);
    }
    if (std::fabs(diag[i]) < safe) diag[i] = std::copysign(safe, diag[i]);
    const double m = sub[i] / diag[i];
    diag[i + 1] -= m * sup1[i];
    sup1[i + 1] -= m * sup2[i];
    x[i + 1] -= m * x[i];
  }
  if (std::fabs(diag[n - 1]) < safe) diag[n - 1] = std::copysign(safe, diag[n - 1]);
  for (std::size_t i = n; i-- > 0;) {
    double acc = x[i];
    if (i + 1 < n) acc -= sup1[i] * x[i + 1];
    if (i + 2 < n) acc -= sup2[i] * x[i + 2];
    x[i] = acc / diag[i];
  }
}

void check_hermitian(const DenseMatrix& h) {
  if (h.rows != h.cols || h.rows == 0)
    throw std::invalid_argument("hermitian_eig: matrix must be square and non-empty");
  if (!all_finite(h)) throw std::invalid_argument("hermitian_eig: non-finite entries");
  double dev = 0.0;
  for (std::size_t i = 0; i < h.rows; ++i)
    for (std::size_t j = i; j < h.cols; ++j)
      dev = std::max(dev, std::abs(h(i, j) - std::conj(h(j, i))));
  if (dev > 1e-10)
    throw std::invalid_argument("hermitian_eig: input is not Hermitian (max deviation " +
                                std::to_string(dev) + ")");
}

bool is_real(const DenseMatrix& h) {
  for (const cplx& z : h.entries)
    if (z.imag() != 0.0) return false;
  return true;
}

template <typename S>
void eig_core(const DenseMatrix& h, std::vector<double>& eigenvalues, DenseMatrix& vectors) {
  const std::size_t n = h.rows;
  std::vector<S> w(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      if constexpr (std::is_same_v<S, double>)
        w[i * n + j] = h(i, j).real();
      else
        w[i * n + j] = h(i, j);
    }

  std::vector<double> d(n), e(n, 0.0), vn2(n, 0.0);
  std::vector<S> sub(n, S(0.0)), phase;
  householder_reduce(w, n, d, sub, vn2);
  phase_align(sub, n, e, phase);
  std::vector<S> q = accumulate_q(w, n, vn2, phase);
  ql_implicit(d, e, n, &q);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  eigenvalues.resize(n);
  vectors = DenseMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t j = order[c];
    eigenvalues[c] = d[j];
    // Fixed phase: first entry with magnitude > 1e-12 made real-positive.
    S f = S(1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const S zi = q[i * n + j];
      if (abs_s(zi) > 1e-12) {
        f = conj_s(zi) / abs_s(zi);
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) vectors(i, c) = cplx(f * q[i * n + j]);
  }
}

}  // namespace

EigResult hermitian_eig(const DenseMatrix& h) {
  check_hermitian(h);
  EigResult out;
  if (is_real(h))
    eig_core<double>(h, out.eigenvalues, out.eigenvectors);
  else
    eig_core<cplx>(h, out.eigenvalues, out.eigenvectors);
  return out;
}

namespace {

template <typename S>
std::pair<double, std::vector<cplx>> lowest_core(const DenseMatrix& h) {
  const std::size_t n = h.rows;
  std::vector<S> w(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      if constexpr (std::is_same_v<S, double>)
        w[i * n + j] = h(i, j).real();
      else
        w[i * n + j] = h(i, j);
    }
  std::vector<double> d(n), e(n, 0.0), vn2(n, 0.0);
  std::vector<S> sub(n, S(0.0)), phase;
  householder_reduce(w, n, d, sub, vn2);
  phase_align(sub, n, e, phase);

  std::vector<double> dv = d, ev = e;
  ql_implicit<S>(dv, ev, n, nullptr);
  const double lam = *std::min_element(dv.begin(), dv.end());

  // Inverse iteration on the tridiagonal, then back-transform through Q.
  std::vector<double> y(n, 1.0 / std::sqrt(double(n)));
  for (int pass = 0; pass < 4; ++pass) {
    tridiag_solve(d, e, lam, y);
    double nrm = 0.0;
    for (double v : y) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm < kTiny) throw std::runtime_error("lowest_eigenpair: inverse iteration collapsed");
    for (double& v : y) v /= nrm;
  }
  std::vector<S> yz(n);
  for (std::size_t i = 0; i < n; ++i) yz[i] = S(y[i]);
  apply_q(w, n, vn2, phase, yz);

  std::vector<cplx> vec(n);
  for (std::size_t i = 0; i < n; ++i) vec[i] = cplx(yz[i]);
  return {lam, vec};
}

inline double lanczos_seed(std::size_t i) {
  std::uint64_t z = (static_cast<std::uint64_t>(i) + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z ^= z >> 31;
  return 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;
}

// Lanczos with full reorthogonalization. The Householder reduction is cubic,
// so for large matrices a converged Krylov basis of a few hundred mat-vec
// products is far cheaper. Returns nothing if the residual never reaches
// tolerance; the caller then falls back to the dense path.
template <typename S>
std::optional<std::pair<double, std::vector<cplx>>> lanczos_lowest(const DenseMatrix& h) {
  const std::size_t n = h.rows;
  const std::size_t max_m = std::min<std::size_t>(n, 450);

  std::vector<S> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if constexpr (std::is_same_v<S, double>)
        a[i * n + j] = h(i, j).real();
      else
        a[i * n + j] = h(i, j);
    }

  double scale = 0.0;  // Gershgorin bound on |lambda|
  std::size_t nnz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double m = abs_s(a[i * n + j]);
      row += m;
      if (m > 0.0) ++nnz;
    }
    scale = std::max(scale, row);
  }
  if (scale < kTiny) scale = 1.0;
  const double tol = 1e-11 * scale;

  // Grid Hamiltonians are a few stencil entries per row; mat-vec products off
  // the dense array would be memory-bound, so gather the nonzeros once.
  std::vector<std::size_t> row_start, col_of;
  std::vector<S> val_of;
  const bool sparse = nnz * 20 <= n * n;
  if (sparse) {
    row_start.reserve(n + 1);
    col_of.reserve(nnz);
    val_of.reserve(nnz);
    row_start.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (abs_s(a[i * n + j]) > 0.0) {
          col_of.push_back(j);
          val_of.push_back(a[i * n + j]);
        }
      row_start.push_back(col_of.size());
    }
    a.clear();
    a.shrink_to_fit();
  }

  std::vector<std::vector<S>> basis;
  std::vector<double> alpha, beta;
  std::vector<S> v(n), w(n);
  double nrm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = S(lanczos_seed(i));
    nrm += abs_s(v[i]) * abs_s(v[i]);
  }
  nrm = std::sqrt(nrm);
  for (auto& x : v) x /= nrm;

  // Lowest Ritz pair of the running tridiagonal; returns (theta, |s_last|).
  std::vector<double> ritz;
  auto t_lowest = [&]() -> std::pair<double, double> {
    const std::size_t m = alpha.size();
    std::vector<double> d = alpha, e(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) e[i] = beta[i];
    std::vector<double> q(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) q[i * m + i] = 1.0;
    ql_implicit<double>(d, e, m, &q);
    const std::size_t jmin =
        static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
    ritz.resize(m);
    for (std::size_t i = 0; i < m; ++i) ritz[i] = q[i * m + jmin];
    return {d[jmin], std::fabs(ritz[m - 1])};
  };
  auto assemble = [&](double theta) -> std::pair<double, std::vector<cplx>> {
    std::vector<cplx> x(n, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < basis.size(); ++j)
      for (std::size_t i = 0; i < n; ++i) x[i] += cplx(ritz[j]) * cplx(basis[j][i]);
    double xn = 0.0;
    for (const auto& z : x) xn += std::norm(z);
    xn = std::sqrt(xn);
    if (xn < kTiny) throw std::runtime_error("lowest_eigenpair: Krylov basis collapsed");
    for (auto& z : x) z /= xn;
    return {theta, x};
  };

  for (std::size_t m = 0; m < max_m; ++m) {
    if (sparse) {
      for (std::size_t i = 0; i < n; ++i) {
        S acc = S(0.0);
        for (std::size_t t = row_start[i]; t < row_start[i + 1]; ++t)
          acc += val_of[t] * v[col_of[t]];
        w[i] = acc;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const S* row = &a[i * n];
        S acc = S(0.0);
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
        w[i] = acc;
      }
    }
    double am = 0.0;
    for (std::size_t i = 0; i < n; ++i) am += real_s(conj_s(v[i]) * w[i]);
    basis.push_back(v);
    alpha.push_back(am);
    for (std::size_t i = 0; i < n; ++i) w[i] -= S(am) * v[i];
    if (m > 0)
      for (std::size_t i = 0; i < n; ++i) w[i] -= S(beta[m - 1]) * basis[m - 1][i];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) {
        S ov = S(0.0);
        for (std::size_t i = 0; i < n; ++i) ov += conj_s(u[i]) * w[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= ov * u[i];
      }
    double bm = 0.0;
    for (std::size_t i = 0; i < n; ++i) bm += abs_s(w[i]) * abs_s(w[i]);
    bm = std::sqrt(bm);

    if (bm <= 1e-13 * scale) {  // exact invariant subspace
      const auto [theta, last] = t_lowest();
      return assemble(theta);
    }
    const std::size_t mm = m + 1;
    if (mm >= 32 && mm % 16 == 0) {
      const auto [theta, last] = t_lowest();
      if (bm * last <= tol) return assemble(theta);
    }
    beta.push_back(bm);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / S(bm);
  }
  return std::nullopt;
}

}  // namespace

std::pair<double, std::vector<cplx>> lowest_eigenpair(const DenseMatrix& h) {
  check_hermitian(h);
  std::optional<std::pair<double, std::vector<cplx>>> fast;
  if (h.rows >= 1200) fast = is_real(h) ? lanczos_lowest<double>(h) : lanczos_lowest<cplx>(h);
  auto result = fast ? std::move(*fast)
                     : (is_real(h) ? lowest_core<double>(h) : lowest_core<cplx>(h));

  // Residual audit: inverse iteration must have actually converged.
  const std::size_t n = h.rows;
  double res = 0.0, scale = std::max(1.0, std::fabs(result.first));
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) acc += h(i, j) * result.second[j];
    res = std::max(res, std::abs(acc - result.first * result.second[i]));
  }
  if (res > 1e-7 * scale * n)
    throw std::runtime_error("lowest_eigenpair: residual too large (" + std::to_string(res) + ")");
  return result;
}

DenseMatrix matrix_exponential_i(const DenseMatrix& h, double t_over_hbar) {
  const EigResult eig = hermitian_eig(h);
  const std::size_t n = h.rows;
  DenseMatrix scaled(n, n);  // V * diag(exp(-i lambda t))
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      scaled(i, j) = eig.eigenvectors(i, j) *
                     std::exp(cplx(0.0, -eig.eigenvalues[j] * t_over_hbar));
  return matmul(scaled, adjoint(eig.eigenvectors));
}

}  // namespace qsynth
