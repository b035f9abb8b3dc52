#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsynth/measurement.hpp"
#include "qsynth/rng.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace qsynth;

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

DenseState random_state(const std::vector<std::size_t>& dims, CounterRng& rng) {
  DenseState s;
  std::size_t total = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    s.parts.push_back({"P" + std::to_string(i + 1), dims[i]});
    total *= dims[i];
  }
  s.amplitudes = DenseTensor(dims);
  double n2 = 0.0;
  for (auto& z : s.amplitudes.entries) {
    z = cplx(rng.next_double() - 0.5, rng.next_double() - 0.5);
    n2 += std::norm(z);
  }
  for (auto& z : s.amplitudes.entries) z /= std::sqrt(n2);
  s.normalized = true;
  return s;
}

DenseMatrix random_unitary(std::size_t n, CounterRng& rng) {
  DenseMatrix m(n, n);
  for (auto& z : m.entries) z = cplx(rng.next_double() - 0.5, rng.next_double() - 0.5);
  return svd(m).left;
}

std::vector<cplx> basis_column(const DenseMatrix& basis, std::size_t j) {
  std::vector<cplx> ket(basis.rows);
  for (std::size_t i = 0; i < basis.rows; ++i) ket[i] = basis(i, j);
  return ket;
}

BasisChange plus_minus_basis(const std::string& part) {
  BasisChange change;
  change.part = {part, 2};
  change.d = DenseMatrix(2, 2);
  change.d(0, 0) = change.d(0, 1) = inv_sqrt2;   // <+|
  change.d(1, 0) = inv_sqrt2;                    // <-|
  change.d(1, 1) = -inv_sqrt2;
  return change;
}

double max_abs_vec_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("projecting a Bell pair onto |0> keeps half the weight on the partner") {
  const auto rec = project(bell_state(2, +1), "B", {cplx(1.0), cplx(0.0)}, 0);
  CHECK(rec.part.name == "B");
  CHECK(rec.probability == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(rec.post_state.parts.size() == 1);
  CHECK(rec.post_state.parts[0].name == "A");
  CHECK(std::abs(rec.post_state.amplitudes.entries[0] - cplx(inv_sqrt2)) < 1e-12);
  CHECK(std::abs(rec.post_state.amplitudes.entries[1]) < 1e-12);
  CHECK(std::abs(rec.post_state_normalized.amplitudes.entries[0] - cplx(1.0)) < 1e-12);
  CHECK(rec.post_state_normalized.normalized);
  CHECK_FALSE(rec.post_state.normalized);
}

TEST_CASE("projection probability of the dominant family is close to one") {
  // Two-part state whose Schmidt weights mirror a strongly bound dimer:
  // (0.9987, 0.0502, 0.0022) on paired basis labels, deliberately left
  // unnormalized so probabilities are raw squared norms.
  const std::vector<double> alphas = {0.9987, 0.0502, 0.0022};
  DenseState s;
  s.parts = {{"A", 3}, {"B", 3}};
  s.amplitudes = DenseTensor({3, 3});
  for (std::size_t k = 0; k < 3; ++k) s.amplitudes.entries[k * 3 + k] = alphas[k];
  s.normalized = false;

  const auto rec = project(s, "B", {cplx(1.0), cplx(0.0), cplx(0.0)}, 0);
  CHECK(rec.probability == doctest::Approx(0.99740169).epsilon(1e-12));
  CHECK(rec.probability > 0.99);
  // The partner collapses onto its own first family member.
  CHECK(std::abs(rec.post_state_normalized.amplitudes.entries[0] - cplx(1.0)) < 1e-12);
}

TEST_CASE("probabilities over a complete basis sum to one") {
  CounterRng rng(3, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_state({3, 4}, rng);
    const DenseMatrix basis = rep % 2 == 0 ? identity(4) : random_unitary(4, rng);
    double total = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      const auto rec = project(s, "P2", basis_column(basis, j), j);
      total += rec.probability;
      const double norm = state_norm(rec.post_state);
      CHECK(std::fabs(norm - std::sqrt(rec.probability)) < 1e-10);
    }
    CHECK(std::fabs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("project validates its inputs") {
  const auto b = bell_state(1, +1);
  CHECK_THROWS_AS(project(b, "C", {cplx(1.0), cplx(0.0)}, 0), std::invalid_argument);
  CHECK_THROWS_AS(project(b, "B", {cplx(1.0), cplx(1.0)}, 0), std::invalid_argument);
  CHECK_THROWS_AS(project(b, "B", {cplx(1.0), cplx(0.0), cplx(0.0)}, 0), std::invalid_argument);
}

TEST_CASE("generalized_measure with the identity table equals plain projection") {
  CounterRng rng(7, 0);
  const auto s = random_state({2, 3}, rng);
  BasisChange change;
  change.part = {"P2", 3};
  change.d = identity(3);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto via_table = generalized_measure(s, change, k);
    std::vector<cplx> ket(3);
    ket[k] = 1.0;
    const auto direct = project(s, "P2", ket, k);
    CHECK(via_table.probability == doctest::Approx(direct.probability).epsilon(1e-12));
    CHECK(max_abs_vec_diff(via_table.post_state.amplitudes.entries,
                           direct.post_state.amplitudes.entries) < 1e-12);
  }
}

TEST_CASE("plus/minus measurements kick the superposition phases into the partner") {
  const auto change = plus_minus_basis("B");
  struct Expect {
    int which, sign;
    std::size_t outcome;
    cplx a0, a1;  // normalized partner amplitudes
  };
  // Partner states for every Bell family and both rotated outcomes.
  const std::vector<Expect> table = {
      {1, +1, 0, cplx(inv_sqrt2), cplx(inv_sqrt2)},    // (|1> + |0>)/sqrt2
      {1, +1, 1, cplx(-inv_sqrt2), cplx(inv_sqrt2)},   // (|1> - |0>)/sqrt2
      {1, -1, 0, cplx(inv_sqrt2), cplx(-inv_sqrt2)},
      {1, -1, 1, cplx(-inv_sqrt2), cplx(-inv_sqrt2)},
      {2, +1, 0, cplx(inv_sqrt2), cplx(inv_sqrt2)},    // (|0> + |1>)/sqrt2
      {2, +1, 1, cplx(inv_sqrt2), cplx(-inv_sqrt2)},
      {2, -1, 0, cplx(inv_sqrt2), cplx(-inv_sqrt2)},
      {2, -1, 1, cplx(inv_sqrt2), cplx(inv_sqrt2)},
  };
  for (const auto& e : table) {
    const auto rec = generalized_measure(bell_state(e.which, e.sign), change, e.outcome);
    CHECK(std::fabs(rec.probability - 0.5) <= 1e-12);
    const auto& amp = rec.post_state_normalized.amplitudes.entries;
    CHECK(std::abs(amp[0] - e.a0) <= 1e-12);
    CHECK(std::abs(amp[1] - e.a1) <= 1e-12);
    CHECK(std::fabs(amp[0].imag()) <= 1e-12);
    CHECK(std::fabs(amp[1].imag()) <= 1e-12);
  }
}

TEST_CASE("a delta chi reduces subspace projection to sequential projections") {
  CounterRng rng(11, 0);
  const auto s = random_state({2, 3, 2, 3}, rng);
  DenseTensor chi({3, 2});
  chi.entries[1 * 2 + 1] = 1.0;  // |1>|1> on (P2, P3)
  const auto joint = subspace_project(s, {"P2", "P3"}, chi);

  const auto first = project(s, "P2", {cplx(0.0), cplx(1.0), cplx(0.0)}, 1);
  const auto second = project(first.post_state, "P3", {cplx(0.0), cplx(1.0)}, 1);
  REQUIRE(joint.parts.size() == 2);
  CHECK(joint.parts[0].name == "P1");
  CHECK(joint.parts[1].name == "P4");
  CHECK(max_abs_vec_diff(joint.amplitudes.entries, second.post_state.amplitudes.entries) < 1e-12);
}

TEST_CASE("uniform block chi matches a hand-rolled contraction") {
  CounterRng rng(13, 0);
  const auto s = random_state({2, 3, 3, 2}, rng);
  DenseTensor chi({3, 3});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) chi.entries[i * 3 + j] = 0.5;
  const auto out = subspace_project(s, {"P2", "P3"}, chi);

  std::vector<cplx> oracle(4, cplx(0.0, 0.0));
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t d = 0; d < 2; ++d)
      for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t c = 0; c < 3; ++c)
          oracle[a * 2 + d] += std::conj(chi.entries[b * 3 + c]) *
                               s.amplitudes.entries[((a * 3 + b) * 3 + c) * 2 + d];
  CHECK(max_abs_vec_diff(out.amplitudes.entries, oracle) < 1e-10);
}

TEST_CASE("chain-form subspace projection matches the dense route") {
  CounterRng rng(17, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = random_state({3, 2, 2, 3}, rng);
    const auto mps = mps_from_dense(s, 0.0);
    DenseTensor chi({2, 2});
    double n2 = 0.0;
    for (auto& z : chi.entries) {
      z = cplx(rng.next_double() - 0.5, rng.next_double() - 0.5);
      n2 += std::norm(z);
    }
    for (auto& z : chi.entries) z /= std::sqrt(n2);

    const auto via_chain = subspace_project(mps, {"P2", "P3"}, chi);
    const auto via_dense = subspace_project(s, {"P2", "P3"}, chi);
    REQUIRE(via_chain.parts.size() == 2);
    CHECK(via_chain.parts[0].name == "P1");
    CHECK(via_chain.parts[1].name == "P4");
    CHECK(max_abs_vec_diff(via_chain.amplitudes.entries, via_dense.amplitudes.entries) < 1e-10);
  }
}

TEST_CASE("chain-form subspace projection works on boundary windows") {
  CounterRng rng(19, 0);
  const auto s = random_state({2, 3, 2}, rng);
  const auto mps = mps_from_dense(s, 0.0);
  DenseTensor chi({2, 3});
  chi.entries[0] = 1.0;
  const auto via_chain = subspace_project(mps, {"P1", "P2"}, chi);
  const auto via_dense = subspace_project(s, {"P1", "P2"}, chi);
  CHECK(max_abs_vec_diff(via_chain.amplitudes.entries, via_dense.amplitudes.entries) < 1e-10);

  DenseTensor tail({3, 2});
  tail.entries[5] = 1.0;
  const auto chain_tail = subspace_project(mps, {"P2", "P3"}, tail);
  const auto dense_tail = subspace_project(s, {"P2", "P3"}, tail);
  CHECK(max_abs_vec_diff(chain_tail.amplitudes.entries, dense_tail.amplitudes.entries) < 1e-10);
}

TEST_CASE("chain-form subspace projection rejects gapped or reordered windows") {
  CounterRng rng(23, 0);
  const auto s = random_state({2, 2, 2, 2}, rng);
  const auto mps = mps_from_dense(s);
  DenseTensor chi({2, 2});
  chi.entries[0] = 1.0;
  CHECK_THROWS_WITH_AS(subspace_project(mps, {"P1", "P3"}, chi),
                       "subspace_project: listed parts are not consecutive in the chain; rebuild "
                       "the dense state with dense_from_mps and project that instead",
                       std::invalid_argument);
  CHECK_THROWS_AS(subspace_project(mps, {"P3", "P2"}, chi), std::invalid_argument);
}

TEST_CASE("subspace projection validates chi") {
  CounterRng rng(29, 0);
  const auto s = random_state({2, 2, 2}, rng);
  DenseTensor bad({2, 2});
  bad.entries[0] = 1.0;
  bad.entries[3] = 1.0;  // norm sqrt(2)
  CHECK_THROWS_AS(subspace_project(s, {"P1", "P2"}, bad), std::invalid_argument);
  DenseTensor chi({2, 2});
  chi.entries[0] = 1.0;
  CHECK_THROWS_AS(subspace_project(s, {"P1", "P1"}, chi), std::invalid_argument);
  CHECK_THROWS_AS(subspace_project(s, {"P1", "P2", "P3"}, DenseTensor({2, 2, 2})),
                  std::invalid_argument);
}

TEST_CASE("sampling a deterministic outcome never strays") {
  const auto s = product_state({{cplx(1.0), cplx(0.0)}, {cplx(0.0), cplx(1.0)}});
  const auto set = sample(s, "P2", identity(2), 500, 99);
  REQUIRE(set.counts.size() == 1);
  CHECK(set.counts.at(1) == 500);
  CHECK(set.n == 500);
}

TEST_CASE("Bell sampling splits evenly within statistical tolerance") {
  const auto set = sample(bell_state(2, +1), "B", identity(2), 100000, 4242);
  // Exact outcome probability 1/2; 0.01 is over 6 sigma for n = 1e5.
  CHECK(std::fabs(static_cast<double>(set.counts.at(0)) / 100000.0 - 0.5) < 0.01);
  CHECK(std::fabs(static_cast<double>(set.counts.at(1)) / 100000.0 - 0.5) < 0.01);
  CHECK(set.counts.at(0) + set.counts.at(1) == 100000);
}

TEST_CASE("sampling the modular-power register reproduces the exact frequency") {
  // State (1/sqrt32) sum_x |x>|10^x mod 21> over dims (32, 32); five of the
  // 32 inputs map to 13, so outcome 13 has probability 5/32.
  DenseState s;
  s.parts = {{"input", 32}, {"output", 32}};
  s.amplitudes = DenseTensor({32, 32});
  std::size_t hits = 0;
  std::size_t power = 1;
  for (std::size_t x = 0; x < 32; ++x) {
    s.amplitudes.entries[x * 32 + power] = 1.0 / std::sqrt(32.0);
    if (power == 13) ++hits;
    power = power * 10 % 21;
  }
  s.normalized = true;
  CHECK(hits == 5);
  const auto set = sample(s, "output", identity(32), 100000, 7);
  CHECK(std::fabs(static_cast<double>(set.counts.at(13)) / 100000.0 - 5.0 / 32.0) < 0.01);
}

TEST_CASE("identical seeds reproduce identical sample sets") {
  const auto b = bell_state(1, +1);
  const auto s1 = sample(b, "A", identity(2), 1000, 31337);
  const auto s2 = sample(b, "A", identity(2), 1000, 31337);
  CHECK(s1.counts == s2.counts);
}

TEST_CASE("fourier_analyze of a delta is flat") {
  const auto spec = fourier_analyze({cplx(1.0), cplx(0.0), cplx(0.0), cplx(0.0)});
  REQUIRE(spec.magnitudes.size() == 4);
  for (std::size_t v = 0; v < 4; ++v) {
    CHECK(spec.frequencies[v] == v);
    CHECK(spec.magnitudes[v] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spec.phases[v] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("a period-4 comb transforms onto multiples of 4") {
  std::vector<cplx> comb(16, cplx(0.0, 0.0));
  for (std::size_t x = 2; x < 16; x += 4) comb[x] = 1.0;
  const auto spec = fourier_analyze(comb);
  for (std::size_t v = 0; v < 16; ++v) {
    if (v % 4 == 0)
      CHECK(spec.magnitudes[v] == doctest::Approx(1.0).epsilon(1e-12));
    else
      CHECK(spec.magnitudes[v] < 1e-12);
  }
}

TEST_CASE("fourier_analyze conserves total weight and inverts cleanly") {
  CounterRng rng(37, 0);
  std::vector<cplx> c(12);
  double in2 = 0.0;
  for (auto& z : c) {
    z = cplx(rng.next_double() - 0.5, rng.next_double() - 0.5);
    in2 += std::norm(z);
  }
  const auto spec = fourier_analyze(c);
  double out2 = 0.0;
  for (double m : spec.magnitudes) out2 += m * m;
  CHECK(std::fabs(out2 - in2) < 1e-10);

  // Inverse via conjugation: x = conj(F(conj(F(x)))).
  std::vector<cplx> f = unitary_dft(c);
  for (auto& z : f) z = std::conj(z);
  std::vector<cplx> back = unitary_dft(f);
  for (auto& z : back) z = std::conj(z);
  CHECK(max_abs_vec_diff(back, c) < 1e-10);
}

TEST_CASE("phases stay in the half-open interval up to pi") {
  const auto spec = fourier_analyze({cplx(-1.0), cplx(-1.0)});
  CHECK(spec.magnitudes[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(spec.phases[0] == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  for (double p : spec.phases) {
    CHECK(p <= std::numbers::pi + 1e-15);
    CHECK(p > -std::numbers::pi);
  }
}
