// Acceptance gate: one pass/fail line per shipped guarantee, exit 1 when any
// gate fails. Runs without a test framework so the output stays a readable
// nine-line report. Every expected number is either computed inline from
// first principles (brute-force enumeration, hand contractions, closed-form
// arithmetic) or pinned as a literal with its tolerance.

#include "qsynth/cli.hpp"
#include "qsynth/evolution.hpp"
#include "qsynth/hsp.hpp"
#include "qsynth/linalg.hpp"
#include "qsynth/measurement.hpp"
#include "qsynth/rng.hpp"
#include "qsynth/states.hpp"
#include "qsynth/waterwire.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace {

using namespace qsynth;

double max_abs_gap(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) return 1e99;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double l2_gap(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) return 1e99;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a[i] - b[i]);
  return std::sqrt(sum);
}

bool note_if(bool bad, const char* what) {
  if (bad) std::printf("      detail: %s\n", what);
  return bad;
}

HSPInstance factoring_instance(std::size_t n, std::size_t a, std::size_t bits) {
  HSPInstance inst;
  inst.kind = HSPKind::shor;
  inst.q = bits;
  inst.m = bits;
  inst.modulus = n;
  inst.base = a;
  return inst;
}

// |x>|y> -> |x>|f(x) xor y> as a projector (x) xor-shift sum, one term per
// distinct output value. Independent of the hsp module's dense permutation.
ProductOperatorSum oracle_as_product_sum(const OracleTable& oracle) {
  const std::size_t di = std::size_t{1} << oracle.q;
  const std::size_t dm = std::size_t{1} << oracle.m;
  ProductOperatorSum ops;
  ops.parts = {{"input", di}, {"output", dm}};
  const std::set<std::size_t> values(oracle.f.begin(), oracle.f.end());
  for (std::size_t w : values) {
    DenseMatrix proj(di, di), xfer(dm, dm);
    for (std::size_t x = 0; x < di; ++x)
      if (oracle.f[x] == w) proj(x, x) = 1.0;
    for (std::size_t y = 0; y < dm; ++y) xfer(w ^ y, y) = 1.0;
    ops.terms.push_back({proj, xfer});
  }
  ops.unitary_total = true;
  return ops;
}

std::set<std::size_t> factor_set(const std::pair<std::size_t, std::size_t>& f) {
  return {f.first, f.second};
}

// ---------------------------------------------------------------------------
// 1. Scripted N=15 golden run.

bool golden_fifteen() {
  const auto t = shor_factor(15, 2, MeasurementScript{{4, 12}});
  if (note_if(t.attempts.size() != 1, "expected a single scripted attempt")) return false;
  const auto& at = t.attempts.front();

  bool ok = true;
  ok &= !note_if(at.collapsed_support != std::vector<std::size_t>{2, 6, 10, 14},
                 "collapsed support is not {2,6,10,14}");
  ok &= !note_if(at.qft_distribution.size() != 16, "QFT distribution is not over 16 frequencies");
  for (std::size_t v = 0; v < at.qft_distribution.size(); ++v) {
    const double want = (v % 4 == 0) ? 0.25 : 0.0;
    ok &= !note_if(std::abs(at.qft_distribution[v] - want) > 1e-9,
                   "QFT weight off the exact {0,4,8,12} @ 0.25 comb");
  }
  const std::pair<std::size_t, std::size_t> key{3, 4};
  ok &= !note_if(std::find(at.convergents.begin(), at.convergents.end(), key) ==
                     at.convergents.end(),
                 "convergent 3/4 missing");
  ok &= !note_if(t.period != 4, "period is not 4");
  ok &= !note_if(!t.success, "run did not succeed");
  ok &= !note_if(factor_set(t.factors) != std::set<std::size_t>{3, 5}, "factors are not {3,5}");
  return ok;
}

// ---------------------------------------------------------------------------
// 2. Scripted N=21 golden run (rounded peak values).

bool golden_twentyone() {
  const auto t = shor_factor(21, 10, MeasurementScript{{13, 27}});
  if (note_if(t.attempts.size() != 1, "expected a single scripted attempt")) return false;
  const auto& at = t.attempts.front();

  bool ok = !note_if(at.qft_distribution.size() != 32, "QFT distribution is not over 32 frequencies");
  const std::set<std::size_t> tall{0, 16}, mid{5, 11, 21, 27};
  for (std::size_t v = 0; v < at.qft_distribution.size() && ok; ++v) {
    const double p = at.qft_distribution[v];
    if (tall.count(v))
      ok &= !note_if(std::abs(p - 0.16) > 0.01, "peak at {0,16} outside 0.16 +/- 0.01");
    else if (mid.count(v))
      ok &= !note_if(std::abs(p - 0.11) > 0.01, "peak at {5,11,21,27} outside 0.11 +/- 0.01");
    else
      ok &= !note_if(p >= 0.04, "off-peak frequency carries >= 0.04");
  }
  ok &= !note_if(t.period != 6, "period is not 6");
  ok &= !note_if(!t.success, "run did not succeed");
  ok &= !note_if(factor_set(t.factors) != std::set<std::size_t>{3, 7}, "factors are not {3,7}");
  return ok;
}

// ---------------------------------------------------------------------------
// 3. The extracted period does not depend on which output label collapsed.

bool period_invariance() {
  struct Setup {
    std::size_t n, a, bits, expect;
  };
  for (const Setup c : {Setup{15, 2, 4, 4}, Setup{21, 10, 5, 6}}) {
    const auto oracle = build_oracle(factoring_instance(c.n, c.a, c.bits));
    const auto staged = apply_oracle(prepare_registers(c.bits, c.bits), oracle);
    const std::size_t big_m = std::size_t{1} << c.bits;
    const std::set<std::size_t> attainable(oracle.f.begin(), oracle.f.end());
    for (std::size_t w : attainable) {
      const auto mo = measure_output(staged, w);
      const auto freq = qft(mo.collapsed.amplitudes.entries);
      std::set<std::size_t> found;
      for (std::size_t v = 0; v < freq.size(); ++v) {
        if (std::norm(freq[v]) <= 1e-12) continue;
        const auto pr = extract_period(v, big_m, c.n, c.a);
        if (pr.status == PeriodResult::Status::found) found.insert(pr.period);
      }
      if (note_if(found != std::set<std::size_t>{c.expect},
                  "an output label changed (or lost) the recovered period"))
        return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 4. Seeded N=15 success rate vs the exactly enumerated probability.

bool seeded_success_rate() {
  const std::size_t n = 15, a = 2, bits = 4, big_m = 16;

  // Multiplicative order of a mod n, by brute force.
  std::size_t ord = 1;
  while (modpow(a, ord, n) != 1) ++ord;
  if (note_if(big_m % ord != 0, "order does not divide the register size")) return false;

  // An attempt measuring frequency v recovers the period exactly when v is a
  // multiple k * (M / ord) with gcd(k, ord) = 1; the recovered (even) period
  // then factors n unless a^(ord/2) is the trivial square root -1.
  const auto attempt_succeeds = [&](std::size_t v) {
    const std::size_t step = big_m / ord;
    if (v == 0 || v % step != 0) return false;
    if (std::gcd(v / step, ord) != 1) return false;
    if (ord % 2 != 0) return false;
    const std::size_t x = modpow(a, ord / 2, n);
    if (x == n - 1) return false;
    const std::size_t f1 = std::gcd(x - 1, n), f2 = std::gcd(x + 1, n);
    return f1 > 1 && f1 < n && f2 > 1 && f2 < n;
  };

  // Exact per-attempt success probability, enumerated over all (w, v) pairs.
  const auto oracle = build_oracle(factoring_instance(n, a, bits));
  const auto staged = apply_oracle(prepare_registers(bits, bits), oracle);
  const std::set<std::size_t> attainable(oracle.f.begin(), oracle.f.end());
  double p_attempt = 0.0;
  for (std::size_t w : attainable) {
    const auto mo = measure_output(staged, w);
    const auto freq = qft(mo.collapsed.amplitudes.entries);
    for (std::size_t v = 0; v < freq.size(); ++v)
      if (attempt_succeeds(v)) p_attempt += mo.probability * std::norm(freq[v]);
  }
  const double p_trial = 1.0 - std::pow(1.0 - p_attempt, double(factoring_retry_cap));

  std::size_t hits = 0;
  const std::size_t trials = 200;
  for (std::size_t t = 0; t < trials; ++t)
    if (shor_factor(n, a, 20260825ull, t).success) ++hits;
  const double rate = double(hits) / double(trials);
  const double sigma = std::sqrt(p_trial * (1.0 - p_trial) / double(trials));

  bool ok = !note_if(rate < 0.5, "empirical success rate below 0.5");
  ok &= !note_if(std::abs(rate - p_trial) > 3.0 * sigma + 1e-12,
                 "empirical rate outside 3 sigma of the enumerated probability");
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Bell-pair projections onto (|0> +/- |1>)/sqrt(2) match closed forms.

bool bell_projections() {
  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<cplx> plus{r, r}, minus{r, -r};

  const auto matches = [&](const MeasurementRecord& rec, cplx c0, cplx c1) {
    bool ok = !note_if(std::abs(rec.probability - 0.5) > 1e-12, "projection probability is not 1/2");
    const auto& e = rec.post_state.amplitudes.entries;
    ok &= !note_if(e.size() != 2, "post state is not a single two-level part");
    ok &= !note_if(max_abs_gap(e, {c0, c1}) > 1e-12, "raw post state off its closed form");
    return ok;
  };

  bool ok = true;
  for (int s : {+1, -1}) {
    const double h = 0.5 * s;
    // (|0>|1> + s |1>|0>)/sqrt2: the measurement ket's coefficients kick back
    // into the unmeasured part, reordered by the pairing.
    ok &= matches(project(bell_state(1, s), "B", plus), cplx(0.5), cplx(h));
    ok &= matches(project(bell_state(1, s), "B", minus), cplx(-0.5), cplx(h));
    // (|0>|0> + s |1>|1>)/sqrt2: same coefficients without the reorder.
    ok &= matches(project(bell_state(2, s), "B", plus), cplx(0.5), cplx(h));
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 6. Two-mode readout arithmetic for the reference Schmidt weights.

bool dimer_arithmetic() {
  WireScenario s;
  s.n_modes = 2;
  s.explicit_alphas = {0.9987, 0.0502, 0.0022};
  s.measured_k = 0;
  const auto rep = dimer_scenario(s);

  bool ok = !note_if(std::abs(rep.projection_probability - 0.99740169) > 1e-8,
                     "leading readout probability is not 0.99740169");
  ok &= !note_if(std::abs(rep.projection_probability - 0.9987 * 0.9987) > 1e-12,
                 "readout probability is not the squared leading weight");
  ok &= !note_if(std::abs(rep.superposition_outcome - 0.5) > 5e-3,
                 "superposition outcome is not ~ 0.5");
  ok &= !note_if(std::abs(rep.probability_total - 0.99992657) > 1e-8,
                 "complete-family total is not 0.99992657");
  return ok;
}

// ---------------------------------------------------------------------------
// 7. Property suites, 100 random instances each.

DenseState random_state(CounterRng& rng, const std::vector<std::size_t>& dims) {
  DenseState s;
  for (std::size_t i = 0; i < dims.size(); ++i)
    s.parts.push_back({"P" + std::to_string(i + 1), dims[i]});
  s.amplitudes = DenseTensor(dims);
  double norm2 = 0.0;
  for (auto& z : s.amplitudes.entries) {
    z = cplx(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
    norm2 += std::norm(z);
  }
  const double norm = std::sqrt(norm2);
  for (auto& z : s.amplitudes.entries) z /= norm;
  s.normalized = true;
  return s;
}

bool property_suites() {
  const std::size_t rounds = 100;
  bool ok = true;

  // Schmidt weights are a unit vector and the triple rebuilds the state.
  {
    CounterRng rng(11, 0);
    for (std::size_t i = 0; i < rounds && ok; ++i) {
      const std::size_t da = 2 + rng.next_u64() % 5, db = 2 + rng.next_u64() % 6;
      const auto s = random_state(rng, {da, db});
      const auto sf = schmidt_decompose(s, 1);
      double total = 0.0;
      for (double al : sf.alphas) total += al * al;
      ok &= !note_if(std::abs(total - 1.0) > 1e-9, "Schmidt weights do not sum to one in square");
      std::vector<cplx> rebuilt(da * db, cplx(0.0));
      for (std::size_t k = 0; k < sf.alphas.size(); ++k)
        for (std::size_t x = 0; x < da; ++x)
          for (std::size_t y = 0; y < db; ++y)
            rebuilt[x * db + y] += sf.alphas[k] * sf.left_states(x, k) * sf.right_states(y, k);
      ok &= !note_if(max_abs_gap(rebuilt, s.amplitudes.entries) > 1e-9,
                     "Schmidt triple does not rebuild the state");
    }
  }

  // Chain reconstruction error stays within the reported truncation bound.
  {
    CounterRng rng(12, 0);
    for (std::size_t i = 0; i < rounds && ok; ++i) {
      const std::size_t n_parts = 3 + rng.next_u64() % 2;
      std::vector<std::size_t> dims(n_parts);
      for (auto& d : dims) d = 2 + rng.next_u64() % 3;
      const auto s = random_state(rng, dims);
      const double tol = (i % 3 == 0) ? 1e-12 : (i % 3 == 1 ? 1e-3 : 5e-2);
      const std::size_t cap = (i % 2 == 0) ? unbounded_rank : 2;
      const auto mps = mps_from_dense(s, tol, cap);
      const auto back = dense_from_mps(mps);
      const double err = l2_gap(back.amplitudes.entries, s.amplitudes.entries);
      ok &= !note_if(err > mps.truncation_error + 1e-9,
                     "reconstruction error exceeds the reported truncation bound");
    }
  }

  // Complete-basis readout probabilities sum to one.
  {
    CounterRng rng(13, 0);
    for (std::size_t i = 0; i < rounds && ok; ++i) {
      const std::size_t da = 2 + rng.next_u64() % 4, db = 2 + rng.next_u64() % 4;
      const auto s = random_state(rng, {da, db});
      const std::string part = (rng.next_u64() % 2) ? "P1" : "P2";
      const std::size_t dim = part == "P1" ? da : db;
      double total = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        std::vector<cplx> ket(dim, cplx(0.0));
        ket[j] = cplx(1.0);
        total += project(s, part, ket, j).probability;
      }
      ok &= !note_if(std::abs(total - 1.0) > 1e-9, "readout probabilities do not sum to one");
    }
  }

  // Fourier analysis conserves total power.
  {
    CounterRng rng(14, 0);
    for (std::size_t i = 0; i < rounds && ok; ++i) {
      const std::size_t len = 3 + rng.next_u64() % 30;
      std::vector<cplx> c(len);
      double power = 0.0;
      for (auto& z : c) {
        z = cplx(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
        power += std::norm(z);
      }
      const auto spec = fourier_analyze(c);
      double spectral = 0.0;
      for (double m : spec.magnitudes) spectral += m * m;
      ok &= !note_if(std::abs(spectral - power) > 1e-9, "spectrum power differs from input power");
    }
  }

  // Factor-wise application equals the assembled dense operator.
  {
    CounterRng rng(15, 0);
    for (std::size_t i = 0; i < rounds && ok; ++i) {
      const std::size_t da = 2 + rng.next_u64() % 3, db = 2 + rng.next_u64() % 3;
      const auto s = random_state(rng, {da, db});
      ProductOperatorSum ops;
      ops.parts = {{"P1", da}, {"P2", db}};
      const std::size_t n_terms = 1 + rng.next_u64() % 3;
      for (std::size_t t = 0; t < n_terms; ++t) {
        DenseMatrix fa(da, da), fb(db, db);
        for (auto& z : fa.entries)
          z = cplx(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
        for (auto& z : fb.entries)
          z = cplx(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
        ops.terms.push_back({fa, fb});
      }
      const auto evolved = evolve(s, ops);
      const auto global = assemble_global(ops);
      std::vector<cplx> direct(da * db, cplx(0.0));
      for (std::size_t r = 0; r < da * db; ++r)
        for (std::size_t c = 0; c < da * db; ++c)
          direct[r] += global(r, c) * s.amplitudes.entries[c];
      ok &= !note_if(max_abs_gap(evolved.amplitudes.entries, direct) > 1e-10,
                     "factor-wise evolution differs from the assembled operator");
    }
  }

  return ok;
}

// ---------------------------------------------------------------------------
// 8. Dual-route equivalence: register circuits vs operator evolution, and the
//    chain readout vs a bare-loop dense contraction.

bool factoring_dual_route() {
  const auto oracle = build_oracle(factoring_instance(15, 2, 4));
  const auto prepared = prepare_registers(4, 4);
  const auto via_oracle = apply_oracle(prepared, oracle);
  const auto via_evolve = evolve(prepared, oracle_as_product_sum(oracle));
  bool ok = !note_if(
      max_abs_gap(via_oracle.amplitudes.entries, via_evolve.amplitudes.entries) > 1e-12,
      "oracle application differs from operator evolution");

  // Transcript barriers vs the measurement-module route on the same states.
  const auto t = shor_factor(15, 2, MeasurementScript{{4, 12}});
  std::vector<cplx> stage2(256, cplx(0.0));
  for (const auto& [idx, amp] : t.stage2) stage2[idx] = amp;
  ok &= !note_if(max_abs_gap(stage2, via_evolve.amplitudes.entries) > 1e-12,
                 "post-oracle transcript barrier differs from the evolved state");

  std::vector<cplx> e4(16, cplx(0.0));
  e4[4] = cplx(1.0);
  const auto rec = project(via_evolve, "output", e4, 4);
  const auto mo = measure_output(via_oracle, 4);
  ok &= !note_if(std::abs(rec.probability - mo.probability) > 1e-12,
                 "collapse probability differs between routes");
  ok &= !note_if(max_abs_gap(rec.post_state_normalized.amplitudes.entries,
                             mo.collapsed.amplitudes.entries) > 1e-12,
                 "collapsed register differs between routes");
  ok &= !note_if(max_abs_gap(t.stage3, rec.post_state_normalized.amplitudes.entries) > 1e-12,
                 "collapsed transcript barrier differs from the projection route");
  ok &= !note_if(
      max_abs_gap(t.qft_register, unitary_dft(rec.post_state_normalized.amplitudes.entries)) >
          1e-12,
      "transcript QFT register differs from the unitary DFT route");
  return ok;
}

bool simon_dual_route() {
  HSPInstance inst;
  inst.kind = HSPKind::simon;
  inst.q = 3;
  inst.m = 2;
  inst.secret = 6;
  const auto oracle = build_oracle(inst);
  const auto prepared = prepare_registers(3, 2);
  const auto via_oracle = apply_oracle(prepared, oracle);
  const auto via_evolve = evolve(prepared, oracle_as_product_sum(oracle));
  bool ok = !note_if(
      max_abs_gap(via_oracle.amplitudes.entries, via_evolve.amplitudes.entries) > 1e-12,
      "Simon oracle application differs from operator evolution");

  const std::size_t w = oracle.f[0];
  std::vector<cplx> ew(4, cplx(0.0));
  ew[w] = cplx(1.0);
  const auto rec = project(via_evolve, "output", ew, w);
  const auto mo = measure_output(via_oracle, w);
  ok &= !note_if(std::abs(rec.probability - mo.probability) > 1e-12,
                 "Simon collapse probability differs between routes");
  ok &= !note_if(max_abs_gap(rec.post_state_normalized.amplitudes.entries,
                             mo.collapsed.amplitudes.entries) > 1e-12,
                 "Simon collapsed register differs between routes");

  // Closing Hadamard transform as a one-term operator sum on the remainder.
  const double r = 1.0 / std::sqrt(2.0);
  DenseMatrix h2(2, 2);
  h2(0, 0) = h2(0, 1) = h2(1, 0) = r;
  h2(1, 1) = -r;
  ProductOperatorSum hall;
  hall.parts = {{"input", 8}};
  hall.terms = {{kron(h2, kron(h2, h2))}};
  hall.unitary_total = true;
  const auto final_evolved = evolve(mo.collapsed, hall);
  ok &= !note_if(max_abs_gap(final_evolved.amplitudes.entries,
                             walsh_hadamard(mo.collapsed.amplitudes.entries)) > 1e-12,
                 "closing Hadamard differs between routes");
  return ok;
}

bool chain_vs_dense_contraction() {
  WireScenario seed;
  seed.n_modes = 4;
  seed.grids.assign(4, Grid1D{8, -2.5, 2.5});
  seed.potential = default_potential(4);
  validate_scenario(seed);
  const auto psi = ground_state(build_hamiltonian(seed), seed.grids);

  // Window weights: a uniform interior window sized from the chain's bonds.
  const auto probe = mps_from_dense(psi);
  const std::size_t b2 = probe.sites[1].shape[2], b3 = probe.sites[2].shape[2];
  WireScenario s;
  s.n_modes = 4;
  s.grids = seed.grids;
  s.explicit_state = psi;
  s.measured_k = 0;
  s.beta = DenseTensor({b2, b3});
  for (auto& z : s.beta.entries) z = cplx(1.0);

  const auto rep = pentamer_scenario(s);
  bool ok = !note_if(rep.dense_gap < 0.0, "staged dense route was skipped");
  ok &= !note_if(rep.dense_gap > 1e-9, "staged dense route disagrees with the chain route");

  // Bare-loop rebuild of the window state from the chain tensors: family
  // functions are site columns divided by their incoming bond weight.
  const auto& chain = rep.chain;
  const std::size_t d = 8, k = 0;
  const std::size_t r1 = chain.sites[0].shape[2];
  const std::size_t r2 = chain.sites[1].shape[2], r3 = chain.sites[2].shape[2];
  if (note_if(r2 != b2 || r3 != b3, "probe and report bond dimensions disagree")) return false;

  std::vector<cplx> chi(d * d, cplx(0.0));
  const double bnorm = std::sqrt(double(b2 * b3));
  for (std::size_t i2 = 0; i2 < b2; ++i2)
    for (std::size_t i3 = 0; i3 < b3; ++i3)
      for (std::size_t x2 = 0; x2 < d; ++x2)
        for (std::size_t x3 = 0; x3 < d; ++x3) {
          const cplx f2 =
              chain.sites[1].entries[(k * d + x2) * r2 + i2] / chain.bond_weights[0][k];
          const cplx f3 =
              chain.sites[2].entries[(i2 * d + x3) * r3 + i3] / chain.bond_weights[1][i2];
          chi[x2 * d + x3] += (cplx(1.0) / bnorm) * f2 * f3;
        }
  double cnorm2 = 0.0;
  for (const auto& z : chi) cnorm2 += std::norm(z);
  const double cnorm = std::sqrt(cnorm2);
  ok &= !note_if(std::abs(cnorm - rep.chi_norm) > 1e-9, "window norm differs from the report");
  for (auto& z : chi) z /= cnorm;

  // Dense route by hand: contract the bra of (first family (x) window) against
  // the exact joint ground state, leaving the end mode.
  std::vector<cplx> dense_out(d, cplx(0.0));
  for (std::size_t x1 = 0; x1 < d; ++x1) {
    const cplx f1 = chain.sites[0].entries[x1 * r1 + k];
    for (std::size_t x2 = 0; x2 < d; ++x2)
      for (std::size_t x3 = 0; x3 < d; ++x3) {
        const cplx bra = std::conj(f1 * chi[x2 * d + x3]);
        const std::size_t base = ((x1 * d + x2) * d + x3) * d;
        for (std::size_t x4 = 0; x4 < d; ++x4)
          dense_out[x4] += bra * psi.amplitudes.entries[base + x4];
      }
  }
  ok &= !note_if(max_abs_gap(dense_out, rep.final_state) > 1e-9,
                 "chain readout differs from the bare-loop dense contraction");
  double out2 = 0.0;
  for (const auto& z : dense_out) out2 += std::norm(z);
  ok &= !note_if(std::abs(std::sqrt(out2) - rep.window_outcome) > 1e-9,
                 "surviving weight differs from the dense contraction");
  return ok;
}

bool dual_route_equivalence() {
  bool ok = factoring_dual_route();
  ok &= simon_dual_route();
  ok &= chain_vs_dense_contraction();
  return ok;
}

// ---------------------------------------------------------------------------
// 9. Determinism: seeded CLI reruns are byte-identical, scripted runs draw
//    nothing from the generator.

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool determinism() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "qsynth_acceptance";
  fs::remove_all(base);

  bool ok = true;
  {
    RunConfig cfg;
    cfg.subcommand = "shor";
    cfg.n = 15;
    cfg.a = 2;
    cfg.seed = 11;
    cfg.trials = 3;
    cfg.format = "both";
    cfg.output_dir = (base / "r1").string();
    ok &= !note_if(run(cfg) != 0, "first seeded factoring run failed");
    cfg.output_dir = (base / "r2").string();
    ok &= !note_if(run(cfg) != 0, "second seeded factoring run failed");
    for (const char* name : {"transcript.json", "attempts.csv", "qft.csv"}) {
      const std::string one = slurp(base / "r1" / name), two = slurp(base / "r2" / name);
      ok &= !note_if(one.empty(), "seeded run produced an empty artifact");
      ok &= !note_if(one != two, "seeded reruns differ byte-wise");
    }
  }
  {
    RunConfig cfg;
    cfg.subcommand = "hsp";
    cfg.kind = "bv";
    cfg.secret = "1011";
    cfg.seed = 7;
    cfg.output_dir = (base / "h1").string();
    ok &= !note_if(run(cfg) != 0, "first seeded template run failed");
    cfg.output_dir = (base / "h2").string();
    ok &= !note_if(run(cfg) != 0, "second seeded template run failed");
    const std::string one = slurp(base / "h1" / "transcript.json");
    ok &= !note_if(one.empty(), "seeded template run produced an empty transcript");
    ok &= !note_if(one != slurp(base / "h2" / "transcript.json"),
                   "seeded template reruns differ byte-wise");
  }
  fs::remove_all(base);

  const auto scripted = shor_factor(15, 2, MeasurementScript{{4, 12}});
  ok &= !note_if(scripted.rng_draws != 0, "scripted factoring consumed generator draws");

  HSPInstance bv;
  bv.kind = HSPKind::bernstein_vazirani;
  bv.q = 4;
  bv.m = 1;
  bv.secret = 11;  // bits 1011
  const auto templ = run_template(bv, MeasurementScript{{0, 11}});
  ok &= !note_if(templ.rng_draws != 0, "scripted template consumed generator draws");
  ok &= !note_if(!templ.success || templ.recovered != 11, "scripted template missed the secret");
  return ok;
}

struct Gate {
  int failures = 0;
  template <typename F>
  void check(int idx, const char* label, F body) {
    bool ok = false;
    try {
      ok = body();
    } catch (const std::exception& e) {
      std::printf("      threw: %s\n", e.what());
    }
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", idx, label);
    if (!ok) ++failures;
  }
};

}  // namespace

int main() {
  Gate gate;
  gate.check(1, "scripted N=15 run: arithmetic comb, exact QFT peaks, period 4, factors {3,5}",
             golden_fifteen);
  gate.check(2, "scripted N=21 run: rounded QFT peaks, period 6, factors {3,7}", golden_twentyone);
  gate.check(3, "every attainable collapse label recovers the same period (exhaustive)",
             period_invariance);
  gate.check(4, "seeded N=15 success rate matches the enumerated probability over 200 trials",
             seeded_success_rate);
  gate.check(5, "all six Bell-pair projections match hand-derived closed forms", bell_projections);
  gate.check(6, "two-mode readout arithmetic matches the reference Schmidt weights",
             dimer_arithmetic);
  gate.check(7, "property suites hold over 100 random instances each", property_suites);
  gate.check(8, "dual routes agree: circuits vs operators, chain readout vs dense contraction",
             dual_route_equivalence);
  gate.check(9, "seeded CLI reruns byte-identical; scripted runs draw no randomness", determinism);
  return gate.failures == 0 ? 0 : 1;
}
