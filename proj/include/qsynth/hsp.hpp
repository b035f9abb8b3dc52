#pragma once

#include "qsynth/linalg.hpp"
#include "qsynth/rng.hpp"
#include "qsynth/states.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qsynth {

enum class HSPKind { deutsch, deutsch_jozsa, bernstein_vazirani, simon, shor };

// One hidden-subgroup problem instance on registers of q input and m output
// bits. Which fields matter depends on the kind: `table` for the deutsch
// family, `secret` for bernstein_vazirani and simon, modulus/base for shor.
struct HSPInstance {
  HSPKind kind = HSPKind::deutsch;
  std::size_t q = 1;
  std::size_t m = 1;
  std::vector<std::size_t> table;  // explicit f for deutsch / deutsch_jozsa
  std::size_t secret = 0;          // bit mask s
  std::size_t modulus = 0;         // N
  std::size_t base = 0;            // a
};

// f as a flat table over the input register; the induced map
// (x, y) -> (x, f(x) xor y) is a permutation of the joint basis.
struct OracleTable {
  std::size_t q = 0;
  std::size_t m = 0;
  std::vector<std::size_t> f;
};

// Amplitudes of a register slice as (basis index, amplitude) pairs.
using SparseVec = std::vector<std::pair<std::size_t, cplx>>;

// Output-register collapse: measured label, its probability, and the
// normalized input-register remainder.
struct MeasuredOutput {
  std::size_t w = 0;
  double probability = 0.0;
  std::vector<std::size_t> support;  // ascending input labels with f(x) = w
  DenseState collapsed;              // single part "input"
};

struct PeriodResult {
  enum class Status { found, no_information, not_found };
  Status status = Status::not_found;
  std::size_t period = 0;
  std::vector<std::pair<std::size_t, std::size_t>> convergents;  // (num, den)
};

struct FactoringAttempt {
  std::size_t measured_w = 0;
  double w_probability = 0.0;
  std::vector<std::size_t> collapsed_support;
  std::vector<double> qft_distribution;  // over the 2^q frequencies
  std::size_t measured_v = 0;
  double v_probability = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> convergents;
  std::size_t period = 0;  // 0 when no usable period came out
  std::string note;
};

struct FactoringTranscript {
  std::size_t n = 0, a = 0, q = 0, m = 0;
  bool classical_shortcut = false;
  bool success = false;
  std::size_t period = 0;
  std::pair<std::size_t, std::size_t> factors{0, 0};
  std::vector<FactoringAttempt> attempts;
  // Circuit-barrier snapshots of the last attempt. stage1/stage2 use joint
  // basis indices x * 2^m + y; stage3 and qft_register are full input-register
  // vectors.
  SparseVec stage1, stage2;
  std::vector<cplx> stage3, qft_register;
  std::string note;
  std::uint64_t rng_draws = 0;
};

// One pass through the template circuit.
struct HSPRun {
  std::size_t measured_w = 0;
  double w_probability = 0.0;
  std::vector<cplx> collapsed;       // input register after output collapse
  std::vector<cplx> final_register;  // after the final transform
  std::size_t measured_y = 0;
  double y_probability = 0.0;
};

struct HSPTranscript {
  HSPInstance instance;
  std::vector<HSPRun> runs;
  bool success = false;
  std::string conclusion;
  std::size_t recovered = 0;  // secret for bernstein_vazirani / simon
  std::optional<FactoringTranscript> factoring;
  std::uint64_t rng_draws = 0;
};

// Scripted measurement choices: one (output label w, input label v/y) pair
// per pass. Scripted runs draw nothing from the generator.
using MeasurementScript = std::vector<std::pair<std::size_t, std::size_t>>;

inline constexpr std::size_t dense_register_bound = 24;  // q + m cap
inline constexpr std::size_t factoring_retry_cap = 32;

std::size_t modpow(std::size_t base, std::size_t exponent, std::size_t modulus);

// Rejects malformed instances (bound violations, zero Simon secret, shor
// parameters outside 1 < a < N or 2^m < N, tables that break the
// constant-or-balanced promise).
void validate_instance(const HSPInstance& instance);

OracleTable build_oracle(const HSPInstance& instance);

// (1 / sqrt(2^q)) sum_x |x> (x) |0> with parts "input", "output".
DenseState prepare_registers(std::size_t q, std::size_t m);

// Moves amplitude (x, y) -> (x, f(x) xor y); exact permutation.
DenseState apply_oracle(const DenseState& state, const OracleTable& oracle);

// Collapses the output register to the given label (must carry weight) or to
// a label sampled from the exact marginal (one generator draw).
MeasuredOutput measure_output(const DenseState& state, std::size_t w);
MeasuredOutput measure_output(const DenseState& state, CounterRng& rng);

// Unitary DFT restricted to power-of-2 lengths (shared convention with
// fourier_analyze: phases e^{+2 pi i v x / 2^q}).
std::vector<cplx> qft(const std::vector<cplx>& reg);

// In-place-style fast transform H^(x)q; equals qft for length 2.
std::vector<cplx> walsh_hadamard(const std::vector<cplx>& reg);

enum class FinalTransform { qft_transform, hadamard_all };

// shor closes with the QFT; every other kind with H^(x)q.
FinalTransform final_transform(HSPKind kind);
std::vector<cplx> apply_final_transform(FinalTransform t, const std::vector<cplx>& reg);

// Continued-fraction period recovery from a measured frequency v out of M:
// the first convergent denominator r <= N with a^r = 1 (mod N) wins. v = 0
// carries no information; the caller retries.
PeriodResult extract_period(std::size_t v, std::size_t big_m, std::size_t n, std::size_t a);

// Full factoring pipeline for odd composite N <= 4096 with 1 < a < N.
// A shared factor gcd(a, N) > 1 short-circuits classically. Otherwise up to
// factoring_retry_cap passes: collapse w, QFT, measure v, extract the period,
// and try gcd(N, a^(s/2) -+ 1); odd periods and trivial square roots retry.
FactoringTranscript shor_factor(std::size_t n, std::size_t a, std::uint64_t seed,
                                std::uint64_t stream = 0);
FactoringTranscript shor_factor(std::size_t n, std::size_t a, const MeasurementScript& script);

// Runs the template circuit for any instance kind and post-processes:
// deutsch family concludes constant/balanced from outcome 0...0,
// bernstein_vazirani reads the secret directly, simon accumulates q-1
// independent parity constraints and solves them, shor defers to shor_factor.
HSPTranscript run_template(const HSPInstance& instance, std::uint64_t seed,
                           std::uint64_t stream = 0);
HSPTranscript run_template(const HSPInstance& instance, const MeasurementScript& script);

}  // namespace qsynth
