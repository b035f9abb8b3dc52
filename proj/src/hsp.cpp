#include "qsynth/hsp.hpp"

#include "qsynth/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qsynth {

namespace {

std::size_t bits_for(std::size_t n) {
  std::size_t q = 1;
  while ((std::size_t{1} << q) < n) ++q;
  return q;
}

bool is_prime(std::size_t n) {
  if (n < 2) return false;
  for (std::size_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::string bit_string(std::size_t x, std::size_t width) {
  std::string s(width, '0');
  for (std::size_t k = 0; k < width; ++k)
    if (x >> (width - 1 - k) & 1) s[k] = '1';
  return s;
}

// Either replays a script or samples measurement outcomes from exact
// cumulative distributions with one generator draw per outcome.
struct OutcomeSource {
  const MeasurementScript* script = nullptr;
  std::size_t cursor = 0;
  CounterRng* rng = nullptr;

  bool exhausted() const { return script && cursor >= script->size(); }

  std::size_t pick(const std::vector<double>& probabilities, bool second_of_pair,
                   const std::string& what) {
    if (script) {
      const auto& pair = (*script)[second_of_pair ? cursor : cursor];
      const std::size_t label = second_of_pair ? pair.second : pair.first;
      if (second_of_pair) ++cursor;
      if (label >= probabilities.size() || probabilities[label] <= 1e-12)
        throw std::invalid_argument("scripted " + what + " label " + std::to_string(label) +
                                    " has no probability weight");
      return label;
    }
    const double u = rng->next_double();
    double acc = 0.0;
    std::size_t last_live = 0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
      if (probabilities[k] <= 0.0) continue;
      acc += probabilities[k];
      last_live = k;
      if (u < acc) return k;
    }
    return last_live;
  }
};

std::size_t parity(std::size_t x) { return static_cast<std::size_t>(std::popcount(x)) & 1; }

}  // namespace

std::size_t modpow(std::size_t base, std::size_t exponent, std::size_t modulus) {
  if (modulus == 0) throw std::invalid_argument("modpow: zero modulus");
  std::size_t result = 1 % modulus;
  std::size_t factor = base % modulus;
  while (exponent > 0) {
    if (exponent & 1) result = result * factor % modulus;
    factor = factor * factor % modulus;
    exponent >>= 1;
  }
  return result;
}

void validate_instance(const HSPInstance& instance) {
  if (instance.q < 1 || instance.m < 1)
    throw std::invalid_argument("hsp: registers need at least one bit each");
  if (instance.q + instance.m > dense_register_bound)
    throw std::invalid_argument("hsp: q + m exceeds the dense bound of " +
                                std::to_string(dense_register_bound));
  const std::size_t inputs = std::size_t{1} << instance.q;
  switch (instance.kind) {
    case HSPKind::deutsch:
      if (instance.q != 1 || instance.m != 1)
        throw std::invalid_argument("deutsch: single-bit registers only");
      [[fallthrough]];
    case HSPKind::deutsch_jozsa: {
      if (instance.m != 1) throw std::invalid_argument("deutsch family: output register is one bit");
      if (instance.table.size() != inputs)
        throw std::invalid_argument("deutsch family: table must list all " +
                                    std::to_string(inputs) + " values");
      std::size_t ones = 0;
      for (std::size_t v : instance.table) {
        if (v > 1) throw std::invalid_argument("deutsch family: table values must be bits");
        ones += v;
      }
      if (ones != 0 && ones != inputs && ones * 2 != inputs)
        throw std::invalid_argument("deutsch family: table is neither constant nor balanced");
      break;
    }
    case HSPKind::bernstein_vazirani:
      if (instance.m != 1) throw std::invalid_argument("bernstein_vazirani: output register is one bit");
      if (instance.secret >= inputs)
        throw std::invalid_argument("bernstein_vazirani: secret wider than the input register");
      break;
    case HSPKind::simon:
      if (instance.q < 2) throw std::invalid_argument("simon: needs at least two input bits");
      if (instance.secret == 0 || instance.secret >= inputs)
        throw std::invalid_argument("simon: secret must be a nonzero q-bit mask");
      if (instance.m + 1 < instance.q)
        throw std::invalid_argument("simon: output register needs at least q-1 bits");
      break;
    case HSPKind::shor:
      if (instance.modulus < 3 || instance.modulus > 4096)
        throw std::invalid_argument("shor: modulus must lie in [3, 4096]");
      if (instance.base <= 1 || instance.base >= instance.modulus)
        throw std::invalid_argument("a must satisfy 1 < a < N");
      if ((std::size_t{1} << instance.m) < instance.modulus)
        throw std::invalid_argument("shor: output register cannot hold residues mod N");
      break;
  }
}

OracleTable build_oracle(const HSPInstance& instance) {
  validate_instance(instance);
  OracleTable oracle;
  oracle.q = instance.q;
  oracle.m = instance.m;
  const std::size_t inputs = std::size_t{1} << instance.q;
  oracle.f.resize(inputs);
  switch (instance.kind) {
    case HSPKind::deutsch:
    case HSPKind::deutsch_jozsa:
      oracle.f = instance.table;
      break;
    case HSPKind::bernstein_vazirani:
      for (std::size_t x = 0; x < inputs; ++x) oracle.f[x] = parity(instance.secret & x);
      break;
    case HSPKind::simon: {
      // The smaller member of each {x, x xor s} pair is the canonical
      // representative; pairs are numbered in representative order.
      std::size_t next = 0;
      std::vector<std::size_t> value(inputs, inputs);
      for (std::size_t x = 0; x < inputs; ++x) {
        if (value[x] == inputs) {
          value[x] = next;
          value[x ^ instance.secret] = next;
          ++next;
        }
        oracle.f[x] = value[x];
      }
      break;
    }
    case HSPKind::shor:
      for (std::size_t x = 0; x < inputs; ++x)
        oracle.f[x] = modpow(instance.base, x, instance.modulus);
      break;
  }
  const std::size_t outputs = std::size_t{1} << instance.m;
  for (std::size_t v : oracle.f)
    if (v >= outputs) throw std::runtime_error("build_oracle: value escapes the output register");
  return oracle;
}

DenseState prepare_registers(std::size_t q, std::size_t m) {
  if (q < 1 || m < 1) throw std::invalid_argument("prepare_registers: q, m must be at least 1");
  if (q + m > dense_register_bound)
    throw std::invalid_argument("prepare_registers: q + m exceeds the dense bound of " +
                                std::to_string(dense_register_bound));
  const std::size_t di = std::size_t{1} << q;
  const std::size_t d_out = std::size_t{1} << m;
  DenseState s;
  s.parts = {{"input", di}, {"output", d_out}};
  s.amplitudes = DenseTensor({di, d_out});
  const double amp = 1.0 / std::sqrt(static_cast<double>(di));
  for (std::size_t x = 0; x < di; ++x) s.amplitudes.entries[x * d_out] = amp;
  s.normalized = true;
  return s;
}

DenseState apply_oracle(const DenseState& state, const OracleTable& oracle) {
  validate_state(state);
  if (state.parts.size() != 2 || state.parts[0].name != "input" ||
      state.parts[1].name != "output")
    throw std::invalid_argument("apply_oracle: state must have parts (input, output)");
  const std::size_t di = std::size_t{1} << oracle.q;
  const std::size_t dm = std::size_t{1} << oracle.m;
  if (state.parts[0].dim != di || state.parts[1].dim != dm)
    throw std::invalid_argument("apply_oracle: register dims disagree with the oracle table");

  DenseState out = state;
  for (std::size_t x = 0; x < di; ++x)
    for (std::size_t y = 0; y < dm; ++y)
      out.amplitudes.entries[x * dm + (oracle.f[x] ^ y)] = state.amplitudes.entries[x * dm + y];
  return out;
}

namespace {

MeasuredOutput collapse_to(const DenseState& state, std::size_t w) {
  const std::size_t dm = state.parts[1].dim;
  std::vector<cplx> ket(dm);
  ket[w] = 1.0;
  const MeasurementRecord rec = project(state, "output", ket, w);
  if (rec.probability <= 1e-12)
    throw std::invalid_argument("measure_output: output label " + std::to_string(w) +
                                " is unattainable");
  MeasuredOutput out;
  out.w = w;
  out.probability = rec.probability;
  out.collapsed = rec.post_state_normalized;
  double top = 0.0;
  for (const cplx& z : out.collapsed.amplitudes.entries) top = std::max(top, std::abs(z));
  for (std::size_t x = 0; x < out.collapsed.amplitudes.entries.size(); ++x)
    if (std::abs(out.collapsed.amplitudes.entries[x]) > 1e-14 * top) out.support.push_back(x);
  return out;
}

void require_register_pair(const DenseState& state) {
  if (state.parts.size() != 2 || state.parts[0].name != "input" ||
      state.parts[1].name != "output")
    throw std::invalid_argument("measure_output: state must have parts (input, output)");
}

std::vector<double> output_marginal(const DenseState& state) {
  const std::size_t dm = state.parts[1].dim;
  std::vector<double> p(dm, 0.0);
  for (std::size_t i = 0; i < state.amplitudes.entries.size(); ++i)
    p[i % dm] += std::norm(state.amplitudes.entries[i]);
  return p;
}

}  // namespace

MeasuredOutput measure_output(const DenseState& state, std::size_t w) {
  validate_state(state);
  require_register_pair(state);
  if (w >= state.parts[1].dim)
    throw std::invalid_argument("measure_output: label outside the output register");
  return collapse_to(state, w);
}

MeasuredOutput measure_output(const DenseState& state, CounterRng& rng) {
  validate_state(state);
  require_register_pair(state);
  OutcomeSource source;
  source.rng = &rng;
  const std::size_t w = source.pick(output_marginal(state), false, "output");
  return collapse_to(state, w);
}

std::vector<cplx> qft(const std::vector<cplx>& reg) {
  if (reg.empty() || !std::has_single_bit(reg.size()))
    throw std::invalid_argument("qft: register length must be a power of 2");
  return unitary_dft(reg);
}

std::vector<cplx> walsh_hadamard(const std::vector<cplx>& reg) {
  if (reg.empty() || !std::has_single_bit(reg.size()))
    throw std::invalid_argument("walsh_hadamard: register length must be a power of 2");
  std::vector<cplx> out = reg;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t len = 1; len < out.size(); len <<= 1)
    for (std::size_t block = 0; block < out.size(); block += 2 * len)
      for (std::size_t k = block; k < block + len; ++k) {
        const cplx u = out[k];
        const cplx v = out[k + len];
        out[k] = (u + v) * inv_sqrt2;
        out[k + len] = (u - v) * inv_sqrt2;
      }
  return out;
}

FinalTransform final_transform(HSPKind kind) {
  return kind == HSPKind::shor ? FinalTransform::qft_transform : FinalTransform::hadamard_all;
}

std::vector<cplx> apply_final_transform(FinalTransform t, const std::vector<cplx>& reg) {
  return t == FinalTransform::qft_transform ? qft(reg) : walsh_hadamard(reg);
}

PeriodResult extract_period(std::size_t v, std::size_t big_m, std::size_t n, std::size_t a) {
  if (big_m == 0 || v >= big_m) throw std::invalid_argument("extract_period: v must lie in [0, M)");
  PeriodResult out;
  if (v == 0) {
    out.status = PeriodResult::Status::no_information;
    out.convergents = {{0, 1}};
    return out;
  }
  std::size_t x = v, y = big_m;
  std::size_t p_prev2 = 0, p_prev = 1;  // numerator seeds
  std::size_t q_prev2 = 1, q_prev = 0;  // denominator seeds
  while (y != 0) {
    const std::size_t term = x / y;
    const std::size_t p = term * p_prev + p_prev2;
    const std::size_t q = term * q_prev + q_prev2;
    out.convergents.push_back({p, q});
    p_prev2 = p_prev;
    p_prev = p;
    q_prev2 = q_prev;
    q_prev = q;
    const std::size_t r = x % y;
    x = y;
    y = r;
  }
  for (const auto& [num, den] : out.convergents) {
    if (den > n) break;
    if (den >= 1 && modpow(a, den, n) == 1) {
      out.status = PeriodResult::Status::found;
      out.period = den;
      return out;
    }
  }
  out.status = PeriodResult::Status::not_found;
  return out;
}

namespace {

FactoringTranscript shor_factor_core(std::size_t n, std::size_t a, OutcomeSource source) {
  if (n > 4096 || n < 9 || n % 2 == 0 || is_prime(n))
    throw std::invalid_argument("shor_factor: N must be an odd composite no larger than 4096");
  if (a <= 1 || a >= n) throw std::invalid_argument("a must satisfy 1 < a < N");

  FactoringTranscript tr;
  tr.n = n;
  tr.a = a;
  tr.q = bits_for(n);
  tr.m = tr.q;

  const std::size_t g = std::gcd(a, n);
  if (g > 1) {
    tr.classical_shortcut = true;
    tr.success = true;
    tr.factors = {g, n / g};
    tr.note = "gcd(a, N) = " + std::to_string(g) + " already factors N; no quantum stages run";
    return tr;
  }

  HSPInstance instance;
  instance.kind = HSPKind::shor;
  instance.q = tr.q;
  instance.m = tr.m;
  instance.modulus = n;
  instance.base = a;
  const OracleTable oracle = build_oracle(instance);
  const std::size_t big_m = std::size_t{1} << tr.q;
  const double amp = 1.0 / std::sqrt(static_cast<double>(big_m));

  // The joint state is a known permutation of the prepared superposition, so
  // the barriers are recorded sparsely straight from the table instead of
  // materializing 2^(q+m) amplitudes.
  for (std::size_t x = 0; x < big_m; ++x) tr.stage1.push_back({x << tr.m, cplx(amp)});
  for (std::size_t x = 0; x < big_m; ++x)
    tr.stage2.push_back({(x << tr.m) | oracle.f[x], cplx(amp)});

  std::vector<double> w_marginal(std::size_t{1} << tr.m, 0.0);
  for (std::size_t x = 0; x < big_m; ++x) w_marginal[oracle.f[x]] += amp * amp;

  for (std::size_t attempt = 0; attempt < factoring_retry_cap; ++attempt) {
    if (source.exhausted()) {
      tr.note = "measurement script exhausted before a usable period appeared";
      break;
    }
    FactoringAttempt rec;
    rec.measured_w = source.pick(w_marginal, false, "output");
    rec.w_probability = w_marginal[rec.measured_w];

    for (std::size_t x = 0; x < big_m; ++x)
      if (oracle.f[x] == rec.measured_w) rec.collapsed_support.push_back(x);
    std::vector<cplx> collapsed(big_m, cplx(0.0, 0.0));
    const double camp = 1.0 / std::sqrt(static_cast<double>(rec.collapsed_support.size()));
    for (std::size_t x : rec.collapsed_support) collapsed[x] = camp;

    const std::vector<cplx> transformed = qft(collapsed);
    rec.qft_distribution.resize(big_m);
    for (std::size_t vfreq = 0; vfreq < big_m; ++vfreq)
      rec.qft_distribution[vfreq] = std::norm(transformed[vfreq]);

    rec.measured_v = source.pick(rec.qft_distribution, true, "frequency");
    rec.v_probability = rec.qft_distribution[rec.measured_v];

    const PeriodResult pr = extract_period(rec.measured_v, big_m, n, a);
    rec.convergents = pr.convergents;

    bool done = false;
    if (pr.status == PeriodResult::Status::no_information) {
      rec.note = "v = 0 carries no period information";
    } else if (pr.status == PeriodResult::Status::not_found) {
      rec.note = "no convergent denominator passes the order test";
    } else {
      rec.period = pr.period;
      if (pr.period % 2 == 1) {
        rec.note = "period " + std::to_string(pr.period) + " is odd";
      } else {
        const std::size_t root = modpow(a, pr.period / 2, n);
        if (root == 1 || root == n - 1) {
          rec.note = "a^(s/2) is a trivial square root of 1";
        } else {
          tr.period = pr.period;
          tr.factors = {std::gcd(n, root - 1), std::gcd(n, root + 1)};
          tr.success = true;
          rec.note = "factors " + std::to_string(tr.factors.first) + " x " +
                     std::to_string(tr.factors.second);
          done = true;
        }
      }
    }

    tr.stage3 = collapsed;
    tr.qft_register = transformed;
    tr.attempts.push_back(std::move(rec));
    if (done) break;
  }

  if (!tr.success && tr.note.empty())
    tr.note = "retry cap of " + std::to_string(factoring_retry_cap) + " attempts exhausted";
  if (tr.success)
    tr.note = "N = " + std::to_string(tr.factors.first) + " x " +
              std::to_string(tr.factors.second) + " after " +
              std::to_string(tr.attempts.size()) + " attempt(s)";
  return tr;
}

}  // namespace

FactoringTranscript shor_factor(std::size_t n, std::size_t a, std::uint64_t seed,
                                std::uint64_t stream) {
  CounterRng rng(seed, stream);
  OutcomeSource source;
  source.rng = &rng;
  FactoringTranscript tr = shor_factor_core(n, a, source);
  tr.rng_draws = rng.draws();
  return tr;
}

FactoringTranscript shor_factor(std::size_t n, std::size_t a, const MeasurementScript& script) {
  OutcomeSource source;
  source.script = &script;
  return shor_factor_core(n, a, source);
}

namespace {

// Gaussian elimination over GF(2). Rows keep distinct leading bits; inserting
// a dependent vector returns false.
struct ParityBasis {
  std::vector<std::size_t> rows;

  bool insert(std::size_t y) {
    for (std::size_t r : rows) y = std::min(y, y ^ r);
    if (y == 0) return false;
    rows.push_back(y);
    std::sort(rows.rbegin(), rows.rend());
    return true;
  }

  // With q-1 independent parity constraints the nonzero solution of
  // y . s = 0 (for all rows y) is unique.
  std::size_t solve(std::size_t q) {
    for (std::size_t i = rows.size(); i-- > 0;) {
      const std::size_t pivot = std::bit_width(rows[i]) - 1;
      for (std::size_t j = 0; j < i; ++j)
        if (rows[j] >> pivot & 1) rows[j] ^= rows[i];
    }
    std::size_t pivot_mask = 0;
    for (std::size_t r : rows) pivot_mask |= std::size_t{1} << (std::bit_width(r) - 1);
    std::size_t free_bit = q;
    for (std::size_t b = 0; b < q; ++b)
      if (!(pivot_mask >> b & 1)) free_bit = b;
    if (free_bit == q) throw std::runtime_error("simon: no free coordinate left");
    std::size_t s = std::size_t{1} << free_bit;
    for (std::size_t r : rows)
      if (r >> free_bit & 1) s |= std::size_t{1} << (std::bit_width(r) - 1);
    return s;
  }
};

HSPTranscript run_template_core(const HSPInstance& instance, OutcomeSource source,
                                CounterRng* rng) {
  validate_instance(instance);
  HSPTranscript tr;
  tr.instance = instance;

  if (instance.kind == HSPKind::shor) {
    OutcomeSource inner = source;
    tr.factoring = shor_factor_core(instance.modulus, instance.base, inner);
    if (rng) tr.factoring->rng_draws = rng->draws();
    tr.success = tr.factoring->success;
    tr.conclusion = tr.factoring->note;
    tr.rng_draws = tr.factoring->rng_draws;
    return tr;
  }

  const OracleTable oracle = build_oracle(instance);
  const std::size_t di = std::size_t{1} << instance.q;

  DenseState initial;
  if (instance.kind == HSPKind::simon) {
    initial = prepare_registers(instance.q, instance.m);
  } else {
    // Phase-kickback loading: the one-bit output register starts in
    // (|0> - |1>)/sqrt2 so the oracle writes f into the input phases.
    const double a = 1.0 / std::sqrt(static_cast<double>(di));
    std::vector<cplx> uniform(di, cplx(a));
    const double r = 1.0 / std::sqrt(2.0);
    initial = product_state({uniform, {cplx(r), cplx(-r)}}, {"input", "output"});
  }
  const DenseState oracled = apply_oracle(initial, oracle);

  const std::size_t passes =
      instance.kind == HSPKind::simon ? factoring_retry_cap : std::size_t{1};
  ParityBasis basis;

  for (std::size_t pass = 0; pass < passes; ++pass) {
    if (source.exhausted()) break;
    HSPRun run;
    const std::size_t w = source.pick(output_marginal(oracled), false, "output");
    const MeasuredOutput mo = measure_output(oracled, w);
    run.measured_w = mo.w;
    run.w_probability = mo.probability;
    run.collapsed = mo.collapsed.amplitudes.entries;
    run.final_register = apply_final_transform(final_transform(instance.kind), run.collapsed);

    std::vector<double> outcome(di);
    for (std::size_t ydx = 0; ydx < di; ++ydx) outcome[ydx] = std::norm(run.final_register[ydx]);
    run.measured_y = source.pick(outcome, true, "input");
    run.y_probability = outcome[run.measured_y];
    tr.runs.push_back(run);

    if (instance.kind != HSPKind::simon) break;
    if (run.measured_y != 0) basis.insert(run.measured_y);
    if (basis.rows.size() + 1 == instance.q) {
      tr.recovered = basis.solve(instance.q);
      tr.success = true;
      break;
    }
  }

  switch (instance.kind) {
    case HSPKind::deutsch:
    case HSPKind::deutsch_jozsa:
      tr.success = !tr.runs.empty();
      if (tr.success) {
        tr.recovered = tr.runs.back().measured_y;
        tr.conclusion = tr.recovered == 0 ? "constant" : "balanced";
      }
      break;
    case HSPKind::bernstein_vazirani:
      tr.success = !tr.runs.empty();
      if (tr.success) {
        tr.recovered = tr.runs.back().measured_y;
        tr.conclusion = "s = " + bit_string(tr.recovered, instance.q);
      }
      break;
    case HSPKind::simon:
      if (tr.success)
        tr.conclusion = "s = " + bit_string(tr.recovered, instance.q);
      else
        tr.conclusion = "parity system still singular after " + std::to_string(tr.runs.size()) +
                        " passes";
      break;
    case HSPKind::shor:
      break;
  }
  if (rng) tr.rng_draws = rng->draws();
  return tr;
}

}  // namespace

HSPTranscript run_template(const HSPInstance& instance, std::uint64_t seed,
                           std::uint64_t stream) {
  CounterRng rng(seed, stream);
  OutcomeSource source;
  source.rng = &rng;
  return run_template_core(instance, source, &rng);
}

HSPTranscript run_template(const HSPInstance& instance, const MeasurementScript& script) {
  OutcomeSource source;
  source.script = &script;
  return run_template_core(instance, source, nullptr);
}

}  // namespace qsynth
