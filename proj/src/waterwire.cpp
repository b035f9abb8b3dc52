#include "qsynth/waterwire.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace qsynth {

namespace {

constexpr std::size_t kDenseBound = 4096;

void validate_grid(const Grid1D& g, std::size_t mode) {
  const std::string tag = "waterwire: grid for mode " + std::to_string(mode + 1);
  if (g.n_points < 8) throw std::invalid_argument(tag + " needs at least 8 points");
  if (!std::isfinite(g.x_min) || !std::isfinite(g.x_max))
    throw std::invalid_argument(tag + " has non-finite bounds");
  if (!(g.x_max > g.x_min)) throw std::invalid_argument(tag + " needs x_max > x_min");
}

std::size_t joint_dimension(const std::vector<Grid1D>& grids) {
  std::size_t n = 1;
  for (const auto& g : grids) n *= g.n_points;
  return n;
}

void require_finite(const std::vector<double>& v, const std::string& what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument("waterwire: " + what + " is non-finite");
}

// Two-mode chain holding bare Schmidt weights over abstract family labels:
// both local bases are the weight indices themselves.
MPSForm alphas_chain(const std::vector<double>& alphas) {
  const std::size_t r = alphas.size();
  MPSForm chain;
  chain.parts = {{"R1", r}, {"R2", r}};
  DenseTensor first({1, r, r}), last({r, r, 1});
  for (std::size_t i = 0; i < r; ++i) {
    first.entries[i * r + i] = 1.0;
    last.entries[i * r + i] = alphas[i];
  }
  chain.sites = {std::move(first), std::move(last)};
  chain.bond_weights = {alphas};
  return chain;
}

struct ChainData {
  MPSForm chain;
  std::optional<DenseState> dense;
};

ChainData resolve_chain(const WireScenario& s) {
  ChainData cd;
  if (!s.explicit_alphas.empty()) {
    cd.chain = alphas_chain(s.explicit_alphas);
    cd.dense = dense_from_mps(cd.chain);
  } else if (s.potential) {
    DenseState psi = ground_state(build_hamiltonian(s), s.grids);
    cd.chain = mps_from_dense(psi, s.rel_tol, s.max_bond);
    cd.dense = std::move(psi);
  } else if (s.explicit_state) {
    validate_state(*s.explicit_state);
    cd.chain = mps_from_dense(*s.explicit_state, s.rel_tol, s.max_bond);
    cd.dense = *s.explicit_state;
  } else {
    cd.chain = *s.explicit_chain;
    std::size_t joint = 1;
    for (const auto& p : cd.chain.parts) joint *= p.dim;
    if (joint <= kDenseBound) cd.dense = dense_from_mps(cd.chain);
  }
  return cd;
}

// Column k of the first site: the k-th family state of mode 1.
std::vector<cplx> first_family(const MPSForm& chain, std::size_t k) {
  const DenseTensor& a = chain.sites.front();
  const std::size_t d = a.shape[1], r = a.shape[2];
  std::vector<cplx> out(d);
  for (std::size_t x = 0; x < d; ++x) out[x] = a.entries[x * r + k];
  return out;
}

double max_abs_gap(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

ModelPotential default_potential(std::size_t n_modes) {
  ModelPotential p;
  p.barrier.assign(n_modes, 5.0);
  p.well.assign(n_modes, 1.0);
  p.harmonic.assign(n_modes, 0.0);
  p.couplings.assign(n_modes == 0 ? 0 : n_modes - 1, 0.2);
  return p;
}

void validate_scenario(const WireScenario& s) {
  if (s.n_modes < 1) throw std::invalid_argument("waterwire: scenario needs at least 1 mode");
  const int sources = (s.potential ? 1 : 0) + (s.explicit_state ? 1 : 0) +
                      (s.explicit_chain ? 1 : 0) + (s.explicit_alphas.empty() ? 0 : 1);
  if (sources != 1)
    throw std::invalid_argument("waterwire: scenario needs exactly one state source, got " +
                                std::to_string(sources));
  if (s.potential) {
    if (s.grids.size() != s.n_modes)
      throw std::invalid_argument("waterwire: expected one grid per mode");
    for (std::size_t g = 0; g < s.grids.size(); ++g) validate_grid(s.grids[g], g);
    const ModelPotential& p = *s.potential;
    if (p.barrier.size() != s.n_modes || p.well.size() != s.n_modes ||
        p.harmonic.size() != s.n_modes || p.couplings.size() + 1 != s.n_modes)
      throw std::invalid_argument("waterwire: potential arrays do not match the mode count");
    require_finite(p.barrier, "barrier height");
    require_finite(p.well, "well separation");
    require_finite(p.harmonic, "harmonic coefficient");
    require_finite(p.couplings, "coupling strength");
    for (double w : p.well)
      if (w == 0.0) throw std::invalid_argument("waterwire: well separation w must be nonzero");
  }
  if (s.explicit_state && s.explicit_state->parts.size() != s.n_modes)
    throw std::invalid_argument("waterwire: explicit state has the wrong part count");
  if (s.explicit_chain && s.explicit_chain->parts.size() != s.n_modes)
    throw std::invalid_argument("waterwire: explicit chain has the wrong part count");
  if (!s.explicit_alphas.empty()) {
    if (s.n_modes != 2)
      throw std::invalid_argument(
          "waterwire: bare Schmidt weights describe a two-mode scenario only");
    if (s.explicit_alphas.size() < 2)
      throw std::invalid_argument("waterwire: at least two Schmidt weights are needed");
    require_finite(s.explicit_alphas, "Schmidt weight");
    for (double a : s.explicit_alphas)
      if (!(a > 0.0)) throw std::invalid_argument("waterwire: Schmidt weights must be positive");
  }
}

DenseMatrix build_hamiltonian(const WireScenario& s) {
  validate_scenario(s);
  if (!s.potential)
    throw std::invalid_argument("build_hamiltonian: scenario has no model potential");
  const std::size_t nm = s.n_modes;
  const std::size_t n = joint_dimension(s.grids);
  if (n > kDenseBound)
    throw std::invalid_argument("build_hamiltonian: joint grid size " + std::to_string(n) +
                                " exceeds 4096; shrink the grids");

  std::vector<std::size_t> dims(nm), stride(nm);
  for (std::size_t g = 0; g < nm; ++g) dims[g] = s.grids[g].n_points;
  stride[nm - 1] = 1;
  for (std::size_t g = nm - 1; g-- > 0;) stride[g] = stride[g + 1] * dims[g + 1];

  std::vector<double> hop(nm);  // 1/(2 h^2)
  for (std::size_t g = 0; g < nm; ++g) {
    const double h = s.grids[g].spacing();
    hop[g] = 0.5 / (h * h);
  }
  const ModelPotential& p = *s.potential;

  DenseMatrix h(n, n);
  std::vector<std::size_t> idx(nm);
  for (std::size_t row = 0; row < n; ++row) {
    double diag = 0.0;
    for (std::size_t g = 0; g < nm; ++g) {
      idx[g] = (row / stride[g]) % dims[g];
      const double x = s.grids[g].point(idx[g]);
      const double q = (x / p.well[g]) * (x / p.well[g]) - 1.0;
      diag += 2.0 * hop[g] + p.barrier[g] * q * q + p.harmonic[g] * x * x;
    }
    for (std::size_t g = 0; g + 1 < nm; ++g)
      diag += p.couplings[g] * s.grids[g].point(idx[g]) * s.grids[g + 1].point(idx[g + 1]);
    h(row, row) = diag;
    for (std::size_t g = 0; g < nm; ++g)
      if (idx[g] + 1 < dims[g]) {
        h(row, row + stride[g]) = -hop[g];
        h(row + stride[g], row) = -hop[g];
      }
  }
  return h;
}

DenseState ground_state(const DenseMatrix& h, const std::vector<Grid1D>& grids) {
  if (grids.empty()) throw std::invalid_argument("ground_state: no grids given");
  for (std::size_t g = 0; g < grids.size(); ++g) validate_grid(grids[g], g);
  if (joint_dimension(grids) != h.rows)
    throw std::invalid_argument("ground_state: grid size product " +
                                std::to_string(joint_dimension(grids)) +
                                " does not match the matrix dimension " + std::to_string(h.rows));

  auto [energy, vec] = lowest_eigenpair(h);
  (void)energy;
  std::size_t top = 0;
  for (std::size_t i = 1; i < vec.size(); ++i)
    if (std::abs(vec[i]) > std::abs(vec[top])) top = i;
  const double mag = std::abs(vec[top]);
  if (mag > 1e-12) {
    const cplx phase = vec[top] / mag;
    for (auto& z : vec) z /= phase;
  }
  double nrm = 0.0;
  for (const auto& z : vec) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  for (auto& z : vec) z /= nrm;

  DenseState out;
  std::vector<std::size_t> shape;
  for (std::size_t g = 0; g < grids.size(); ++g) {
    out.parts.push_back({"R" + std::to_string(g + 1), grids[g].n_points});
    shape.push_back(grids[g].n_points);
  }
  out.amplitudes = DenseTensor(shape);
  out.amplitudes.entries = std::move(vec);
  out.normalized = true;
  validate_state(out);
  return out;
}

DimerReport dimer_scenario(const WireScenario& s) {
  validate_scenario(s);
  if (s.n_modes != 2)
    throw std::invalid_argument("dimer_scenario: scenario must have exactly 2 modes");

  DenseState psi;
  std::vector<double> alphas;
  DenseMatrix left;
  if (!s.explicit_alphas.empty()) {
    const std::size_t r = s.explicit_alphas.size();
    alphas = s.explicit_alphas;
    psi.parts = {{"R1", r}, {"R2", r}};
    psi.amplitudes = DenseTensor({r, r});
    double total = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      psi.amplitudes.entries[i * r + i] = alphas[i];
      total += alphas[i] * alphas[i];
    }
    psi.normalized = std::fabs(total - 1.0) <= 1e-10;
    left = identity(r);
  } else {
    if (s.potential)
      psi = ground_state(build_hamiltonian(s), s.grids);
    else if (s.explicit_state)
      psi = *s.explicit_state;
    else
      psi = dense_from_mps(*s.explicit_chain);
    const SchmidtForm split = schmidt_decompose(psi, 1);
    alphas = split.alphas;
    left = split.left_states;
  }

  DimerReport rep;
  rep.alphas = alphas;
  rep.measured_k = s.measured_k;
  const std::size_t fam = alphas.size();
  if (fam < 2)
    throw std::invalid_argument(
        "dimer_scenario: the superposition readout needs at least two Schmidt families");
  if (s.measured_k >= fam)
    throw std::invalid_argument("dimer_scenario: family index " + std::to_string(s.measured_k) +
                                " is outside the Schmidt rank " + std::to_string(fam));

  const std::string first = psi.parts[0].name;
  const std::size_t d1 = psi.parts[0].dim;
  MeasurementRecord kept;
  for (std::size_t k = 0; k < fam; ++k) {
    std::vector<cplx> ket(d1);
    for (std::size_t x = 0; x < d1; ++x) ket[x] = left(x, k);
    MeasurementRecord rec = project(psi, first, ket, k);
    rep.outcome_probabilities.push_back(rec.probability);
    rep.probability_total += rec.probability;
    if (k == s.measured_k) kept = std::move(rec);
  }
  rep.projection_probability = rep.outcome_probabilities[s.measured_k];
  rep.post_state = kept.post_state;

  // Superposition readout (psi_1 + psi_2)/sqrt(2), phase-kicked into mode 2.
  BasisChange change;
  change.part = psi.parts[0];
  change.d = DenseMatrix(1, d1);
  for (std::size_t x = 0; x < d1; ++x)
    change.d(0, x) = std::conj((left(x, 0) + left(x, 1)) / std::sqrt(2.0));
  const MeasurementRecord sup = generalized_measure(psi, change, 0);
  rep.superposition_outcome = sup.probability;
  rep.superposition_post = sup.post_state;

  rep.post_spectrum = fourier_analyze(kept.post_state_normalized.amplitudes.entries);
  rep.superposition_spectrum = fourier_analyze(sup.post_state_normalized.amplitudes.entries);

  rep.stages = {
      {"stage1", "independent mode pair"},
      {"stage2", "correlated two-mode state"},
      {"stage3", "mode-2 state after the mode-1 readout"},
      {"qft", "spectrum of the post-readout mode"},
      {"w", "mode-1 readout probability"},
  };
  return rep;
}

WireReport wire_generalize(std::size_t n_modes, const WireScenario& s) {
  if (n_modes != s.n_modes)
    throw std::invalid_argument("wire_generalize: n_modes disagrees with the scenario");
  if (n_modes < 2) throw std::invalid_argument("wire_generalize: a chain needs at least 2 modes");
  validate_scenario(s);
  ChainData cd = resolve_chain(s);
  const MPSForm& chain = cd.chain;
  const std::size_t nm = chain.parts.size();

  WireReport rep;
  rep.n_modes = nm;
  rep.chain = chain;
  rep.truncation_error = chain.truncation_error;
  rep.measured_k = s.measured_k;

  for (const auto& weights : chain.bond_weights)
    for (double w : weights)
      if (!(w > 0.0))
        throw std::invalid_argument(
            "waterwire: chain carries a non-positive bond weight; family states are undefined");

  const DenseTensor& a1 = chain.sites.front();
  const std::size_t d1 = a1.shape[1];
  const std::size_t r1 = a1.shape[2];
  if (s.measured_k >= r1)
    throw std::invalid_argument("waterwire: family index " + std::to_string(s.measured_k) +
                                " is outside the first bond dimension " + std::to_string(r1));

  // The first-mode readout is projective only over an orthonormal family.
  for (std::size_t k = 0; k < r1; ++k)
    for (std::size_t kp = k; kp < r1; ++kp) {
      cplx gram(0.0, 0.0);
      for (std::size_t x = 0; x < d1; ++x)
        gram += std::conj(a1.entries[x * r1 + k]) * a1.entries[x * r1 + kp];
      if (std::abs(gram - (k == kp ? cplx(1.0) : cplx(0.0))) > 1e-8)
        throw std::invalid_argument("waterwire: first-site family states are not orthonormal");
    }

  // Complete-family readout probabilities on the first mode.
  const std::string first_name = chain.parts.front().name;
  const std::vector<cplx> psi1k = first_family(chain, s.measured_k);
  for (std::size_t k = 0; k < r1; ++k) {
    DenseTensor ket({d1});
    ket.entries = first_family(chain, k);
    const double nrm = state_norm(subspace_project(chain, {first_name}, ket));
    rep.first_mode_probabilities.push_back(nrm * nrm);
  }
  rep.first_mode_outcome = rep.first_mode_probabilities[s.measured_k];

  // Interior window state chi and the closed-form coefficients, both summed
  // path by path over the window weights.
  const std::size_t last_bond = chain.sites.back().shape[0];
  std::vector<cplx> formal_c(last_bond, cplx(0.0, 0.0));
  const double alpha1_k = chain.bond_weights.front()[s.measured_k];
  DenseTensor chi;
  rep.chi_norm = 1.0;
  if (nm == 2) {
    if (s.beta.rank() != 0)
      throw std::invalid_argument("waterwire: a two-mode chain takes no interior window weights");
    formal_c[s.measured_k] = alpha1_k;
  } else {
    if (s.beta.rank() != nm - 2)
      throw std::invalid_argument("waterwire: window weights must have one axis per interior mode (" +
                                  std::to_string(nm - 2) + ")");
    for (std::size_t t = 0; t < nm - 2; ++t) {
      const std::size_t bond = chain.sites[t + 1].shape[2];
      if (s.beta.shape[t] != bond)
        throw std::invalid_argument("waterwire: window weight axis " + std::to_string(t) +
                                    " has dim " + std::to_string(s.beta.shape[t]) +
                                    ", expected bond dimension " + std::to_string(bond));
    }
    double bnorm = 0.0;
    for (const auto& z : s.beta.entries) bnorm += std::norm(z);
    bnorm = std::sqrt(bnorm);
    if (bnorm < 1e-14) throw std::invalid_argument("waterwire: window weights are all zero");

    std::vector<std::size_t> idims(nm - 2);
    for (std::size_t t = 0; t < nm - 2; ++t) idims[t] = chain.parts[t + 1].dim;
    chi = DenseTensor(idims);

    std::vector<std::size_t> bidx(nm - 2);
    for (std::size_t b = 0; b < s.beta.size(); ++b) {
      std::size_t rem = b;
      for (std::size_t t = nm - 2; t-- > 0;) {
        bidx[t] = rem % s.beta.shape[t];
        rem /= s.beta.shape[t];
      }
      const cplx coef = s.beta.entries[b] / bnorm;
      if (std::abs(coef) == 0.0) continue;

      double wprod = alpha1_k;
      for (std::size_t t = 0; t < nm - 2; ++t) wprod *= chain.bond_weights[t + 1][bidx[t]];
      formal_c[bidx.back()] += std::conj(coef) * wprod;

      // Product of interior family functions along this path.
      std::vector<cplx> acc{coef};
      for (std::size_t t = 0; t < nm - 2; ++t) {
        const DenseTensor& site = chain.sites[t + 1];
        const std::size_t d = site.shape[1], r = site.shape[2];
        const std::size_t prev = t == 0 ? s.measured_k : bidx[t - 1];
        const double lam = chain.bond_weights[t][prev];
        std::vector<cplx> next(acc.size() * d);
        for (std::size_t a = 0; a < acc.size(); ++a)
          for (std::size_t x = 0; x < d; ++x)
            next[a * d + x] = acc[a] * site.entries[(prev * d + x) * r + bidx[t]] / lam;
        acc = std::move(next);
      }
      for (std::size_t i = 0; i < chi.entries.size(); ++i) chi.entries[i] += acc[i];
    }
    double cnorm = 0.0;
    for (const auto& z : chi.entries) cnorm += std::norm(z);
    rep.chi_norm = std::sqrt(cnorm);
    if (rep.chi_norm < 1e-14)
      throw std::invalid_argument("waterwire: the window state vanished on the grid");
    for (auto& z : chi.entries) z /= rep.chi_norm;
  }

  // Chain route: one combined window over modes 1..nm-1.
  DenseTensor window;
  if (nm == 2) {
    window = DenseTensor({d1});
    window.entries = psi1k;
  } else {
    std::vector<std::size_t> wshape{d1};
    wshape.insert(wshape.end(), chi.shape.begin(), chi.shape.end());
    window = DenseTensor(wshape);
    for (std::size_t x = 0; x < d1; ++x)
      for (std::size_t i = 0; i < chi.entries.size(); ++i)
        window.entries[x * chi.entries.size() + i] = psi1k[x] * chi.entries[i];
  }
  std::vector<std::string> window_names;
  for (std::size_t g = 0; g + 1 < nm; ++g) window_names.push_back(chain.parts[g].name);
  const DenseState post = subspace_project(chain, window_names, window);
  rep.final_state = post.amplitudes.entries;
  rep.window_outcome = state_norm(post);

  // Staged dense route: project the first mode, then the interior window.
  if (cd.dense) {
    const MeasurementRecord rec1 = project(*cd.dense, first_name, psi1k, s.measured_k);
    DenseState staged = rec1.post_state;
    if (nm > 2) {
      const std::vector<std::string> interior(window_names.begin() + 1, window_names.end());
      staged = subspace_project(staged, interior, chi);
    }
    rep.dense_gap = max_abs_gap(rep.final_state, staged.amplitudes.entries);
  }

  // Closed-form route: end-mode families weighted by the bond products.
  const DenseTensor& top = chain.sites.back();
  const std::size_t dn = top.shape[1];
  const std::vector<double>& lam_last = chain.bond_weights.back();
  rep.formal_state.assign(dn, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < last_bond; ++i) {
    if (std::abs(formal_c[i]) == 0.0) continue;
    for (std::size_t x = 0; x < dn; ++x)
      rep.formal_state[x] += formal_c[i] * top.entries[i * dn + x] / lam_last[i];
  }
  rep.route_gap = max_abs_gap(rep.final_state, rep.formal_state);

  std::vector<cplx> unit = rep.final_state;
  if (rep.window_outcome > 1e-12)
    for (auto& z : unit) z /= rep.window_outcome;
  rep.end_spectrum = fourier_analyze(unit);

  rep.stages = {
      {"stage1", "independent chain modes"},
      {"stage2", "correlated chain state"},
      {"w_first", "first-mode readout probability"},
      {"stage3", "end-mode state after the readout and window projection"},
      {"w_window", "2-norm of the surviving end-mode state"},
      {"qft", "spectrum of the end mode"},
  };
  return rep;
}

WireReport pentamer_scenario(const WireScenario& s) {
  if (s.n_modes != 4)
    throw std::invalid_argument("pentamer_scenario: scenario must have exactly 4 modes");
  return wire_generalize(4, s);
}

}  // namespace qsynth
