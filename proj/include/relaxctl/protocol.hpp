// Download / reverse-download / upload protocol simulation.
//
// The download operator interleaves swaps between the control region C and
// fresh memory sectors M_l with the network evolution U = exp(-iHt):
//
//   W = U S_L U S_{L-1} ... U S_1
//
// applied right to left. By default one extra terminal swap into M_{L+1} is
// appended after the last U, which leaves the C factor exactly in |e>_C and
// makes the eta / phi / Delta decomposition of the final state exact. The
// joint state is stored over (C, Cbar, M_1..M_k) with memory sectors
// materialized lazily, one per executed swap.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "relaxctl/channel.hpp"
#include "relaxctl/common.hpp"
#include "relaxctl/quantum.hpp"
#include "relaxctl/spin_network.hpp"

namespace relaxctl {

enum class Direction { DOWNLOAD, REVERSE_DOWNLOAD, UPLOAD };

struct ProtocolConfig {
  double t = 1.0;              // evolution time per step
  int steps = 1;               // L, number of swap+evolve steps
  bool terminal_swap = true;   // append S_{L+1} after the last U
  Direction direction = Direction::DOWNLOAD;
  Index amplitude_budget = Index{1} << 22;

  int memory_sectors() const { return steps + (terminal_swap ? 1 : 0); }
};

inline void validate(const ProtocolConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("step count must be at least 1");
  if (!std::isfinite(cfg.t)) throw std::invalid_argument("evolution time must be finite");
}

struct ProtocolRun {
  StateVector final_state;  // factors (C, Cbar, M_1..M_k)
  double eta = 0.0;
  StateVector phi_m;        // normalized memory component; zero amplitudes when empty
  bool phi_empty = false;   // eta at or below tol::empty_weight
  double delta_norm_sq = 0.0;  // 1 - eta
  std::optional<DensityMatrix> memory_rho;  // filled on request via memory_density
};

namespace detail {

// True when the joint state would exceed the budget; multiplies
// incrementally so huge step counts cannot overflow the index type.
inline bool exceeds_budget(Index d_c, Index d_cbar, int memory_sectors, Index budget) {
  Index dim = d_c * d_cbar;
  if (dim > budget) return true;
  for (int k = 0; k < memory_sectors; ++k) {
    if (dim > budget / d_c) return true;
    dim *= d_c;
  }
  return false;
}

// Largest step count whose joint state fits in the amplitude budget.
inline int max_feasible_steps(Index d_c, Index d_cbar, bool terminal_swap, Index budget) {
  int l = 0;
  Index dim = d_c * d_cbar * (terminal_swap ? d_c : 1);
  while (dim <= budget / d_c) {
    dim *= d_c;
    ++l;
  }
  return l;
}

inline void check_budget(const ProtocolConfig& cfg, Index d_c, Index d_cbar) {
  if (exceeds_budget(d_c, d_cbar, cfg.memory_sectors(), cfg.amplitude_budget))
    throw resource_error(
        "joint state for L = " + std::to_string(cfg.steps) + " exceeds the amplitude budget of " +
        std::to_string(cfg.amplitude_budget) + "; maximal feasible step count here is L = " +
        std::to_string(max_feasible_steps(d_c, d_cbar, cfg.terminal_swap, cfg.amplitude_budget)));
}

// Swap two register contents; register names stay with their positions.
inline StateVector swap_contents(StateVector state, std::size_t i, std::size_t j) {
  std::vector<std::string> labels = state.labels;
  state = swap_apply(state, i, j);
  state.labels = std::move(labels);
  return state;
}

// Append a fresh memory sector in |e>_C and swap it with the C factor.
inline StateVector swap_in_fresh_sector(StateVector state, Index d_c, int sector_number) {
  StateVector fresh = vacuum_state({d_c}, {"M" + std::to_string(sector_number)});
  state = tensor_product(state, fresh);
  const std::size_t last = state.n_factors() - 1;
  return swap_contents(std::move(state), 0, last);
}

}  // namespace detail

/// The protocol's propagator on H_C (x) H_Cbar, control sites leading.
inline UnitaryOperator protocol_propagator(const SpinNetwork& net, const Bipartition& bp,
                                           double t) {
  return propagator(build_hamiltonian_ordered(net, bp), t);
}

/// Apply W to psi (x) |e>_M and decompose the result per the cooling picture.
inline ProtocolRun run_download(const SpinNetwork& net, const ProtocolConfig& cfg,
                                const StateVector& psi) {
  validate(cfg);
  const Bipartition bp = ordered_bipartition(net);
  if (psi.dim() != bp.d_c * bp.d_cbar)
    throw dimension_error("input state dimension does not match the network bipartition");
  if (!psi.is_normalized()) throw std::invalid_argument("input state must be normalized");
  detail::check_budget(cfg, bp.d_c, bp.d_cbar);

  const UnitaryOperator u = protocol_propagator(net, bp, cfg.t);

  StateVector state = make_state(psi.amplitudes, {bp.d_c, bp.d_cbar}, {"C", "Cbar"});
  for (int l = 1; l <= cfg.steps; ++l) {
    state = detail::swap_in_fresh_sector(std::move(state), bp.d_c, l);
    apply_to_leading_factors(state, u.matrix, 2);
  }
  if (cfg.terminal_swap)
    state = detail::swap_in_fresh_sector(std::move(state), bp.d_c, cfg.steps + 1);

  ProtocolRun run;
  const StateVector target = vacuum_state({bp.d_c, bp.d_cbar}, {"C", "Cbar"});
  ProjectionResult proj = project_component(state, {0, 1}, target);
  // eta is a squared projection weight of a normalized state; deviations
  // from [0, 1] and gaps below 1e-12 are round-off, not signal.
  run.eta = std::clamp(proj.weight, 0.0, 1.0);
  if (1.0 - run.eta <= 1e-12) run.eta = 1.0;
  run.phi_m = std::move(proj.residual);
  run.phi_empty = proj.empty;
  run.delta_norm_sq = 1.0 - run.eta;
  run.final_state = std::move(state);
  return run;
}

/// Memory factor indices of a finished run (everything after C, Cbar).
inline std::vector<std::size_t> memory_factors(const ProtocolRun& run) {
  std::vector<std::size_t> out;
  for (std::size_t k = 2; k < run.final_state.n_factors(); ++k) out.push_back(k);
  return out;
}

/// rho_M = tr_CCbar of the final joint state. Dense; guarded by dimension.
inline DensityMatrix memory_density(const ProtocolRun& run, Index max_dim = Index{1} << 12) {
  const auto mem = memory_factors(run);
  Index d_m = 1;
  for (std::size_t f : mem) d_m *= run.final_state.factor_dims[f];
  if (d_m > max_dim)
    throw resource_error("memory density matrix would be " + std::to_string(d_m) + " dimensional");
  return partial_trace(pure_density(run.final_state), run.final_state.factor_dims, mem);
}

/// Normalized residual |Delta> on (Cbar, M): the component of the final
/// state with C in |e>_C but Cbar not in |E>. Empty when eta = 1.
inline ProjectionResult delta_component(const ProtocolRun& run) {
  const StateVector& fs = run.final_state;
  const Index d_c = fs.factor_dims[0];
  const Index d_cbar = fs.factor_dims[1];
  // <e|_C picks the Cbar(x)M block; subtract the sqrt(eta) |E>|phi> part.
  Vec block = partial_inner(fs, {0}, vacuum_state({d_c}).amplitudes);
  if (!run.phi_empty) {
    const Index d_m = run.phi_m.dim();
    block.segment(0, d_m) -= std::sqrt(run.eta) * run.phi_m.amplitudes;
  }
  ProjectionResult res;
  res.weight = block.squaredNorm();
  std::vector<Index> dims;
  std::vector<std::string> labels;
  dims.push_back(d_cbar);
  labels.push_back("Cbar");
  for (std::size_t k = 2; k < fs.n_factors(); ++k) {
    dims.push_back(fs.factor_dims[k]);
    labels.push_back(fs.labels[k]);
  }
  if (res.weight <= tol::empty_weight) {
    res.empty = true;
    res.residual = StateVector{Vec::Zero(block.size()), dims, labels};
  } else {
    res.residual = StateVector{block / std::sqrt(res.weight), dims, labels};
  }
  return res;
}

/// Weight of the final state outside |e>_C on the control factor.
inline double control_leakage(const ProtocolRun& run) {
  const Index d_c = run.final_state.factor_dims[0];
  const Vec in_e = partial_inner(run.final_state, {0}, vacuum_state({d_c}).amplitudes);
  return std::max(0.0, run.final_state.squared_norm() - in_e.squaredNorm());
}

// ---------------------------------------------------------------------------
// Coding transformation
// ---------------------------------------------------------------------------

/// The map D sending coding-basis labels to the protocol's memory output
/// vectors |phi_k>, together with its isometric part V. The coding domain is
/// the abstract d-dimensional label space; V embeds it into the concrete
/// memory space of the configured run length.
struct CodingMap {
  Mat phi_matrix;               // memory_dim x d, k-th column is |phi_k>
  Mat gram;                     // d x d, G_kk' = <phi_k|phi_k'>
  std::vector<double> eta_list;
  double eta0 = 0.0;
  Mat v;                        // memory_dim x d isometry, polar part of D
  double dv_norm_sq = 0.0;      // ||D - V||_2^2 (squared Frobenius)
  double eq8_bound = 0.0;       // d (d-1) (1 - eta0) / eta0
  Mat basis;                    // d x d, columns are the coding basis on C(x)Cbar
  ProtocolConfig config;

  Index domain_dim() const { return basis.cols(); }
  Index memory_dim() const { return phi_matrix.rows(); }
};

/// Computational product basis of H_C (x) H_Cbar.
inline std::vector<StateVector> product_basis(const Bipartition& bp) {
  std::vector<StateVector> out;
  const Index d = bp.d_c * bp.d_cbar;
  out.reserve(d);
  for (Index k = 0; k < d; ++k) out.push_back(basis_state({bp.d_c, bp.d_cbar}, k, {"C", "Cbar"}));
  return out;
}

inline CodingMap build_coding(const SpinNetwork& net, const ProtocolConfig& cfg,
                              const std::vector<StateVector>& basis = {}) {
  const Bipartition bp = ordered_bipartition(net);
  const Index d = bp.d_c * bp.d_cbar;
  std::vector<StateVector> kets = basis.empty() ? product_basis(bp) : basis;
  if (static_cast<Index>(kets.size()) != d)
    throw dimension_error("coding basis must span H_CCbar (" + std::to_string(d) + " vectors)");
  Mat basis_mat(d, d);
  for (Index k = 0; k < d; ++k) {
    if (kets[k].dim() != d) throw dimension_error("coding basis vector has wrong dimension");
    basis_mat.col(k) = kets[k].amplitudes;
  }
  if ((basis_mat.adjoint() * basis_mat - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("coding basis is not orthonormal");

  CodingMap coding;
  coding.basis = std::move(basis_mat);
  coding.config = cfg;
  coding.eta_list.resize(d);

  for (Index k = 0; k < d; ++k) {
    ProtocolRun run = run_download(net, cfg, kets[k]);
    if (run.eta <= tol::empty_weight)
      throw degenerate_coding_error("eta vanished for coding basis vector " + std::to_string(k) +
                                    "; the protocol has not converged at all");
    if (coding.phi_matrix.size() == 0) coding.phi_matrix.resize(run.phi_m.dim(), d);
    coding.phi_matrix.col(k) = run.phi_m.amplitudes;
    coding.eta_list[k] = run.eta;
  }
  coding.eta0 = *std::min_element(coding.eta_list.begin(), coding.eta_list.end());
  coding.gram = coding.phi_matrix.adjoint() * coding.phi_matrix;

  const PolarResult polar = polar_decompose(coding.phi_matrix);
  coding.v = polar.v;
  coding.dv_norm_sq = (polar.sigma.array() - 1.0).square().sum();
  coding.eq8_bound =
      static_cast<double>(d) * static_cast<double>(d - 1) * (1.0 - coding.eta0) / coding.eta0;
  return coding;
}

/// Coordinates of a C(x)Cbar state in the coding basis.
inline Vec coding_coordinates(const CodingMap& coding, const StateVector& psi) {
  if (psi.dim() != coding.domain_dim())
    throw dimension_error("state dimension does not match coding domain");
  return coding.basis.adjoint() * psi.amplitudes;
}

/// Lower bound eta0 - 4 d sqrt((1-eta0)/eta0); may be negative (vacuous).
inline double fidelity_lower_bound(double eta0, Index d) {
  if (!(eta0 > 0.0)) throw std::domain_error("fidelity bound requires eta0 > 0");
  const double ratio = std::max(0.0, (1.0 - eta0) / eta0);
  return eta0 - 4.0 * static_cast<double>(d) * std::sqrt(ratio);
}

// ---------------------------------------------------------------------------
// Fidelities
// ---------------------------------------------------------------------------

namespace detail {

// Fidelities are squared overlaps of normalized states; gaps below 1e-12
// from 1 are round-off, not signal (same convention as eta).
inline double snap_unit(double f) { return std::abs(1.0 - f) <= 1e-12 ? 1.0 : f; }

}  // namespace detail

/// F_d = <psi| V^dag rho_M V |psi>: run the download and decode the memory.
inline double download_fidelity(const SpinNetwork& net, const ProtocolConfig& cfg,
                                const CodingMap& coding, const StateVector& psi) {
  const ProtocolRun run = run_download(net, cfg, psi);
  if (run.final_state.dim() / (run.final_state.factor_dims[0] * run.final_state.factor_dims[1]) !=
      coding.memory_dim())
    throw dimension_error("coding was built for a different protocol configuration");
  const Vec w = coding.v * coding_coordinates(coding, psi);
  const Vec residual = partial_inner(run.final_state, memory_factors(run), w);
  return detail::snap_unit(residual.squaredNorm());
}

namespace detail {

// Apply the exact adjoint of the simulated W (terminal swap first) to a
// joint state laid out as (C, Cbar, M_1..M_k).
inline void apply_w_adjoint(StateVector& state, const Mat& u, const ProtocolConfig& cfg) {
  if (cfg.terminal_swap) state = swap_contents(std::move(state), 0, 2 + cfg.steps);
  const Mat u_dag = u.adjoint();
  for (int l = cfg.steps; l >= 1; --l) {
    apply_to_leading_factors(state, u_dag, 2);
    state = swap_contents(std::move(state), 0, 1 + l);
  }
}

}  // namespace detail

/// F_rd: prepare |eE> on C(x)Cbar and V|psi> on the memory, apply W^dag,
/// and return the overlap of the C(x)Cbar output with psi. Uses backward
/// time evolution; computed for validation and as the upload primitive.
inline double reverse_download_fidelity(const SpinNetwork& net, const ProtocolConfig& cfg,
                                        const CodingMap& coding, const StateVector& psi) {
  validate(cfg);
  const Bipartition bp = ordered_bipartition(net);
  if (psi.dim() != bp.d_c * bp.d_cbar)
    throw dimension_error("target state dimension does not match the network bipartition");
  detail::check_budget(cfg, bp.d_c, bp.d_cbar);

  const int sectors = cfg.memory_sectors();
  std::vector<Index> mem_dims(sectors, bp.d_c);
  std::vector<std::string> mem_labels;
  for (int l = 1; l <= sectors; ++l) mem_labels.push_back("M" + std::to_string(l));
  const Vec w = coding.v * coding_coordinates(coding, psi);
  if (coding.memory_dim() != product_of(mem_dims))
    throw dimension_error("coding was built for a different protocol configuration");

  StateVector joint = tensor_product(vacuum_state({bp.d_c, bp.d_cbar}, {"C", "Cbar"}),
                                     make_state(w, mem_dims, mem_labels));
  const UnitaryOperator u = protocol_propagator(net, bp, cfg.t);
  detail::apply_w_adjoint(joint, u.matrix, cfg);

  const Vec residual = partial_inner(joint, {0, 1}, psi.amplitudes);
  return detail::snap_unit(residual.squaredNorm());
}

/// Physical upload fidelity: the reverse-download of the sign-flipped
/// network (H' = -H), whose backward evolution is this network's forward
/// evolution, with the coding V' built from the primed download protocol.
inline double upload_fidelity(const SpinNetwork& net, const ProtocolConfig& cfg,
                              const StateVector& psi) {
  const SpinNetwork primed = negated(net);
  const CodingMap coding_prime = build_coding(primed, cfg);
  return reverse_download_fidelity(primed, cfg, coding_prime, psi);
}

// Convergence sweep rows for CSV emission.
struct ConvergenceRow {
  int steps;
  double eta;
  double one_minus_eta;
  double bound_eq11;
  double f_d;
  double f_up;
};

inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows,
                                  const std::string& manifest) {
  if (!manifest.empty()) out << "# manifest: " << manifest << "\n";
  out << "L,eta,one_minus_eta,bound_eq11,F_d,F_up\n";
  for (const auto& r : rows)
    out << r.steps << "," << format_roundtrip(r.eta) << "," << format_roundtrip(r.one_minus_eta)
        << "," << format_roundtrip(r.bound_eq11) << "," << format_roundtrip(r.f_d) << ","
        << format_roundtrip(r.f_up) << "\n";
}

}  // namespace relaxctl
