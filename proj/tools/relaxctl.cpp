// relaxctl: spin-network relaxation control toolkit.
//
// Subcommands:
//   check     automaton certification of a control set (+ spectral oracle)
//   channel   eigenvalue analysis of the reduced relaxation channel
//   download  simulate the download protocol and its decoding fidelity
//   upload    simulate the upload protocol via the sign-flipped network
//   converge  trace-distance trajectory and decay-rate fit
//
// Exit codes: 0 success / certified, 2 negative verdict, 1 error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relaxctl/channel.hpp"
#include "relaxctl/controllability.hpp"
#include "relaxctl/format.hpp"
#include "relaxctl/network_io.hpp"
#include "relaxctl/protocol.hpp"
#include "relaxctl/rng.hpp"

using namespace relaxctl;

namespace {

struct StateSpec {
  bool random = true;
  std::uint64_t seed = 0;
  Index basis_index = 0;
  std::string text = "random:0";
};

StateSpec parse_state_spec(const std::string& text) {
  StateSpec spec;
  spec.text = text;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "random") {
      spec.random = true;
      spec.seed = arg.empty() ? 0 : std::stoull(arg);
    } else if (kind == "basis") {
      spec.random = false;
      spec.basis_index = arg.empty() ? 0 : std::stoll(arg);
    } else {
      throw std::invalid_argument("");
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("state must be random:<seed> or basis:<k>, got '" + text + "'");
  }
  return spec;
}

StateVector make_input_state(const StateSpec& spec, const Bipartition& bp) {
  const Index d = bp.d_c * bp.d_cbar;
  if (spec.random) {
    CounterRng rng(spec.seed, /*stream=*/1);
    return make_state(rng.random_amplitudes(d), {bp.d_c, bp.d_cbar}, {"C", "Cbar"});
  }
  if (spec.basis_index < 0 || spec.basis_index >= d)
    throw std::invalid_argument("basis index out of range for dimension " + std::to_string(d));
  return basis_state({bp.d_c, bp.d_cbar}, spec.basis_index, {"C", "Cbar"});
}

std::string control_set_string(const std::vector<int>& sites) {
  std::string out = "{";
  for (std::size_t i = 0; i < sites.size(); ++i)
    out += (i ? "," : "") + std::to_string(sites[i]);
  return out + "}";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << contents;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

int cmd_check(const std::string& net_path, bool oracle, int minimal_k, bool have_disorder,
              std::uint64_t disorder_seed, const std::string& dot_path) {
  SpinNetwork net = load_network(net_path);
  std::ostringstream manifest;
  manifest << "command=check network=" << net_path << " oracle=" << (oracle ? 1 : 0)
           << " minimal=" << minimal_k << " seed=" << (have_disorder ? disorder_seed : 0)
           << " disorder=" << (have_disorder ? 1 : 0);
  std::cout << "manifest: " << manifest.str() << "\n";

  const CertificationResult res = certify_control(net);
  emit_trace(std::cout, res.trace);
  std::cout << (res.certified ? "CERTIFIED" : "NOT CERTIFIED") << "\n";

  if (!dot_path.empty()) {
    ColoredGraph g = graph_from_network(net);
    g.colors = res.trace.steps.back();  // final automaton coloring
    std::ostringstream dot;
    write_dot(dot, g);
    write_file(dot_path, dot.str());
    std::cout << "dot: " << dot_path << "\n";
  }

  if (oracle) {
    SpinNetwork probed = net;
    if (have_disorder) {
      CounterRng rng(disorder_seed, /*stream=*/2);
      for (auto& e : probed.edges) e.strength *= 1.0 + 1e-3 * rng.uniform(-1.0, 1.0);
      std::cout << "disorder: seed=" << disorder_seed << " scale=0.001\n";
    }
    const OracleResult ores = oracle_condition_ii(probed);
    std::cout << "condition ii: " << (ores.holds ? "HOLDS" : "FAILS") << "\n";
    std::cout << "invariant eigenstates in S: " << ores.intersection_dim << "\n";
    if (ores.witness.has_value()) {
      std::cout << "witness eigenvalue: " << format_fixed7(ores.witness_eigenvalue) << "\n";
      std::cout << "witness overlap with |eE>: "
                << format_fixed7(std::norm(ores.witness->amplitudes[0])) << "\n";
    }
  }

  if (minimal_k > 0) {
    const auto sets = minimal_control_search(graph_from_network(net), minimal_k);
    std::cout << "minimal control sets (size <= " << minimal_k << "): " << sets.size() << "\n";
    for (const auto& s : sets) std::cout << "  " << control_set_string(s) << "\n";
  }
  return res.certified ? 0 : 2;
}

// ---------------------------------------------------------------------------
// channel
// ---------------------------------------------------------------------------

int cmd_channel(const std::string& net_path, double t, bool prime) {
  const SpinNetwork net = load_network(net_path);
  std::cout << "manifest: command=channel network=" << net_path << " t=" << format_roundtrip(t)
            << " prime=" << (prime ? 1 : 0) << "\n";

  const Bipartition bp = ordered_bipartition(net);
  const UnitaryOperator u = protocol_propagator(net, bp, t);
  const StateVector e = vacuum_state({bp.d_c});
  const Superoperator tau = prime ? build_tau_prime(u, bp, e) : build_tau(u, bp, e);
  const SpectralReport rep = spectral_report(tau);

  std::cout << "moduli:";
  for (const cplx& lam : rep.eigenvalues) std::cout << " " << format_fixed7(std::abs(lam));
  std::cout << "\n";
  if (rep.mixing) {
    std::cout << "mixing: yes, kappa: " << format_fixed7(rep.kappa)
              << ", purity: " << format_fixed7(rep.fixed_point_purity) << "\n";
    const DensityMatrix fp = unique_fixed_point(rep);
    std::cout << "overlap_E: " << format_fixed7(fp.entries(0, 0).real()) << "\n";
  } else {
    std::cout << "mixing: no, kappa: " << format_fixed7(rep.kappa) << "\n";
    std::cout << "fixed-point count: " << rep.fixed_points.size() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// download / upload
// ---------------------------------------------------------------------------

// One row per feasible step count. Short protocols can be exactly
// degenerate (a step drains at most |C| excitations, so eta0 = 0 for small
// L); those step counts are skipped and reported on stdout.
std::vector<ConvergenceRow> convergence_rows(const SpinNetwork& net, const ProtocolConfig& base,
                                             const StateVector& psi) {
  const SpinNetwork primed = negated(net);
  std::vector<ConvergenceRow> rows;
  for (int steps = 1; steps <= base.steps; ++steps) {
    ProtocolConfig cfg = base;
    cfg.steps = steps;
    try {
      const CodingMap coding = build_coding(net, cfg);
      const CodingMap coding_prime = build_coding(primed, cfg);
      ConvergenceRow row;
      row.steps = steps;
      row.eta = run_download(net, cfg, psi).eta;
      row.one_minus_eta = 1.0 - row.eta;
      row.bound_eq11 =
          fidelity_lower_bound(std::min(coding.eta0, coding_prime.eta0), coding.domain_dim());
      row.f_d = download_fidelity(net, cfg, coding, psi);
      row.f_up = reverse_download_fidelity(primed, cfg, coding_prime, psi);
      rows.push_back(row);
    } catch (const degenerate_coding_error&) {
      std::cout << "sweep: L=" << steps << " skipped (degenerate coding)\n";
    }
  }
  return rows;
}

int cmd_transfer(const std::string& net_path, double t, int steps, const std::string& state_text,
                 const std::string& csv_path, bool literal_order, bool upload) {
  const SpinNetwork net = load_network(net_path);
  const StateSpec spec = parse_state_spec(state_text);

  ProtocolConfig cfg;
  cfg.t = t;
  cfg.steps = steps;
  cfg.terminal_swap = !literal_order;
  cfg.direction = upload ? Direction::UPLOAD : Direction::DOWNLOAD;

  std::ostringstream manifest;
  manifest << "command=" << (upload ? "upload" : "download") << " network=" << net_path
           << " t=" << format_roundtrip(t) << " L=" << steps
           << " terminal_swap=" << (cfg.terminal_swap ? 1 : 0) << " state=" << spec.text
           << " seed=" << (spec.random ? spec.seed : 0);
  if (!csv_path.empty()) manifest << " csv=" << csv_path;
  std::cout << "manifest: " << manifest.str() << "\n";

  const Bipartition bp = ordered_bipartition(net);
  const StateVector psi = make_input_state(spec, bp);

  // The upload protocol is the reverse-download of the sign-flipped network.
  const SpinNetwork run_net = upload ? negated(net) : net;
  const CodingMap coding = build_coding(run_net, cfg);
  const double eta = run_download(run_net, cfg, psi).eta;
  const double fidelity = upload ? reverse_download_fidelity(run_net, cfg, coding, psi)
                                 : download_fidelity(run_net, cfg, coding, psi);
  const double bound = fidelity_lower_bound(coding.eta0, coding.domain_dim());

  std::cout << "eta = " << format_fixed7(eta) << "\n";
  std::cout << (upload ? "eta0_prime = " : "eta0 = ") << format_fixed7(coding.eta0) << "\n";
  std::cout << (upload ? "F_up = " : "F_d = ") << format_fixed7(fidelity) << "\n";
  std::cout << "bound_eq11 = " << format_fixed7(bound) << "\n";
  std::cout << "dv_norm_sq = " << format_sig7(coding.dv_norm_sq) << "\n";
  std::cout << "bound_eq8 = " << format_sig7(coding.eq8_bound) << "\n";

  if (!csv_path.empty()) {
    const auto rows = convergence_rows(net, cfg, psi);
    std::ostringstream csv;
    write_convergence_csv(csv, rows, manifest.str());
    write_file(csv_path, csv.str());
    std::cout << "csv: " << csv_path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

int cmd_converge(const std::string& net_path, double t, int max_steps, const std::string& csv_path,
                 std::uint64_t seed) {
  const SpinNetwork net = load_network(net_path);
  std::ostringstream manifest;
  manifest << "command=converge network=" << net_path << " t=" << format_roundtrip(t)
           << " max_steps=" << max_steps << " seed=" << seed;
  if (!csv_path.empty()) manifest << " csv=" << csv_path;
  std::cout << "manifest: " << manifest.str() << "\n";

  const Bipartition bp = ordered_bipartition(net);
  const UnitaryOperator u = protocol_propagator(net, bp, t);
  const Superoperator tau = build_tau(u, bp, vacuum_state({bp.d_c}));
  const SpectralReport rep = spectral_report(tau);
  if (!rep.mixing) {
    std::cout << "moduli:";
    for (const cplx& lam : rep.eigenvalues) std::cout << " " << format_fixed7(std::abs(lam));
    std::cout << "\nnot mixing\n";
    return 2;
  }

  CounterRng rng(seed, /*stream=*/3);
  const DensityMatrix rho0{rng.random_density_entries(bp.d_cbar)};
  const DensityMatrix fp = unique_fixed_point(rep);
  const auto distances = distance_trajectory(tau, rho0, fp, max_steps);

  if (!csv_path.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(csv, distances, manifest.str());
    write_file(csv_path, csv.str());
    std::cout << "csv: " << csv_path << "\n";
  }

  std::cout << "kappa = " << format_fixed7(rep.kappa) << "\n";
  if (rep.kappa < 1e-12) {
    std::cout << "fit skipped: one-step relaxation (kappa = 0)\n";
    return 0;
  }
  const int window_lo = std::max(1, max_steps / 3);
  try {
    const double fit = fit_decay_rate(distances, window_lo, max_steps);
    std::cout << "kappa_fit = " << format_fixed7(fit) << "  (window L=[" << window_lo << ","
              << max_steps << "])\n";
    std::cout << "rel_diff = " << format_fixed7(std::abs(fit - rep.kappa) / rep.kappa) << "\n";
  } catch (const underflow_error& e) {
    std::cout << "fit skipped: " << e.what() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spin-network relaxation control toolkit"};
  app.require_subcommand(1);

  std::string net_path, csv_path, dot_path, state_text = "random:0";
  double t = 1.0;
  int steps = 8, max_steps = 30, minimal_k = 0;
  std::uint64_t disorder_seed = 0, seed = 0;
  bool oracle = false, prime = false, literal_order = false;

  auto* check = app.add_subcommand("check", "certify a control set via the graph automaton");
  check->add_option("network", net_path, "network file")->required();
  check->add_flag("--oracle", oracle, "also run the spectral eigenstate oracle");
  check->add_option("--minimal", minimal_k, "list minimal certified sets up to this size");
  auto* disorder_opt =
      check->add_option("--disorder", disorder_seed, "perturb couplings (relative 1e-3), seeded");
  check->add_option("--dot", dot_path, "write the final coloring as a DOT file");

  auto* channel = app.add_subcommand("channel", "spectral analysis of the relaxation channel");
  channel->add_option("network", net_path, "network file")->required();
  channel->add_option("--time", t, "evolution time per step");
  channel->add_flag("--prime", prime, "analyze the reverse-evolution channel instead");

  auto* download = app.add_subcommand("download", "download protocol fidelity");
  download->add_option("network", net_path, "network file")->required();
  download->add_option("--time", t, "evolution time per step");
  download->add_option("--steps", steps, "number of swap steps L");
  download->add_option("--state", state_text, "input state: random:<seed> or basis:<k>");
  download->add_option("--csv", csv_path, "write a convergence sweep CSV");
  download->add_flag("--literal-order", literal_order, "omit the terminal swap");

  auto* upload = app.add_subcommand("upload", "upload protocol fidelity");
  upload->add_option("network", net_path, "network file")->required();
  upload->add_option("--time", t, "evolution time per step");
  upload->add_option("--steps", steps, "number of swap steps L");
  upload->add_option("--state", state_text, "input state: random:<seed> or basis:<k>");
  upload->add_option("--csv", csv_path, "write a convergence sweep CSV");

  auto* converge = app.add_subcommand("converge", "channel convergence trajectory and rate fit");
  converge->add_option("network", net_path, "network file")->required();
  converge->add_option("--time", t, "evolution time per step");
  converge->add_option("--max-steps", max_steps, "trajectory length");
  converge->add_option("--csv", csv_path, "write the trajectory CSV");
  converge->add_option("--seed", seed, "seed for the random initial state");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed())
      return cmd_check(net_path, oracle, minimal_k, disorder_opt->count() > 0, disorder_seed,
                       dot_path);
    if (channel->parsed()) return cmd_channel(net_path, t, prime);
    if (download->parsed())
      return cmd_transfer(net_path, t, steps, state_text, csv_path, literal_order, false);
    if (upload->parsed())
      return cmd_transfer(net_path, t, steps, state_text, csv_path, false, true);
    if (converge->parsed()) return cmd_converge(net_path, t, max_steps, csv_path, seed);
  } catch (const parse_error& e) {
    std::cerr << "error: " << net_path << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
