// Controllability certification: the cellular graph automaton (a black
// vertex with exactly one white neighbor forces it black) as a sufficient
// test, plus a brute-force spectral oracle for the eigenstate condition that
// |e>_C |E>_Cbar is the only eigenstate of H with C in |e>_C.
#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "relaxctl/common.hpp"
#include "relaxctl/quantum.hpp"
#include "relaxctl/spin_network.hpp"

namespace relaxctl {

enum class Color : unsigned char { BLACK, WHITE };

struct ColoredGraph {
  int n = 0;
  std::vector<unsigned char> adjacency;  // flat n x n, symmetric, no loops
  std::vector<Color> colors;

  bool edge(int i, int j) const { return adjacency[static_cast<std::size_t>(i) * n + j] != 0; }
  void set_edge(int i, int j) {
    adjacency[static_cast<std::size_t>(i) * n + j] = 1;
    adjacency[static_cast<std::size_t>(j) * n + i] = 1;
  }
};

inline ColoredGraph make_graph(int n) {
  ColoredGraph g;
  g.n = n;
  g.adjacency.assign(static_cast<std::size_t>(n) * n, 0);
  g.colors.assign(n, Color::WHITE);
  return g;
}

inline void validate(const ColoredGraph& g) {
  for (int i = 0; i < g.n; ++i) {
    if (g.edge(i, i)) throw dimension_error("graph has a self-loop");
    for (int j = 0; j < g.n; ++j)
      if (g.edge(i, j) != g.edge(j, i)) throw dimension_error("adjacency not symmetric");
  }
}

/// Interaction graph of the network: vertices are sites, edges are the
/// nonzero couplings; control sites start black, the rest white.
inline ColoredGraph graph_from_network(const SpinNetwork& net) {
  ColoredGraph g = make_graph(net.n_sites);
  for (const auto& e : net.edges)
    if (e.strength != 0.0) g.set_edge(e.i, e.j);
  for (int s : net.control_set) g.colors[s] = Color::BLACK;
  return g;
}

/// One synchronous update: every white vertex that is the unique white
/// neighbor of some black vertex turns black; everything else is unchanged.
inline ColoredGraph automaton_step(const ColoredGraph& g) {
  ColoredGraph next = g;
  for (int v = 0; v < g.n; ++v) {
    if (g.colors[v] != Color::BLACK) continue;
    int white_neighbor = -1, white_count = 0;
    for (int w = 0; w < g.n; ++w)
      if (g.edge(v, w) && g.colors[w] == Color::WHITE) {
        white_neighbor = w;
        ++white_count;
      }
    if (white_count == 1) next.colors[white_neighbor] = Color::BLACK;
  }
  return next;
}

struct AutomatonTrace {
  std::vector<std::vector<Color>> steps;  // includes the initial coloring
  bool fixed_point_reached = false;
  bool all_black = false;

  int productive_steps() const { return static_cast<int>(steps.size()) - 1; }
};

struct CertificationResult {
  bool certified = false;
  AutomatonTrace trace;
};

/// Iterate the automaton from the stored coloring to its fixed point.
inline AutomatonTrace run_automaton(ColoredGraph g) {
  validate(g);
  AutomatonTrace trace;
  trace.steps.push_back(g.colors);
  for (int iter = 0; iter <= g.n; ++iter) {
    ColoredGraph next = automaton_step(g);
    if (next.colors == g.colors) {
      trace.fixed_point_reached = true;
      break;
    }
    trace.steps.push_back(next.colors);
    g = std::move(next);
  }
  trace.all_black = std::all_of(trace.steps.back().begin(), trace.steps.back().end(),
                                [](Color c) { return c == Color::BLACK; });
  return trace;
}

/// Sufficiency certificate: start with C black, Cbar white, and check the
/// automaton forces the whole graph black. Certified = true is a
/// sufficiency claim only.
inline CertificationResult certify_control(const SpinNetwork& net) {
  validate(net);
  CertificationResult res;
  res.trace = run_automaton(graph_from_network(net));
  res.certified = res.trace.all_black;
  return res;
}

struct OracleResult {
  bool holds = false;
  int intersection_dim = 0;
  std::optional<StateVector> witness;  // normalized, C factor exactly in |e>_C
  double witness_eigenvalue = 0.0;
};

/// Brute-force check of the eigenstate condition: diagonalize H, group
/// degenerate eigenspaces, and compute the dimension of each intersection
/// with S = |e>_C (x) H_Cbar via singular values. Returns a violating
/// eigenvector when the condition fails.
inline OracleResult oracle_condition_ii(const SpinNetwork& net, double group_tol = tol::degeneracy,
                                        int max_sites = kDefaultMaxSites) {
  validate(net, max_sites);
  const Bipartition bp = ordered_bipartition(net);
  const HermitianOperator h = build_hamiltonian_ordered(net, bp, max_sites);
  const Index dim = h.dim();
  Eigen::SelfAdjointEigenSolver<Mat> es(h.matrix);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Mat& vecs = es.eigenvectors();

  OracleResult res;
  StateVector best_witness;
  double best_overlap = 2.0;
  double best_eigenvalue = 0.0;

  Index group_start = 0;
  while (group_start < dim) {
    Index group_end = group_start + 1;
    while (group_end < dim && lam[group_end] - lam[group_end - 1] <= group_tol) ++group_end;
    const Index m = group_end - group_start;
    // S is spanned by the first d_Cbar basis vectors (C part = |e>_C = index 0).
    const Mat projected = vecs.block(0, group_start, bp.d_cbar, m);
    Eigen::BDCSVD<Mat> svd(projected, Eigen::ComputeThinV);
    for (Index j = 0; j < svd.singularValues().size(); ++j) {
      if (svd.singularValues()[j] < 1.0 - tol::peripheral) continue;
      ++res.intersection_dim;
      Vec candidate = vecs.middleCols(group_start, m) * svd.matrixV().col(j);
      // Clamp to S exactly and renormalize; the out-of-S part is numerical.
      candidate.segment(bp.d_cbar, dim - bp.d_cbar).setZero();
      candidate /= candidate.norm();
      const double overlap = std::norm(candidate[0]);  // |<eE|v>|^2, |eE> = index 0
      if (overlap < best_overlap) {
        best_overlap = overlap;
        best_witness = make_state(candidate, {bp.d_c, bp.d_cbar}, {"C", "Cbar"});
        best_eigenvalue = lam.segment(group_start, m).mean();
      }
    }
    group_start = group_end;
  }

  res.holds = res.intersection_dim == 1 && best_overlap >= 1.0 - 1e-9;
  if (!res.holds && best_overlap <= 1.0) {
    res.witness = std::move(best_witness);
    res.witness_eigenvalue = best_eigenvalue;
  }
  return res;
}

/// All inclusion-minimal vertex sets of size <= max_size whose all-black
/// initialization forces the whole graph, lexicographically sorted.
inline std::vector<std::vector<int>> minimal_control_search(const ColoredGraph& graph,
                                                            int max_size) {
  if (graph.n > 16) throw resource_error("exhaustive search is capped at 16 vertices");
  validate(graph);
  std::vector<std::vector<int>> minimal;
  const auto is_superset_of_known = [&](const std::vector<int>& set) {
    for (const auto& m : minimal)
      if (std::includes(set.begin(), set.end(), m.begin(), m.end())) return true;
    return false;
  };
  std::vector<int> members;
  for (int size = 1; size <= std::min(max_size, graph.n); ++size) {
    // Enumerate subsets of the given popcount.
    for (unsigned mask = 0; mask < (1u << graph.n); ++mask) {
      if (std::popcount(mask) != size) continue;
      members.clear();
      for (int v = 0; v < graph.n; ++v)
        if (mask & (1u << v)) members.push_back(v);
      if (is_superset_of_known(members)) continue;
      ColoredGraph g = graph;
      g.colors.assign(graph.n, Color::WHITE);
      for (int v : members) g.colors[v] = Color::BLACK;
      if (run_automaton(std::move(g)).all_black) minimal.push_back(members);
    }
  }
  std::sort(minimal.begin(), minimal.end());
  return minimal;
}

inline void emit_trace(std::ostream& out, const AutomatonTrace& trace) {
  for (const auto& step : trace.steps) {
    for (Color c : step) out << (c == Color::BLACK ? 'B' : 'W');
    out << "\n";
  }
}

/// DOT dump with black/white vertex fills for the stored coloring.
inline void write_dot(std::ostream& out, const ColoredGraph& g, const std::string& name = "network") {
  out << "graph " << name << " {\n  node [style=filled];\n";
  for (int v = 0; v < g.n; ++v)
    out << "  " << v << " [fillcolor="
        << (g.colors[v] == Color::BLACK ? "black fontcolor=white" : "white") << "];\n";
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (g.edge(i, j)) out << "  " << i << " -- " << j << ";\n";
  out << "}\n";
}

}  // namespace relaxctl
