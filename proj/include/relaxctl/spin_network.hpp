// Spin-1/2 networks on graphs: excitation-preserving Hamiltonians and the
// bipartition into the control region C and the remainder.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "relaxctl/common.hpp"
#include "relaxctl/quantum.hpp"

namespace relaxctl {

enum class CouplingModel { XX, HEISENBERG };

inline std::string to_string(CouplingModel m) {
  return m == CouplingModel::XX ? "XX" : "HEISENBERG";
}

struct Edge {
  int i;
  int j;
  double strength;
};

struct SpinNetwork {
  int n_sites = 0;
  std::vector<Edge> edges;
  CouplingModel model = CouplingModel::XX;
  std::vector<double> local_fields;  // empty means all zero
  std::vector<int> control_set;      // sorted, unique
};

inline void validate(const SpinNetwork& net, int max_sites = kDefaultMaxSites) {
  if (net.n_sites < 1) throw dimension_error("network needs at least one site");
  if (net.n_sites > max_sites)
    throw resource_error("network has " + std::to_string(net.n_sites) +
                         " sites, above the dense-operator cap of " + std::to_string(max_sites));
  std::set<std::pair<int, int>> seen;
  for (const auto& e : net.edges) {
    if (e.i < 0 || e.i >= net.n_sites || e.j < 0 || e.j >= net.n_sites)
      throw dimension_error("edge references a site out of range");
    if (e.i == e.j) throw dimension_error("self-loop edge");
    if (!std::isfinite(e.strength)) throw std::invalid_argument("edge coupling not finite");
    if (!seen.insert(std::minmax(e.i, e.j)).second)
      throw dimension_error("duplicate undirected edge");
  }
  if (!net.local_fields.empty() && static_cast<int>(net.local_fields.size()) != net.n_sites)
    throw dimension_error("local field count does not match site count");
  for (double h : net.local_fields)
    if (!std::isfinite(h)) throw std::invalid_argument("local field not finite");
  if (net.control_set.empty()) throw dimension_error("control set must be non-empty");
  std::set<int> ctrl(net.control_set.begin(), net.control_set.end());
  if (ctrl.size() != net.control_set.size()) throw dimension_error("duplicate control site");
  if (*ctrl.begin() < 0 || *ctrl.rbegin() >= net.n_sites)
    throw dimension_error("control site out of range");
  if (static_cast<int>(ctrl.size()) == net.n_sites)
    throw dimension_error("control set must be a proper subset of the sites");
}

/// Network with every coupling and field negated (generates H' = -H).
inline SpinNetwork negated(const SpinNetwork& net) {
  SpinNetwork out = net;
  for (auto& e : out.edges) e.strength = -e.strength;
  for (auto& h : out.local_fields) h = -h;
  return out;
}

struct Bipartition {
  std::vector<int> c_sites;     // control sites, ascending
  std::vector<int> cbar_sites;  // remaining sites, ascending
  Index d_c = 1;
  Index d_cbar = 1;

  // Site placed at tensor position p (control block first).
  std::vector<std::size_t> site_order() const {
    std::vector<std::size_t> order;
    order.reserve(c_sites.size() + cbar_sites.size());
    for (int s : c_sites) order.push_back(static_cast<std::size_t>(s));
    for (int s : cbar_sites) order.push_back(static_cast<std::size_t>(s));
    return order;
  }
};

/// Deterministic (C, C-bar) ordering: control sites first, both ascending.
inline Bipartition ordered_bipartition(const SpinNetwork& net) {
  Bipartition bp;
  bp.c_sites = net.control_set;
  std::sort(bp.c_sites.begin(), bp.c_sites.end());
  std::set<int> ctrl(bp.c_sites.begin(), bp.c_sites.end());
  for (int s = 0; s < net.n_sites; ++s)
    if (!ctrl.count(s)) bp.cbar_sites.push_back(s);
  bp.d_c = Index{1} << bp.c_sites.size();
  bp.d_cbar = Index{1} << bp.cbar_sites.size();
  return bp;
}

namespace detail {

// Hamiltonian with the network's sites laid out per site_at_position:
// the site stored at tensor position p occupies bit (n-1-p) of the index.
inline HermitianOperator build_hamiltonian_with_order(const SpinNetwork& net,
                                                      const std::vector<std::size_t>& site_at_position,
                                                      int max_sites) {
  validate(net, max_sites);
  const int n = net.n_sites;
  const Index dim = Index{1} << n;
  std::vector<int> position_of(n);
  for (int p = 0; p < n; ++p) position_of[site_at_position[p]] = p;

  Mat h = Mat::Zero(dim, dim);
  const double flip_scale = net.model == CouplingModel::XX ? 1.0 : 0.5;
  for (const auto& e : net.edges) {
    const int pi = position_of[e.i], pj = position_of[e.j];
    const Index bi = Index{1} << (n - 1 - pi);
    const Index bj = Index{1} << (n - 1 - pj);
    for (Index x = 0; x < dim; ++x) {
      const bool ei = x & bi, ej = x & bj;
      if (!ei && ej) {
        // |0 1> <-> |1 0| flip-flop between the two sites
        const Index y = x + bi - bj;
        h(y, x) += flip_scale * e.strength;
        h(x, y) += flip_scale * e.strength;
      }
      if (net.model == CouplingModel::HEISENBERG && ei != ej)
        h(x, x) -= 0.5 * e.strength;  // Ising part of (J/4)(XX+YY+ZZ-I)
    }
  }
  if (!net.local_fields.empty()) {
    for (int s = 0; s < n; ++s) {
      if (net.local_fields[s] == 0.0) continue;
      const Index bs = Index{1} << (n - 1 - position_of[s]);
      for (Index x = 0; x < dim; ++x)
        if (x & bs) h(x, x) += net.local_fields[s];
    }
  }
  return HermitianOperator{std::move(h)};
}

}  // namespace detail

/// Hamiltonian in natural site order (site k at tensor position k).
inline HermitianOperator build_hamiltonian(const SpinNetwork& net,
                                           int max_sites = kDefaultMaxSites) {
  std::vector<std::size_t> order(net.n_sites);
  for (int s = 0; s < net.n_sites; ++s) order[s] = static_cast<std::size_t>(s);
  return detail::build_hamiltonian_with_order(net, order, max_sites);
}

/// Hamiltonian on H_C (x) H_Cbar, control sites leading.
inline HermitianOperator build_hamiltonian_ordered(const SpinNetwork& net, const Bipartition& bp,
                                                   int max_sites = kDefaultMaxSites) {
  return detail::build_hamiltonian_with_order(net, bp.site_order(), max_sites);
}

/// True iff H commutes with the total excitation number operator.
inline bool excitation_conserving(const HermitianOperator& h, int n_sites,
                                  double t = tol::structural) {
  const Index dim = Index{1} << n_sites;
  if (h.dim() != dim) throw dimension_error("operator dimension is not 2^n_sites");
  double worst = 0.0;
  for (Index x = 0; x < dim; ++x) {
    const int nx = std::popcount(static_cast<unsigned long long>(x));
    for (Index y = 0; y < dim; ++y) {
      const int ny = std::popcount(static_cast<unsigned long long>(y));
      if (nx == ny) continue;
      worst = std::max(worst, std::abs(h.matrix(x, y)) * std::abs(double(nx - ny)));
    }
  }
  return worst <= t;
}

}  // namespace relaxctl
