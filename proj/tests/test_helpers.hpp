// Shared generators for the test suites. Everything is seeded through the
// counter-based generator so failures reproduce exactly.
#pragma once

#include <vector>

#include "relaxctl/quantum.hpp"
#include "relaxctl/rng.hpp"
#include "relaxctl/spin_network.hpp"

namespace relaxctl::testing {

inline Mat random_complex_matrix(CounterRng& rng, Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_complex_gaussian();
  return m;
}

inline Mat random_hermitian(CounterRng& rng, Index d) {
  const Mat a = random_complex_matrix(rng, d, d);
  return (a + a.adjoint()) / 2.0;
}

inline Mat random_isometry(CounterRng& rng, Index rows, Index cols) {
  const Mat a = random_complex_matrix(rng, rows, cols);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(rows, cols);
  return q;
}

inline Mat random_unitary(CounterRng& rng, Index d) { return random_isometry(rng, d, d); }

inline DensityMatrix random_density(CounterRng& rng, Index d, Index rank = 0) {
  if (rank <= 0) rank = d;
  const Mat a = random_complex_matrix(rng, d, rank);
  Mat rho = a * a.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix{std::move(rho)};
}

inline StateVector random_state(CounterRng& rng, std::vector<Index> dims) {
  const Index d = product_of(dims);
  return make_state(rng.random_amplitudes(d), std::move(dims));
}

// Connected network on n sites: a random spanning tree plus extra edges.
inline SpinNetwork random_connected_network(CounterRng& rng, int n, CouplingModel model,
                                            bool random_fields = false) {
  SpinNetwork net;
  net.n_sites = n;
  net.model = model;
  for (int v = 1; v < n; ++v) {
    const int parent = static_cast<int>(rng.next_u64() % v);
    net.edges.push_back({parent, v, rng.uniform(0.3, 1.5) * (rng.next_double() < 0.5 ? -1 : 1)});
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool present =
          std::any_of(net.edges.begin(), net.edges.end(), [&](const Edge& e) {
            return std::minmax(e.i, e.j) == std::minmax(i, j);
          });
      if (!present && rng.next_double() < 0.25)
        net.edges.push_back({i, j, rng.uniform(0.3, 1.5)});
    }
  if (random_fields)
    for (int s = 0; s < n; ++s) net.local_fields.push_back(rng.uniform(-0.5, 0.5));
  const int n_ctrl = 1 + static_cast<int>(rng.next_u64() % (n - 1));
  std::vector<int> sites(n);
  for (int s = 0; s < n; ++s) sites[s] = s;
  for (int k = 0; k < n_ctrl; ++k) {
    const int pick = k + static_cast<int>(rng.next_u64() % (n - k));
    std::swap(sites[k], sites[pick]);
  }
  net.control_set.assign(sites.begin(), sites.begin() + n_ctrl);
  std::sort(net.control_set.begin(), net.control_set.end());
  return net;
}

inline SpinNetwork path_network(int n, int control_site, double j = 1.0,
                                CouplingModel model = CouplingModel::XX) {
  SpinNetwork net;
  net.n_sites = n;
  net.model = model;
  for (int v = 0; v + 1 < n; ++v) net.edges.push_back({v, v + 1, j});
  net.control_set = {control_site};
  return net;
}

inline SpinNetwork star_network(int leaves, std::vector<int> control, double j = 1.0) {
  SpinNetwork net;
  net.n_sites = leaves + 1;
  net.model = CouplingModel::XX;
  for (int v = 1; v <= leaves; ++v) net.edges.push_back({0, v, j});
  net.control_set = std::move(control);
  return net;
}

}  // namespace relaxctl::testing
