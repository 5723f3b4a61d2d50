// Reduced relaxation channels as explicit superoperators, with spectral
// analysis of fixed points, mixing, and convergence rates.
//
// Vectorization is column-major: vec(rho) stacks the columns of rho, so the
// map rho -> A rho B^dag has superoperator matrix conj(B) (x) A.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "relaxctl/common.hpp"
#include "relaxctl/format.hpp"
#include "relaxctl/quantum.hpp"
#include "relaxctl/spin_network.hpp"

namespace relaxctl {

/// Matrix of a CPT map acting on column-vectorized density operators.
struct Superoperator {
  Mat matrix;  // d^2 x d^2
  Index d = 0;
};

inline Vec vectorize(const Mat& rho) {
  return Eigen::Map<const Vec>(rho.data(), rho.size());
}

inline Mat unvectorize(const Vec& v, Index d) {
  return Eigen::Map<const Mat>(v.data(), d, d);
}

inline Mat apply_channel(const Superoperator& s, const Mat& rho) {
  return unvectorize(s.matrix * vectorize(rho), s.d);
}

/// Kraus operators of rho -> tr_C[U (e><e| (x) rho) U^dag].
inline std::vector<Mat> kraus_operators(const UnitaryOperator& u, Index d_c, Index d_cbar,
                                        const Vec& e_state) {
  if (u.dim() != d_c * d_cbar) throw dimension_error("unitary does not match bipartition");
  if (e_state.size() != d_c) throw dimension_error("control state does not match d_C");
  // Embedding |e>_C (x) I_Cbar as a (d_C d_Cbar) x d_Cbar matrix.
  Mat embed = Mat::Zero(d_c * d_cbar, d_cbar);
  for (Index c = 0; c < d_c; ++c)
    embed.block(c * d_cbar, 0, d_cbar, d_cbar) = e_state[c] * Mat::Identity(d_cbar, d_cbar);
  const Mat ue = u.matrix * embed;
  std::vector<Mat> ks;
  ks.reserve(d_c);
  for (Index i = 0; i < d_c; ++i) ks.push_back(ue.middleRows(i * d_cbar, d_cbar));
  return ks;
}

inline Superoperator superoperator_from_kraus(const std::vector<Mat>& ks) {
  const Index d = ks.at(0).rows();
  Mat s = Mat::Zero(d * d, d * d);
  for (const Mat& k : ks) s += kron(k.conjugate(), k);
  return Superoperator{std::move(s), d};
}

/// One protocol step on C-bar: rho -> tr_C[U (|e><e| (x) rho) U^dag].
inline Superoperator build_tau(const UnitaryOperator& u, const Bipartition& bp,
                               const StateVector& e_state) {
  if (!e_state.is_normalized()) throw std::invalid_argument("control state must be normalized");
  return superoperator_from_kraus(kraus_operators(u, bp.d_c, bp.d_cbar, e_state.amplitudes));
}

/// Reverse-evolution channel: rho -> tr_C[U^dag (|e><e| (x) rho) U].
inline Superoperator build_tau_prime(const UnitaryOperator& u, const Bipartition& bp,
                                     const StateVector& e_state) {
  return build_tau(UnitaryOperator{u.matrix.adjoint()}, bp, e_state);
}

inline bool is_trace_preserving(const Superoperator& s, double t = tol::structural) {
  const Vec id = vectorize(Mat::Identity(s.d, s.d));
  return (s.matrix.adjoint() * id - id).cwiseAbs().maxCoeff() <= t;
}

/// Choi matrix via index reshuffle of the superoperator.
inline Mat choi_matrix(const Superoperator& s) {
  const Index d = s.d;
  Mat choi(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index a = 0; a < d; ++a)
      for (Index j = 0; j < d; ++j)
        for (Index b = 0; b < d; ++b)
          choi(i * d + a, j * d + b) = s.matrix(b * d + a, j * d + i);
  return choi;
}

inline double choi_min_eigenvalue(const Superoperator& s) {
  const Mat choi = choi_matrix(s);
  Eigen::SelfAdjointEigenSolver<Mat> es((choi + choi.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct SpectralOptions {
  // An eigenvalue is peripheral when its modulus is >= 1 - peripheral_tol;
  // mixing requires the peripheral spectrum to be exactly {1}, simple.
  double peripheral_tol = tol::peripheral;
  // A channel with no eigenvalue this close to 1 is malformed.
  double fixed_eigenvalue_tol = 1e-6;
};

struct SpectralReport {
  std::vector<cplx> eigenvalues;  // sorted by modulus, descending
  double kappa = 0.0;             // second-largest modulus
  std::vector<Mat> fixed_points;  // hermitized basis of the eigenvalue-1 space
  bool mixing = false;
  double fixed_point_purity = std::numeric_limits<double>::quiet_NaN();
};

inline SpectralReport spectral_report(const Superoperator& s, const SpectralOptions& opt = {}) {
  SpectralReport rep;
  Eigen::ComplexEigenSolver<Mat> es(s.matrix, /*computeEigenvectors=*/false);
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) > std::abs(b); });

  std::size_t n_fixed = 0, n_peripheral = 0;
  bool has_one = false;
  for (const cplx& lam : rep.eigenvalues) {
    if (std::abs(lam - cplx{1.0}) <= opt.peripheral_tol) ++n_fixed;
    if (std::abs(lam - cplx{1.0}) <= opt.fixed_eigenvalue_tol) has_one = true;
    if (std::abs(lam) >= 1.0 - opt.peripheral_tol) ++n_peripheral;
  }
  if (!has_one) throw malformed_channel_error("channel has no eigenvalue near 1");
  if (n_fixed == 0) n_fixed = 1;  // eigenvalue near 1 within the coarse tolerance

  rep.kappa = rep.eigenvalues.size() > 1 ? std::abs(rep.eigenvalues[1]) : 0.0;
  rep.mixing = n_peripheral == 1;

  // Fixed space as the near-null space of S - I; dimension matched to the
  // eigenvalue count so degenerate spaces come out whole.
  Eigen::BDCSVD<Mat> svd(s.matrix - Mat::Identity(s.matrix.rows(), s.matrix.cols()),
                         Eigen::ComputeThinV);
  for (std::size_t k = 0; k < n_fixed; ++k) {
    const Vec col = svd.matrixV().col(svd.matrixV().cols() - 1 - static_cast<Index>(k));
    Mat x = unvectorize(col, s.d);
    x = ((x + x.adjoint()) / 2.0).eval();
    const double tr = x.trace().real();
    if (std::abs(tr) > 1e-8)
      x /= tr;
    else if (x.norm() > 0)
      x /= x.norm();
    rep.fixed_points.push_back(std::move(x));
  }
  if (rep.mixing && !rep.fixed_points.empty())
    rep.fixed_point_purity = (rep.fixed_points[0] * rep.fixed_points[0]).trace().real();
  return rep;
}

/// Unique fixed point of a mixing channel, as a checked density matrix.
inline DensityMatrix unique_fixed_point(const SpectralReport& rep) {
  if (!rep.mixing || rep.fixed_points.empty())
    throw malformed_channel_error("channel is not mixing; no unique fixed point");
  DensityMatrix rho{rep.fixed_points[0]};
  return rho;
}

/// d_L = ||tau^L(rho0) - rho_star||_1 for L = 0..L_max.
inline std::vector<double> distance_trajectory(const Superoperator& s, const DensityMatrix& rho0,
                                               const DensityMatrix& rho_star, int l_max) {
  if (rho0.dim() != s.d || rho_star.dim() != s.d)
    throw dimension_error("state dimension does not match channel");
  std::vector<double> out;
  out.reserve(l_max + 1);
  Vec v = vectorize(rho0.entries);
  const Mat target = rho_star.entries;
  for (int l = 0; l <= l_max; ++l) {
    const Mat diff = unvectorize(v, s.d) - target;
    out.push_back(trace_norm((diff + diff.adjoint()) / 2.0));
    if (l < l_max) v = (s.matrix * v).eval();
  }
  return out;
}

/// Least-squares slope of log d_L over L in [window_lo, window_hi],
/// exponentiated. Distances at or below 1e-13 are refused.
inline double fit_decay_rate(const std::vector<double>& distances, int window_lo, int window_hi) {
  if (window_lo < 0 || window_hi >= static_cast<int>(distances.size()) || window_lo >= window_hi)
    throw std::invalid_argument("invalid fit window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = window_hi - window_lo + 1;
  for (int l = window_lo; l <= window_hi; ++l) {
    if (!(distances[l] > 1e-13))
      throw underflow_error("distance underflow at step " + std::to_string(l) +
                            "; use a smaller fit window");
    const double x = l, y = std::log(distances[l]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::exp(slope);
}

inline void write_trajectory_csv(std::ostream& out, const std::vector<double>& distances,
                                 const std::string& manifest) {
  if (!manifest.empty()) out << "# manifest: " << manifest << "\n";
  out << "L,distance\n";
  for (std::size_t l = 0; l < distances.size(); ++l)
    out << l << "," << format_roundtrip(distances[l]) << "\n";
}

}  // namespace relaxctl
