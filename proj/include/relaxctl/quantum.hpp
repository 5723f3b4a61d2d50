// Dense finite-dimensional quantum linear algebra: labeled tensor factors,
// partial traces and inner products, propagators, and matrix decompositions.
//
// Index convention is big-endian throughout: the first-listed tensor factor
// varies slowest in the flat amplitude index.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "relaxctl/common.hpp"

namespace relaxctl {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Pure state over an ordered list of labeled tensor factors.
struct StateVector {
  Vec amplitudes;
  std::vector<Index> factor_dims;
  std::vector<std::string> labels;

  Index dim() const { return amplitudes.size(); }
  std::size_t n_factors() const { return factor_dims.size(); }
  double squared_norm() const { return amplitudes.squaredNorm(); }
  bool is_normalized(double t = tol::structural) const {
    return std::abs(squared_norm() - 1.0) <= t;
  }
};

inline std::vector<std::string> default_labels(std::size_t n, const std::string& prefix = "f") {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = prefix + std::to_string(i);
  return out;
}

inline Index product_of(const std::vector<Index>& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

inline void ensure_consistent(const StateVector& s) {
  if (product_of(s.factor_dims) != s.dim())
    throw dimension_error("state amplitudes inconsistent with factor dimensions");
  if (!s.labels.empty() && s.labels.size() != s.factor_dims.size())
    throw dimension_error("state labels inconsistent with factor count");
}

inline StateVector make_state(Vec amplitudes, std::vector<Index> dims,
                              std::vector<std::string> labels = {}) {
  StateVector s{std::move(amplitudes), std::move(dims), std::move(labels)};
  if (s.labels.empty()) s.labels = default_labels(s.factor_dims.size());
  ensure_consistent(s);
  return s;
}

/// Computational basis state with the given flat index.
inline StateVector basis_state(std::vector<Index> dims, Index flat_index,
                               std::vector<std::string> labels = {}) {
  const Index d = product_of(dims);
  Vec amp = Vec::Zero(d);
  amp[flat_index] = 1.0;
  return make_state(std::move(amp), std::move(dims), std::move(labels));
}

/// All factors in their lowest basis state (all spins down).
inline StateVector vacuum_state(std::vector<Index> dims, std::vector<std::string> labels = {}) {
  return basis_state(std::move(dims), 0, std::move(labels));
}

inline StateVector tensor_product(const StateVector& a, const StateVector& b) {
  ensure_consistent(a);
  ensure_consistent(b);
  Vec out(a.dim() * b.dim());
  for (Index i = 0; i < a.dim(); ++i)
    out.segment(i * b.dim(), b.dim()) = a.amplitudes[i] * b.amplitudes;
  std::vector<Index> dims = a.factor_dims;
  dims.insert(dims.end(), b.factor_dims.begin(), b.factor_dims.end());
  std::vector<std::string> labels = a.labels;
  labels.insert(labels.end(), b.labels.begin(), b.labels.end());
  return StateVector{std::move(out), std::move(dims), std::move(labels)};
}

// Strides for big-endian flat indexing: stride[k] = product of dims after k.
inline std::vector<Index> factor_strides(const std::vector<Index>& dims) {
  std::vector<Index> strides(dims.size());
  Index s = 1;
  for (std::size_t k = dims.size(); k-- > 0;) {
    strides[k] = s;
    s *= dims[k];
  }
  return strides;
}

/// Exchange two equal-dimension factors.
inline StateVector swap_apply(const StateVector& state, std::size_t factor_i,
                              std::size_t factor_j) {
  ensure_consistent(state);
  if (factor_i >= state.n_factors() || factor_j >= state.n_factors())
    throw dimension_error("swap factor index out of range");
  if (factor_i == factor_j) return state;
  if (factor_i > factor_j) std::swap(factor_i, factor_j);
  if (state.factor_dims[factor_i] != state.factor_dims[factor_j])
    throw dimension_error("swap requires equal factor dimensions");

  const auto& dims = state.factor_dims;
  Index d_pre = 1, d_mid = 1, d_post = 1;
  for (std::size_t k = 0; k < factor_i; ++k) d_pre *= dims[k];
  for (std::size_t k = factor_i + 1; k < factor_j; ++k) d_mid *= dims[k];
  for (std::size_t k = factor_j + 1; k < dims.size(); ++k) d_post *= dims[k];
  const Index di = dims[factor_i];

  StateVector out = state;
  const cplx* in = state.amplitudes.data();
  cplx* dst = out.amplitudes.data();
  for (Index a = 0; a < d_pre; ++a)
    for (Index b = 0; b < di; ++b)
      for (Index c = 0; c < d_mid; ++c)
        for (Index d = 0; d < di; ++d) {
          const Index src = (((a * di + b) * d_mid + c) * di + d) * d_post;
          const Index tgt = (((a * di + d) * d_mid + c) * di + b) * d_post;
          std::copy(in + src, in + src + d_post, dst + tgt);
        }
  std::swap(out.labels[factor_i], out.labels[factor_j]);
  return out;
}

/// Reorder factors: perm[p] names the old factor placed at new position p.
inline StateVector permute_factors(const StateVector& state, const std::vector<std::size_t>& perm) {
  ensure_consistent(state);
  if (perm.size() != state.n_factors())
    throw dimension_error("permutation length does not match factor count");
  const auto old_strides = factor_strides(state.factor_dims);
  std::vector<Index> new_dims(perm.size());
  std::vector<std::string> new_labels(perm.size());
  for (std::size_t p = 0; p < perm.size(); ++p) {
    new_dims[p] = state.factor_dims[perm[p]];
    new_labels[p] = state.labels.empty() ? "" : state.labels[perm[p]];
  }
  const auto new_strides = factor_strides(new_dims);
  Vec out(state.dim());
  for (Index nidx = 0; nidx < state.dim(); ++nidx) {
    Index rem = nidx, oidx = 0;
    for (std::size_t p = 0; p < perm.size(); ++p) {
      const Index dg = rem / new_strides[p];
      rem %= new_strides[p];
      oidx += dg * old_strides[perm[p]];
    }
    out[nidx] = state.amplitudes[oidx];
  }
  return StateVector{std::move(out), std::move(new_dims), std::move(new_labels)};
}

/// Apply a unitary to the leading `n_lead` factors, identity on the rest.
inline void apply_to_leading_factors(StateVector& state, const Mat& u, std::size_t n_lead) {
  ensure_consistent(state);
  Index d_lead = 1;
  for (std::size_t k = 0; k < n_lead; ++k) d_lead *= state.factor_dims[k];
  if (u.rows() != d_lead || u.cols() != d_lead)
    throw dimension_error("operator dimension does not match leading factors");
  const Index d_rest = state.dim() / d_lead;
  Eigen::Map<RowMat> block(state.amplitudes.data(), d_lead, d_rest);
  block = (u * block).eval();
}

// Partial inner product <target|state> over a sorted subset of factors;
// returns the unnormalized residual on the complement factors (original
// order).
inline Vec partial_inner(const StateVector& state, const std::vector<std::size_t>& factors,
                         const Vec& target) {
  ensure_consistent(state);
  const auto& dims = state.factor_dims;
  Index d_target = 1;
  for (std::size_t f : factors) {
    if (f >= dims.size()) throw dimension_error("factor index out of range");
    d_target *= dims[f];
  }
  if (target.size() != d_target)
    throw dimension_error("target dimension does not match selected factors");

  // Contiguous runs reduce to one loop of vector axpys.
  const bool contiguous =
      std::adjacent_find(factors.begin(), factors.end(),
                         [](auto a, auto b) { return b != a + 1; }) == factors.end();
  if (contiguous && !factors.empty()) {
    const std::size_t f0 = factors.front(), f1 = factors.back();
    Index d_pre = 1, d_post = 1;
    for (std::size_t k = 0; k < f0; ++k) d_pre *= dims[k];
    for (std::size_t k = f1 + 1; k < dims.size(); ++k) d_post *= dims[k];
    Vec out = Vec::Zero(d_pre * d_post);
    for (Index a = 0; a < d_pre; ++a)
      for (Index m = 0; m < d_target; ++m) {
        const cplx c = std::conj(target[m]);
        if (c == cplx{0, 0}) continue;
        out.segment(a * d_post, d_post) +=
            c * state.amplitudes.segment((a * d_target + m) * d_post, d_post);
      }
    return out;
  }

  const auto strides = factor_strides(dims);
  std::vector<char> in_subset(dims.size(), 0);
  for (std::size_t f : factors) in_subset[f] = 1;
  std::vector<Index> t_stride(dims.size(), 0), c_stride(dims.size(), 0);
  Index ts = 1, cs = 1;
  for (std::size_t k = dims.size(); k-- > 0;) {
    if (in_subset[k]) {
      t_stride[k] = ts;
      ts *= dims[k];
    } else {
      c_stride[k] = cs;
      cs *= dims[k];
    }
  }
  Vec out = Vec::Zero(cs);
  for (Index i = 0; i < state.dim(); ++i) {
    Index rem = i, ti = 0, ci = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const Index dg = rem / strides[k];
      rem %= strides[k];
      if (in_subset[k])
        ti += dg * t_stride[k];
      else
        ci += dg * c_stride[k];
    }
    out[ci] += std::conj(target[ti]) * state.amplitudes[i];
  }
  return out;
}

struct ProjectionResult {
  StateVector residual;  // normalized state on the complement factors
  double weight = 0.0;   // squared norm of the partial inner product
  bool empty = false;    // weight at or below tol::empty_weight
};

/// Project a factor subset onto `target`; the residual is the normalized
/// remainder on the complement (flagged empty when the weight vanishes).
inline ProjectionResult project_component(const StateVector& state,
                                          const std::vector<std::size_t>& factors,
                                          const StateVector& target) {
  if (!target.is_normalized())
    throw std::invalid_argument("projection target must be normalized");
  Vec part = partial_inner(state, factors, target.amplitudes);
  std::vector<Index> rest_dims;
  std::vector<std::string> rest_labels;
  for (std::size_t k = 0; k < state.n_factors(); ++k)
    if (std::find(factors.begin(), factors.end(), k) == factors.end()) {
      rest_dims.push_back(state.factor_dims[k]);
      rest_labels.push_back(state.labels.empty() ? "" : state.labels[k]);
    }
  ProjectionResult res;
  res.weight = part.squaredNorm();
  if (res.weight <= tol::empty_weight) {
    res.empty = true;
    res.residual = StateVector{Vec::Zero(part.size()), rest_dims, rest_labels};
  } else {
    res.residual = StateVector{part / std::sqrt(res.weight), rest_dims, rest_labels};
  }
  return res;
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

inline bool is_hermitian(const Mat& m, double t) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= t;
}

inline bool is_unitary_matrix(const Mat& m, double t) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - Mat::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff() <= t;
}

struct DensityMatrix {
  Mat entries;
  Index dim() const { return entries.rows(); }

  void validate(double t = tol::structural) const {
    if (entries.rows() != entries.cols()) throw dimension_error("density matrix not square");
    if (!is_hermitian(entries, t)) throw std::domain_error("density matrix not Hermitian");
    if (std::abs(entries.trace() - cplx{1.0}) > t)
      throw std::domain_error("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(entries, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -t)
      throw std::domain_error("density matrix has a negative eigenvalue");
  }
};

struct HermitianOperator {
  Mat matrix;
  Index dim() const { return matrix.rows(); }
  void validate(double t = 1e-12) const {
    if (!is_hermitian(matrix, t)) throw std::domain_error("operator not Hermitian");
  }
};

struct UnitaryOperator {
  Mat matrix;
  Index dim() const { return matrix.rows(); }
  void validate(double t = tol::structural) const {
    if (!is_unitary_matrix(matrix, t)) throw std::domain_error("operator not unitary");
  }
};

inline DensityMatrix pure_density(const StateVector& s) {
  return DensityMatrix{s.amplitudes * s.amplitudes.adjoint()};
}

inline DensityMatrix pure_density(const Vec& amplitudes) {
  return DensityMatrix{amplitudes * amplitudes.adjoint()};
}

/// Trace out all factors not in `keep`; kept factors stay in original order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<Index>& factor_dims,
                                   const std::vector<std::size_t>& keep) {
  if (product_of(factor_dims) != rho.dim())
    throw dimension_error("factor dimensions inconsistent with density matrix");
  const auto strides = factor_strides(factor_dims);
  std::vector<char> kept(factor_dims.size(), 0);
  for (std::size_t f : keep) {
    if (f >= factor_dims.size()) throw dimension_error("keep index out of range");
    kept[f] = 1;
  }
  // Offsets of every kept-subindex and traced-subindex into the full index.
  std::vector<Index> keep_off{0}, tr_off{0};
  for (std::size_t k = 0; k < factor_dims.size(); ++k) {
    auto& offs = kept[k] ? keep_off : tr_off;
    std::vector<Index> next;
    next.reserve(offs.size() * factor_dims[k]);
    for (Index base : offs)
      for (Index d = 0; d < factor_dims[k]; ++d) next.push_back(base + d * strides[k]);
    offs = std::move(next);
  }
  const Index dk = static_cast<Index>(keep_off.size());
  Mat out = Mat::Zero(dk, dk);
  for (Index r = 0; r < dk; ++r)
    for (Index c = 0; c < dk; ++c) {
      cplx acc{0, 0};
      for (Index t : tr_off) acc += rho.entries(keep_off[r] + t, keep_off[c] + t);
      out(r, c) = acc;
    }
  return DensityMatrix{std::move(out)};
}

/// Sum of the absolute eigenvalues of a Hermitian matrix.
inline double trace_norm(const Mat& a) {
  if (a.rows() != a.cols()) throw dimension_error("trace norm requires a square matrix");
  if (!is_hermitian(a, tol::input_hermiticity))
    throw std::domain_error("trace norm input not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<Mat> es((a + a.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// U = exp(-i H t) via Hermitian eigendecomposition (exact for Hermitian H).
inline UnitaryOperator propagator(const HermitianOperator& h, double t) {
  h.validate();
  if (!std::isfinite(t)) throw std::invalid_argument("propagator time must be finite");
  Eigen::SelfAdjointEigenSolver<Mat> es(h.matrix);
  const auto& lam = es.eigenvalues();
  Vec phases(lam.size());
  for (Index j = 0; j < lam.size(); ++j) phases[j] = std::exp(cplx{0.0, -lam[j] * t});
  return UnitaryOperator{es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint()};
}

struct PolarResult {
  Mat v;                   // isometry with orthonormal columns
  Eigen::VectorXd sigma;   // singular values of the input
};

/// Isometric part of the polar decomposition D = PV, computed via SVD.
/// Throws degenerate_coding_error when D is column-rank deficient.
inline PolarResult polar_decompose(const Mat& d) {
  if (d.rows() < d.cols())
    throw dimension_error("polar decomposition expects at least as many rows as columns");
  Eigen::BDCSVD<Mat> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().minCoeff() <= tol::rank)
    throw degenerate_coding_error("rank-deficient coding matrix (eta0 too small)");
  return PolarResult{svd.matrixU() * svd.matrixV().adjoint(), svd.singularValues()};
}

inline Mat polar_unitary(const Mat& d) { return polar_decompose(d).v; }

/// Squared Frobenius (Schatten-2) norm.
inline double frobenius_sq(const Mat& m) { return m.squaredNorm(); }

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace relaxctl
