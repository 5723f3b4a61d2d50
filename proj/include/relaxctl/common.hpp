// Shared aliases, tolerances and error types for the relaxctl library.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace relaxctl {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using Index = Eigen::Index;

namespace tol {
// Structural checks (unitarity, hermiticity of results, trace preservation).
inline constexpr double structural = 1e-10;
// Grouping of nearly degenerate eigenvalues.
inline constexpr double degeneracy = 1e-9;
// Rank decisions (singular values below this count as zero).
inline constexpr double rank = 1e-12;
// Projection weights at or below this give an empty residual.
inline constexpr double empty_weight = 1e-14;
// Hermiticity tolerance accepted on user-supplied inputs.
inline constexpr double input_hermiticity = 1e-8;
// An eigenvalue of a channel counts as peripheral above 1 - this.
inline constexpr double peripheral = 1e-7;
}  // namespace tol

// Dense operators are capped at this many spin-1/2 sites unless a caller
// raises the limit explicitly.
inline constexpr int kDefaultMaxSites = 12;

struct dimension_error : std::runtime_error {
  explicit dimension_error(const std::string& what) : std::runtime_error(what) {}
};

struct degenerate_coding_error : std::runtime_error {
  explicit degenerate_coding_error(const std::string& what) : std::runtime_error(what) {}
};

struct resource_error : std::runtime_error {
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

struct malformed_channel_error : std::runtime_error {
  explicit malformed_channel_error(const std::string& what) : std::runtime_error(what) {}
};

struct underflow_error : std::runtime_error {
  explicit underflow_error(const std::string& what) : std::runtime_error(what) {}
};

struct parse_error : std::runtime_error {
  parse_error(int line_number, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
  int line;
};

}  // namespace relaxctl
