#ifndef PDOPRIOR_TORUS_HPP
#define PDOPRIOR_TORUS_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pdoprior {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Multi-index over at most two axes; unused trailing components are zero.
using MultiIndex = std::array<int, 2>;
/// Point of the torus [0,1)^d; unused trailing components are zero.
using Point = std::array<double, 2>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/**
 * Equispaced nodes x_i = i / N per axis on the d-torus, d in {1, 2}.
 *
 * Nodes are enumerated row-major: node (i0, i1) has flat index i0 * N + i1.
 */
class SpatialGrid {
public:
  SpatialGrid() = default;
  SpatialGrid(int dim, Index points_per_axis);

  int dim() const noexcept { return dim_; }
  Index points_per_axis() const noexcept { return n_; }
  Index size() const noexcept { return dim_ == 1 ? n_ : n_ * n_; }
  double spacing() const noexcept { return 1.0 / static_cast<double>(n_); }

  Point node(Index flat) const;
  Index flat_index(Index i0, Index i1 = 0) const noexcept {
    return dim_ == 1 ? i0 : i0 * n_ + i1;
  }

  bool operator==(const SpatialGrid&) const = default;

private:
  int dim_ = 1;
  Index n_ = 1;
};

/**
 * Rectangular set of integer frequencies [lo_k, hi_k] on each axis.
 *
 * Frequencies are enumerated row-major with axis 0 slowest and each axis
 * ascending from lo to hi; this order is used by every tensor, spectrum
 * and whitened parameter vector in the library.
 *
 * A frequency whose negative lies outside the band (the 1D edge mode -N of
 * [-N, N-1]) is treated as self-conjugate: its coefficient is real and its
 * basis function is cos(2 pi eta . x), as in real-input transform layouts.
 */
class FrequencyBand {
public:
  FrequencyBand() = default;
  FrequencyBand(std::vector<int> lo, std::vector<int> hi);

  /// [-N, N-1], the one-dimensional band eta_i = i - N.
  static FrequencyBand half_open_1d(int half_width);
  /// [-N, N]^d.
  static FrequencyBand symmetric(int dim, int half_width);
  /// Band resolved by a grid with M points per axis: [-floor(M/2), ceil(M/2)-1].
  static FrequencyBand natural(const SpatialGrid& grid);

  int dim() const noexcept { return static_cast<int>(lo_.size()); }
  Index size() const noexcept { return size_; }
  int lo(int axis) const { return lo_[axis]; }
  int hi(int axis) const { return hi_[axis]; }
  Index extent(int axis) const { return hi_[axis] - lo_[axis] + 1; }

  MultiIndex frequency(Index j) const;
  /// Flat position of eta, or -1 when eta is not in the band.
  Index position(const MultiIndex& eta) const noexcept;
  bool contains(const MultiIndex& eta) const noexcept { return position(eta) >= 0; }
  /// Flat position of -eta_j, or -1 when it is not in the band.
  Index partner(Index j) const noexcept;
  bool is_self_conjugate(Index j) const noexcept { return partner(j) < 0 || partner(j) == j; }
  double squared_norm(Index j) const;

  /// Same band with hi_k raised by `extra` on every axis.
  FrequencyBand widened(int extra) const;
  /// Same band with hi_k lowered by gamma_k.
  FrequencyBand shrunk(const MultiIndex& gamma) const;
  bool includes(const FrequencyBand& other) const;

  bool operator==(const FrequencyBand&) const = default;

private:
  std::vector<int> lo_;
  std::vector<int> hi_;
  Index size_ = 0;
};

/// Complex values indexed by (spatial node, frequency) in band order.
struct SpectralTensor {
  FrequencyBand band;
  MatrixXcd values;

  Index rows() const noexcept { return values.rows(); }
  Index cols() const noexcept { return values.cols(); }
};

/// Real-valued field on a spatial grid.
struct FieldSample {
  SpatialGrid grid;
  VectorXd values;
};

/// Basis function of frequency j at x: exp(i 2 pi eta.x), or cos(2 pi eta.x) for an unpaired edge mode.
Complex basis_function(const FrequencyBand& band, Index j, const Point& x);

/// Sum_eta coeffs(eta) b_eta(x) over the band.
Complex evaluate_fourier_series(const VectorXcd& coeffs, const FrequencyBand& band, const Point& x);

/// Complex synthesis matrix E with E(i, j) = b_j(x_i).
MatrixXcd synthesis_matrix(const FrequencyBand& band, const SpatialGrid& grid);

/// Trigonometric polynomial with coefficients `row` evaluated at every grid node.
VectorXcd inverse_dft_row(const VectorXcd& row, const FrequencyBand& band, const SpatialGrid& grid);

/// Analysis transform with the 1/N factor: c(eta) = (1/|grid|) sum_i f(x_i) exp(-i 2 pi eta.x_i).
VectorXcd forward_dft(const VectorXcd& values, const FrequencyBand& band, const SpatialGrid& grid);

/**
 * D_x^{(gamma)} f = prod_k prod_{j<gamma_k} (1/(i 2 pi) d/dx_k - j) f, computed on the
 * natural band of the grid. For even grids the Nyquist mode is split evenly
 * between +N/2 and -N/2 before the multiplier is applied.
 */
VectorXcd spectral_derivative(const VectorXcd& values, const SpatialGrid& grid, const MultiIndex& gamma);
VectorXcd spectral_derivative(const FieldSample& field, const MultiIndex& gamma);

/// Applies spectral_derivative to every column of a (node x anything) matrix.
MatrixXcd spectral_derivative_columns(const MatrixXcd& columns, const SpatialGrid& grid, const MultiIndex& gamma);

/// Columns of `tensor` restricted to a sub-band.
SpectralTensor restrict_to(const SpectralTensor& tensor, const FrequencyBand& sub);

}  // namespace pdoprior

#endif  // PDOPRIOR_TORUS_HPP
