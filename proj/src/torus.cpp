#include "pdoprior/torus.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pdoprior {

SpatialGrid::SpatialGrid(int dim, Index points_per_axis) : dim_(dim), n_(points_per_axis) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("SpatialGrid: dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (points_per_axis < 1) {
    throw std::invalid_argument("SpatialGrid: points_per_axis must be positive");
  }
}

Point SpatialGrid::node(Index flat) const {
  const double h = spacing();
  if (dim_ == 1) return {static_cast<double>(flat) * h, 0.0};
  return {static_cast<double>(flat / n_) * h, static_cast<double>(flat % n_) * h};
}

FrequencyBand::FrequencyBand(std::vector<int> lo, std::vector<int> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.empty() || lo_.size() > 2) {
    throw std::invalid_argument("FrequencyBand: need one [lo, hi] pair per axis, 1 or 2 axes");
  }
  size_ = 1;
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    if (hi_[k] < lo_[k]) throw std::invalid_argument("FrequencyBand: empty axis range");
    size_ *= hi_[k] - lo_[k] + 1;
  }
}

FrequencyBand FrequencyBand::half_open_1d(int half_width) {
  if (half_width < 1) throw std::invalid_argument("FrequencyBand: half_width must be positive");
  return FrequencyBand({-half_width}, {half_width - 1});
}

FrequencyBand FrequencyBand::symmetric(int dim, int half_width) {
  if (half_width < 0) throw std::invalid_argument("FrequencyBand: half_width must be non-negative");
  if (dim == 1) return FrequencyBand({-half_width}, {half_width});
  return FrequencyBand({-half_width, -half_width}, {half_width, half_width});
}

FrequencyBand FrequencyBand::natural(const SpatialGrid& grid) {
  const int m = static_cast<int>(grid.points_per_axis());
  const int lo = -(m / 2);
  const int hi = (m + 1) / 2 - 1;
  if (grid.dim() == 1) return FrequencyBand({lo}, {hi});
  return FrequencyBand({lo, lo}, {hi, hi});
}

MultiIndex FrequencyBand::frequency(Index j) const {
  if (dim() == 1) return {lo_[0] + static_cast<int>(j), 0};
  const Index e1 = extent(1);
  return {lo_[0] + static_cast<int>(j / e1), lo_[1] + static_cast<int>(j % e1)};
}

Index FrequencyBand::position(const MultiIndex& eta) const noexcept {
  if (eta[0] < lo_[0] || eta[0] > hi_[0]) return -1;
  if (dim() == 1) return eta[1] == 0 ? eta[0] - lo_[0] : -1;
  if (eta[1] < lo_[1] || eta[1] > hi_[1]) return -1;
  return static_cast<Index>(eta[0] - lo_[0]) * extent(1) + (eta[1] - lo_[1]);
}

Index FrequencyBand::partner(Index j) const noexcept {
  const MultiIndex eta = frequency(j);
  return position({-eta[0], -eta[1]});
}

double FrequencyBand::squared_norm(Index j) const {
  const MultiIndex eta = frequency(j);
  return static_cast<double>(eta[0]) * eta[0] + static_cast<double>(eta[1]) * eta[1];
}

FrequencyBand FrequencyBand::widened(int extra) const {
  std::vector<int> hi = hi_;
  for (int& h : hi) h += extra;
  return FrequencyBand(lo_, hi);
}

FrequencyBand FrequencyBand::shrunk(const MultiIndex& gamma) const {
  std::vector<int> hi = hi_;
  for (int k = 0; k < dim(); ++k) hi[k] -= gamma[k];
  for (int k = 0; k < dim(); ++k) {
    if (hi[k] < lo_[k]) throw std::invalid_argument("FrequencyBand: not enough overhead nodes for difference order");
  }
  return FrequencyBand(lo_, hi);
}

bool FrequencyBand::includes(const FrequencyBand& other) const {
  if (other.dim() != dim()) return false;
  for (int k = 0; k < dim(); ++k) {
    if (other.lo_[k] < lo_[k] || other.hi_[k] > hi_[k]) return false;
  }
  return true;
}

Complex basis_function(const FrequencyBand& band, Index j, const Point& x) {
  const MultiIndex eta = band.frequency(j);
  const double phase = kTwoPi * (eta[0] * x[0] + eta[1] * x[1]);
  if (band.partner(j) < 0) return {std::cos(phase), 0.0};
  return std::polar(1.0, phase);
}

Complex evaluate_fourier_series(const VectorXcd& coeffs, const FrequencyBand& band, const Point& x) {
  if (coeffs.size() != band.size()) {
    throw std::invalid_argument("evaluate_fourier_series: coefficient count does not match band");
  }
  Complex sum{0.0, 0.0};
  for (Index j = 0; j < band.size(); ++j) sum += coeffs[j] * basis_function(band, j, x);
  return sum;
}

namespace {

void check_compatible(const FrequencyBand& band, const SpatialGrid& grid, const char* who) {
  if (band.dim() != grid.dim()) {
    throw std::invalid_argument(std::string(who) + ": grid and band dimensions differ");
  }
}

}  // namespace

MatrixXcd synthesis_matrix(const FrequencyBand& band, const SpatialGrid& grid) {
  check_compatible(band, grid, "synthesis_matrix");
  MatrixXcd e(grid.size(), band.size());
  for (Index j = 0; j < band.size(); ++j) {
    for (Index i = 0; i < grid.size(); ++i) e(i, j) = basis_function(band, j, grid.node(i));
  }
  return e;
}

VectorXcd inverse_dft_row(const VectorXcd& row, const FrequencyBand& band, const SpatialGrid& grid) {
  check_compatible(band, grid, "inverse_dft_row");
  if (row.size() != band.size()) throw std::invalid_argument("inverse_dft_row: row length does not match band");
  VectorXcd out = VectorXcd::Zero(grid.size());
  for (Index j = 0; j < band.size(); ++j) {
    if (row[j] == Complex(0.0, 0.0)) continue;
    for (Index i = 0; i < grid.size(); ++i) out[i] += row[j] * basis_function(band, j, grid.node(i));
  }
  return out;
}

VectorXcd forward_dft(const VectorXcd& values, const FrequencyBand& band, const SpatialGrid& grid) {
  check_compatible(band, grid, "forward_dft");
  if (values.size() != grid.size()) throw std::invalid_argument("forward_dft: value count does not match grid");
  VectorXcd out(band.size());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (Index j = 0; j < band.size(); ++j) {
    Complex acc{0.0, 0.0};
    for (Index i = 0; i < grid.size(); ++i) acc += values[i] * std::conj(basis_function(band, j, grid.node(i)));
    out[j] = acc * scale;
  }
  return out;
}

namespace {

double falling_factorial(int k, int order) {
  double p = 1.0;
  for (int j = 0; j < order; ++j) p *= static_cast<double>(k - j);
  return p;
}

// Spectral D^{(order)} along one axis of length m. The first sample is
// subtracted before the transform; it only changes the zero mode, which the
// multiplier annihilates for order >= 1, and makes constants map to exact zeros.
class AxisDerivative {
public:
  AxisDerivative(Index m, int order) : m_(m), order_(order) {
    lo_ = -static_cast<int>(m / 2);
    hi_ = static_cast<int>((m + 1) / 2) - 1;
    const Index nk = hi_ - lo_ + 1;
    twiddle_.resize(nk, m);
    for (Index a = 0; a < nk; ++a) {
      const int k = lo_ + static_cast<int>(a);
      for (Index i = 0; i < m; ++i) {
        // Reduce the product modulo m so the phase stays exact for large k*i.
        const long long r = (static_cast<long long>(k) * i) % static_cast<long long>(m);
        twiddle_(a, i) = std::polar(1.0, kTwoPi * static_cast<double>(r) / static_cast<double>(m));
      }
    }
    multiplier_.resize(nk);
    for (Index a = 0; a < nk; ++a) {
      const int k = lo_ + static_cast<int>(a);
      if (m % 2 == 0 && k == lo_) {
        multiplier_[a] = 0.5 * (falling_factorial(k, order) + falling_factorial(-k, order));
      } else {
        multiplier_[a] = falling_factorial(k, order);
      }
    }
  }

  void apply(VectorXcd& f) const {
    if (order_ == 0) return;
    const Complex f0 = f[0];
    VectorXcd shifted = f.array() - f0;
    VectorXcd coeffs = twiddle_.conjugate() * shifted / static_cast<double>(m_);
    coeffs.array() *= multiplier_.array();
    f = twiddle_.transpose() * coeffs;
  }

private:
  Index m_;
  int order_;
  int lo_ = 0;
  int hi_ = 0;
  MatrixXcd twiddle_;
  Eigen::ArrayXd multiplier_;
};

}  // namespace

MatrixXcd spectral_derivative_columns(const MatrixXcd& columns, const SpatialGrid& grid, const MultiIndex& gamma) {
  if (columns.rows() != grid.size()) throw std::invalid_argument("spectral_derivative: value count does not match grid");
  for (int k = 0; k < 2; ++k) {
    if (gamma[k] < 0) throw std::invalid_argument("spectral_derivative: order components must be non-negative");
  }
  if (grid.dim() == 1 && gamma[1] != 0) throw std::invalid_argument("spectral_derivative: second order component on a 1D grid");

  MatrixXcd out = columns;
  const Index m = grid.points_per_axis();
  if (grid.dim() == 1) {
    if (gamma[0] == 0) return out;
    const AxisDerivative d(m, gamma[0]);
    for (Index c = 0; c < out.cols(); ++c) {
      VectorXcd col = out.col(c);
      d.apply(col);
      out.col(c) = col;
    }
    return out;
  }

  for (int axis = 0; axis < 2; ++axis) {
    if (gamma[axis] == 0) continue;
    const AxisDerivative d(m, gamma[axis]);
    VectorXcd line(m);
    for (Index c = 0; c < out.cols(); ++c) {
      for (Index other = 0; other < m; ++other) {
        for (Index t = 0; t < m; ++t) line[t] = out(axis == 0 ? t * m + other : other * m + t, c);
        d.apply(line);
        for (Index t = 0; t < m; ++t) out(axis == 0 ? t * m + other : other * m + t, c) = line[t];
      }
    }
  }
  return out;
}

VectorXcd spectral_derivative(const VectorXcd& values, const SpatialGrid& grid, const MultiIndex& gamma) {
  return spectral_derivative_columns(values, grid, gamma).col(0);
}

VectorXcd spectral_derivative(const FieldSample& field, const MultiIndex& gamma) {
  return spectral_derivative(VectorXcd(field.values.cast<Complex>()), field.grid, gamma);
}

SpectralTensor restrict_to(const SpectralTensor& tensor, const FrequencyBand& sub) {
  if (!tensor.band.includes(sub)) throw std::invalid_argument("restrict_to: sub-band is not contained in the tensor band");
  SpectralTensor out{sub, MatrixXcd(tensor.rows(), sub.size())};
  for (Index j = 0; j < sub.size(); ++j) out.values.col(j) = tensor.values.col(tensor.band.position(sub.frequency(j)));
  return out;
}

}  // namespace pdoprior
