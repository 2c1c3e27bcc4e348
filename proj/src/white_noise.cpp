#include "pdoprior/white_noise.hpp"

#include <cmath>
#include <stdexcept>

namespace pdoprior {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
}  // namespace

bool is_representative(const MultiIndex& eta) noexcept {
  if (eta[0] != 0) return eta[0] > 0;
  return eta[1] >= 0;
}

VectorXd standard_normal_vector(Index n, const RngSeed& seed) {
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd s(n);
  for (Index k = 0; k < n; ++k) s[k] = normal(engine);
  return s;
}

VectorXcd whitened_to_coefficients(const FrequencyBand& band, const VectorXd& s) {
  if (s.size() != band.size()) throw std::invalid_argument("whitened_to_coefficients: length does not match band");
  VectorXcd w(band.size());
  for (Index j = 0; j < band.size(); ++j) {
    const Index p = band.partner(j);
    if (p < 0 || p == j) {
      w[j] = Complex(s[j], 0.0);
    } else if (is_representative(band.frequency(j))) {
      w[j] = Complex(s[j] * kInvSqrt2, s[p] * kInvSqrt2);
      w[p] = std::conj(w[j]);
    }
  }
  return w;
}

VectorXd coefficients_to_whitened(const FrequencyBand& band, const VectorXcd& w) {
  if (w.size() != band.size()) throw std::invalid_argument("coefficients_to_whitened: length does not match band");
  VectorXd s(band.size());
  for (Index j = 0; j < band.size(); ++j) {
    const Index p = band.partner(j);
    if (p < 0 || p == j) {
      s[j] = w[j].real();
    } else if (is_representative(band.frequency(j))) {
      s[j] = kSqrt2 * w[j].real();
      s[p] = kSqrt2 * w[j].imag();
    }
  }
  return s;
}

WhiteNoiseSpectrum white_noise_from_whitened(const FrequencyBand& band, const VectorXd& s) {
  return {band, whitened_to_coefficients(band, s), RngSeed{}};
}

WhiteNoiseSpectrum sample_white_noise(const FrequencyBand& band, const RngSeed& seed) {
  if (band.size() == 0) throw std::invalid_argument("sample_white_noise: empty band");
  WhiteNoiseSpectrum out = white_noise_from_whitened(band, standard_normal_vector(band.size(), seed));
  out.seed = seed;
  return out;
}

double pair_with_test_function(const WhiteNoiseSpectrum& noise, const VectorXcd& f_coeffs) {
  if (f_coeffs.size() != noise.coeffs.size()) throw std::invalid_argument("pair_with_test_function: band mismatch");
  return noise.coeffs.dot(f_coeffs).real();  // dot conjugates its first argument
}

MatrixXd real_basis_matrix(const FrequencyBand& band, const SpatialGrid& grid) {
  if (band.dim() != grid.dim()) throw std::invalid_argument("real_basis_matrix: grid and band dimensions differ");
  MatrixXd b(grid.size(), band.size());
  for (Index j = 0; j < band.size(); ++j) {
    const MultiIndex eta = band.frequency(j);
    const Index p = band.partner(j);
    const bool single = p < 0 || p == j;
    for (Index i = 0; i < grid.size(); ++i) {
      const Point x = grid.node(i);
      const double phase = kTwoPi * (eta[0] * x[0] + eta[1] * x[1]);
      if (single) {
        b(i, j) = std::cos(phase);
      } else if (is_representative(eta)) {
        b(i, j) = kSqrt2 * std::cos(phase);
      } else {
        b(i, j) = kSqrt2 * std::sin(phase);
      }
    }
  }
  return b;
}

FieldSample white_noise_field(const WhiteNoiseSpectrum& noise, const SpatialGrid& grid) {
  return {grid, real_basis_matrix(noise.band, grid) * coefficients_to_whitened(noise.band, noise.coeffs)};
}

}  // namespace pdoprior
