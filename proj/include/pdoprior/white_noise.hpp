#ifndef PDOPRIOR_WHITE_NOISE_HPP
#define PDOPRIOR_WHITE_NOISE_HPP

#include "pdoprior/rng.hpp"
#include "pdoprior/torus.hpp"

namespace pdoprior {

/**
 * Truncated Fourier coefficients of real white noise.
 *
 * Whitened real coordinates s (one per band frequency, band order) map to
 * coefficients as follows. For eta = 0 and for unpaired edge modes w = s.
 * For a representative eta (first nonzero component positive) with partner -eta:
 *   w_eta = (s_eta + i s_{-eta}) / sqrt(2),   w_{-eta} = conj(w_eta).
 */
struct WhiteNoiseSpectrum {
  FrequencyBand band;
  VectorXcd coeffs;
  RngSeed seed;
};

/// True for eta = 0 or eta whose first nonzero component is positive.
bool is_representative(const MultiIndex& eta) noexcept;

/// Standard normal vector of length n drawn from the (seed, stream) engine.
VectorXd standard_normal_vector(Index n, const RngSeed& seed);

VectorXcd whitened_to_coefficients(const FrequencyBand& band, const VectorXd& s);
VectorXd coefficients_to_whitened(const FrequencyBand& band, const VectorXcd& w);

/// Draws s ~ N(0, I) and maps it to Hermitian coefficients.
WhiteNoiseSpectrum sample_white_noise(const FrequencyBand& band, const RngSeed& seed);
WhiteNoiseSpectrum white_noise_from_whitened(const FrequencyBand& band, const VectorXd& s);

/// Re sum_eta w_eta conj(f_eta).
double pair_with_test_function(const WhiteNoiseSpectrum& noise, const VectorXcd& f_coeffs);

/**
 * Real basis matrix B with B(i, p) = d/ds_p sum_eta w_eta b_eta(x_i):
 * 1 for eta = 0, cos for edge modes, sqrt(2) cos(2 pi eta.x) at representatives and
 * sqrt(2) sin(2 pi eta.x) at their partners.
 */
MatrixXd real_basis_matrix(const FrequencyBand& band, const SpatialGrid& grid);

/// The noise realization sampled at the grid nodes.
FieldSample white_noise_field(const WhiteNoiseSpectrum& noise, const SpatialGrid& grid);

}  // namespace pdoprior

#endif  // PDOPRIOR_WHITE_NOISE_HPP
