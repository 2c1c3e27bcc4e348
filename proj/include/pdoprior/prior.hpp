#ifndef PDOPRIOR_PRIOR_HPP
#define PDOPRIOR_PRIOR_HPP

#include <memory>

#include "pdoprior/symbol.hpp"
#include "pdoprior/white_noise.hpp"

namespace pdoprior {

/// Real field with the imaginary part left over by synthesis.
struct SynthesisResult {
  FieldSample field;
  double imaginary_residue = 0.0;  // max |Im| / max |Re|
};

/**
 * xi(x_i) = Re sum_j q(x_i, eta_j) w_j b_j(x_i), the interpolant of row i of q
 * applied to the noise and evaluated at x_i.
 */
SynthesisResult synthesize(const SpectralTensor& q, const SpatialGrid& grid, const WhiteNoiseSpectrum& noise);

/// Parametrix sampler: expands to order N and synthesizes.
FieldSample sample_prior_1d(const SymbolSpec& spec, int truncation_order, const WhiteNoiseSpectrum& noise,
                            const ParametrixOptions& options = {});

/// Dense real matrix A with xi = A s for whitened coordinates s.
MatrixXd prior_map_matrix(const SpectralTensor& q, const SpatialGrid& grid);

/**
 * Centered-difference reference solution of p(x, D) X = noise:
 * X = (diag(sigma) - L / (4 pi^2))^{-alpha/2} (noise / prefactor), with L the
 * periodic second-difference matrix scaled by 1/dx^2.
 */
FieldSample fd_reference_1d(const SymbolSpec& spec, const FieldSample& noise_field);

/// Fraction of the spectral energy of `field` at frequencies with |eta| > cutoff.
double high_frequency_energy_fraction(const FieldSample& field, double cutoff);

// ---------------------------------------------------------------- hierarchical prior

struct HierarchicalSpec {
  double a1 = 1.0;
  double a2 = 6.25;
  double a3 = 2.5;
  FrequencyBand band;
  SpatialGrid grid;
};

/// sum_eta (a2 + |eta|^2)^{-4} over the band.
double compute_variance_constant(double a2, const FrequencyBand& band);

/// Spec with a1 filled in by compute_variance_constant.
HierarchicalSpec make_hierarchical_spec(const SpatialGrid& grid, const FrequencyBand& band, double a2 = 6.25,
                                        double a3 = 2.5);

/// Spectral weights (a2 + |eta|^2)^{-2} / sqrt(a1) of the hyper-field, band order.
VectorXd hyper_weights(const HierarchicalSpec& spec);

/// Z(x) = sum_eta h_eta w_eta b_eta(x); pointwise variance one.
FieldSample sample_hyper_sigma(const HierarchicalSpec& spec, const WhiteNoiseSpectrum& noise);

/// c(x_i) = sqrt(sum_eta (10^{a3 + sigma(x_i)} + |eta|^2)^{-2}).
FieldSample compute_normalization(const FieldSample& sigma_field, double a3, const FrequencyBand& band);

struct HierarchicalSample {
  FieldSample sigma;
  FieldSample xi;
  FieldSample normalization;
};

/**
 * sigma from s1, then xi(x) = c(x)^{-1} sum_eta (10^{a3+sigma(x)} + |eta|^2)^{-1} w_eta b_eta(x)
 * from s2. With normalize = false, c is replaced by 1.
 */
HierarchicalSample sample_hierarchical_2d(const HierarchicalSpec& spec, const WhiteNoiseSpectrum& s1,
                                          const WhiteNoiseSpectrum& s2, bool normalize = true);

struct LevelSetSpec {
  double sharpness = 10.0;
};

/// 1 / (1 + exp(-k xi)).
FieldSample level_set_transform(const FieldSample& xi, const LevelSetSpec& spec);
double level_set_value(double xi, double k) noexcept;
/// d/dxi of the sigmoid.
double level_set_derivative(double xi, double k) noexcept;

}  // namespace pdoprior

#endif  // PDOPRIOR_PRIOR_HPP
