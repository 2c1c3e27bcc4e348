#include "pdoprior/prior.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "pdoprior/prior_map.hpp"

namespace pdoprior {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
}

SynthesisResult synthesize(const SpectralTensor& q, const SpatialGrid& grid, const WhiteNoiseSpectrum& noise) {
  if (!(q.band == noise.band)) throw std::invalid_argument("synthesize: noise band does not match the symbol band");
  if (q.rows() != grid.size()) throw std::invalid_argument("synthesize: symbol rows do not match grid");
  const MatrixXcd e = synthesis_matrix(q.band, grid);
  const VectorXcd v = (q.values.array() * e.array()).matrix() * noise.coeffs;
  SynthesisResult out{{grid, v.real()}, 0.0};
  const double re = v.real().cwiseAbs().maxCoeff();
  const double im = v.imag().cwiseAbs().maxCoeff();
  out.imaginary_residue = re > 0.0 ? im / re : im;
  return out;
}

FieldSample sample_prior_1d(const SymbolSpec& spec, int truncation_order, const WhiteNoiseSpectrum& noise,
                            const ParametrixOptions& options) {
  const ParametrixTensor par = parametrix_expand(spec, noise.band, truncation_order, options);
  return synthesize(par.partial_sum, spec.grid(), noise).field;
}

MatrixXd prior_map_matrix(const SpectralTensor& q, const SpatialGrid& grid) {
  if (q.rows() != grid.size()) throw std::invalid_argument("prior_map_matrix: symbol rows do not match grid");
  const FrequencyBand& band = q.band;
  const MatrixXcd c = (q.values.array() * synthesis_matrix(band, grid).array()).matrix();
  MatrixXd a(grid.size(), band.size());
  for (Index j = 0; j < band.size(); ++j) {
    const Index p = band.partner(j);
    if (p < 0 || p == j) {
      a.col(j) = c.col(j).real();
    } else if (is_representative(band.frequency(j))) {
      a.col(j) = (c.col(j) + c.col(p)).real() * kInvSqrt2;
      a.col(p) = -(c.col(j) - c.col(p)).imag() * kInvSqrt2;
    }
  }
  return a;
}

FieldSample fd_reference_1d(const SymbolSpec& spec, const FieldSample& noise_field) {
  const SpatialGrid& grid = spec.grid();
  if (grid.dim() != 1) throw std::invalid_argument("fd_reference_1d: needs a 1D grid");
  if (!(noise_field.grid == grid)) throw std::invalid_argument("fd_reference_1d: noise grid does not match symbol grid");
  const Index n = grid.size();
  if (n > 1024) throw std::invalid_argument("fd_reference_1d: grid too large for the dense solve");
  const double inv_dx2 = static_cast<double>(n) * static_cast<double>(n);
  const double scale = inv_dx2 / (kTwoPi * kTwoPi);
  MatrixXd a = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    a(i, i) = spec.sigma.values()[i] + 2.0 * scale;
    a(i, (i + 1) % n) -= scale;
    a(i, (i + n - 1) % n) -= scale;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw std::runtime_error("fd_reference_1d: eigendecomposition failed");
  const VectorXd lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) throw std::domain_error("fd_reference_1d: operator is not positive definite");
  const VectorXd rhs = noise_field.values.cwiseQuotient(spec.prefactor.values());
  const VectorXd coef = eig.eigenvectors().transpose() * rhs;
  const VectorXd powered = coef.cwiseProduct(lambda.array().pow(-0.5 * spec.alpha).matrix());
  return {grid, eig.eigenvectors() * powered};
}

double high_frequency_energy_fraction(const FieldSample& field, double cutoff) {
  const FrequencyBand band = FrequencyBand::natural(field.grid);
  const VectorXcd c = forward_dft(field.values.cast<Complex>(), band, field.grid);
  double high = 0.0;
  double total = 0.0;
  for (Index j = 0; j < band.size(); ++j) {
    const double e = std::norm(c[j]);
    total += e;
    if (std::sqrt(band.squared_norm(j)) > cutoff) high += e;
  }
  return total > 0.0 ? high / total : 0.0;
}

double compute_variance_constant(double a2, const FrequencyBand& band) {
  if (band.size() == 0) throw std::invalid_argument("compute_variance_constant: empty band");
  if (!(a2 > 0.0)) throw std::invalid_argument("compute_variance_constant: a2 must be positive");
  double sum = 0.0;
  for (Index j = 0; j < band.size(); ++j) sum += std::pow(a2 + band.squared_norm(j), -4.0);
  return sum;
}

HierarchicalSpec make_hierarchical_spec(const SpatialGrid& grid, const FrequencyBand& band, double a2, double a3) {
  if (grid.dim() != 2 || band.dim() != 2) throw std::invalid_argument("make_hierarchical_spec: needs a 2D grid and band");
  if (!std::isfinite(a3)) throw std::invalid_argument("make_hierarchical_spec: a3 must be finite");
  return {compute_variance_constant(a2, band), a2, a3, band, grid};
}

VectorXd hyper_weights(const HierarchicalSpec& spec) {
  VectorXd h(spec.band.size());
  const double norm = 1.0 / std::sqrt(spec.a1);
  for (Index j = 0; j < spec.band.size(); ++j) h[j] = norm / std::pow(spec.a2 + spec.band.squared_norm(j), 2.0);
  return h;
}

FieldSample sample_hyper_sigma(const HierarchicalSpec& spec, const WhiteNoiseSpectrum& noise) {
  if (!(noise.band == spec.band)) throw std::invalid_argument("sample_hyper_sigma: noise band does not match spec");
  const VectorXd s = coefficients_to_whitened(spec.band, noise.coeffs);
  return {spec.grid, real_basis_matrix(spec.band, spec.grid) * hyper_weights(spec).cwiseProduct(s)};
}

FieldSample compute_normalization(const FieldSample& sigma_field, double a3, const FrequencyBand& band) {
  VectorXd c(sigma_field.values.size());
  for (Index i = 0; i < c.size(); ++i) {
    const double lambda = std::pow(10.0, a3 + sigma_field.values[i]);
    double sum = 0.0;
    for (Index j = 0; j < band.size(); ++j) {
      const double t = 1.0 / (lambda + band.squared_norm(j));
      sum += t * t;
    }
    c[i] = std::sqrt(sum);
  }
  return {sigma_field.grid, c};
}

HierarchicalSample sample_hierarchical_2d(const HierarchicalSpec& spec, const WhiteNoiseSpectrum& s1,
                                          const WhiteNoiseSpectrum& s2, bool normalize) {
  if (!(s1.band == spec.band) || !(s2.band == spec.band)) {
    throw std::invalid_argument("sample_hierarchical_2d: noise band does not match spec");
  }
  if (s1.seed == s2.seed && s1.coeffs.size() > 0 && s1.coeffs == s2.coeffs) {
    throw std::invalid_argument("sample_hierarchical_2d: hyper-prior and prior noise come from the same stream");
  }
  const HierarchicalPriorMap map(spec, normalize);
  VectorXd s(map.parameter_count());
  s << coefficients_to_whitened(spec.band, s1.coeffs), coefficients_to_whitened(spec.band, s2.coeffs);
  const auto ev = map.evaluate(s);
  return {{spec.grid, ev.sigma}, {spec.grid, ev.xi}, {spec.grid, ev.c}};
}

double level_set_value(double xi, double k) noexcept {
  const double z = k * xi;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double level_set_derivative(double xi, double k) noexcept {
  const double v = level_set_value(xi, k);
  return k * v * (1.0 - v);
}

FieldSample level_set_transform(const FieldSample& xi, const LevelSetSpec& spec) {
  if (!(spec.sharpness > 0.0) || !std::isfinite(spec.sharpness)) {
    throw std::invalid_argument("level_set_transform: sharpness must be positive and finite");
  }
  FieldSample out = xi;
  for (Index i = 0; i < out.values.size(); ++i) out.values[i] = level_set_value(xi.values[i], spec.sharpness);
  return out;
}

}  // namespace pdoprior
