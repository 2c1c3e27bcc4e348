#ifndef PDOPRIOR_EXPERIMENTS_HPP
#define PDOPRIOR_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>

#include "pdoprior/diagnostics.hpp"
#include "pdoprior/lbfgs.hpp"
#include "pdoprior/nuts.hpp"
#include "pdoprior/posterior.hpp"
#include "pdoprior/radon.hpp"

namespace pdoprior {

/// The 1D Gaussian-bump length-scale setup, sigma(x) = base + amplitude exp(-(x - center)^2 / width).
struct BumpSetup {
  Index nx = 65;
  int half_band = 32;
  double alpha = 2.0;
  double base = 0.05;
  double amplitude = 2.0;
  double center = 0.5;
  double width = 0.5;

  SpatialGrid grid() const { return SpatialGrid(1, nx); }
  FrequencyBand band() const { return FrequencyBand::half_open_1d(half_band); }
  SymbolSpec symbol() const;
};

struct DenoiseConfig {
  BumpSetup setup;
  int truncation_order = 5;
  double noise_rel = 0.01;
  std::uint64_t seed = 1;
  bool map_only = false;
  NutsConfig nuts;
  OptimizerConfig lbfgs;
};

struct DenoiseResult {
  SpatialGrid grid;
  FrequencyBand band;
  std::shared_ptr<const LinearPriorMap> prior;
  VectorXd s_true;
  VectorXd truth;
  VectorXd y;
  double sigma_noise = 0.0;
  OptimizerResult map;
  VectorXd exact_mode;    // closed-form Gaussian posterior mode
  VectorXd exact_stddev;  // closed-form posterior standard deviations in s
  std::optional<PosteriorChain> chain;
  std::optional<PosteriorSummary> summary;
};

/// Inverse-crime denoising: truth drawn from the prior, identity observation, relative noise.
DenoiseResult run_denoise(const DenoiseConfig& config);

struct CtConfig {
  Index grid_points = 64;
  int half_band = 16;
  int angles = 50;
  double max_angle = 0.78539816339744830962;
  int detectors = 64;
  int quad_order = 64;
  double noise_rel = 0.01;
  double a2 = 6.25;
  double a3 = 2.5;
  double sharpness = 10.0;
  PhantomConfig phantom;
  std::uint64_t seed = 1;
  bool map_only = false;
  OptimizerConfig lbfgs;
  NutsConfig nuts;
};

/// Where the sigma field puts its top quartile, relative to the small-inclusion region.
struct InclusionScore {
  double small_region_fraction = 0.0;  // share of disk pixels in the small-inclusion region
  double top_quartile_share = 0.0;     // share of top-quartile-sigma pixels inside that region
  double median_radius = 0.0;
  bool enriched() const noexcept { return top_quartile_share > small_region_fraction; }
};

/**
 * Pixels of the unit disk are assigned to their nearest inclusion (distance to
 * the rim); the small-inclusion region holds pixels whose nearest inclusion has
 * radius below the median radius of the phantom.
 */
InclusionScore score_inclusions(const Phantom& phantom, const VectorXd& sigma, const SpatialGrid& grid);

struct CtResult {
  SpatialGrid grid;
  FrequencyBand band;
  RadonGeometry geometry;
  Phantom phantom;
  VectorXd y_clean;
  VectorXd y;
  double sigma_noise = 0.0;
  FieldSample fbp;
  OptimizerResult map;
  VectorXd sigma_map;
  VectorXd xi_map;
  VectorXd image_map;
  double fbp_error = 0.0;  // relative L2 over the unit disk
  double map_error = 0.0;
  InclusionScore inclusion;
  std::optional<PosteriorChain> chain;  // over s2 with sigma fixed at its MAP
  std::optional<PosteriorSummary> summary;
};

/// Relative L2 error restricted to nodes of the closed unit disk.
double disk_relative_error(const VectorXd& estimate, const VectorXd& truth, const SpatialGrid& grid);

/// Limited-angle CT: disk phantom, noisy sinogram, FBP baseline, hierarchical level-set MAP and optional NUTS.
CtResult run_ct(const CtConfig& config);

}  // namespace pdoprior

#endif  // PDOPRIOR_EXPERIMENTS_HPP
