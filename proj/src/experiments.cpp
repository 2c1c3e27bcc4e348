#include "pdoprior/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pdoprior {

SymbolSpec BumpSetup::symbol() const {
  return SymbolSpec(alpha, SmoothField::gaussian_bump_1d(grid(), base, amplitude, center, width));
}

namespace {

std::vector<Index> every_node(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

}  // namespace

DenoiseResult run_denoise(const DenoiseConfig& config) {
  DenoiseResult out;
  out.grid = config.setup.grid();
  out.band = config.setup.band();
  const ParametrixTensor par = parametrix_expand(config.setup.symbol(), out.band, config.truncation_order);
  out.prior = std::make_shared<LinearPriorMap>(prior_map_matrix(par.partial_sum, out.grid));

  const RngSeed base{config.seed, 0};
  out.s_true = standard_normal_vector(out.band.size(), substream(base, 0));
  out.truth = out.prior->apply(out.s_true);
  NoiseModel noise{config.noise_rel};
  out.y = add_noise(out.truth, noise, substream(base, 1));
  out.sigma_noise = noise.sigma_noise;

  const WhitenedPosterior post(out.prior, selection_matrix(every_node(out.grid.size()), out.grid.size()), out.y,
                               out.sigma_noise);
  const LinearGaussianPosterior exact(post);
  out.exact_mode = exact.mode();
  out.exact_stddev = exact.covariance().diagonal().cwiseSqrt();
  out.map = map_lbfgs(post, config.lbfgs, VectorXd::Zero(post.dimension()));

  if (!config.map_only) {
    out.chain = nuts_sample(post, config.nuts, substream(base, 2), out.map.x);
    const auto prior = out.prior;
    out.summary = posterior_summary(out.chain->samples, [prior](const VectorXd& s) { return prior->apply(s); }, 0.95,
                                    &out.map.x);
  }
  return out;
}

double disk_relative_error(const VectorXd& estimate, const VectorXd& truth, const SpatialGrid& grid) {
  const auto mask = disk_mask(grid);
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    if (!mask[i]) continue;
    num += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

InclusionScore score_inclusions(const Phantom& phantom, const VectorXd& sigma, const SpatialGrid& grid) {
  InclusionScore score;
  if (phantom.disks.empty()) return score;
  std::vector<double> radii;
  for (const Disk& d : phantom.disks) radii.push_back(d.radius);
  std::sort(radii.begin(), radii.end());
  const std::size_t m = radii.size();
  score.median_radius = m % 2 == 1 ? radii[m / 2] : 0.5 * (radii[m / 2 - 1] + radii[m / 2]);

  const auto mask = disk_mask(grid);
  std::vector<Index> inside;
  std::vector<double> values;
  for (Index i = 0; i < grid.size(); ++i) {
    if (!mask[i]) continue;
    inside.push_back(i);
    values.push_back(sigma[i]);
  }
  std::vector<double> sorted = values;
  const std::size_t q = static_cast<std::size_t>(std::floor(0.75 * static_cast<double>(sorted.size())));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
  const double threshold = sorted[q];

  std::size_t small = 0, top = 0, top_small = 0;
  for (std::size_t k = 0; k < inside.size(); ++k) {
    const Point p = torus_to_physical(grid.node(inside[k]));
    double best = std::numeric_limits<double>::infinity();
    double radius = 0.0;
    for (const Disk& d : phantom.disks) {
      const double gap = std::hypot(p[0] - d.u, p[1] - d.v) - d.radius;
      if (gap < best) {
        best = gap;
        radius = d.radius;
      }
    }
    const bool is_small = radius < score.median_radius;
    const bool is_top = values[k] >= threshold;
    small += is_small;
    top += is_top;
    top_small += is_small && is_top;
  }
  score.small_region_fraction = static_cast<double>(small) / static_cast<double>(inside.size());
  score.top_quartile_share = top > 0 ? static_cast<double>(top_small) / static_cast<double>(top) : 0.0;
  return score;
}

CtResult run_ct(const CtConfig& config) {
  CtResult out;
  out.grid = SpatialGrid(2, config.grid_points);
  out.band = FrequencyBand::symmetric(2, config.half_band);
  out.geometry = RadonGeometry::equispaced(config.angles, config.max_angle, config.detectors, config.quad_order);

  const RngSeed base{config.seed, 0};
  out.phantom = generate_disk_phantom(substream(base, 0), out.grid, config.phantom);
  const SparseMatrix r = radon_matrix(out.geometry, out.grid);
  out.y_clean = r * out.phantom.field.values;
  NoiseModel noise{config.noise_rel};
  out.y = add_noise(out.y_clean, noise, substream(base, 1));
  out.sigma_noise = noise.sigma_noise;

  out.fbp = fbp_reconstruct(Sinogram::from_flat(out.geometry, out.y), out.grid);
  out.fbp_error = disk_relative_error(out.fbp.values, out.phantom.field.values, out.grid);

  const HierarchicalSpec spec = make_hierarchical_spec(out.grid, out.band, config.a2, config.a3);
  const auto map = std::make_shared<HierarchicalPriorMap>(spec);
  const LevelSetSpec level{config.sharpness};
  const WhitenedPosterior post(map, r, out.y, out.sigma_noise, level);
  out.map = map_lbfgs(post, config.lbfgs, VectorXd::Zero(post.dimension()));

  const Index nb = map->block_size();
  const VectorXd s1 = out.map.x.head(nb);
  const auto ev = map->evaluate(out.map.x);
  out.sigma_map = ev.sigma;
  out.xi_map = ev.xi;
  out.image_map = post.field(out.map.x);
  out.map_error = disk_relative_error(out.image_map, out.phantom.field.values, out.grid);
  out.inclusion = score_inclusions(out.phantom, out.sigma_map, out.grid);

  if (!config.map_only) {
    const auto fixed = std::make_shared<LinearPriorMap>(map->with_fixed_sigma(s1));
    const WhitenedPosterior cond(fixed, r, out.y, out.sigma_noise, level);
    const VectorXd s2 = out.map.x.tail(nb);
    out.chain = nuts_sample(cond, config.nuts, substream(base, 2), s2);
    out.summary = posterior_summary(out.chain->samples, [&cond](const VectorXd& s) { return cond.field(s); }, 0.95,
                                    &s2);
  }
  return out;
}

}  // namespace pdoprior
