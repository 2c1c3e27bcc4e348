#include "pdoprior/radon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/legendre.hpp>

namespace pdoprior {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RadonGeometry RadonGeometry::equispaced(int n_angles, double max_angle, int n_detectors, int quad_order) {
  if (n_angles < 1 || n_detectors < 1) throw std::invalid_argument("RadonGeometry: need at least one angle and detector");
  if (!(max_angle > 0.0)) throw std::invalid_argument("RadonGeometry: max_angle must be positive");
  RadonGeometry g;
  for (int k = 0; k < n_angles; ++k) g.angles.push_back(k * max_angle / n_angles);
  const double cell = 2.0 / n_detectors;
  for (int j = 0; j < n_detectors; ++j) g.offsets.push_back(-1.0 + (j + 0.5) * cell);
  g.quad_order = quad_order;
  g.validate();
  return g;
}

void RadonGeometry::validate() const {
  if (angles.empty() || offsets.empty()) throw std::invalid_argument("RadonGeometry: empty angle or offset list");
  if (quad_order < 2) throw std::invalid_argument("RadonGeometry: quad_order must be at least 2");
  for (std::size_t k = 1; k < angles.size(); ++k) {
    if (!(angles[k] > angles[k - 1])) throw std::invalid_argument("RadonGeometry: angles must be strictly increasing");
  }
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (std::abs(offsets[k]) > 1.0) throw std::invalid_argument("RadonGeometry: offset outside [-1, 1]");
    if (k > 0 && !(offsets[k] > offsets[k - 1])) throw std::invalid_argument("RadonGeometry: offsets must be strictly increasing");
  }
}

VectorXd Sinogram::flattened() const {
  VectorXd out(values.size());
  for (Index a = 0; a < values.rows(); ++a)
    for (Index j = 0; j < values.cols(); ++j) out[a * values.cols() + j] = values(a, j);
  return out;
}

Sinogram Sinogram::from_flat(const RadonGeometry& geometry, const VectorXd& flat) {
  const auto na = static_cast<Index>(geometry.angles.size());
  const auto nd = static_cast<Index>(geometry.offsets.size());
  if (flat.size() != na * nd) throw std::invalid_argument("Sinogram::from_flat: size does not match geometry");
  Sinogram s{geometry, MatrixXd(na, nd)};
  for (Index a = 0; a < na; ++a)
    for (Index j = 0; j < nd; ++j) s.values(a, j) = flat[a * nd + j];
  return s;
}

Point physical_to_torus(double u, double v) noexcept { return {0.5 * (u + 1.0), 0.5 * (v + 1.0)}; }
Point torus_to_physical(const Point& x) noexcept { return {2.0 * x[0] - 1.0, 2.0 * x[1] - 1.0}; }

void gauss_legendre(int order, VectorXd& nodes, VectorXd& weights) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(order);
  std::vector<double> x;
  for (double z : zeros) {
    x.push_back(z);
    if (z != 0.0) x.push_back(-z);
  }
  std::sort(x.begin(), x.end());
  nodes.resize(order);
  weights.resize(order);
  for (int k = 0; k < order; ++k) {
    const double dp = boost::math::legendre_p_prime(order, x[static_cast<std::size_t>(k)]);
    nodes[k] = x[static_cast<std::size_t>(k)];
    weights[k] = 2.0 / ((1.0 - nodes[k] * nodes[k]) * dp * dp);
  }
}

SparseMatrix radon_matrix(const RadonGeometry& geometry, const SpatialGrid& grid) {
  geometry.validate();
  if (grid.dim() != 2) throw std::invalid_argument("radon_matrix: needs a 2D grid");
  VectorXd z;
  VectorXd w;
  gauss_legendre(geometry.quad_order, z, w);
  const Index n = grid.points_per_axis();
  const auto nd = static_cast<Index>(geometry.offsets.size());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(geometry.rows() * geometry.quad_order * 4));
  for (std::size_t a = 0; a < geometry.angles.size(); ++a) {
    const double th = geometry.angles[a];
    const double nx = std::cos(th), ny = std::sin(th);
    const double dx = -ny, dy = nx;
    for (Index j = 0; j < nd; ++j) {
      const double s = geometry.offsets[static_cast<std::size_t>(j)];
      const double half = std::sqrt(std::max(0.0, 1.0 - s * s));
      const Index row = static_cast<Index>(a) * nd + j;
      for (int q = 0; q < geometry.quad_order; ++q) {
        const double t = half * z[q];
        const double weight = half * w[q];
        const Point x = physical_to_torus(s * nx + t * dx, s * ny + t * dy);
        const double g0 = x[0] * static_cast<double>(n);
        const double g1 = x[1] * static_cast<double>(n);
        const double f0 = std::floor(g0), f1 = std::floor(g1);
        const double r0 = g0 - f0, r1 = g1 - f1;
        const Index i0 = ((static_cast<Index>(f0) % n) + n) % n;
        const Index i1 = ((static_cast<Index>(f1) % n) + n) % n;
        const Index j0 = (i0 + 1) % n;
        const Index j1 = (i1 + 1) % n;
        triplets.emplace_back(row, grid.flat_index(i0, i1), weight * (1 - r0) * (1 - r1));
        triplets.emplace_back(row, grid.flat_index(j0, i1), weight * r0 * (1 - r1));
        triplets.emplace_back(row, grid.flat_index(i0, j1), weight * (1 - r0) * r1);
        triplets.emplace_back(row, grid.flat_index(j0, j1), weight * r0 * r1);
      }
    }
  }
  SparseMatrix r(geometry.rows(), grid.size());
  r.setFromTriplets(triplets.begin(), triplets.end());
  r.makeCompressed();
  return r;
}

Sinogram radon_forward(const FieldSample& field, const RadonGeometry& geometry) {
  return Sinogram::from_flat(geometry, radon_matrix(geometry, field.grid) * field.values);
}

FieldSample radon_adjoint(const Sinogram& sinogram, const SpatialGrid& grid) {
  return {grid, radon_matrix(sinogram.geometry, grid).transpose() * sinogram.flattened()};
}

FieldSample fbp_reconstruct(const Sinogram& sinogram, const SpatialGrid& grid) {
  const RadonGeometry& g = sinogram.geometry;
  g.validate();
  if (grid.dim() != 2) throw std::invalid_argument("fbp_reconstruct: needs a 2D grid");
  if (g.angles.size() < 2) throw std::invalid_argument("fbp_reconstruct: needs at least two angles");
  const auto nd = static_cast<Index>(g.offsets.size());
  if (nd < 2) throw std::invalid_argument("fbp_reconstruct: needs at least two detectors");
  const double tau = g.offsets[1] - g.offsets[0];
  for (Index j = 2; j < nd; ++j) {
    if (std::abs(g.offsets[static_cast<std::size_t>(j)] - g.offsets[static_cast<std::size_t>(j - 1)] - tau) > 1e-9 * tau) {
      throw std::invalid_argument("fbp_reconstruct: detector offsets must be equispaced");
    }
  }
  const double dtheta = (g.angles.back() - g.angles.front()) / static_cast<double>(g.angles.size() - 1);

  // Ram-Lak kernel times tau.
  VectorXd h(2 * nd - 1);
  for (Index m = -(nd - 1); m <= nd - 1; ++m) {
    double v = 0.0;
    if (m == 0) v = 1.0 / (4.0 * tau * tau);
    else if (m % 2 != 0) v = -1.0 / (static_cast<double>(m * m) * kPi * kPi * tau * tau);
    h[m + nd - 1] = v * tau;
  }
  MatrixXd filtered(sinogram.values.rows(), nd);
  for (Index a = 0; a < sinogram.values.rows(); ++a)
    for (Index j = 0; j < nd; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < nd; ++k) acc += h[j - k + nd - 1] * sinogram.values(a, k);
      filtered(a, j) = acc;
    }

  FieldSample out{grid, VectorXd::Zero(grid.size())};
  const double s0 = g.offsets.front();
  for (Index i = 0; i < grid.size(); ++i) {
    const Point p = torus_to_physical(grid.node(i));
    if (p[0] * p[0] + p[1] * p[1] > 1.0) continue;
    double acc = 0.0;
    for (std::size_t a = 0; a < g.angles.size(); ++a) {
      const double s = p[0] * std::cos(g.angles[a]) + p[1] * std::sin(g.angles[a]);
      const double pos = (s - s0) / tau;
      const double fl = std::floor(pos);
      const auto k = static_cast<Index>(fl);
      const double r = pos - fl;
      double val = 0.0;
      if (k >= 0 && k < nd) val += (1.0 - r) * filtered(static_cast<Index>(a), k);
      if (k + 1 >= 0 && k + 1 < nd) val += r * filtered(static_cast<Index>(a), k + 1);
      acc += val;
    }
    out.values[i] = acc * dtheta;
  }
  return out;
}

bool disks_overlap(const Disk& a, const Disk& b) noexcept {
  const double du = a.u - b.u, dv = a.v - b.v;
  const double rr = a.radius + b.radius;
  return du * du + dv * dv < rr * rr;
}

FieldSample rasterize_disks(const std::vector<Disk>& disks, const SpatialGrid& grid, double value) {
  FieldSample f{grid, VectorXd::Zero(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const Point p = torus_to_physical(grid.node(i));
    for (const Disk& d : disks) {
      const double du = p[0] - d.u, dv = p[1] - d.v;
      if (du * du + dv * dv <= d.radius * d.radius) {
        f.values[i] = value;
        break;
      }
    }
  }
  return f;
}

Phantom generate_disk_phantom(const RngSeed& seed, const SpatialGrid& grid, const PhantomConfig& config) {
  if (grid.dim() != 2) throw std::invalid_argument("generate_disk_phantom: needs a 2D grid");
  if (!(config.min_radius > 0.0) || !(config.max_radius < 0.5) || config.min_radius > config.max_radius) {
    throw std::invalid_argument("generate_disk_phantom: radius range must lie in (0, 0.5)");
  }
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> centre(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(config.min_radius, config.max_radius);
  Phantom ph;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    Disk d;
    d.u = centre(engine);
    d.v = centre(engine);
    d.radius = radius(engine);
    if (std::hypot(d.u, d.v) + d.radius > 1.0) continue;
    const bool clash = std::any_of(ph.disks.begin(), ph.disks.end(), [&](const Disk& o) { return disks_overlap(d, o); });
    if (!clash) ph.disks.push_back(d);
  }
  ph.field = rasterize_disks(ph.disks, grid, config.value);
  return ph;
}

VectorXd add_noise(const VectorXd& y_clean, NoiseModel& model, const RngSeed& seed) {
  if (!(model.relative_level >= 0.0)) throw std::invalid_argument("add_noise: relative level must be non-negative");
  const double norm = y_clean.norm();
  if (norm == 0.0) throw std::domain_error("add_noise: clean signal is zero, relative noise is undefined");
  model.sigma_noise = model.relative_level * norm;
  if (model.relative_level == 0.0) return y_clean;
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd y = y_clean;
  for (Index k = 0; k < y.size(); ++k) y[k] += model.sigma_noise * normal(engine);
  return y;
}

VectorXd sampling_forward(const FieldSample& field, const std::vector<Index>& indices) {
  VectorXd out(static_cast<Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index i = indices[k];
    if (i < 0 || i >= field.values.size()) throw std::out_of_range("sampling_forward: index " + std::to_string(i) + " out of range");
    out[static_cast<Index>(k)] = field.values[i];
  }
  return out;
}

SparseMatrix selection_matrix(const std::vector<Index>& indices, Index field_size) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= field_size) throw std::out_of_range("selection_matrix: index out of range");
    t.emplace_back(static_cast<Index>(k), indices[k], 1.0);
  }
  SparseMatrix m(static_cast<Index>(indices.size()), field_size);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::Array<bool, Eigen::Dynamic, 1> disk_mask(const SpatialGrid& grid) {
  Eigen::Array<bool, Eigen::Dynamic, 1> m(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Point p = torus_to_physical(grid.node(i));
    m[i] = p[0] * p[0] + p[1] * p[1] <= 1.0;
  }
  return m;
}

}  // namespace pdoprior
