#ifndef PDOPRIOR_RADON_HPP
#define PDOPRIOR_RADON_HPP

#include <vector>

#include <Eigen/SparseCore>

#include "pdoprior/rng.hpp"
#include "pdoprior/torus.hpp"

namespace pdoprior {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/**
 * Parallel-beam geometry on the unit disk. The line for (theta, s) is
 * { s n + t d : |t| <= sqrt(1 - s^2) } with n = (cos theta, sin theta) and
 * d = (-sin theta, cos theta). Physical coordinates (u, v) in [-1, 1]^2 map to
 * the torus by x = ((u + 1)/2, (v + 1)/2); u runs along grid axis 0.
 */
struct RadonGeometry {
  std::vector<double> angles;
  std::vector<double> offsets;
  int quad_order = 64;

  /// n angles k * max_angle / n, k = 0..n-1, and detector-cell centres in [-1, 1].
  static RadonGeometry equispaced(int n_angles, double max_angle, int n_detectors, int quad_order);
  void validate() const;
  Index rows() const noexcept { return static_cast<Index>(angles.size() * offsets.size()); }
};

/// Values indexed (angle, offset).
struct Sinogram {
  RadonGeometry geometry;
  MatrixXd values;

  VectorXd flattened() const;  // angle-major
  static Sinogram from_flat(const RadonGeometry& geometry, const VectorXd& flat);
};

Point physical_to_torus(double u, double v) noexcept;
Point torus_to_physical(const Point& x) noexcept;

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, VectorXd& nodes, VectorXd& weights);

/// Sparse matrix of the quadrature with periodic bilinear interpolation; rows follow Sinogram::flattened.
SparseMatrix radon_matrix(const RadonGeometry& geometry, const SpatialGrid& grid);

Sinogram radon_forward(const FieldSample& field, const RadonGeometry& geometry);
/// Exact adjoint of radon_forward.
FieldSample radon_adjoint(const Sinogram& sinogram, const SpatialGrid& grid);

/// Ram-Lak filtered back-projection; zero outside the unit disk.
FieldSample fbp_reconstruct(const Sinogram& sinogram, const SpatialGrid& grid);

struct Disk {
  double u = 0.0;  // centre, physical coordinates
  double v = 0.0;
  double radius = 0.0;
};

struct PhantomConfig {
  double min_radius = 0.05;  // physical units, unit disk has radius 1
  double max_radius = 0.3;
  int max_attempts = 1000;
  double value = 1.0;
};

struct Phantom {
  FieldSample field;
  std::vector<Disk> disks;
};

bool disks_overlap(const Disk& a, const Disk& b) noexcept;

/// Greedy rejection sampling of non-overlapping disks inside the unit disk.
Phantom generate_disk_phantom(const RngSeed& seed, const SpatialGrid& grid, const PhantomConfig& config);

/// Rasterizes disks at the grid nodes.
FieldSample rasterize_disks(const std::vector<Disk>& disks, const SpatialGrid& grid, double value = 1.0);

struct NoiseModel {
  double relative_level = 0.01;
  double sigma_noise = 0.0;  // set by add_noise
};

/// y + sigma z with sigma = relative_level * ||y||_2.
VectorXd add_noise(const VectorXd& y_clean, NoiseModel& model, const RngSeed& seed);

VectorXd sampling_forward(const FieldSample& field, const std::vector<Index>& indices);
SparseMatrix selection_matrix(const std::vector<Index>& indices, Index field_size);

/// True where the node lies in the closed unit disk.
Eigen::Array<bool, Eigen::Dynamic, 1> disk_mask(const SpatialGrid& grid);

}  // namespace pdoprior

#endif  // PDOPRIOR_RADON_HPP
