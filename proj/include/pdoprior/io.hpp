#ifndef PDOPRIOR_IO_HPP
#define PDOPRIOR_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdoprior/torus.hpp"

namespace pdoprior {

/**
 * Binary tensor file, little-endian:
 *   "IPT1" | u64 rank | u64 dtype (0 = float64, 1 = complex128) | rank x u64 dims | data
 * Data is row-major; complex entries are stored as (re, im) pairs.
 */
struct TensorFile {
  enum class DType : std::uint64_t { Float64 = 0, Complex128 = 1 };

  DType dtype = DType::Float64;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;  // row-major; interleaved (re, im) for complex

  std::uint64_t element_count() const;
  MatrixXd as_real_matrix() const;
  MatrixXcd as_complex_matrix() const;
};

void write_tensor(const std::filesystem::path& path, const MatrixXd& values);
void write_tensor(const std::filesystem::path& path, const MatrixXcd& values);
void write_tensor(const std::filesystem::path& path, const VectorXd& values);
/// Writes with explicit row-major dims; `values` is already flattened in that order.
void write_tensor(const std::filesystem::path& path, const std::vector<std::uint64_t>& dims,
                  const std::vector<double>& values, TensorFile::DType dtype);
TensorFile read_tensor(const std::filesystem::path& path);

/// One row per grid node: coordinate columns (x or x0,x1) followed by the named columns.
void write_field_csv(const std::filesystem::path& path, const SpatialGrid& grid,
                     const std::vector<std::string>& names, const std::vector<VectorXd>& columns);

/// Plain table with a header row.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                     const std::vector<VectorXd>& columns);

/// Pretty-printed JSON with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

nlohmann::json band_to_json(const FrequencyBand& band);
nlohmann::json grid_to_json(const SpatialGrid& grid);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace pdoprior

#endif  // PDOPRIOR_IO_HPP
