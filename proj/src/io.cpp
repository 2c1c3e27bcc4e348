#include "pdoprior/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace pdoprior {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

namespace {

void put_u64(std::ofstream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("read_tensor: truncated header");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::uint64_t TensorFile::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

MatrixXd TensorFile::as_real_matrix() const {
  if (dtype != DType::Float64) throw std::invalid_argument("TensorFile: not a real tensor");
  const Index rows = dims.empty() ? 1 : static_cast<Index>(dims[0]);
  const Index cols = rows == 0 ? 0 : static_cast<Index>(element_count()) / rows;
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
  return m;
}

MatrixXcd TensorFile::as_complex_matrix() const {
  if (dtype != DType::Complex128) throw std::invalid_argument("TensorFile: not a complex tensor");
  const Index rows = dims.empty() ? 1 : static_cast<Index>(dims[0]);
  const Index cols = rows == 0 ? 0 : static_cast<Index>(element_count()) / rows;
  MatrixXcd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const auto k = static_cast<std::size_t>(2 * (i * cols + j));
      m(i, j) = Complex(data[k], data[k + 1]);
    }
  return m;
}

void write_tensor(const std::filesystem::path& path, const std::vector<std::uint64_t>& dims,
                  const std::vector<double>& values, TensorFile::DType dtype) {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  const std::uint64_t expected = dtype == TensorFile::DType::Complex128 ? 2 * n : n;
  if (values.size() != expected) throw std::invalid_argument("write_tensor: data size does not match dims");
  auto out = open_out(path);
  out.write("IPT1", 4);
  put_u64(out, dims.size());
  put_u64(out, static_cast<std::uint64_t>(dtype));
  for (auto d : dims) put_u64(out, d);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_tensor: write failed for " + path.string());
}

void write_tensor(const std::filesystem::path& path, const MatrixXd& values) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.rows(); ++i)
    for (Index j = 0; j < values.cols(); ++j) flat.push_back(values(i, j));
  write_tensor(path, {static_cast<std::uint64_t>(values.rows()), static_cast<std::uint64_t>(values.cols())}, flat,
               TensorFile::DType::Float64);
}

void write_tensor(const std::filesystem::path& path, const MatrixXcd& values) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(2 * values.size()));
  for (Index i = 0; i < values.rows(); ++i)
    for (Index j = 0; j < values.cols(); ++j) {
      flat.push_back(values(i, j).real());
      flat.push_back(values(i, j).imag());
    }
  write_tensor(path, {static_cast<std::uint64_t>(values.rows()), static_cast<std::uint64_t>(values.cols())}, flat,
               TensorFile::DType::Complex128);
}

void write_tensor(const std::filesystem::path& path, const VectorXd& values) {
  write_tensor(path, {static_cast<std::uint64_t>(values.size())}, std::vector<double>(values.begin(), values.end()),
               TensorFile::DType::Float64);
}

TensorFile read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "IPT1", 4) != 0) throw std::runtime_error("read_tensor: bad magic in " + path.string());
  TensorFile t;
  const std::uint64_t rank = get_u64(in);
  if (rank > 16) throw std::runtime_error("read_tensor: implausible rank");
  const std::uint64_t dtype = get_u64(in);
  if (dtype > 1) throw std::runtime_error("read_tensor: unknown dtype");
  t.dtype = static_cast<TensorFile::DType>(dtype);
  for (std::uint64_t k = 0; k < rank; ++k) t.dims.push_back(get_u64(in));
  const std::uint64_t n = t.element_count() * (t.dtype == TensorFile::DType::Complex128 ? 2 : 1);
  t.data.resize(n);
  in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("read_tensor: truncated data in " + path.string());
  return t;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

void write_csv_rows(std::ofstream& out, const std::vector<VectorXd>& columns, Index rows,
                    const std::function<void(std::ofstream&, Index)>& prefix) {
  for (Index i = 0; i < rows; ++i) {
    bool first = true;
    if (prefix) {
      prefix(out, i);
      first = false;
    }
    for (const auto& c : columns) {
      if (!first) out << ',';
      out << format_double(c[i]);
      first = false;
    }
    out << '\n';
  }
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const SpatialGrid& grid,
                     const std::vector<std::string>& names, const std::vector<VectorXd>& columns) {
  if (names.size() != columns.size()) throw std::invalid_argument("write_field_csv: names and columns differ in count");
  for (const auto& c : columns) {
    if (c.size() != grid.size()) throw std::invalid_argument("write_field_csv: column length does not match grid");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << (grid.dim() == 1 ? "x" : "x0,x1");
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  write_csv_rows(out, columns, grid.size(), [&](std::ofstream& o, Index i) {
    const Point x = grid.node(i);
    o << format_double(x[0]);
    if (grid.dim() == 2) o << ',' << format_double(x[1]);
  });
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                     const std::vector<VectorXd>& columns) {
  if (names.size() != columns.size()) throw std::invalid_argument("write_table_csv: names and columns differ in count");
  const Index rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("write_table_csv: ragged columns");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  write_csv_rows(out, columns, rows, nullptr);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << value.dump(2) << '\n';
}

nlohmann::json band_to_json(const FrequencyBand& band) {
  nlohmann::json lo = nlohmann::json::array();
  nlohmann::json hi = nlohmann::json::array();
  for (int k = 0; k < band.dim(); ++k) {
    lo.push_back(band.lo(k));
    hi.push_back(band.hi(k));
  }
  return {{"dim", band.dim()}, {"lo", lo}, {"hi", hi}, {"size", band.size()},
          {"order", "row-major, axis 0 slowest, ascending per axis"}};
}

nlohmann::json grid_to_json(const SpatialGrid& grid) {
  return {{"dim", grid.dim()}, {"points_per_axis", grid.points_per_axis()}, {"nodes", "x_i = i / N per axis, row-major"}};
}

}  // namespace pdoprior
