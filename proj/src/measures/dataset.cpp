#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "gmelab/binary_io.hpp"
#include "gmelab/csv.hpp"
#include "gmelab/measures.hpp"

namespace gmelab::measures {

namespace {

constexpr std::uint32_t kNoLabel = 0xffffffffu;

void check_labels(const nd::Tensor& points, const std::vector<int>* labels) {
  if (labels && labels->size() != points.rows()) {
    throw DimensionError("dataset: " + std::to_string(labels->size()) + " labels for " +
                         std::to_string(points.rows()) + " points");
  }
}

}  // namespace

void write_dataset(std::ostream& out, const nd::Tensor& points, const std::vector<int>* labels) {
  check_labels(points, labels);
  io::put_magic(out, "GMDS");
  io::put_le<std::uint32_t>(out, kDatasetVersion);
  io::put_le<std::uint64_t>(out, points.rows());
  io::put_le<std::uint64_t>(out, points.cols());
  for (double v : points.values()) io::put_f64(out, v);
  if (labels) {
    for (int l : *labels) io::put_le<std::uint32_t>(out, l < 0 ? kNoLabel : static_cast<std::uint32_t>(l));
  }
}

Dataset read_dataset(std::istream& in) {
  io::expect_magic(in, "GMDS");
  const auto version = io::get_le<std::uint32_t>(in, "dataset version");
  if (version != kDatasetVersion) throw FormatError("dataset: unsupported version " + std::to_string(version));
  const auto n = io::get_le<std::uint64_t>(in, "dataset n");
  const auto dim = io::get_le<std::uint64_t>(in, "dataset dim");
  if (dim == 0 && n != 0) throw FormatError("dataset: zero dimension");
  if (dim != 0 && n > (std::uint64_t{1} << 40) / dim) throw FormatError("dataset: implausible size");

  nd::Tensor pts(n, dim);
  for (double& v : pts.values()) v = io::get_f64(in, "dataset payload");

  Dataset ds;
  const std::vector<char> rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!rest.empty()) {
    if (rest.size() != 4 * n) {
      throw FormatError("dataset: " + std::to_string(rest.size()) + " trailing bytes; a label block needs " +
                        std::to_string(4 * n));
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t v = 0;
      for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(rest[4 * i + b])) << (8 * b);
      if (v != kNoLabel && v > 0x7fffffffu) throw FormatError("dataset: label out of range");
      labels[i] = v == kNoLabel ? kUnassigned : static_cast<int>(v);
    }
    ds.labels = std::move(labels);
  }
  try {
    ds.measure = EmpiricalMeasure::uniform(std::move(pts));
  } catch (const NumericError& e) {
    throw FormatError(std::string("dataset: ") + e.what());
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const nd::Tensor& points, const std::vector<int>* labels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_dataset(out, points, labels);
  if (!out) throw FormatError("write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_dataset(in);
}

void write_csv(std::ostream& out, const nd::Tensor& points, const std::vector<int>* labels) {
  check_labels(points, labels);
  std::vector<std::string> cells;
  for (std::size_t j = 0; j < points.cols(); ++j) cells.push_back("x" + std::to_string(j));
  cells.push_back("label");
  csv::write_row(out, cells);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    cells.clear();
    for (double v : points.row(i)) cells.push_back(csv::format_double(v));
    cells.push_back(std::to_string(labels ? (*labels)[i] : kUnassigned));
    csv::write_row(out, cells);
  }
}

void save_csv(const std::filesystem::path& path, const nd::Tensor& points, const std::vector<int>* labels) {
  auto out = csv::open_for_write(path);
  write_csv(out, points, labels);
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace gmelab::measures
