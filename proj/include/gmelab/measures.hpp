#pragma once
// Discrete probability measures, the synthetic Gaussian-mixture generator,
// the latent sampler and dataset persistence.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gmelab/rng.hpp"
#include "gmelab/tensor.hpp"

namespace gmelab::measures {

inline constexpr int kUnassigned = -1;

// Weighted point cloud.  Construction validates the invariants: weights
// nonnegative and summing to 1 within 1e-12, every coordinate finite.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(nd::Tensor points, std::vector<double> weights);

  // Uniform weights 1/n.  An empty point set gives an empty measure.
  static EmpiricalMeasure uniform(nd::Tensor points);

  std::size_t size() const { return points_.rows(); }
  std::size_t dim() const { return points_.cols(); }
  bool empty() const { return points_.rows() == 0; }
  bool is_uniform() const;

  const nd::Tensor& points() const { return points_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> point(std::size_t i) const { return points_.row(i); }

 private:
  nd::Tensor points_;
  std::vector<double> weights_;
};

struct GaussianMixtureSpec {
  std::size_t ambient_dim = 2;
  std::size_t num_modes = 1;
  nd::Tensor centers;                // num_modes x ambient_dim
  double var_leading = 0.3;          // first two coordinates
  double var_trailing = 0.003;       // every coordinate after those
  std::vector<double> mode_weights;  // simplex

  void validate() const;

  // 3 x 3 grid {-3,0,3}^2.
  static GaussianMixtureSpec nine_modes(std::size_t ambient_dim);
  // 4 x 3 grid {-4.5,-1.5,1.5,4.5} x {-3,0,3}.
  static GaussianMixtureSpec twelve_modes(std::size_t ambient_dim);
  // Uniform weights over the given planar centers, zero-padded to ambient_dim.
  static GaussianMixtureSpec from_planar_centers(std::size_t ambient_dim,
                                                 const std::vector<std::array<double, 2>>& centers,
                                                 double var_leading = 0.3, double var_trailing = 0.003);
};

struct LabeledSample {
  EmpiricalMeasure measure;
  std::vector<int> labels;
};

LabeledSample sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng);

// n standard-normal points in R^d with uniform weights.
EmpiricalMeasure sample_latent(std::size_t d, std::size_t n, Rng& rng);

// Nearest center in the first two coordinates, or kUnassigned when farther
// than radius_multiplier * sqrt(var_leading).  Ties go to the lower index.
std::vector<int> assign_mode(const nd::Tensor& points, const GaussianMixtureSpec& spec,
                             double radius_multiplier);

// Dataset file:
//
//   "GMDS"            4 bytes magic
//   u32  version (= 1)
//   u64  n
//   u64  dim
//   f64  points[n * dim]       row-major
//   u32  labels[n]             optional; 0xffffffff marks an unassigned point
//
// The label block is present iff exactly 4n bytes follow the payload.
inline constexpr std::uint32_t kDatasetVersion = 1;

struct Dataset {
  EmpiricalMeasure measure;
  std::optional<std::vector<int>> labels;
};

void write_dataset(std::ostream& out, const nd::Tensor& points, const std::vector<int>* labels = nullptr);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const nd::Tensor& points,
                  const std::vector<int>* labels = nullptr);
Dataset load_dataset(const std::filesystem::path& path);

// Header `x0,...,x{D-1},label`; rows without labels get -1.
void write_csv(std::ostream& out, const nd::Tensor& points, const std::vector<int>* labels = nullptr);
void save_csv(const std::filesystem::path& path, const nd::Tensor& points,
              const std::vector<int>* labels = nullptr);

}  // namespace gmelab::measures
