#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace drocks {

using label_t = int;

/// A univariate series and its encoded class (0..C-1).
struct time_series {
  std::vector<double> values;
  label_t label = 0;
};

/// A kernel travels on the wire as its seed only; everything else is
/// regenerated from (seed, series length).
using kernel_seed = std::uint64_t;

struct kernel {
  kernel_seed seed = 0;
  std::size_t length = 0;
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t dilation = 1;
  bool padding = false;

  std::size_t receptive_field() const { return (length - 1) * dilation + 1; }

  friend bool operator==(const kernel&, const kernel&) = default;
};

using kernel_set = std::vector<kernel>;

/// Dense row-major M x K matrix of features plus the label of each row.
class feature_matrix {
 public:
  feature_matrix() = default;
  feature_matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0), labels_(rows, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

  std::span<const double> values() const { return values_; }
  std::vector<label_t>& labels() { return labels_; }
  const std::vector<label_t>& labels() const { return labels_; }

  friend bool operator==(const feature_matrix&, const feature_matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<label_t> labels_;
};

inline constexpr std::size_t min_series_length = 8;

/// Draws one kernel with the ROCKET distributions:
///   length   uniform over {7, 9, 11} (lengths longer than the series are excluded)
///   weights  i.i.d. N(0, 1), then mean-centered
///   bias     uniform on [-1, 1)
///   dilation floor(2^u), u uniform on [0, log2((T - 1) / (length - 1)))
///   padding  fair coin
/// The stream is rng(derive_seed({seed, series_len})) and the draws happen in
/// exactly that order, so any implementation following it regenerates the
/// same kernel from the seed.
kernel generate_kernel(kernel_seed seed, std::size_t series_len);

kernel_set generate_kernels(std::span<const kernel_seed> seeds, std::size_t series_len);

std::vector<kernel_seed> seeds_of(const kernel_set& kernels);

/// Sliding dot product: out[j] = bias + sum_i weights[i] * x[j + i * dilation].
/// With padding the input is zero-extended by ((L - 1) * d) / 2 on the left and
/// the remainder on the right, so the output has the input's length.
std::vector<double> convolve(std::span<const double> x, const kernel& k);

/// Fraction of strictly positive entries.
double ppv(std::span<const double> feature_map);

/// ppv(convolve(x, k)) without materializing the feature map.
double ppv_of_convolution(std::span<const double> x, const kernel& k);

/// rows[i][j] = ppv(convolve(series[i], kernels[j])). Large inputs are split
/// across threads by row; the result does not depend on the split.
feature_matrix transform(std::span<const time_series> series, const kernel_set& kernels);

}  // namespace drocks
