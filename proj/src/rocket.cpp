#include "drocks/rocket.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "drocks/error.hpp"
#include "drocks/rng.hpp"

namespace drocks {

namespace {

constexpr std::size_t candidate_lengths[] = {7, 9, 11};

void check_fits(std::size_t n, const kernel& k) {
  std::size_t span_needed = k.receptive_field();
  std::size_t padded = n + (k.padding ? (k.length - 1) * k.dilation : 0);
  if (k.length == 0 || k.weights.size() != k.length || k.dilation == 0) {
    throw error(errc::invalid_input, "malformed kernel");
  }
  if (span_needed > padded) {
    throw error(errc::invalid_input,
                "kernel receptive field " + std::to_string(span_needed) +
                    " exceeds input length " + std::to_string(padded));
  }
}

std::size_t left_pad(const kernel& k) {
  return k.padding ? ((k.length - 1) * k.dilation) / 2 : 0;
}

std::size_t output_length(std::size_t n, const kernel& k) {
  std::size_t total = (k.length - 1) * k.dilation;
  return k.padding ? n : n - total;
}

// Shared by convolve and ppv_of_convolution; calls emit(j, value) for every
// output position in order.
template <typename Emit>
void slide(std::span<const double> x, const kernel& k, Emit&& emit) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(left_pad(k));
  const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(k.dilation);
  const std::size_t out_len = output_length(x.size(), k);
  for (std::size_t j = 0; j < out_len; ++j) {
    double acc = k.bias;
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(j) - pad;
    for (std::size_t i = 0; i < k.length; ++i, pos += d) {
      if (pos >= 0 && pos < n) acc += k.weights[i] * x[static_cast<std::size_t>(pos)];
    }
    emit(j, acc);
  }
}

}  // namespace

kernel generate_kernel(kernel_seed seed, std::size_t series_len) {
  if (series_len < min_series_length) {
    throw error(errc::invalid_input, "series length " + std::to_string(series_len) +
                                         " is below the minimum of " +
                                         std::to_string(min_series_length));
  }
  rng gen(derive_seed({seed, static_cast<std::uint64_t>(series_len)}));

  std::size_t admissible = 0;
  for (auto len : candidate_lengths) admissible += (len <= series_len) ? 1 : 0;

  kernel k;
  k.seed = seed;
  k.length = candidate_lengths[gen.below(admissible)];

  k.weights.resize(k.length);
  for (auto& w : k.weights) w = gen.normal();
  double mean = std::accumulate(k.weights.begin(), k.weights.end(), 0.0) /
                static_cast<double>(k.length);
  for (auto& w : k.weights) w -= mean;

  k.bias = gen.uniform(-1.0, 1.0);

  double exponent_hi = std::log2(static_cast<double>(series_len - 1) /
                                 static_cast<double>(k.length - 1));
  double u = gen.uniform(0.0, std::max(0.0, exponent_hi));
  k.dilation = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::exp2(u))));
  // floor(2^u) < 2^hi, but guard against rounding at the boundary.
  while (k.dilation > 1 && (k.length - 1) * k.dilation > series_len - 1) --k.dilation;

  k.padding = gen.bernoulli_half();
  return k;
}

kernel_set generate_kernels(std::span<const kernel_seed> seeds, std::size_t series_len) {
  kernel_set out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(generate_kernel(s, series_len));
  return out;
}

std::vector<kernel_seed> seeds_of(const kernel_set& kernels) {
  std::vector<kernel_seed> out;
  out.reserve(kernels.size());
  for (const auto& k : kernels) out.push_back(k.seed);
  return out;
}

std::vector<double> convolve(std::span<const double> x, const kernel& k) {
  check_fits(x.size(), k);
  std::vector<double> out(output_length(x.size(), k));
  slide(x, k, [&](std::size_t j, double v) { out[j] = v; });
  return out;
}

double ppv(std::span<const double> feature_map) {
  if (feature_map.empty()) throw error(errc::invalid_input, "ppv of an empty sequence");
  auto positive = std::count_if(feature_map.begin(), feature_map.end(),
                                [](double v) { return v > 0.0; });
  return static_cast<double>(positive) / static_cast<double>(feature_map.size());
}

double ppv_of_convolution(std::span<const double> x, const kernel& k) {
  check_fits(x.size(), k);
  std::size_t positive = 0;
  slide(x, k, [&](std::size_t, double v) { positive += (v > 0.0) ? 1 : 0; });
  return static_cast<double>(positive) / static_cast<double>(output_length(x.size(), k));
}

feature_matrix transform(std::span<const time_series> series, const kernel_set& kernels) {
  feature_matrix out(series.size(), kernels.size());
  if (series.empty()) return out;

  const std::size_t len = series.front().values.size();
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].values.size() != len) {
      throw error(errc::invalid_input, "series " + std::to_string(i) + " has length " +
                                           std::to_string(series[i].values.size()) +
                                           ", expected " + std::to_string(len));
    }
    out.labels()[i] = series[i].label;
  }
  for (const auto& k : kernels) check_fits(len, k);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = out.row(i);
      for (std::size_t j = 0; j < kernels.size(); ++j) {
        row[j] = ppv_of_convolution(series[i].values, kernels[j]);
      }
    }
  };

  const double cost = static_cast<double>(series.size()) * static_cast<double>(kernels.size()) *
                      static_cast<double>(len) * 9.0;
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t threads =
      cost < 2e7 ? 1 : std::min<std::size_t>(hw, series.size());
  if (threads <= 1) {
    work(0, series.size());
    return out;
  }
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (series.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      std::size_t b = t * chunk;
      std::size_t e = std::min(series.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return out;
}

}  // namespace drocks
