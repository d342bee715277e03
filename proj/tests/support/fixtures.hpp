#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "drocks/data.hpp"
#include "drocks/rocket.hpp"

namespace fixture {

/// Series whose class is the sign of its mean: label 1 series sit around
/// +offset, label 0 around -offset, with unit Gaussian noise.
inline std::vector<drocks::time_series> sign_of_mean(std::size_t count, std::size_t length,
                                                     std::uint64_t seed, double offset = 0.8) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<drocks::time_series> out;
  for (std::size_t i = 0; i < count; ++i) {
    drocks::time_series s;
    s.label = static_cast<int>(i % 2);
    double centre = s.label == 1 ? offset : -offset;
    for (std::size_t t = 0; t < length; ++t) s.values.push_back(centre + noise(gen));
    out.push_back(std::move(s));
  }
  return out;
}

inline drocks::dataset sign_of_mean_dataset(std::size_t train, std::size_t test, std::size_t length,
                                            std::uint64_t seed) {
  drocks::dataset ds;
  ds.name = "SignOfMean";
  ds.train = sign_of_mean(train, length, seed);
  ds.test = sign_of_mean(test, length, seed + 1);
  ds.class_count = 2;
  ds.series_length = length;
  ds.original_labels = {"0", "1"};
  return ds;
}

/// Three classes separated by level (-1, 0, +1) and slope.
inline std::vector<drocks::time_series> three_levels(std::size_t count, std::size_t length,
                                                     std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::vector<drocks::time_series> out;
  for (std::size_t i = 0; i < count; ++i) {
    drocks::time_series s;
    s.label = static_cast<int>(i % 3);
    for (std::size_t t = 0; t < length; ++t) {
      double trend = (s.label - 1) * (static_cast<double>(t) / static_cast<double>(length));
      s.values.push_back(static_cast<double>(s.label - 1) + 2.0 * trend + noise(gen));
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<double> random_series(std::mt19937_64& gen, std::size_t length) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(length);
  for (auto& x : v) x = d(gen);
  return v;
}

inline std::vector<drocks::client_split> split_evenly(const drocks::dataset& ds, std::size_t n,
                                                      std::uint64_t seed = 7) {
  return drocks::partition_iid(ds, n, seed).clients;
}

}  // namespace fixture
