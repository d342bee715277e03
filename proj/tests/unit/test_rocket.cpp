#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "drocks/error.hpp"
#include "drocks/rocket.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace drocks;

namespace {

kernel fixture_kernel(std::vector<double> w, std::size_t dilation, bool padding, double bias = 0) {
  kernel k;
  k.length = w.size();
  k.weights = std::move(w);
  k.dilation = dilation;
  k.padding = padding;
  k.bias = bias;
  return k;
}

}  // namespace

TEST_SUITE("rocket") {
  TEST_CASE("generate_kernel is a pure function of (seed, T)") {
    auto a = generate_kernel(42, 100);
    auto b = generate_kernel(42, 100);
    CHECK(a == b);
    CHECK(a.seed == 42);
    CHECK(generate_kernel(43, 100) != a);
  }

  TEST_CASE("generated kernels are mean-centered and fit the series") {
    for (std::size_t T : {8u, 9u, 10u, 15u, 24u, 150u, 512u}) {
      for (kernel_seed s = 0; s < 300; ++s) {
        auto k = generate_kernel(s, T);
        double mean = std::accumulate(k.weights.begin(), k.weights.end(), 0.0) /
                      static_cast<double>(k.length);
        CHECK(std::abs(mean) < 1e-12);
        CHECK((k.length == 7 || k.length == 9 || k.length == 11));
        CHECK(k.length <= T);
        CHECK(k.dilation >= 1);
        CHECK((k.length - 1) * k.dilation <= T - 1);
        CHECK(k.bias >= -1.0);
        CHECK(k.bias < 1.0);
      }
    }
  }

  TEST_CASE("length histogram over a seed sweep is uniform on {7, 9, 11}") {
    std::map<std::size_t, int> hist;
    for (kernel_seed s = 0; s < 10000; ++s) hist[generate_kernel(s, 150).length]++;
    REQUIRE(hist.size() == 3);
    for (auto [len, count] : hist) {
      CHECK(std::abs(count / 10000.0 - 1.0 / 3.0) < 0.03);
    }
  }

  TEST_CASE("padding is a fair coin and dilation spans its range") {
    int padded = 0;
    std::size_t max_dilation = 0;
    for (kernel_seed s = 0; s < 4000; ++s) {
      auto k = generate_kernel(s, 150);
      padded += k.padding ? 1 : 0;
      max_dilation = std::max(max_dilation, k.dilation);
    }
    CHECK(std::abs(padded / 4000.0 - 0.5) < 0.03);
    CHECK(max_dilation >= 8);
  }

  TEST_CASE("series that are too short are rejected") {
    CHECK_THROWS_AS(generate_kernel(1, 6), error);
    CHECK_THROWS_AS(generate_kernel(1, 7), error);
    CHECK_NOTHROW(generate_kernel(1, 8));
  }

  TEST_CASE("convolve hand examples") {
    std::vector<double> x = {1, 2, 3, 4};
    auto k = fixture_kernel({1, 1}, 1, false);
    CHECK(convolve(x, k) == std::vector<double>{3, 5, 7});

    std::vector<double> x5 = {1, 2, 3, 4, 5};
    auto k2 = fixture_kernel({1, -1}, 2, false);
    CHECK(convolve(x5, k2) == std::vector<double>{-2, -2, -2});
  }

  TEST_CASE("padded convolution keeps the input length") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    auto k = fixture_kernel({1, 0, -1}, 1, true);
    // padded: 0 1 2 3 4 5 0
    CHECK(convolve(x, k) == std::vector<double>{-2, -2, -2, -2, 4});
  }

  TEST_CASE("receptive field larger than the input is rejected") {
    std::vector<double> x = {1, 2, 3};
    CHECK_THROWS_AS(convolve(x, fixture_kernel({1, 1, 1}, 2, false)), error);
  }

  TEST_CASE("convolve matches the naive oracle on random instances") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 1000; ++trial) {
      std::size_t T = 8 + gen() % 200;
      auto x = fixture::random_series(gen, T);
      auto k = generate_kernel(gen(), T);
      CHECK(convolve(x, k) == oracle::convolve(x, k));
    }
  }

  TEST_CASE("ppv examples") {
    CHECK(ppv(std::vector<double>{-1, -2, -3}) == 0.0);
    CHECK(ppv(std::vector<double>{1, 2, 3}) == 1.0);
    CHECK(ppv(std::vector<double>{1, -1, 0, 2}) == 0.5);
    CHECK_THROWS_AS(ppv(std::vector<double>{}), error);
  }

  TEST_CASE("transform shapes and composition") {
    std::mt19937_64 gen(3);
    std::vector<time_series> one = {{fixture::random_series(gen, 30), 1}};
    auto empty = transform(one, {});
    CHECK(empty.rows() == 1);
    CHECK(empty.cols() == 0);

    auto k = generate_kernel(5, 30);
    auto fm = transform(one, {k});
    REQUIRE(fm.rows() == 1);
    REQUIRE(fm.cols() == 1);
    CHECK(fm.at(0, 0) == ppv(convolve(one[0].values, k)));
    CHECK(fm.labels()[0] == 1);
  }

  TEST_CASE("transform equals element-wise oracle recomputation") {
    std::mt19937_64 gen(5);
    std::vector<time_series> data;
    for (int i = 0; i < 20; ++i) data.push_back({fixture::random_series(gen, 64), i % 2});
    std::vector<kernel_seed> seeds(50);
    std::iota(seeds.begin(), seeds.end(), 1000);
    auto ks = generate_kernels(seeds, 64);
    auto fm = transform(data, ks);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t j = 0; j < ks.size(); ++j) {
        CHECK(fm.at(i, j) == oracle::ppv(oracle::convolve(data[i].values, ks[j])));
      }
    }
  }

  TEST_CASE("threaded transform equals the single-threaded result") {
    std::mt19937_64 gen(9);
    std::vector<time_series> data;
    for (int i = 0; i < 300; ++i) data.push_back({fixture::random_series(gen, 256), 0});
    std::vector<kernel_seed> seeds(100);
    std::iota(seeds.begin(), seeds.end(), 7);
    auto ks = generate_kernels(seeds, 256);
    auto big = transform(data, ks);  // above the threading threshold
    for (std::size_t i = 0; i < data.size(); i += 37) {
      for (std::size_t j = 0; j < ks.size(); ++j) {
        CHECK(big.at(i, j) == ppv_of_convolution(data[i].values, ks[j]));
      }
    }
  }

  TEST_CASE("transform rejects ragged input") {
    std::vector<time_series> data = {{std::vector<double>(20, 1.0), 0},
                                     {std::vector<double>(21, 1.0), 0}};
    CHECK_THROWS_AS(transform(data, {generate_kernel(1, 20)}), error);
  }

  TEST_CASE("seed round trip reproduces the feature matrix") {
    std::mt19937_64 gen(21);
    std::vector<time_series> data;
    for (int i = 0; i < 10; ++i) data.push_back({fixture::random_series(gen, 40), 0});
    std::vector<kernel_seed> seeds;
    for (int i = 0; i < 64; ++i) seeds.push_back(gen());
    auto original = generate_kernels(seeds, 40);
    auto rebuilt = generate_kernels(seeds_of(original), 40);
    CHECK(rebuilt == original);
    CHECK(transform(data, rebuilt) == transform(data, original));
  }
}
