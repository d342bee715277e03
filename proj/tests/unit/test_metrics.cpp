#include <doctest.h>

#include <algorithm>
#include <random>

#include "drocks/error.hpp"
#include "drocks/metrics.hpp"
#include "support/oracles.hpp"

using namespace drocks;

TEST_SUITE("metrics") {
  TEST_CASE("macro-F1 hand cases") {
    std::vector<int> y = {0, 1, 0, 1};
    CHECK(macro_f1(y, y, 2) == 1.0);
    // All predicted 0: F1_0 = 2 * 0.5 * 1 / 1.5 = 2/3, F1_1 = 0.
    CHECK(macro_f1(y, std::vector<int>{0, 0, 0, 0}, 2) == doctest::Approx(0.3333).epsilon(1e-4));
    // An absent class still counts in the mean.
    CHECK(macro_f1(std::vector<int>{0, 0}, std::vector<int>{0, 0}, 3) ==
          doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(macro_f1(std::vector<int>{}, std::vector<int>{}, 2), error);
    CHECK_THROWS_AS(macro_f1(std::vector<int>{0}, std::vector<int>{2}, 2), error);
  }

  TEST_CASE("report fields") {
    auto r = evaluate(std::vector<int>{0, 0, 1, 2}, std::vector<int>{0, 1, 1, 2}, 3);
    CHECK(r.accuracy == 0.75);
    CHECK(r.support == std::vector<std::size_t>{2, 1, 1});
    CHECK(r.per_class_f1[2] == 1.0);
    CHECK(r.macro_f1 == doctest::Approx((2.0 / 3 + 2.0 / 3 + 1.0) / 3));
  }

  TEST_CASE("macro-F1 equals the confusion-matrix oracle") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 2000; ++trial) {
      int classes = 2 + static_cast<int>(gen() % 5);
      std::size_t n = 1 + gen() % 50;
      std::vector<int> truth(n), pred(n);
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = static_cast<int>(gen() % static_cast<std::uint64_t>(classes));
        pred[i] = gen() % 3 == 0 ? truth[i] : static_cast<int>(gen() % static_cast<std::uint64_t>(classes));
      }
      auto r = evaluate(truth, pred, classes);
      CHECK(r.macro_f1 == doctest::Approx(oracle::macro_f1(truth, pred, classes)).epsilon(1e-12));
      CHECK(r.macro_f1 >= 0.0);
      CHECK(r.macro_f1 <= 1.0);
      CHECK(r.accuracy == accuracy(truth, pred));
      bool all_present = std::all_of(r.support.begin(), r.support.end(), [](auto n) { return n > 0; });
      if (truth == pred && all_present) CHECK(r.macro_f1 == doctest::Approx(r.accuracy));
    }
  }

  TEST_CASE("mean ranks") {
    std::map<std::string, std::map<std::string, double>> two = {
        {"A", {{"d1", 0.9}, {"d2", 0.8}}},
        {"B", {{"d1", 0.5}, {"d2", 0.7}}},
    };
    auto r = mean_ranks(two);
    CHECK(r["A"] == 1.0);
    CHECK(r["B"] == 2.0);

    std::map<std::string, std::map<std::string, double>> tie = {
        {"A", {{"d1", 0.5}}},
        {"B", {{"d1", 0.5}}},
    };
    auto t = mean_ranks(tie);
    CHECK(t["A"] == 1.5);
    CHECK(t["B"] == 1.5);

    std::map<std::string, std::map<std::string, double>> missing = {
        {"A", {{"d1", 0.5}, {"d2", 0.1}}},
        {"B", {{"d1", 0.5}}},
    };
    CHECK_THROWS_AS(mean_ranks(missing), error);
  }

  TEST_CASE("mean ranks equal the pairwise oracle and conserve rank mass") {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 500; ++trial) {
      std::size_t methods = 2 + gen() % 4;
      std::map<std::string, std::map<std::string, double>> scores;
      for (std::size_t m = 0; m < methods; ++m) {
        for (int d = 0; d < 5; ++d) {
          // Few distinct values so ties are common.
          scores["m" + std::to_string(m)]["d" + std::to_string(d)] =
              static_cast<double>(gen() % 4) / 4.0;
        }
      }
      auto got = mean_ranks(scores);
      auto want = oracle::mean_ranks(scores);
      double mass = 0;
      for (const auto& [m, v] : got) {
        CHECK(v == doctest::Approx(want[m]).epsilon(1e-12));
        mass += v;
      }
      double M = static_cast<double>(methods);
      CHECK(mass == doctest::Approx(M * (M + 1) / 2));
    }
  }

  TEST_CASE("survival fraction") {
    std::vector<std::vector<kernel_seed>> frozen = {{1, 2, 3}, {3, 2, 1}, {1, 2, 3}};
    CHECK(survival_fraction(frozen) == std::vector<double>{1, 1, 1});

    std::vector<std::vector<kernel_seed>> replaced = {{1, 2}, {3, 4}, {5, 6}};
    CHECK(survival_fraction(replaced) == std::vector<double>{1, 0, 0});

    std::vector<std::vector<kernel_seed>> drift = {{1, 2, 3, 4}, {1, 2, 3, 5}, {1, 2, 5, 6}};
    CHECK(survival_fraction(drift, survival_baseline::first_round) ==
          std::vector<double>{1, 0.75, 0.5});
    CHECK(survival_fraction(drift, survival_baseline::previous_round) ==
          std::vector<double>{1, 0.75, 0.75});
  }

  TEST_CASE("comm report totals") {
    comm_report c{"drocks", {4, 4, 3}, {100, 100, 75}};
    CHECK(c.total_messages() == 11);
    CHECK(c.total_bytes() == 275);
  }
}
