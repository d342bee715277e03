#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "drocks/baselines.hpp"
#include "drocks/error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace drocks;

namespace {

federation_config small_config(std::size_t n, std::size_t k, std::size_t rounds) {
  federation_config cfg;
  cfg.clients = n;
  cfg.kernels = k;
  cfg.max_rounds = rounds;
  cfg.master_seed = 3;
  return cfg;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("frocks initial seeds are disjoint blocks") {
    auto s = frocks_initial_seeds(3, 4);
    CHECK(s[0] == std::vector<kernel_seed>{0, 1, 2, 3});
    CHECK(s[2] == std::vector<kernel_seed>{8, 9, 10, 11});
  }

  TEST_CASE("frocks aggregation hand cases") {
    std::vector<frocks_selection> dup = {{{7}, {2.0}, 1.0}, {{7}, {4.0}, 3.0}};
    auto st = frocks_aggregate(dup);
    CHECK(st.seeds == std::vector<kernel_seed>{7});
    CHECK(st.weights == std::vector<double>{3.0});
    CHECK(st.contributions == std::vector<std::size_t>{2});
    CHECK(st.intercept == 2.0);

    std::vector<frocks_selection> disjoint = {{{5, 1}, {0.5, -1.0}, 0}, {{3, 9}, {2.0, 4.0}, 0}};
    auto d = frocks_aggregate(disjoint);
    CHECK(d.seeds == std::vector<kernel_seed>{1, 3, 5, 9});
    CHECK(d.weights == std::vector<double>{-1.0, 2.0, 0.5, 4.0});

    std::vector<frocks_selection> uneven = {{{1, 2}, {1, 1}, 0}, {{3}, {1}, 0}};
    CHECK_THROWS_AS(frocks_aggregate(uneven), error);
  }

  TEST_CASE("frocks aggregation equals the dictionary oracle and ignores client order") {
    std::mt19937_64 gen(19);
    std::normal_distribution<double> w(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      std::size_t n = 1 + gen() % 6;
      std::size_t p = 1 + gen() % 10;
      std::vector<frocks_selection> sels(n);
      for (auto& s : sels) {
        std::vector<kernel_seed> pool(30);
        std::iota(pool.begin(), pool.end(), 0);
        std::shuffle(pool.begin(), pool.end(), gen);
        s.seeds.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(p));
        for (std::size_t i = 0; i < p; ++i) s.weights.push_back(w(gen));
        s.intercept = w(gen);
      }
      auto got = frocks_aggregate(sels);
      auto want = oracle::frocks_union(sels);
      REQUIRE(got.seeds.size() == want.size());
      CHECK(got.seeds.size() <= n * p);
      CHECK(std::is_sorted(got.seeds.begin(), got.seeds.end()));
      std::size_t i = 0;
      for (const auto& [seed, sc] : want) {
        CHECK(got.seeds[i] == seed);
        CHECK(got.contributions[i] == sc.second);
        CHECK(got.weights[i] == doctest::Approx(sc.first / static_cast<double>(sc.second)).epsilon(1e-12));
        ++i;
      }
      auto shuffled = sels;
      std::shuffle(shuffled.begin(), shuffled.end(), gen);
      CHECK(frocks_aggregate(shuffled) == got);
    }
  }

  TEST_CASE("frocks convergence predicate") {
    frocks_server_state a{{1, 2}, {0.5, -0.5}, {1, 1}, 0};
    auto b = a;
    b.weights[0] += 1e-9;
    CHECK(frocks_converged(a, b));
    b.weights[0] += 1e-2;
    CHECK(!frocks_converged(a, b));
    auto c = a;
    c.seeds[1] = 3;
    CHECK(!frocks_converged(a, c));
  }

  TEST_CASE("frocks refuses multiclass") {
    auto ds = fixture::sign_of_mean_dataset(24, 6, 20, 1);
    for (std::size_t i = 0; i < ds.train.size(); i += 3) ds.train[i].label = 2;
    ds.class_count = 3;
    auto clients = fixture::split_evenly(ds, 2);
    try {
      run_frocks(small_config(2, 10, 1), clients, 3);
      FAIL("expected UnsupportedTask");
    } catch (const error& e) {
      CHECK(e.code() == errc::unsupported_task);
    }
  }

  TEST_CASE("frocks message accounting and shapes") {
    auto clients = fixture::split_evenly(fixture::sign_of_mean_dataset(40, 20, 30, 2), 4);
    auto r = run_frocks(small_config(4, 40, 3), clients, 2);
    for (const auto& log : r.rounds) {
      CHECK(log.messages_sent == 8);
      for (const auto& hop : log.hops) CHECK(hop.selected_seeds.size() == 10);
      CHECK(log.handoff_seeds.size() <= 40);
    }
    CHECK(r.kernels.size() == r.model.feature_count);
  }

  TEST_CASE("frocks with one client") {
    auto clients = fixture::split_evenly(fixture::sign_of_mean_dataset(20, 20, 30, 2), 1);
    auto r = run_frocks(small_config(1, 20, 2), clients, 2);
    CHECK(r.rounds[0].messages_sent == 2);
    CHECK(r.kernels.size() == 20);
  }

  TEST_CASE("frocks on the sign-of-mean toy tracks a centralized fit") {
    auto ds = fixture::sign_of_mean_dataset(80, 200, 40, 9);
    auto cfg = small_config(4, 100, 10);
    auto fed = run_frocks(cfg, fixture::split_evenly(ds, 4), 2);
    auto central = run_frocks(small_config(1, 100, 10), fixture::split_evenly(ds, 1), 2);
    CHECK(std::abs(fed.evaluation.pooled.macro_f1 - central.evaluation.pooled.macro_f1) <= 0.03);
  }

  TEST_CASE("fedavg aggregation") {
    auto a = init_model(1, 2);
    auto b = init_model(1, 2);
    a.weights = {1};
    b.weights = {3};
    std::vector<linear_model> models = {a, b};
    std::vector<std::size_t> equal = {5, 5};
    CHECK(fedavg_aggregate(models, equal).weights[0] == 2.0);
    std::vector<std::size_t> sizes = {10, 30};
    CHECK(fedavg_aggregate(models, sizes).weights[0] == 2.5);
    std::vector<std::size_t> wrong = {1};
    CHECK_THROWS_AS(fedavg_aggregate(models, wrong), error);

    std::vector<linear_model> same = {a, a, a};
    std::vector<std::size_t> counts = {1, 7, 2};
    CHECK(fedavg_aggregate(same, counts) == a);
  }

  TEST_CASE("fedavg with identical clients stays symmetric") {
    auto ds = fixture::sign_of_mean_dataset(8, 8, 20, 4);
    client_split one{ds.train, ds.test};
    std::vector<client_split> twins = {one, one};
    auto r = run_fedavg(fedavg_variant::rocket_shared, small_config(2, 10, 2), twins, 2);
    REQUIRE(r.rounds.size() == 2);
    CHECK(r.rounds[0].messages_sent == 4);
    CHECK(r.kernels.size() == 10);
    CHECK(r.evaluation.per_client[0].accuracy == r.evaluation.per_client[1].accuracy);
  }

  TEST_CASE("fedavg sends twice as many messages as a drocks ring") {
    auto clients = fixture::split_evenly(fixture::sign_of_mean_dataset(40, 20, 30, 2), 4);
    auto cfg = small_config(4, 40, 10);
    cfg.train.local_epochs = 1;
    auto fa = run_fedavg(fedavg_variant::rocket_shared, cfg, clients, 2);
    auto dr = run_drocks(cfg, clients, 2);
    auto fc = fa.communication("fedavg_rocket");
    auto dc = dr.communication("drocks");
    CHECK(fc.total_messages() == 80);
    if (dr.rounds.size() == 10) CHECK(dc.total_messages() == 40);
    CHECK(fc.messages_per_round[0] == 2 * dc.messages_per_round[0]);
  }

  TEST_CASE("fedavg raw trains on series values") {
    auto clients = fixture::split_evenly(fixture::sign_of_mean_dataset(40, 40, 30, 5), 4);
    auto cfg = small_config(4, 40, 20);
    auto r = run_fedavg(fedavg_variant::raw, cfg, clients, 2);
    CHECK(r.model.feature_count == 30);
    CHECK(r.kernels.empty());
    CHECK(r.evaluation.pooled.macro_f1 > 0.9);
    CHECK(to_string(fedavg_variant::raw) == "fedavg_raw");
    CHECK(to_string(fedavg_variant::rocket_shared) == "fedavg_rocket");
  }
}
