#include <doctest.h>

#include <map>

#include "chanassign/auction.hpp"
#include "chanassign/bids.hpp"
#include "chanassign/matrix.hpp"
#include "chanassign/oracles.hpp"
#include "chanassign/rng.hpp"

using namespace chanassign;

namespace {

RewardMatrix random_matrix(Rng& rng, int n, int k, double scale = 1.0) {
  RewardMatrix r(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) r(i, j) = rng.uniform01() * scale;
  return r;
}

}  // namespace

TEST_CASE("prices_from_bids takes columnwise maxima") {
  BidState b(2, 2);
  b.bids(0, 0) = 0;
  b.bids(0, 1) = 3;
  b.bids(1, 0) = 2;
  b.bids(1, 1) = 1;
  CHECK(prices_from_bids(b) == PriceVector{2, 3});

  BidState zeros(3, 2);
  CHECK(prices_from_bids(zeros) == PriceVector{0, 0});

  BidState single(1, 1);
  single.bids(0, 0) = 5;
  CHECK(prices_from_bids(single) == PriceVector{5});
}

TEST_CASE("prices dominate every bid row") {
  Rng rng(5);
  BidState b(4, 3);
  for (int n = 0; n < 4; ++n)
    for (int k = 0; k < 3; ++k) b.bids(n, k) = rng.uniform01();
  PriceVector rho = prices_from_bids(b);
  for (int n = 0; n < 4; ++n)
    for (int k = 0; k < 3; ++k) CHECK(rho[k] >= b.bids(n, k));
}

TEST_CASE("check_eps_cs on hand examples") {
  RewardMatrix r{{5, 1}, {1, 5}};
  PriceVector rho{0, 0};
  auto diag = check_eps_cs(r, rho, {{0, 1}, 0}, 0.1);
  CHECK(diag == std::vector<CsStatus>{CsStatus::Pass, CsStatus::Pass});
  auto anti = check_eps_cs(r, rho, {{1, 0}, 0}, 0.1);
  CHECK(anti == std::vector<CsStatus>{CsStatus::Fail, CsStatus::Fail});
  auto partial = check_eps_cs(r, rho, {{kUnassigned, 1}, 0}, 0.1);
  CHECK(partial[0] == CsStatus::NotApplicable);
  CHECK(partial[1] == CsStatus::Pass);
}

TEST_CASE("check_local_eps_cs with zero bids passes row argmaxes") {
  RewardMatrix r{{5, 1}, {1, 5}};
  BidState b(2, 2);
  auto st = check_local_eps_cs(r, b, {{0, 1}, 0}, 0.01);
  CHECK(all_pass(st));
  auto bad = check_local_eps_cs(r, b, {{1, 0}, 0}, 0.01);
  CHECK_FALSE(all_pass(bad));
}

TEST_CASE("theorem 1: local eps-CS implies eps-CS under derived prices") {
  Rng rng(77);
  for (int rep = 0; rep < 400; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(5));
    RewardMatrix r = random_matrix(rng, n, n, 5.0);
    BidState b(n, n);
    Assignment a;
    a.channel_of.resize(n);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    for (int i = 0; i < n; ++i) {
      a.channel_of[i] = perm[i];
      for (int k = 0; k < n; ++k) b.bids(i, k) = rng.uniform01() * 5;
    }
    // The highest bidder owns each channel; make the random state honor that
    // by lifting each owner's bid to the column max.
    for (int i = 0; i < n; ++i) {
      double col_max = 0;
      for (int j = 0; j < n; ++j) col_max = std::max(col_max, b.bids(j, perm[i]));
      b.bids(i, perm[i]) = col_max;
    }
    // Choose eps so that local eps-CS holds for everyone.
    double eps = 1e-9;
    for (int i = 0; i < n; ++i) {
      double best = -1e300;
      for (int k = 0; k < n; ++k) best = std::max(best, r(i, k) - b.bids(i, k));
      eps = std::max(eps, best - (r(i, perm[i]) - b.bids(i, perm[i])) + 1e-9);
    }
    REQUIRE(all_pass(check_local_eps_cs(r, b, a, eps)));
    CHECK(all_pass(check_eps_cs(r, prices_from_bids(b), a, eps)));
  }
}

TEST_CASE("second_best_profit") {
  std::vector<double> rewards{10, 5}, zero_bids{0, 0}, some_bids{4, 0};
  CHECK(second_best_profit(rewards, zero_bids, 0) == 5.0);
  CHECK(second_best_profit(rewards, some_bids, 0) == 5.0);
  std::vector<double> one_reward{7}, one_bid{0};
  CHECK(second_best_profit(one_reward, one_bid, 0) == 0.0);  // dropout floor
}

TEST_CASE("centralized auction on hand instances") {
  RewardMatrix r{{10, 5}, {8, 6}};
  AuctionConfig cfg;
  cfg.eps = 0.1;
  auto res = centralized_auction(r, cfg);
  CHECK(res.assignment.value >= 16.0 - 2 * 0.1);
  CHECK(all_pass(check_eps_cs(r, res.prices, res.assignment, res.eps)));

  auto single = centralized_auction(RewardMatrix{{7}});
  CHECK(single.assignment.channel_of == std::vector<int>{0});
  CHECK(single.assignment.value == 7.0);
}

TEST_CASE("distributed auction on hand instances") {
  RewardMatrix r{{10, 5}, {8, 6}};
  AuctionConfig cfg;
  cfg.eps = 0.1;
  auto res = distributed_auction(r, cfg);
  CHECK(res.assignment.value >= 16.0 - 2 * 0.1);
  CHECK(all_pass(check_local_eps_cs(r, res.bids, res.assignment, res.eps)));
  CHECK(all_pass(
      check_eps_cs(r, prices_from_bids(res.bids), res.assignment, res.eps)));
}

TEST_CASE("integer rewards with eps < 1/N are solved exactly") {
  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(5));
    RewardMatrix r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = static_cast<double>(rng.below(20));
    AuctionConfig cfg;
    cfg.eps = 1.0 / (2 * n);
    cfg.quantization_q = 1;
    const double opt = brute_force_optimal(r).value;
    CHECK(centralized_auction(r, cfg).assignment.value == opt);
    CHECK(distributed_auction(r, cfg).assignment.value == opt);
    CHECK_FALSE(eps_exceeds_quantization(cfg, cfg.eps, n));
  }
}

TEST_CASE("quantization warning flags eps >= 1/(qN)") {
  AuctionConfig cfg;
  cfg.quantization_q = 4;
  CHECK(eps_exceeds_quantization(cfg, 0.1, 10));        // 0.1 >= 1/40
  CHECK_FALSE(eps_exceeds_quantization(cfg, 0.01, 10)); // 0.01 < 1/40
}

TEST_CASE("distributed auction: eps-optimality and trace invariants") {
  Rng rng(101);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(6));
    RewardMatrix r = random_matrix(rng, n, n, 3.0);
    const double eps = (rep % 2) ? 0.25 : 0.02;
    AuctionConfig cfg;
    cfg.eps = eps;

    // Track bids to check monotonicity, minimum increments and the
    // never-unassigned-again fact.
    std::map<std::pair<int, int>, double> last_bid;
    std::vector<char> ever_owned(n, false);
    long last_round = 0;
    auto res = distributed_auction(r, cfg, [&](long round, const BidState& b,
                                               const Assignment& a) {
      CHECK(round == last_round + 1);
      last_round = round;
      // Assigned users pass local eps-CS at every round boundary. The winning
      // bid raise puts the assigned profit exactly at (second best - eps), so
      // leave one ulp-scale slack for the rounding in that raise.
      CHECK(all_pass(check_local_eps_cs(r, b, a, eps + 1e-12)));
      std::vector<char> owned(n, false);
      for (int u = 0; u < n; ++u)
        if (a.channel_of[u] != kUnassigned) owned[a.channel_of[u]] = true;
      for (int k = 0; k < n; ++k) {
        if (ever_owned[k]) CHECK(owned[k]);  // appendix fact 1
        if (owned[k]) ever_owned[k] = true;
      }
    });

    for (const BidEvent& e : res.trace.bid_events) {
      auto key = std::make_pair(e.user, e.channel);
      auto it = last_bid.find(key);
      const double before = it == last_bid.end() ? 0.0 : it->second;
      CHECK(e.bid - before >= eps - 1e-12);  // appendix fact 2
      last_bid[key] = e.bid;
    }

    const double opt = brute_force_optimal(r).value;
    CHECK(res.assignment.value >= opt - n * eps - 1e-9);
    CHECK(res.trace.rounds <= lemma_total_bound(r, eps));
    for (int u = 0; u < n; ++u) {
      CHECK(res.trace.unassigned_iters[u] <= iteration_bound_per_user(r, u, eps));
    }
  }
}

TEST_CASE("single-channel contention drops the loser out") {
  RewardMatrix r{{1}, {2}};
  AuctionConfig cfg;
  cfg.eps = 0.1;
  auto res = distributed_auction(r, cfg);
  CHECK(res.assignment.channel_of == std::vector<int>{kUnassigned, 0});
  CHECK(res.assignment.value == 2.0);
  CHECK(res.bids.dropped_out[0]);
  // The dropped user's best profit over real channels is negative.
  CHECK(r(0, 0) - res.bids.bids(0, 0) < 0);
}

TEST_CASE("N > K via zero-column padding") {
  RewardMatrix tall{{9, 1}, {8, 7}, {2, 6}};
  RewardMatrix padded = pad_zero_columns(tall);
  AuctionConfig cfg;
  cfg.eps = 0.05;
  auto res = distributed_auction(padded, cfg);
  Assignment un = unpad_assignment(res.assignment, tall);
  const double opt = brute_force_optimal(padded).value;
  CHECK(un.value >= opt - 3 * cfg.eps - 1e-9);
  int unassigned = 0;
  for (int k : un.channel_of) unassigned += (k == kUnassigned);
  CHECK(unassigned == 1);
}

TEST_CASE("max_iters trips with the trace attached") {
  RewardMatrix r{{1, 1}, {1, 1}, {1, 1}};
  AuctionConfig cfg;
  cfg.eps = 0.001;
  cfg.max_iters = 1;
  try {
    distributed_auction(pad_zero_columns(r), cfg);
    FAIL("expected AuctionStalled");
  } catch (const AuctionStalled& e) {
    CHECK(e.trace.rounds == 1);
  }
}

TEST_CASE("truncate_rewards") {
  // ceil(2*log2(4)) = 4 >= N: identity.
  RewardMatrix r4(4, 4);
  Rng rng(3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r4(i, j) = rng.uniform01();
  RewardMatrix t4 = truncate_rewards(r4, 2.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(t4(i, j) == r4(i, j));

  CHECK_THROWS_AS(truncate_rewards(r4, 1.0), std::invalid_argument);

  // N=8, alpha=1.5 keeps ceil(4.5)=5; zeros land on the 3 smallest.
  RewardMatrix r8(8, 8);
  const double row[8] = {5, 1, 9, 2, 7, 3, 8, 4};
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) r8(i, j) = row[j];
  RewardMatrix t8 = truncate_rewards(r8, 1.5);
  for (int i = 0; i < 8; ++i) {
    CHECK(t8(i, 1) == 0);
    CHECK(t8(i, 3) == 0);
    CHECK(t8(i, 5) == 0);
    int support = 0;
    for (int j = 0; j < 8; ++j) {
      CHECK(t8(i, j) <= r8(i, j));
      support += (t8(i, j) > 0);
    }
    CHECK(support == 5);
  }
}

TEST_CASE("truncated auction is eps-optimal on the truncated matrix") {
  Rng rng(19);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 8;
    RewardMatrix r = random_matrix(rng, n, n);
    AuctionConfig cfg;
    cfg.eps = 0.01;
    auto res = truncated_auction(r, 1.5, cfg);
    RewardMatrix trunc = truncate_rewards(r, 1.5);
    const double opt_trunc = brute_force_optimal(trunc).value;
    CHECK(res.truncated_value >= opt_trunc - n * cfg.eps - 1e-9);
    CHECK(res.original_value >= res.truncated_value - 1e-12);
  }
}

TEST_CASE("iteration bound calculators") {
  RewardMatrix r{{1, 1}};
  CHECK(iteration_bound_per_user(r, 0, 1.0) == 4.0);
  RewardMatrix zeros(1, 3, 0.0);
  CHECK(iteration_bound_per_user(zeros, 0, 0.5) == 3.0);

  CHECK(expected_iteration_bound(10, 1.0, 0.1) == doctest::Approx(1100.0));
  CHECK(expected_iteration_bound(10, 1.0, 1e18) == doctest::Approx(100.0));

  CHECK(truncation_success_bound(10, 2.0) == doctest::Approx(0.9));
  CHECK(truncation_success_bound(10, 1.0) == 0.0);
}

TEST_CASE("default eps scales with the matrix") {
  RewardMatrix r{{10, 5}, {8, 6}};
  CHECK(default_eps(r) == doctest::Approx(0.05));
  CHECK(default_eps(RewardMatrix(2, 2, 0.0)) > 0);
}
