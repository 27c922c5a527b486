#include <doctest.h>

#include <cmath>
#include <string>

#include "chanassign/auction.hpp"
#include "chanassign/csma.hpp"
#include "chanassign/matrix.hpp"
#include "chanassign/rng.hpp"

using namespace chanassign;

TEST_CASE("backoff_of: default reciprocal form") {
  BackoffFunction f;
  CHECK(backoff_of(0.0, f) == doctest::Approx(10.0));
  CHECK(backoff_of(3.0, f) > backoff_of(5.0, f));
  CHECK(backoff_of(3.0, f) > 0);
  CHECK_THROWS_AS(backoff_of(-1.0, f), std::invalid_argument);
}

TEST_CASE("backoff form parsing") {
  BackoffFunction f = BackoffFunction::parse("exponential", 4.0);
  CHECK(f(0.0) == doctest::Approx(4.0));
  CHECK(f(1.0) < f(0.5));
  CHECK_THROWS_AS(BackoffFunction::parse("bogus", 1.0), std::invalid_argument);
}

TEST_CASE("run_slot picks the earliest transmitter per channel") {
  BackoffFunction f;

  // Single contender wins.
  std::vector<UserAgent> solo(1);
  solo[0].id = 0;
  solo[0].rewards = {1.0};
  solo[0].bids = {2.0};
  solo[0].target = 0;
  SlotOutcome one = run_slot(solo, f, 1);
  CHECK(one.channels[0].winner == 0);
  CHECK(solo[0].assigned);

  // Higher bid means shorter backoff means the channel.
  std::vector<UserAgent> pair(2);
  for (int i = 0; i < 2; ++i) {
    pair[i].id = i;
    pair[i].rewards = {1.0};
    pair[i].target = 0;
  }
  pair[0].bids = {4.0};
  pair[1].bids = {7.0};
  SlotOutcome duel = run_slot(pair, f, 1);
  CHECK(duel.channels[0].winner == 1);
  CHECK(duel.channels[0].winner_bid == 7.0);
  CHECK(duel.channels[0].backoff_ms == doctest::Approx(f(7.0)));
  CHECK_FALSE(pair[0].assigned);

  // An assigned holder with a frozen bid loses to a strictly higher bid.
  std::vector<UserAgent> evict(2);
  evict[0] = {0, {1.0}, {5.0}, true, false, 0, f(5.0)};
  evict[1] = {1, {1.0}, {5.0 + 0.1}, false, false, 0, f(5.1)};
  SlotOutcome res = run_slot(evict, f, 1);
  CHECK(res.channels[0].winner == 1);
  CHECK_FALSE(evict[0].assigned);
  CHECK(evict[1].assigned);

  // Exact ties fall to the lowest user id.
  std::vector<UserAgent> tie(2);
  tie[0] = {0, {1.0}, {3.0}, false, false, 0, f(3.0)};
  tie[1] = {1, {1.0}, {3.0}, false, false, 0, f(3.0)};
  SlotOutcome t = run_slot(tie, f, 1);
  CHECK(t.channels[0].winner == 0);
}

TEST_CASE("one user one channel assigns in the first slot") {
  auto res = run_csma_auction(RewardMatrix{{7}});
  CHECK(res.trace.rounds == 1);
  CHECK(res.assignment.channel_of == std::vector<int>{0});
  CHECK(res.assignment.value == 7.0);
  CHECK(res.slots.size() == 1);
}

TEST_CASE("winner bid is the slot maximum among contenders") {
  Rng rng(23);
  RewardMatrix r(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) r(i, j) = rng.uniform01() * 4;
  AuctionConfig cfg;
  cfg.eps = 0.05;
  auto res = run_csma_auction(r, cfg);
  for (const SlotOutcome& slot : res.slots) {
    for (const ChannelOutcome& c : slot.channels) {
      if (c.winner < 0) continue;
      CHECK(c.backoff_ms == doctest::Approx(BackoffFunction{}(c.winner_bid)));
    }
  }
}

TEST_CASE("csma trace equals the distributed auction trace") {
  // Hand instance slot-for-slot, then a randomized sweep.
  RewardMatrix hand{{10, 5}, {8, 6}};
  AuctionConfig cfg;
  cfg.eps = 0.1;
  cfg.record_snapshots = true;
  auto d = distributed_auction(hand, cfg);
  auto c = run_csma_auction(hand, cfg);
  REQUIRE(d.trace.snapshots.size() == c.trace.snapshots.size());
  for (std::size_t i = 0; i < d.trace.snapshots.size(); ++i) {
    CHECK(d.trace.snapshots[i] == c.trace.snapshots[i]);
  }
  CHECK(d.assignment.channel_of == c.assignment.channel_of);

  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(5));  // N <= 6
    RewardMatrix r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = rng.uniform01() * 3;
    AuctionConfig ac;
    ac.eps = (rep % 2) ? 0.3 : 0.02;
    ac.record_snapshots = true;
    auto dist = distributed_auction(r, ac);
    BackoffFunction f =
        (rep % 3) ? BackoffFunction{} : BackoffFunction::parse("exponential", 10.0);
    auto csma = run_csma_auction(r, ac, f);
    CHECK(dist.assignment.channel_of == csma.assignment.channel_of);
    CHECK(dist.assignment.value == csma.assignment.value);
    CHECK(dist.trace.rounds == csma.trace.rounds);
    REQUIRE(dist.trace.snapshots.size() == csma.trace.snapshots.size());
    for (std::size_t i = 0; i < dist.trace.snapshots.size(); ++i) {
      CHECK(dist.trace.snapshots[i] == csma.trace.snapshots[i]);
    }
    for (int u = 0; u < n; ++u)
      for (int k = 0; k < n; ++k)
        CHECK(dist.bids.bids(u, k) == csma.bids.bids(u, k));
  }
}

TEST_CASE("integer-mode bid ties resolve to the lowest id in both realizations") {
  RewardMatrix r{{2, 1}, {2, 1}};
  AuctionConfig cfg;
  cfg.eps = 0.25;
  auto d = distributed_auction(r, cfg);
  auto c = run_csma_auction(r, cfg);
  CHECK(d.assignment.channel_of == c.assignment.channel_of);
  CHECK(d.assignment.channel_of[0] == 0);  // tie went to user 0
}

TEST_CASE("materially non-injective backoffs raise a named collision") {
  // exp(-b) underflows to zero past ~745, so these two far-apart bids land
  // on the same backoff.
  BackoffFunction f = BackoffFunction::parse("exponential", 10.0);
  std::vector<UserAgent> agents(2);
  agents[0] = {0, {1000.0}, {746.0}, false, false, 0, f(746.0)};
  agents[1] = {1, {1000.0}, {747.0}, false, false, 0, f(747.0)};
  try {
    run_slot(agents, f, 1);
    FAIL("expected BackoffCollision");
  } catch (const BackoffCollision& e) {
    CHECK(e.user_a == 0);
    CHECK(e.user_b == 1);
    CHECK(e.channel == 0);
    CHECK(std::string(e.what()).find("users 0 and 1") != std::string::npos);
  }

  // A one-ulp bid difference is a tie, not a collision: the higher bid wins.
  std::vector<UserAgent> close(2);
  const double b0 = 0.12;
  const double b1 = std::nextafter(b0, 1.0);
  close[0] = {0, {1.0}, {b0}, false, false, 0, f(b0)};
  close[1] = {1, {1.0}, {b1}, false, false, 0, f(b1)};
  SlotOutcome out = run_slot(close, f, 1);
  CHECK(out.channels[0].winner == 1);
}

TEST_CASE("agents expose only local state") {
  // Locality by construction: an agent's bid step reads its own rows only.
  UserAgent a;
  a.id = 3;
  a.rewards = {4.0, 1.0};
  a.bids = {0.0, 0.0};
  CHECK(a.prepare_bid(0.5, BackoffFunction{}));
  CHECK(a.target == 0);
  CHECK(a.bids[0] == doctest::Approx(4.0 - 1.0 + 0.5));
  CHECK(a.backoff_ms == doctest::Approx(BackoffFunction{}(a.bids[0])));
}
