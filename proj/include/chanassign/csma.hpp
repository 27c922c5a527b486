#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "chanassign/auction.hpp"
#include "chanassign/bids.hpp"
#include "chanassign/matrix.hpp"

namespace chanassign {

/// Common positive, strictly decreasing bid -> backoff map shared by all
/// agents. Strict monotonicity is what lets the earliest transmitter double
/// as the highest bidder.
struct BackoffFunction {
  enum class Form { Reciprocal, Exponential };

  Form form = Form::Reciprocal;
  double t_max_ms = 10.0;

  double operator()(double bid) const {
    switch (form) {
      case Form::Reciprocal:
        return t_max_ms / (1.0 + bid);
      case Form::Exponential:
        return t_max_ms * std::exp(-bid);
    }
    return t_max_ms;
  }

  static BackoffFunction parse(const std::string& name, double t_max_ms) {
    BackoffFunction f;
    f.t_max_ms = t_max_ms;
    if (name == "reciprocal") {
      f.form = Form::Reciprocal;
    } else if (name == "exponential") {
      f.form = Form::Exponential;
    } else {
      throw std::invalid_argument("unknown backoff form: " + name);
    }
    return f;
  }
};

inline double backoff_of(double bid, const BackoffFunction& f) {
  if (bid < 0) throw std::invalid_argument("negative bid");
  return f(bid);
}

class BackoffCollision : public std::runtime_error {
 public:
  BackoffCollision(int user_a, int user_b, int channel, double bid_a,
                   double bid_b)
      : std::runtime_error("backoff function not injective on reached bids: "
                           "users " + std::to_string(user_a) + " and " +
                           std::to_string(user_b) + " collide on channel " +
                           std::to_string(channel) + " (bids " +
                           std::to_string(bid_a) + " vs " +
                           std::to_string(bid_b) + ")"),
        user_a(user_a),
        user_b(user_b),
        channel(channel),
        bid_a(bid_a),
        bid_b(bid_b) {}
  int user_a, user_b, channel;
  double bid_a, bid_b;
};

/// A cognitive radio pair. Reads only its own reward/bid rows plus the
/// public per-slot outcome; there is no access to other agents' bids.
struct UserAgent {
  int id = 0;
  std::vector<double> rewards;   // private row of R
  std::vector<double> bids;      // private row of B
  bool assigned = false;
  bool dropped_out = false;
  int target = kUnassigned;      // channel currently bid on
  double backoff_ms = 0;

  // Table-II bidding step: pick the best-profit channel, raise the own bid
  // by gamma - omega + eps and map it to a backoff time. Returns false when
  // the agent drops out (all profits negative).
  bool prepare_bid(double eps, const BackoffFunction& f) {
    const int n_channels = static_cast<int>(rewards.size());
    auto scan = detail::scan_profits(
        n_channels, [&](int k) { return rewards[k] - bids[k]; });
    if (scan.gamma < 0) {
      dropped_out = true;
      target = kUnassigned;
      return false;
    }
    bids[scan.best_k] += scan.gamma - scan.omega + eps;
    target = scan.best_k;
    backoff_ms = f(bids[scan.best_k]);
    return true;
  }
};

struct ChannelOutcome {
  int winner = -1;  // user id, -1 when the channel stayed idle
  double winner_bid = 0;
  double backoff_ms = 0;
};

struct SlotOutcome {
  std::vector<ChannelOutcome> channels;
};

/// One contention slot: on every channel the strictly earliest transmitter
/// (smallest backoff, i.e. highest bid) wins; exact bid ties fall to the
/// lowest user id. Displaced holders become unassigned.
inline SlotOutcome run_slot(std::vector<UserAgent>& agents,
                            const BackoffFunction& f, int n_channels) {
  SlotOutcome out;
  out.channels.assign(n_channels, {});
  for (int k = 0; k < n_channels; ++k) {
    int best = -1;
    for (const UserAgent& a : agents) {
      const bool contends = (a.assigned && a.target == k) ||
                            (!a.assigned && !a.dropped_out && a.target == k);
      if (!contends) continue;
      if (best == -1) {
        best = a.id;
        continue;
      }
      const UserAgent& b = agents[best];
      // Equal backoffs for different bids mean f is not injective at the
      // operating resolution -- unless the bids differ only in the last few
      // bits, where rounding inside f necessarily collapses them and the
      // ordinary bid tie rule applies.
      const double ba = a.bids[k], bb = b.bids[k];
      if (ba != bb && f(ba) == f(bb)) {
        const double scale = std::max({std::abs(ba), std::abs(bb), 1.0});
        if (std::abs(ba - bb) > 1e-12 * scale) {
          throw BackoffCollision(std::min(a.id, best), std::max(a.id, best), k,
                                 ba, bb);
        }
      }
      if (a.bids[k] > b.bids[k]) best = a.id;
    }
    if (best == -1) continue;
    out.channels[k].winner = best;
    out.channels[k].winner_bid = agents[best].bids[k];
    out.channels[k].backoff_ms = f(agents[best].bids[k]);
  }
  // Each agent observes only the public outcome of its own channel.
  for (UserAgent& a : agents) {
    if (a.target == kUnassigned) continue;
    a.assigned = (out.channels[a.target].winner == a.id);
    if (!a.assigned) a.backoff_ms = 0;
  }
  return out;
}

struct CsmaResult {
  Assignment assignment;
  BidState bids;
  AuctionTrace trace;
  std::vector<SlotOutcome> slots;
  double eps = 0;

  CsmaResult(int n_users, int n_channels) : bids(n_users, n_channels) {}
};

/// Slot-by-slot realization of the distributed auction with no message
/// passing: opportunistic CSMA acts as the auctioneer. Produces the same
/// assignment, bid state and per-round snapshots as distributed_auction
/// under the same tie-break rule.
inline CsmaResult run_csma_auction(const RewardMatrix& r,
                                   const AuctionConfig& cfg = {},
                                   const BackoffFunction& f = {},
                                   const RoundObserver& observer = {}) {
  r.validate();
  const int n_users = r.n_users();
  const int n_channels = r.n_channels();
  const double eps = cfg.eps > 0 ? cfg.eps : default_eps(r);
  const long max_iters = detail::resolve_max_iters(r, eps, cfg.max_iters);

  std::vector<UserAgent> agents(n_users);
  for (int n = 0; n < n_users; ++n) {
    agents[n].id = n;
    agents[n].rewards.resize(n_channels);
    agents[n].bids.assign(n_channels, 0.0);
    for (int k = 0; k < n_channels; ++k) agents[n].rewards[k] = r(n, k);
  }

  CsmaResult res(n_users, n_channels);
  AuctionTrace& trace = res.trace;
  trace.unassigned_iters.assign(n_users, 0);
  trace.quantization_warning = eps_exceeds_quantization(cfg, eps, n_users);

  auto any_active = [&]() {
    for (const UserAgent& a : agents)
      if (!a.assigned && !a.dropped_out) return true;
    return false;
  };

  while (any_active()) {
    if (trace.rounds >= max_iters) throw AuctionStalled(max_iters, std::move(trace));
    ++trace.rounds;

    for (UserAgent& a : agents) {
      if (a.assigned || a.dropped_out) continue;
      ++trace.unassigned_iters[a.id];
      if (a.prepare_bid(eps, f)) {
        ++trace.total_bids;
        trace.bid_events.push_back(
            {trace.rounds, a.id, a.target, a.bids[a.target]});
      }
    }

    res.slots.push_back(run_slot(agents, f, n_channels));

    if (cfg.record_snapshots || observer) {
      std::vector<int> channel_of(n_users, kUnassigned);
      for (const UserAgent& a : agents)
        if (a.assigned) channel_of[a.id] = a.target;
      if (cfg.record_snapshots) trace.snapshots.push_back(channel_of);
      if (observer) {
        // Mirror the library-wide BidState view for invariant checks.
        BidState view(n_users, n_channels);
        for (const UserAgent& a : agents) {
          for (int k = 0; k < n_channels; ++k) view.bids(a.id, k) = a.bids[k];
          view.assigned[a.id] = a.assigned;
          view.dropped_out[a.id] = a.dropped_out;
          view.current_target[a.id] = a.target;
        }
        Assignment snap;
        snap.channel_of = channel_of;
        snap.value = assignment_value(r, snap);
        observer(trace.rounds, view, snap);
      }
    }
  }

  res.assignment.channel_of.assign(n_users, kUnassigned);
  for (const UserAgent& a : agents) {
    for (int k = 0; k < n_channels; ++k) res.bids.bids(a.id, k) = a.bids[k];
    res.bids.assigned[a.id] = a.assigned;
    res.bids.dropped_out[a.id] = a.dropped_out;
    res.bids.current_target[a.id] = a.target;
    if (a.assigned) res.assignment.channel_of[a.id] = a.target;
  }
  res.assignment.value = assignment_value(r, res.assignment);
  res.eps = eps;
  return res;
}

}  // namespace chanassign
