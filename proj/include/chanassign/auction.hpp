#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chanassign/bids.hpp"
#include "chanassign/matrix.hpp"

namespace chanassign {

struct AuctionConfig {
  double eps = 0.0;       // <= 0 picks default_eps(R)
  long max_iters = 0;     // 0 picks 2x the lemma bound
  std::uint64_t tie_break_seed = 0;  // reserved for randomized variants
  std::optional<int> quantization_q;
  bool record_snapshots = true;
};

inline double default_eps(const RewardMatrix& r) {
  double e = 0.01 * r.max_entry() / r.n_users();
  return e > 0 ? e : 1e-3;
}

/// True when quantization_q is set but eps is too large for the exact
/// optimality guarantee (needs eps < 1/(q*N)).
inline bool eps_exceeds_quantization(const AuctionConfig& cfg, double eps,
                                     int n_users) {
  return cfg.quantization_q &&
         eps >= 1.0 / (static_cast<double>(*cfg.quantization_q) * n_users);
}

struct BidEvent {
  long iteration;  // round for the distributed variants, bid index for the centralized one
  int user;
  int channel;
  double bid;  // bid (or price) after the raise
};

struct AuctionTrace {
  std::vector<BidEvent> bid_events;
  long rounds = 0;
  long total_bids = 0;
  std::vector<long> unassigned_iters;           // T_n
  std::vector<std::vector<int>> snapshots;      // assignment after each round
  bool quantization_warning = false;
};

class AuctionStalled : public std::runtime_error {
 public:
  AuctionStalled(long max_iters, AuctionTrace t)
      : std::runtime_error("auction hit max_iters = " +
                           std::to_string(max_iters) +
                           "; termination is guaranteed, this is a bug"),
        trace(std::move(t)) {}
  AuctionTrace trace;
};

/// Observer invoked after every assignment stage; used by the invariant and
/// acceptance suites to check L-eps-CS at round boundaries.
using RoundObserver =
    std::function<void(long round, const BidState&, const Assignment&)>;

/// Per-user lemma bound: T_n <= K + (1/eps) * sum_k R(n,k).
inline double iteration_bound_per_user(const RewardMatrix& r, int n, double eps) {
  return r.n_channels() + r.row_sum(n) / eps;
}

inline double lemma_total_bound(const RewardMatrix& r, double eps) {
  double s = 0;
  for (int n = 0; n < r.n_users(); ++n) s += iteration_bound_per_user(r, n, eps);
  return s;
}

/// E(T) <= N^2 + (1/eps) N^2 E(r) for i.i.d. N x N instances.
inline double expected_iteration_bound(int n, double mean_rate, double eps) {
  return static_cast<double>(n) * n + static_cast<double>(n) * n * mean_rate / eps;
}

/// 1 - 1/N^(alpha-1), clamped to [0,1].
inline double truncation_success_bound(int n, double alpha) {
  double p = 1.0 - std::pow(static_cast<double>(n), 1.0 - alpha);
  return std::min(1.0, std::max(0.0, p));
}

namespace detail {

struct ProfitScan {
  int best_k = -1;
  double gamma = 0;  // best profit
  double omega = 0;  // second best profit, 0 when there is a single channel
};

// Lowest index wins every argmax tie. With one channel the second-best
// profit is floored at 0, the outside-option value of the zero-column
// reduction.
template <typename ProfitFn>
ProfitScan scan_profits(int n_channels, ProfitFn profit) {
  ProfitScan s;
  s.best_k = 0;
  s.gamma = profit(0);
  for (int k = 1; k < n_channels; ++k) {
    double p = profit(k);
    if (p > s.gamma) {
      s.gamma = p;
      s.best_k = k;
    }
  }
  if (n_channels == 1) {
    s.omega = 0.0;
    return s;
  }
  bool first = true;
  for (int k = 0; k < n_channels; ++k) {
    if (k == s.best_k) continue;
    double p = profit(k);
    if (first || p > s.omega) {
      s.omega = p;
      first = false;
    }
  }
  return s;
}

inline long resolve_max_iters(const RewardMatrix& r, double eps, long requested) {
  if (requested > 0) return requested;
  return static_cast<long>(std::ceil(2.0 * lemma_total_bound(r, eps))) + 10;
}

}  // namespace detail

/// max over k != best_index of rewards[k] - bids[k]; 0 for a single column.
inline double second_best_profit(std::span<const double> rewards,
                                 std::span<const double> bids, int best_index) {
  const int k_count = static_cast<int>(rewards.size());
  if (k_count == 1) return 0.0;
  bool first = true;
  double omega = 0;
  for (int k = 0; k < k_count; ++k) {
    if (k == best_index) continue;
    double p = rewards[k] - bids[k];
    if (first || p > omega) {
      omega = p;
      first = false;
    }
  }
  return omega;
}

struct CentralizedResult {
  Assignment assignment;
  PriceVector prices;
  AuctionTrace trace;
  double eps = 0;
};

/// Gauss-Seidel auction of Table-I-left: one unassigned user bids per
/// iteration against the public price vector.
inline CentralizedResult centralized_auction(const RewardMatrix& r,
                                             const AuctionConfig& cfg = {}) {
  r.validate();
  const int n_users = r.n_users();
  const int n_channels = r.n_channels();
  const double eps = cfg.eps > 0 ? cfg.eps : default_eps(r);
  const long max_iters = detail::resolve_max_iters(r, eps, cfg.max_iters);

  PriceVector rho(n_channels, 0.0);
  std::vector<int> channel_of(n_users, kUnassigned);
  std::vector<int> owner(n_channels, -1);
  std::vector<char> assigned(n_users, false), dropped(n_users, false);

  AuctionTrace trace;
  trace.unassigned_iters.assign(n_users, 0);
  trace.quantization_warning = eps_exceeds_quantization(cfg, eps, n_users);

  auto next_unassigned = [&]() {
    for (int n = 0; n < n_users; ++n)
      if (!assigned[n] && !dropped[n]) return n;
    return -1;
  };

  for (int n = next_unassigned(); n != -1; n = next_unassigned()) {
    if (trace.total_bids >= max_iters) throw AuctionStalled(max_iters, std::move(trace));
    ++trace.unassigned_iters[n];
    ++trace.total_bids;
    auto scan = detail::scan_profits(n_channels, [&](int k) { return r(n, k) - rho[k]; });
    if (scan.gamma < 0) {
      dropped[n] = true;
      continue;
    }
    rho[scan.best_k] += scan.gamma - scan.omega + eps;
    if (owner[scan.best_k] != -1) {
      assigned[owner[scan.best_k]] = false;
      channel_of[owner[scan.best_k]] = kUnassigned;
    }
    owner[scan.best_k] = n;
    assigned[n] = true;
    channel_of[n] = scan.best_k;
    trace.bid_events.push_back({trace.total_bids, n, scan.best_k, rho[scan.best_k]});
    if (cfg.record_snapshots) trace.snapshots.push_back(channel_of);
  }
  trace.rounds = trace.total_bids;

  CentralizedResult res;
  res.assignment.channel_of = channel_of;
  res.assignment.value = assignment_value(r, res.assignment);
  res.prices = std::move(rho);
  res.trace = std::move(trace);
  res.eps = eps;
  return res;
}

struct DistributedResult {
  Assignment assignment;
  BidState bids;
  AuctionTrace trace;
  double eps = 0;

  DistributedResult(int n_users, int n_channels) : bids(n_users, n_channels) {}
};

/// Synchronous-rounds auction of Table-I-right: every unassigned user raises
/// his own bid row, then each channel goes to its highest bidder (assigned
/// holders re-assert their frozen bid; ties to the lowest user index).
inline DistributedResult distributed_auction(const RewardMatrix& r,
                                             const AuctionConfig& cfg = {},
                                             const RoundObserver& observer = {}) {
  r.validate();
  const int n_users = r.n_users();
  const int n_channels = r.n_channels();
  const double eps = cfg.eps > 0 ? cfg.eps : default_eps(r);
  const long max_iters = detail::resolve_max_iters(r, eps, cfg.max_iters);

  DistributedResult res(n_users, n_channels);
  BidState& st = res.bids;
  std::vector<int> channel_of(n_users, kUnassigned);
  std::vector<int> owner(n_channels, -1);

  AuctionTrace trace;
  trace.unassigned_iters.assign(n_users, 0);
  trace.quantization_warning = eps_exceeds_quantization(cfg, eps, n_users);

  auto any_active = [&]() {
    for (int n = 0; n < n_users; ++n)
      if (!st.assigned[n] && !st.dropped_out[n]) return true;
    return false;
  };

  while (any_active()) {
    if (trace.rounds >= max_iters) throw AuctionStalled(max_iters, std::move(trace));
    ++trace.rounds;

    // Bidding stage.
    for (int n = 0; n < n_users; ++n) {
      if (st.assigned[n] || st.dropped_out[n]) continue;
      ++trace.unassigned_iters[n];
      auto scan = detail::scan_profits(
          n_channels, [&](int k) { return r(n, k) - st.bids(n, k); });
      if (scan.gamma < 0) {
        st.dropped_out[n] = true;
        st.current_target[n] = kUnassigned;
        continue;
      }
      st.bids(n, scan.best_k) += scan.gamma - scan.omega + eps;
      st.current_target[n] = scan.best_k;
      ++trace.total_bids;
      trace.bid_events.push_back(
          {trace.rounds, n, scan.best_k, st.bids(n, scan.best_k)});
    }

    // Assignment stage: highest bidder per channel, lowest index on ties.
    for (int k = 0; k < n_channels; ++k) {
      int best = -1;
      for (int n = 0; n < n_users; ++n) {
        const bool contends =
            (st.assigned[n] && channel_of[n] == k) ||
            (!st.assigned[n] && !st.dropped_out[n] && st.current_target[n] == k);
        if (!contends) continue;
        if (best == -1 || st.bids(n, k) > st.bids(best, k)) best = n;
      }
      if (best == -1) continue;  // channel without bids stays unassigned
      if (owner[k] != -1 && owner[k] != best) {
        st.assigned[owner[k]] = false;
        channel_of[owner[k]] = kUnassigned;
      }
      owner[k] = best;
      st.assigned[best] = true;
      channel_of[best] = k;
    }

    if (cfg.record_snapshots) trace.snapshots.push_back(channel_of);
    if (observer) {
      Assignment snap;
      snap.channel_of = channel_of;
      snap.value = assignment_value(r, snap);
      observer(trace.rounds, st, snap);
    }
  }

  res.assignment.channel_of = channel_of;
  res.assignment.value = assignment_value(r, res.assignment);
  res.trace = std::move(trace);
  res.eps = eps;
  return res;
}

/// Per row keep the ceil(alpha*log2(N)) largest entries (ties to the lowest
/// column index), zero the rest. Identity when the kept count reaches N.
inline RewardMatrix truncate_rewards(const RewardMatrix& r, double alpha) {
  if (r.n_users() != r.n_channels()) {
    throw std::invalid_argument("truncate_rewards needs a square matrix");
  }
  if (alpha <= 1.0) {
    throw std::invalid_argument("truncate_rewards requires alpha > 1");
  }
  const int n = r.n_users();
  const int keep = static_cast<int>(std::ceil(alpha * std::log2(static_cast<double>(n))));
  if (keep >= n) return r;

  RewardMatrix out(n, n, 0.0);
  std::vector<int> idx(n);
  for (int row = 0; row < n; ++row) {
    for (int k = 0; k < n; ++k) idx[k] = k;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return r(row, a) > r(row, b);
    });
    for (int i = 0; i < keep; ++i) out(row, idx[i]) = r(row, idx[i]);
  }
  return out;
}

struct TruncatedResult {
  DistributedResult inner;
  double truncated_value = 0;  // value under the truncated matrix
  double original_value = 0;   // same assignment re-priced under the input R

  explicit TruncatedResult(DistributedResult r) : inner(std::move(r)) {}
};

inline TruncatedResult truncated_auction(const RewardMatrix& r, double alpha,
                                         const AuctionConfig& cfg = {},
                                         const RoundObserver& observer = {}) {
  RewardMatrix trunc = truncate_rewards(r, alpha);
  TruncatedResult res(distributed_auction(trunc, cfg, observer));
  res.truncated_value = res.inner.assignment.value;
  res.original_value = assignment_value(r, res.inner.assignment);
  return res;
}

}  // namespace chanassign
