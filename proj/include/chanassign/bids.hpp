#pragma once

#include <vector>

#include "chanassign/matrix.hpp"

namespace chanassign {

/// Per-user local bid matrix B(n,k). This is the entire mutable state of the
/// distributed auction: each user only ever reads his own row.
struct BidState {
  explicit BidState(int n_users, int n_channels)
      : bids(n_users, n_channels, 0.0),
        assigned(n_users, false),
        dropped_out(n_users, false),
        current_target(n_users, kUnassigned) {}

  RewardMatrix bids;  // reused as a plain nonnegative matrix
  std::vector<char> assigned;
  std::vector<char> dropped_out;
  std::vector<int> current_target;

  int n_users() const { return bids.n_users(); }
  int n_channels() const { return bids.n_channels(); }
};

using PriceVector = std::vector<double>;

/// rho_k = max_n B(n,k).
inline PriceVector prices_from_bids(const BidState& b) {
  PriceVector rho(b.n_channels(), 0.0);
  for (int k = 0; k < b.n_channels(); ++k) {
    double m = b.bids(0, k);
    for (int n = 1; n < b.n_users(); ++n) m = std::max(m, b.bids(n, k));
    rho[k] = m;
  }
  return rho;
}

/// Result of a per-user slackness check. Users the condition does not apply
/// to (unassigned) are reported as NotApplicable, never as failures.
enum class CsStatus { Pass, Fail, NotApplicable };

inline bool all_pass(const std::vector<CsStatus>& v) {
  for (CsStatus s : v)
    if (s == CsStatus::Fail) return false;
  return true;
}

/// eps-CS against global prices: R(n,eta_n) - rho_{eta_n} >= max_k(R(n,k) - rho_k) - eps.
inline std::vector<CsStatus> check_eps_cs(const RewardMatrix& r,
                                          const PriceVector& rho,
                                          const Assignment& a, double eps) {
  std::vector<CsStatus> out(r.n_users(), CsStatus::NotApplicable);
  for (int n = 0; n < r.n_users(); ++n) {
    int kn = a.channel_of[n];
    if (kn == kUnassigned) continue;
    double best = r(n, 0) - rho[0];
    for (int k = 1; k < r.n_channels(); ++k) best = std::max(best, r(n, k) - rho[k]);
    out[n] = (r(n, kn) - rho[kn] >= best - eps) ? CsStatus::Pass : CsStatus::Fail;
  }
  return out;
}

/// Local eps-CS: the same condition against the user's own bid row.
inline std::vector<CsStatus> check_local_eps_cs(const RewardMatrix& r,
                                                const BidState& b,
                                                const Assignment& a,
                                                double eps) {
  std::vector<CsStatus> out(r.n_users(), CsStatus::NotApplicable);
  for (int n = 0; n < r.n_users(); ++n) {
    int kn = a.channel_of[n];
    if (kn == kUnassigned) continue;
    double best = r(n, 0) - b.bids(n, 0);
    for (int k = 1; k < r.n_channels(); ++k) {
      best = std::max(best, r(n, k) - b.bids(n, k));
    }
    out[n] = (r(n, kn) - b.bids(n, kn) >= best - eps) ? CsStatus::Pass
                                                      : CsStatus::Fail;
  }
  return out;
}

}  // namespace chanassign
