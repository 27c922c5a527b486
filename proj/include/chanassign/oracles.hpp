#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "chanassign/matrix.hpp"

namespace chanassign {

inline constexpr int kBruteForceLimit = 10;

/// Exhaustive maximization of the assignment objective. Guarded to
/// max(N, K) <= kBruteForceLimit. Among optima the lexicographically
/// smallest padded mapping wins (permutations are enumerated in
/// lexicographic order and only strict improvements are kept).
inline Assignment brute_force_optimal(const RewardMatrix& r) {
  const int s = std::max(r.n_users(), r.n_channels());
  if (s > kBruteForceLimit) {
    throw std::invalid_argument(
        "brute_force_optimal refused: max(n_users, n_channels) = " +
        std::to_string(s) + " exceeds limit " +
        std::to_string(kBruteForceLimit));
  }
  r.validate();
  std::vector<int> perm(s);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm;
  double best = -1.0;
  do {
    double v = 0;
    for (int n = 0; n < r.n_users(); ++n) {
      if (perm[n] < r.n_channels()) v += r(n, perm[n]);
    }
    if (v > best) {
      best = v;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Assignment a;
  a.channel_of.resize(r.n_users());
  for (int n = 0; n < r.n_users(); ++n) {
    a.channel_of[n] = best_perm[n] < r.n_channels() ? best_perm[n] : kUnassigned;
  }
  a.value = best;
  return a;
}

namespace detail {

// Jonker-Volgenant style shortest augmenting path, minimizing. cost is a
// square s x s row-major matrix. Returns col index per row.
inline std::vector<int> min_cost_assignment(const std::vector<double>& cost, int s) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(s + 1, 0.0), v(s + 1, 0.0);
  std::vector<int> p(s + 1, 0), way(s + 1, 0);
  for (int i = 1; i <= s; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(s + 1, inf);
    std::vector<char> used(s + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= s; ++j) {
        if (used[j]) continue;
        double cur = cost[static_cast<std::size_t>(i0 - 1) * s + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= s; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(s, -1);
  for (int j = 1; j <= s; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost square assignment, the workhorse behind hungarian_optimal and
/// the random-assignment experiments. O(s^3).
inline Assignment min_cost_optimal(const RewardMatrix& cost) {
  if (cost.n_users() != cost.n_channels()) {
    throw std::invalid_argument("min_cost_optimal needs a square matrix");
  }
  const int s = cost.n_users();
  std::vector<double> c(static_cast<std::size_t>(s) * s);
  for (int n = 0; n < s; ++n)
    for (int k = 0; k < s; ++k) c[static_cast<std::size_t>(n) * s + k] = cost(n, k);
  Assignment a;
  a.channel_of = detail::min_cost_assignment(c, s);
  a.value = assignment_value(cost, a);
  return a;
}

/// O(N^3) exact maximizer (dual potentials / shortest augmenting paths).
/// Rectangular inputs are padded with zeros internally; users landing on a
/// padded channel come back as kUnassigned.
inline Assignment hungarian_optimal(const RewardMatrix& r) {
  r.validate();
  const int s = std::max(r.n_users(), r.n_channels());
  std::vector<double> cost(static_cast<std::size_t>(s) * s, 0.0);
  for (int n = 0; n < r.n_users(); ++n)
    for (int k = 0; k < r.n_channels(); ++k)
      cost[static_cast<std::size_t>(n) * s + k] = -r(n, k);
  std::vector<int> row_to_col = detail::min_cost_assignment(cost, s);

  Assignment a;
  a.channel_of.resize(r.n_users());
  for (int n = 0; n < r.n_users(); ++n) {
    a.channel_of[n] = row_to_col[n] < r.n_channels() ? row_to_col[n] : kUnassigned;
  }
  a.value = assignment_value(r, a);
  return a;
}

}  // namespace chanassign
