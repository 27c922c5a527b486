#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "chanassign/matrix.hpp"
#include "chanassign/rayleigh.hpp"
#include "chanassign/rng.hpp"

namespace chanassign {

inline constexpr double kEulerGamma = 0.5772156649015328606;
inline constexpr double kZeta2 = 1.6449340668482264365;  // pi^2/6

namespace detail {

// e^x E1(x) via the standard continued fraction (modified Lentz), stable for
// large x where E1 itself underflows. Extended precision throughout: the
// order-statistic sums multiply these values by binomials up to ~1e10, so
// double-precision noise here would dominate the alternating cancellation.
inline long double expx_e1_cf(long double x) {
  const long double tiny = 1e-4000L;
  long double f = x + 1.0L;
  if (f == 0) f = tiny;
  long double c = f, d = 0.0L;
  for (int n = 1; n < 500; ++n) {
    const long double a = -static_cast<long double>(n) * n;
    const long double b = x + 1.0L + 2.0L * n;
    d = b + a * d;
    if (d == 0) d = tiny;
    c = b + a / c;
    if (c == 0) c = tiny;
    d = 1.0L / d;
    const long double delta = c * d;
    f *= delta;
    if (std::abs(static_cast<double>(delta - 1.0L)) < 1e-19) break;
  }
  return 1.0L / f;
}

// Euler-Mascheroni constant at extended precision for the series below.
inline constexpr long double kEulerGammaL = 0.577215664901532860606512L;

// E1 power series, x in (0, 1]: -gamma - ln x - sum (-x)^l / (l l!).
inline long double e1_series(long double x) {
  long double sum = 0.0L, term = 1.0L;
  for (int l = 1; l < 200; ++l) {
    term *= -x / l;
    const long double add = -term / l;
    sum += add;
    if (std::abs(static_cast<double>(add)) <
        1e-21 * (std::abs(static_cast<double>(sum)) + 1e-30)) {
      break;
    }
  }
  return -kEulerGammaL - std::log(x) + sum;
}

inline long double expx_e1_ld(long double x) {
  if (x <= 1.0L) return std::exp(x) * e1_series(x);
  return expx_e1_cf(x);
}

}  // namespace detail

/// E1(x) = int_x^inf e^-t / t dt, x > 0.
inline double exp_integral_e1(double x) {
  if (!(x > 0)) throw std::domain_error("exp_integral_e1 requires x > 0");
  if (x <= 1.0) return static_cast<double>(detail::e1_series(x));
  return static_cast<double>(std::exp(-static_cast<long double>(x)) *
                             detail::expx_e1_cf(x));
}

/// e^x E1(x); every bound formula uses this product, which stays O(1/x)
/// where the bare E1 underflows.
inline double expx_e1(double x) {
  if (!(x > 0)) throw std::domain_error("expx_e1 requires x > 0");
  return static_cast<double>(detail::expx_e1_ld(x));
}

inline double harmonic(int n) {
  long double s = 0;
  for (int k = 1; k <= n; ++k) s += 1.0L / k;
  return static_cast<double>(s);
}

inline double harmonic2(int n) {
  long double s = 0;
  for (int k = 1; k <= n; ++k) s += 1.0L / (static_cast<long double>(k) * k);
  return static_cast<double>(s);
}

inline long double binomial_ld(int n, int k) {
  if (k < 0 || k > n) return 0.0L;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Alternating-sum crossover: beyond this K the binomial sums lose too many
/// digits even in extended precision, so the quadrature route takes over.
inline constexpr int kOrderStatSumLimit = 25;

/// Closed form for E[R_{l:K}], the l'th smallest of K i.i.d. Rayleigh rates.
inline double expected_order_stat_sum(int l, int k_total, double lambda) {
  long double sum = 0.0L;
  for (int m = 1; m <= l; ++m) {
    const int d = k_total - l + m;
    const long double term =
        binomial_ld(l, m) * (static_cast<long double>(m) / d) *
        detail::expx_e1_ld(static_cast<long double>(lambda) * d);
    sum += (m % 2 == 1) ? term : -term;
  }
  return static_cast<double>(binomial_ld(k_total, l) * sum);
}

/// Same expectation by quadrature of the survival function,
/// E[R_{l:K}] = int_0^inf P(R_{l:K} > y) dy with
/// P(R_{l:K} > y) = I_{1-F(y)}(K-l+1, l).
inline double expected_order_stat_quadrature(int l, int k_total, double lambda) {
  using boost::math::ibetac;
  const double y_hi = std::log1p(745.0 / lambda);
  auto survival = [&](double y) {
    return ibetac(static_cast<double>(l), static_cast<double>(k_total - l + 1),
                  rate_cdf(y, lambda));
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      survival, 0.0, y_hi, 15, 1e-13);
}

inline double expected_order_stat(int l, int k_total, double lambda) {
  if (l < 1 || l > k_total) throw std::invalid_argument("order stat index out of range");
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  if (k_total <= kOrderStatSumLimit) return expected_order_stat_sum(l, k_total, lambda);
  return expected_order_stat_quadrature(l, k_total, lambda);
}

/// Expected greedy sum-rate L: the k'th user picked takes the best of the
/// K-k+1 channels still free, and his rates there are fresh i.i.d. draws, so
/// L = sum_{m=K-N+1}^{K} E[max of m samples].
inline double greedy_expected_sum(int n_users, int k_total, double lambda) {
  if (n_users > k_total) throw std::invalid_argument("greedy bound needs N <= K");
  double s = 0;
  for (int m = k_total - n_users + 1; m <= k_total; ++m) {
    s += expected_order_stat(m, m, lambda);
  }
  return s;
}

/// The paper's U: N times the expected best of K rates, an upper bound on
/// the expected optimal sum-rate.
inline double optimal_upper_bound(int n_users, int k_total, double lambda) {
  return n_users * expected_order_stat(k_total, k_total, lambda);
}

/// Users visited in a uniformly random order, each takes his best remaining
/// channel (ties to the lowest index). One pass.
inline Assignment randomized_greedy(const RewardMatrix& r, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> order(r.n_users());
  for (int n = 0; n < r.n_users(); ++n) order[n] = n;
  rng.shuffle(order);

  std::vector<char> channel_taken(r.n_channels(), false);
  Assignment a;
  a.channel_of.assign(r.n_users(), kUnassigned);
  for (int n : order) {
    int best = -1;
    for (int k = 0; k < r.n_channels(); ++k) {
      if (channel_taken[k]) continue;
      if (best == -1 || r(n, k) > r(n, best)) best = k;
    }
    if (best == -1) continue;  // more users than channels
    channel_taken[best] = true;
    a.channel_of[n] = best;
  }
  a.value = assignment_value(r, a);
  return a;
}

struct LowSnrGap {
  double asymptotic_limit = 0;  // 1/H_N - 1/N
  double finite_bound = 0;      // limit + (H_N/lambda)(1/8 + pi^2/54)
  double u_upper = 0;           // U <= (N/lambda) H_N
  double l_lower = 0;           // L >= sum_m H_m/l - (H_m^2 + H_m^(2))/(2 l^2)
};

inline LowSnrGap low_snr_gap(int n, double lambda) {
  if (n < 1 || lambda <= 0) throw std::invalid_argument("low_snr_gap: bad arguments");
  LowSnrGap g;
  const double hn = harmonic(n);
  g.asymptotic_limit = 1.0 / hn - 1.0 / n;
  g.finite_bound =
      g.asymptotic_limit + (hn / lambda) * (0.125 + kZeta2 / 9.0);
  g.u_upper = n * hn / lambda;
  // log(1+x) >= x - x^2/2 pointwise, and the max of m Exp(lambda) draws has
  // mean H_m/lambda and second moment (H_m^2 + H_m^(2))/lambda^2.
  double l = 0;
  for (int m = 1; m <= n; ++m) {
    const double hm = harmonic(m);
    l += hm / lambda -
         (hm * hm + harmonic2(m)) / (2 * lambda * lambda);
  }
  g.l_lower = l;
  return g;
}

struct HighSnrGap {
  double exact_c = 0;  // lim_{lambda->0} (U - L), double-sum form
  double closed_form_upper =
      std::numeric_limits<double>::quiet_NaN();  // defined for N >= 3 only
};

/// High-SNR gap constant c of the greedy bound. The double sum is evaluated
/// in extended precision; the cancellation grows with N, keep N <= 25.
inline HighSnrGap high_snr_gap_constant(int n) {
  if (n < 2) throw std::invalid_argument("high_snr_gap_constant requires N >= 2");
  HighSnrGap g;
  long double term1 = 0.0L;
  for (int m = 2; m <= n; ++m) {
    const long double t = binomial_ld(n, m) * std::log(static_cast<long double>(m));
    term1 += (m % 2 == 0) ? t : -t;
  }
  long double term2 = 0.0L;
  for (int m = 2; m <= n; ++m) {
    for (int j = 2; j <= m; ++j) {
      const long double t = binomial_ld(m, j) * std::log(static_cast<long double>(j));
      term2 += (j % 2 == 0) ? t : -t;
    }
  }
  g.exact_c = static_cast<double>(n * term1 - term2);

  if (n >= 3) {
    const double ln_n = std::log(static_cast<double>(n));
    const double ln2 = std::log(2.0);
    g.closed_form_upper =
        (n - 1) * std::log(std::log(static_cast<double>(n - 1))) + kEulerGamma +
        1.0 / ln_n +
        (n - 2) * (-std::log(ln2) + kEulerGamma * (1.0 / ln_n - 1.0 / ln2));
  }
  return g;
}

struct BoundReport {
  int n_users = 0;
  int n_channels = 0;
  double lambda = 0;
  double snr_db = 0;
  double lower = 0;         // L, nats per channel use summed over users
  double upper = 0;         // U
  double relative_gap = 0;  // (U - L) / U
  bool low_snr_regime = false;
  bool high_snr_regime = false;
};

inline BoundReport make_bound_report(int n_users, int k_total, double lambda) {
  BoundReport b;
  b.n_users = n_users;
  b.n_channels = k_total;
  b.lambda = lambda;
  b.snr_db = 10.0 * std::log10(1.0 / lambda);
  b.lower = greedy_expected_sum(n_users, k_total, lambda);
  b.upper = optimal_upper_bound(n_users, k_total, lambda);
  b.relative_gap = b.upper > 0 ? (b.upper - b.lower) / b.upper : 0.0;
  b.low_snr_regime = lambda >= 10.0;        // 1/(m lambda) << 1
  b.high_snr_regime = lambda * k_total <= 0.1;  // m lambda << 1
  return b;
}

}  // namespace chanassign
