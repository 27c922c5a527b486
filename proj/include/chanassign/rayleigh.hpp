#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "chanassign/matrix.hpp"
#include "chanassign/rng.hpp"

namespace chanassign {

enum class LogBase { Natural, Base2 };

/// i.i.d. Rayleigh fading: SNR(n,k) ~ Exponential(lambda), mean SNR = 1/lambda.
struct ChannelModel {
  int n_users = 1;
  int n_channels = 1;
  double lambda = 1.0;
  double weight = 1.0;
  LogBase log_base = LogBase::Natural;
};

/// lambda = sigma^2 r^alpha / (p G).
inline double lambda_of(double noise_power, double distance,
                        double path_loss_exp, double tx_power, double gain) {
  if (noise_power <= 0 || distance <= 0 || tx_power <= 0 || gain <= 0) {
    throw std::invalid_argument("lambda_of parameters must be positive");
  }
  return noise_power * std::pow(distance, path_loss_exp) / (tx_power * gain);
}

inline double snr_db_to_lambda(double snr_db) {
  return 1.0 / std::pow(10.0, snr_db / 10.0);
}

/// CDF of the per-channel rate, F(y) = 1 - exp(-lambda (e^y - 1)) for y >= 0
/// (natural-log rate definition).
inline double rate_cdf(double y, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  if (y < 0) return 0.0;
  return -std::expm1(-lambda * std::expm1(y));
}

/// R(n,k) = w log(1 + SNR(n,k)), deterministic given the seed.
inline RewardMatrix sample_rate_matrix(const ChannelModel& model,
                                       std::uint64_t seed) {
  if (model.lambda <= 0) throw std::invalid_argument("lambda must be positive");
  Rng rng(seed);
  RewardMatrix r(model.n_users, model.n_channels);
  const double log_scale =
      model.log_base == LogBase::Base2 ? 1.0 / std::log(2.0) : 1.0;
  for (int n = 0; n < model.n_users; ++n) {
    for (int k = 0; k < model.n_channels; ++k) {
      double snr = rng.exponential(model.lambda);
      r(n, k) = model.weight * std::log1p(snr) * log_scale;
    }
  }
  return r;
}

/// Uniform [0,1) entries; used by the rank-law and outage experiments.
inline RewardMatrix sample_uniform_matrix(int n_users, int n_channels,
                                          std::uint64_t seed) {
  Rng rng(seed);
  RewardMatrix r(n_users, n_channels);
  for (int n = 0; n < n_users; ++n)
    for (int k = 0; k < n_channels; ++k) r(n, k) = rng.uniform01();
  return r;
}

/// Exp(1) entries; used by the random-assignment statistics experiments.
inline RewardMatrix sample_exp1_matrix(int n_users, int n_channels,
                                       std::uint64_t seed) {
  Rng rng(seed);
  RewardMatrix r(n_users, n_channels);
  for (int n = 0; n < n_users; ++n)
    for (int k = 0; k < n_channels; ++k) r(n, k) = rng.exponential(1.0);
  return r;
}

}  // namespace chanassign
