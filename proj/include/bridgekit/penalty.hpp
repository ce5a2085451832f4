#pragma once

#include <cmath>
#include <numbers>

#include "bridgekit/errors.hpp"
#include "bridgekit/numerics.hpp"

namespace bridgekit {

// Coefficients with |beta_j| below this are treated as exact zeros.
inline constexpr double kPruneThreshold = 1e-8;

struct Hyperparams {
  double lambda = 0.0;  // penalty level, > 0
  double q = 0.0;       // bridge exponent, > 0
};

inline void validate(const Hyperparams& hp) {
  if (!(hp.lambda > 0.0) || !std::isfinite(hp.lambda))
    throw Error("hyperparams: lambda must be positive");
  if (!(hp.q > 0.0) || !std::isfinite(hp.q))
    throw Error("hyperparams: q must be positive");
}

namespace detail {
// |b|^e with fast paths for the exponents the default grids hit constantly.
inline double abs_pow(double b, double e) {
  double a = std::abs(b);
  if (e == 0.0) return 1.0;
  if (e == 1.0) return a;
  if (e == -1.0) return 1.0 / a;
  if (e == 2.0) return a * a;
  return std::pow(a, e);
}
}  // namespace detail

// (n * lambda / 2) * sum_j |beta_j|^q
inline double bridge_penalty_term(const Vector& beta, const Hyperparams& hp,
                                  int n) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    sum += detail::abs_pow(beta[j], hp.q);
  return 0.5 * n * hp.lambda * sum;
}

// Diagonal entry of the local quadratic approximation penalty matrix:
// n * lambda * sigma2 * q * |b|^(q-2) / 4.  Pruned coefficients must never
// reach this call.
inline double lqa_weight(double b, const Hyperparams& hp, double sigma2, int n,
                         double zero_threshold = kPruneThreshold) {
  if (std::abs(b) < zero_threshold)
    throw DegenerateCoefficient("lqa_weight: coefficient below prune threshold");
  return 0.25 * n * hp.lambda * sigma2 * hp.q * detail::abs_pow(b, hp.q - 2.0);
}

// Log density of the bridge prior, summed over the given coordinates:
// each term is q * 2^-(1+1/q) * (n lambda)^(1/q) / Gamma(1/q)
//             * exp(-(n lambda / 2) |b|^q).
inline double log_prior(const Vector& beta, const Hyperparams& hp, int n) {
  const double inv_q = 1.0 / hp.q;
  const double nl = static_cast<double>(n) * hp.lambda;
  const double log_norm = std::log(hp.q) - (1.0 + inv_q) * std::numbers::ln2 +
                          inv_q * std::log(nl) - std::lgamma(inv_q);
  return static_cast<double>(beta.size()) * log_norm -
         bridge_penalty_term(beta, hp, n);
}

}  // namespace bridgekit
