#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bridgekit/data.hpp"
#include "bridgekit/errors.hpp"
#include "bridgekit/estimator.hpp"
#include "bridgekit/numerics.hpp"
#include "bridgekit/penalty.hpp"
#include "bridgekit/rng.hpp"

namespace bridgekit {

enum class Criterion { kGbic, kMaic, kMbic, kAicc, kCv, kGcv, kEic };

inline const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::kGbic: return "gbic";
    case Criterion::kMaic: return "maic";
    case Criterion::kMbic: return "mbic";
    case Criterion::kAicc: return "aicc";
    case Criterion::kCv:   return "cv";
    case Criterion::kGcv:  return "gcv";
    case Criterion::kEic:  return "eic";
  }
  return "?";
}

inline std::optional<Criterion> parse_criterion(const std::string& name) {
  for (Criterion c : {Criterion::kGbic, Criterion::kMaic, Criterion::kMbic,
                      Criterion::kAicc, Criterion::kCv, Criterion::kGcv,
                      Criterion::kEic})
    if (name == criterion_name(c)) return c;
  return std::nullopt;
}

// A criterion score; lower is better.  Scores that cannot be evaluated at a
// grid point (singular systems, poles, non-finite values) come back with
// valid = false and a note instead of raising.
struct CriterionValue {
  double value = 0.0;
  bool valid = false;
  std::string note;
};

namespace detail {

inline Matrix active_columns(const Dataset& data,
                             const std::vector<int>& active) {
  Matrix xa(data.n(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t a = 0; a < active.size(); ++a)
    xa.col(a) = data.x.col(active[a]);
  return xa;
}

// M = X_A'X_A + Sigma_{lambda,q}(beta_A), the LQA-penalized normal matrix at
// the fitted values.
inline Matrix hat_normal_matrix(const BridgeFit& fit, const Matrix& xa) {
  Matrix m;
  m.noalias() = xa.transpose() * xa;
  const int n = static_cast<int>(xa.rows());
  for (std::size_t a = 0; a < fit.active_set.size(); ++a)
    m(a, a) += lqa_weight(fit.beta_hat[fit.active_set[a]], fit.hyperparams,
                          fit.sigma2_hat, n);
  return m;
}

// Cholesky of the penalized normal matrix; LLT's info() misses exactly
// semidefinite inputs (rounding keeps the pivots nonnegative), so back it up
// with a reciprocal-condition check.
inline Eigen::LLT<Matrix> hat_llt(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12)
    throw SingularSystem("hat matrix: penalized normal matrix is singular");
  return llt;
}

// Diagonal of the hat matrix without forming the full n x n product.
inline Vector hat_diag(const BridgeFit& fit, const Dataset& data) {
  const int n = data.n();
  if (fit.active_set.empty()) return Vector::Zero(n);
  Matrix xa = active_columns(data, fit.active_set);
  Eigen::LLT<Matrix> llt = hat_llt(hat_normal_matrix(fit, xa));
  Matrix z = llt.solve(xa.transpose());
  Vector diag(n);
  for (int i = 0; i < n; ++i) diag[i] = xa.row(i).dot(z.col(i));
  return diag;
}

inline CriterionValue invalid(const std::string& note) {
  return {0.0, false, note};
}

inline CriterionValue checked(double value) {
  if (!std::isfinite(value)) return invalid("non-finite value");
  return {value, true, ""};
}

}  // namespace detail

// S = X_A (X_A'X_A + Sigma_{lambda,q}(beta_A))^-1 X_A'.  Zero matrix when the
// active set is empty.
inline Matrix hat_matrix(const BridgeFit& fit, const Dataset& data) {
  const int n = data.n();
  if (fit.active_set.empty()) return Matrix::Zero(n, n);
  Matrix xa = detail::active_columns(data, fit.active_set);
  Eigen::LLT<Matrix> llt = detail::hat_llt(detail::hat_normal_matrix(fit, xa));
  return xa * llt.solve(xa.transpose());
}

inline CriterionValue maic(const BridgeFit& fit, const Dataset& data) {
  try {
    double tr = detail::hat_diag(fit, data).sum();
    return detail::checked(-2.0 * log_likelihood(fit, data) + 2.0 * tr);
  } catch (const SingularSystem& e) {
    return detail::invalid(e.what());
  }
}

inline CriterionValue mbic(const BridgeFit& fit, const Dataset& data) {
  try {
    double tr = detail::hat_diag(fit, data).sum();
    return detail::checked(-2.0 * log_likelihood(fit, data) +
                           tr * std::log(static_cast<double>(data.n())));
  } catch (const SingularSystem& e) {
    return detail::invalid(e.what());
  }
}

inline CriterionValue aicc(const BridgeFit& fit, const Dataset& data) {
  try {
    const double n = data.n();
    double tr = detail::hat_diag(fit, data).sum();
    double denom = n - tr - 2.0;
    if (denom <= 0.0) return detail::invalid("AICc pole: n - trS - 2 <= 0");
    return detail::checked(-2.0 * log_likelihood(fit, data) +
                           2.0 * n * (tr + 1.0) / denom);
  } catch (const SingularSystem& e) {
    return detail::invalid(e.what());
  }
}

inline CriterionValue cv_score(const BridgeFit& fit, const Dataset& data) {
  try {
    const int n = data.n();
    Vector diag = detail::hat_diag(fit, data);
    Vector resid = data.y - data.x * fit.beta_hat;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double denom = 1.0 - diag[i];
      if (denom <= 0.0) return detail::invalid("CV pole: s_ii >= 1");
      double term = resid[i] / denom;
      sum += term * term;
    }
    return detail::checked(sum / n);
  } catch (const SingularSystem& e) {
    return detail::invalid(e.what());
  }
}

inline CriterionValue gcv(const BridgeFit& fit, const Dataset& data) {
  try {
    const int n = data.n();
    double tr = detail::hat_diag(fit, data).sum();
    double denom = 1.0 - tr / n;
    if (denom <= 0.0) return detail::invalid("GCV pole: trS >= n");
    Vector resid = data.y - data.x * fit.beta_hat;
    return detail::checked(resid.squaredNorm() / (denom * denom) / n);
  } catch (const SingularSystem& e) {
    return detail::invalid(e.what());
  }
}

// GBIC = -2 log of the Laplace-approximated partial marginal likelihood with
// the bridge prior restricted to the active coordinates.
inline CriterionValue gbic(const BridgeFit& fit, const Dataset& data) {
  const int n = data.n();
  const double s2 = fit.sigma2_hat;
  if (!(s2 > 0.0)) return detail::invalid("zero residual variance");
  const double q = fit.hyperparams.q;
  const double nl = static_cast<double>(n) * fit.hyperparams.lambda;
  const int r = static_cast<int>(fit.active_set.size());

  Matrix j(r + 1, r + 1);
  double penalty_sum = 0.0;
  if (r > 0) {
    Matrix xa = detail::active_columns(data, fit.active_set);
    Vector resid = data.y - data.x * fit.beta_hat;
    j.topLeftCorner(r, r).noalias() = xa.transpose() * xa;
    for (int a = 0; a < r; ++a) {
      double b = fit.beta_hat[fit.active_set[a]];
      penalty_sum += detail::abs_pow(b, q);
      j(a, a) += nl * s2 * q * (q - 1.0) * 0.5 * detail::abs_pow(b, q - 2.0);
    }
    j.topLeftCorner(r, r) /= n * s2;
    Vector cross = xa.transpose() * resid / (n * s2 * s2);
    j.topRightCorner(r, 1) = cross;
    j.bottomLeftCorner(1, r) = cross.transpose();
  }
  j(r, r) = 1.0 / (2.0 * s2 * s2);
  if (!j.allFinite()) return detail::invalid("non-finite J");

  auto sld = log_det_signed(j);
  if (sld.sign <= 0) return detail::invalid("det J <= 0");

  const double two_pi = 2.0 * std::numbers::pi;
  double value = n * std::log(two_pi) + n * std::log(s2) + n -
                 (r + 1) * std::log(two_pi / n) + sld.log_abs_det;
  if (r > 0) {
    value += -2.0 * r * std::log(q) +
             2.0 * r * (1.0 + 1.0 / q) * std::numbers::ln2 -
             (2.0 * r / q) * std::log(nl) + 2.0 * r * std::lgamma(1.0 / q) +
             nl * penalty_sum;
  }
  return detail::checked(value);
}

// ---------------------------------------------------------------------------
// EIC: bootstrap-estimated optimism.  Pairs (y_i, x_i) are resampled with
// replacement, each resample is re-standardized and refitted at the same
// (lambda, q), and the optimism of the refit is averaged over replicates.
// Replicates whose resample cannot be standardized (constant column), whose
// refit hits a singular system, or whose refit interpolates (sigma2 = 0) are
// dropped; more than 20% drops invalidates the score.
// ---------------------------------------------------------------------------

struct EicResample {
  Dataset std_data;
  StandardizationParams params;
  DesignGram gram;
};

// Everything about the B resamples that does not depend on (lambda, q).
// A selection scan builds this once so every grid point sees the same
// resamples; the index stream depends only on (seed, B, n), drawn in
// replicate-major order.
struct EicContext {
  int b_requested = 0;
  std::vector<std::optional<EicResample>> resamples;

  static EicContext build(const Dataset& data, int b, std::uint64_t seed) {
    const int n = data.n();
    Rng rng(seed);
    EicContext ctx;
    ctx.b_requested = b;
    ctx.resamples.reserve(b);
    for (int rep = 0; rep < b; ++rep) {
      Dataset raw;
      raw.x.resize(n, data.p());
      raw.y.resize(n);
      for (int i = 0; i < n; ++i) {
        int idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        raw.x.row(i) = data.x.row(idx);
        raw.y[i] = data.y[idx];
      }
      try {
        auto [std_data, params] = standardize(raw);
        DesignGram gram = compute_gram(std_data);
        ctx.resamples.push_back(
            EicResample{std::move(std_data), std::move(params), std::move(gram)});
      } catch (const ConstantColumn&) {
        ctx.resamples.push_back(std::nullopt);
      }
    }
    return ctx;
  }
};

// Per-replicate optimism estimates plus the baseline -2 log likelihood;
// useful for diagnostics and for checking the bootstrap against analytic
// optimism on toy models.
struct EicBreakdown {
  double minus2_loglik = 0.0;
  std::vector<double> biases;  // one per kept replicate
  int dropped = 0;
};

inline EicBreakdown eic_breakdown(const BridgeFit& fit, const Dataset& data,
                                  const EicContext& ctx,
                                  const FitConfig& cfg = {}) {
  EicBreakdown out;
  out.minus2_loglik = -2.0 * log_likelihood(fit, data);
  for (const auto& res : ctx.resamples) {
    if (!res) {
      ++out.dropped;
      continue;
    }
    BridgeFit refit;
    try {
      refit = fit_bridge_gram(res->std_data, res->gram, fit.hyperparams, cfg);
    } catch (const SingularSystem&) {
      ++out.dropped;
      continue;
    }
    if (!(refit.sigma2_hat > 0.0)) {
      ++out.dropped;
      continue;
    }
    double term1 = log_likelihood(refit, res->std_data);
    Vector pred = predict(refit, data.x, res->params);
    const int n = data.n();
    double rss = (data.y - pred).squaredNorm();
    double term2 =
        -0.5 * n * std::log(2.0 * std::numbers::pi * refit.sigma2_hat) -
        rss / (2.0 * refit.sigma2_hat);
    out.biases.push_back(term1 - term2);
  }
  return out;
}

inline CriterionValue eic_with_context(const BridgeFit& fit,
                                       const Dataset& data,
                                       const EicContext& ctx,
                                       const FitConfig& cfg = {}) {
  EicBreakdown bd = eic_breakdown(fit, data, ctx, cfg);
  if (bd.dropped > 0.2 * ctx.b_requested)
    return detail::invalid("EIC: more than 20% of replicates failed");
  if (bd.biases.empty()) return detail::invalid("EIC: no usable replicates");
  double mean_bias = 0.0;
  for (double b : bd.biases) mean_bias += b;
  mean_bias /= static_cast<double>(bd.biases.size());
  return detail::checked(bd.minus2_loglik + 2.0 * mean_bias);
}

inline CriterionValue eic(const BridgeFit& fit, const Dataset& data, int b,
                          std::uint64_t seed, const FitConfig& cfg = {}) {
  return eic_with_context(fit, data, EicContext::build(data, b, seed), cfg);
}

}  // namespace bridgekit
