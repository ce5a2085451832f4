#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "bridgekit/data.hpp"
#include "bridgekit/errors.hpp"
#include "bridgekit/numerics.hpp"
#include "bridgekit/penalty.hpp"

namespace bridgekit {

struct FitConfig {
  double ridge_init_gamma = 1e-5;  // gamma in the ridge initializer
  double delta = 1e-5;             // convergence threshold on ||step||_2
  int max_iters = 500;
  double prune_threshold = 1e-8;
};

struct BridgeFit {
  Vector beta_hat;              // full length; pruned entries are exact zeros
  double sigma2_hat = 0.0;
  std::vector<int> active_set;  // 0-based column indices, ascending
  int iterations = 0;
  bool converged = false;
  double final_step_norm = 0.0;
  double penalized_loglik = 0.0;
  Hyperparams hyperparams;
};

// X'X, X'y, y'y computed once per dataset and shared across the many fits a
// grid search performs.
struct DesignGram {
  Matrix xtx;
  Vector xty;
  double yty = 0.0;
};

inline DesignGram compute_gram(const Dataset& data) {
  DesignGram g;
  g.xtx.noalias() = data.x.transpose() * data.x;
  g.xty.noalias() = data.x.transpose() * data.y;
  g.yty = data.y.squaredNorm();
  return g;
}

// Iterate snapshots for the majorization/monotonicity property tests.
// betas[0] / sigma2s[0] hold the (pruned) initializer state.
struct FitTrace {
  std::vector<Vector> betas;
  std::vector<double> sigma2s;
};

namespace detail {

inline Matrix gram_submatrix(const Matrix& xtx, const std::vector<int>& idx) {
  const int r = static_cast<int>(idx.size());
  Matrix sub(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) sub(a, b) = xtx(idx[a], idx[b]);
  return sub;
}

inline Vector subvector(const Vector& v, const std::vector<int>& idx) {
  Vector sub(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) sub[a] = v[idx[a]];
  return sub;
}

}  // namespace detail

// Local quadratic approximation estimator for the bridge penalty.
//
//   init   beta = (X'X + n*gamma*I)^-1 X'y, sigma2 = 1
//   step   beta_A = (X_A'X_A + D)^-1 X_A'y with
//          D = diag(n lambda sigma2 q |beta_j|^(q-2) / 4)
//          sigma2 = ||y - X beta||^2 / n
//   stop   when the full-vector step norm drops below delta, or max_iters
//
// Coefficients whose magnitude falls below prune_threshold are set to exact
// zero and leave the active set permanently (including at the initializer).
// An empty active set is the null model, not an error.  warm_start, when
// given, replaces the ridge initializer.
inline BridgeFit fit_bridge_gram(const Dataset& data, const DesignGram& gram,
                                 const Hyperparams& hp, const FitConfig& cfg,
                                 const Vector* warm_start = nullptr,
                                 FitTrace* trace = nullptr) {
  validate(hp);
  if (!data.standardized)
    throw Error("fit_bridge: dataset must be standardized first");
  const int n = data.n();
  const int p = data.p();

  auto solve_or_singular = [](const Matrix& a, const Vector& b,
                              const char* what) {
    try {
      return solve_spd(a, b);
    } catch (const NotPositiveDefinite&) {
      throw SingularSystem(what);
    }
  };

  Vector beta;
  if (warm_start) {
    if (warm_start->size() != p)
      throw DimensionMismatch("fit_bridge: warm start length != p");
    beta = *warm_start;
  } else {
    Matrix a = gram.xtx;
    a.diagonal().array() += static_cast<double>(n) * cfg.ridge_init_gamma;
    beta = solve_or_singular(a, gram.xty, "fit_bridge: ridge initializer");
  }

  std::vector<int> active;
  active.reserve(p);
  for (int j = 0; j < p; ++j) {
    if (std::abs(beta[j]) >= cfg.prune_threshold)
      active.push_back(j);
    else
      beta[j] = 0.0;
  }

  double sigma2 = 1.0;
  if (trace) {
    trace->betas = {beta};
    trace->sigma2s = {sigma2};
  }

  Matrix gram_sub = detail::gram_submatrix(gram.xtx, active);
  Vector xty_sub = detail::subvector(gram.xty, active);

  auto rss_of = [&](const Vector& beta_sub) {
    double quad = beta_sub.dot(gram_sub * beta_sub);
    double cross = beta_sub.dot(xty_sub);
    return std::max(0.0, gram.yty - 2.0 * cross + quad);
  };

  BridgeFit fit;
  fit.hyperparams = hp;
  int iter = 0;
  bool converged = false;
  double step_norm = 0.0;
  while (iter < cfg.max_iters) {
    ++iter;
    Vector beta_next = Vector::Zero(p);
    bool pruned = false;
    if (!active.empty()) {
      Matrix m = gram_sub;
      for (std::size_t a = 0; a < active.size(); ++a)
        m(a, a) += lqa_weight(beta[active[a]], hp, sigma2, n,
                              cfg.prune_threshold);
      Vector beta_sub =
          solve_or_singular(m, xty_sub, "fit_bridge: LQA system singular");
      std::vector<int> survivors;
      survivors.reserve(active.size());
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (std::abs(beta_sub[a]) >= cfg.prune_threshold) {
          beta_next[active[a]] = beta_sub[a];
          survivors.push_back(active[a]);
        } else {
          pruned = true;
        }
      }
      if (pruned) {
        active = std::move(survivors);
        gram_sub = detail::gram_submatrix(gram.xtx, active);
        xty_sub = detail::subvector(gram.xty, active);
      }
    }
    step_norm = (beta_next - beta).norm();
    beta = std::move(beta_next);
    sigma2 = active.empty() ? gram.yty / n
                            : rss_of(detail::subvector(beta, active)) / n;
    if (trace) {
      trace->betas.push_back(beta);
      trace->sigma2s.push_back(sigma2);
    }
    if (step_norm < cfg.delta) {
      converged = true;
      break;
    }
  }

  fit.beta_hat = std::move(beta);
  fit.active_set = std::move(active);
  fit.iterations = iter;
  fit.converged = converged;
  fit.final_step_norm = step_norm;
  // Recompute the final variance from the actual residual so the reported
  // value is exactly consistent with beta_hat.
  double rss = (data.y - data.x * fit.beta_hat).squaredNorm();
  fit.sigma2_hat = rss / n;
  double loglik =
      fit.sigma2_hat > 0.0
          ? -0.5 * n * (std::log(2.0 * std::numbers::pi * fit.sigma2_hat) + 1.0)
          : std::numeric_limits<double>::infinity();
  fit.penalized_loglik = loglik - bridge_penalty_term(fit.beta_hat, hp, n);
  return fit;
}

inline BridgeFit fit_bridge(const Dataset& data, const Hyperparams& hp,
                            const FitConfig& cfg = {}) {
  return fit_bridge_gram(data, compute_gram(data), hp, cfg);
}

// Gaussian log likelihood of the fit evaluated on (possibly different)
// standardized-coordinate data.
inline double log_likelihood(const BridgeFit& fit, const Dataset& data) {
  if (data.p() != static_cast<int>(fit.beta_hat.size()))
    throw DimensionMismatch("log_likelihood: column count mismatch");
  const int n = data.n();
  if (!(fit.sigma2_hat > 0.0))
    return std::numeric_limits<double>::infinity();
  double rss = (data.y - data.x * fit.beta_hat).squaredNorm();
  return -0.5 * n * std::log(2.0 * std::numbers::pi * fit.sigma2_hat) -
         rss / (2.0 * fit.sigma2_hat);
}

// Predictions for raw (unstandardized) rows: the train-set transform is
// applied to x_new and the train response mean added back.
inline Vector predict(const Vector& beta, const Matrix& x_new,
                      const StandardizationParams& params) {
  if (x_new.cols() != static_cast<Eigen::Index>(params.x_means.size()) ||
      x_new.cols() != beta.size())
    throw DimensionMismatch("predict: column count mismatch");
  Matrix xs = (x_new.rowwise() - params.x_means.transpose()).array().rowwise() /
              params.x_scales.transpose().array();
  return (xs * beta).array() + params.y_mean;
}

inline Vector predict(const BridgeFit& fit, const Matrix& x_new,
                      const StandardizationParams& params) {
  return predict(fit.beta_hat, x_new, params);
}

}  // namespace bridgekit
