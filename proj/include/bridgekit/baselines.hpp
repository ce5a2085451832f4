#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bridgekit/data.hpp"
#include "bridgekit/errors.hpp"
#include "bridgekit/estimator.hpp"
#include "bridgekit/numerics.hpp"
#include "bridgekit/rng.hpp"

namespace bridgekit {

struct BaselineFit {
  Vector beta_hat;
  // "lambda" for ridge/lasso, "lambda" and "alpha" for the elastic net.
  std::map<std::string, double> selected;
};

inline BaselineFit fit_ols(const Dataset& data) {
  DesignGram g = compute_gram(data);
  try {
    return {solve_spd(g.xtx, g.xty), {}};
  } catch (const NotPositiveDefinite&) {
    throw SingularSystem("ols: X'X is singular");
  }
}

// Ridge beta = (X'X + n lambda I)^-1 X'y with lambda chosen by exact
// leave-one-out CV through the shortcut ((y_i - yhat_i)/(1 - s_ii))^2.
// Ties prefer the earlier grid entry.
inline BaselineFit fit_ridge_loocv(const Dataset& data,
                                   const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw Error("ridge: empty lambda grid");
  const int n = data.n();
  DesignGram g = compute_gram(data);
  std::optional<double> best_score;
  double best_lambda = 0.0;
  Vector best_beta;
  for (double lambda : lambdas) {
    Matrix m = g.xtx;
    m.diagonal().array() += static_cast<double>(n) * lambda;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) continue;
    Vector beta = llt.solve(g.xty);
    Matrix z = llt.solve(data.x.transpose());
    Vector resid = data.y - data.x * beta;
    double score = 0.0;
    bool usable = true;
    for (int i = 0; i < n; ++i) {
      double denom = 1.0 - data.x.row(i).dot(z.col(i));
      if (denom <= 0.0) {
        usable = false;
        break;
      }
      double term = resid[i] / denom;
      score += term * term;
    }
    if (!usable || !std::isfinite(score)) continue;
    score /= n;
    if (!best_score || score < *best_score) {
      best_score = score;
      best_lambda = lambda;
      best_beta = std::move(beta);
    }
  }
  if (!best_score)
    throw NoValidCandidate("ridge: no lambda gave a finite LOOCV score");
  return {std::move(best_beta), {{"lambda", best_lambda}}};
}

namespace detail {

// Coordinate descent for
//   (1/2n)||y - X beta||^2 + lambda (alpha ||beta||^2 / 2 + (1-alpha)||beta||_1),
// the elastic net with the quadratic term weighted by alpha (alpha = 0 is the
// lasso, alpha = 1 is ridge). Sweeps are O(np), so the default budget is a
// guard against genuine stalls, sized for near-collinear designs at small
// lambda where pure-l1 sweeps contract slowly.
inline Vector enet_cd(const Matrix& x, const Vector& y, double lambda,
                      double alpha, const Vector* warm = nullptr,
                      double tol = 1e-10, int max_sweeps = 200000) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  Vector col_scale(p);
  for (int j = 0; j < p; ++j) col_scale[j] = x.col(j).squaredNorm() / n;
  Vector beta = warm ? *warm : Vector::Zero(p);
  Vector resid = y - x * beta;
  const double l1 = lambda * (1.0 - alpha);
  const double l2 = lambda * alpha;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (int j = 0; j < p; ++j) {
      double old = beta[j];
      double z = x.col(j).dot(resid) / n + col_scale[j] * old;
      double shrunk = std::abs(z) - l1;
      double updated =
          shrunk > 0.0 ? std::copysign(shrunk, z) / (col_scale[j] + l2) : 0.0;
      if (updated != old) {
        resid += x.col(j) * (old - updated);
        beta[j] = updated;
        max_delta = std::max(max_delta, std::abs(updated - old));
      }
    }
    if (max_delta < tol) return beta;
  }
  throw NonConvergence("elastic net coordinate descent: sweep budget spent");
}

// Contiguous blocks over a seeded shuffle of 0..n-1.
inline std::vector<std::vector<int>> make_folds(int n, int folds,
                                                std::uint64_t seed) {
  if (folds < 2 || folds > n) throw Error("cv: folds must be in [2, n]");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<int>> out(folds);
  for (int f = 0; f < folds; ++f) {
    int begin = static_cast<int>(static_cast<long long>(n) * f / folds);
    int end = static_cast<int>(static_cast<long long>(n) * (f + 1) / folds);
    out[f].assign(order.begin() + begin, order.begin() + end);
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

inline Dataset take_rows(const Dataset& data, const std::vector<int>& rows) {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), data.p());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = data.x.row(rows[i]);
    out.y[static_cast<Eigen::Index>(i)] = data.y[rows[i]];
  }
  return out;
}

}  // namespace detail

// K-fold CV over (lambda, alpha); every fold's training block is
// re-standardized and validation error measured in the input's own units.
// CV error is the pooled squared error over all held-out points divided by n.
// Ties prefer the earlier alpha, then the earlier lambda, in grid order.
inline BaselineFit fit_enet_cv(const Dataset& data,
                               const std::vector<double>& lambdas,
                               const std::vector<double>& alphas, int folds,
                               std::uint64_t seed) {
  if (lambdas.empty() || alphas.empty())
    throw Error("enet: empty hyperparameter grid");
  const int n = data.n();
  auto fold_rows = detail::make_folds(n, folds, seed);

  std::vector<std::vector<int>> train_rows(fold_rows.size());
  std::vector<Dataset> fold_train;
  std::vector<StandardizationParams> fold_params;
  for (std::size_t f = 0; f < fold_rows.size(); ++f) {
    std::vector<bool> held(n, false);
    for (int i : fold_rows[f]) held[i] = true;
    for (int i = 0; i < n; ++i)
      if (!held[i]) train_rows[f].push_back(i);
    auto [std_train, params] =
        standardize(detail::take_rows(data, train_rows[f]));
    fold_train.push_back(std::move(std_train));
    fold_params.push_back(std::move(params));
  }

  double best_score = 0.0;
  double best_lambda = 0.0, best_alpha = 0.0;
  bool have_best = false;
  for (double alpha : alphas) {
    // Warm-start along the lambda path within each fold.
    std::vector<Vector> warm(fold_rows.size());
    std::vector<bool> have_warm(fold_rows.size(), false);
    for (double lambda : lambdas) {
      double sse = 0.0;
      for (std::size_t f = 0; f < fold_rows.size(); ++f) {
        Vector beta = detail::enet_cd(fold_train[f].x, fold_train[f].y, lambda,
                                      alpha,
                                      have_warm[f] ? &warm[f] : nullptr);
        warm[f] = beta;
        have_warm[f] = true;
        Dataset held = detail::take_rows(data, fold_rows[f]);
        Vector pred = predict(beta, held.x, fold_params[f]);
        sse += (held.y - pred).squaredNorm();
      }
      double score = sse / n;
      if (!have_best || score < best_score) {
        best_score = score;
        best_lambda = lambda;
        best_alpha = alpha;
        have_best = true;
      }
    }
  }

  Vector beta = detail::enet_cd(data.x, data.y, best_lambda, best_alpha);
  return {std::move(beta),
          {{"lambda", best_lambda}, {"alpha", best_alpha}}};
}

// The lasso is exactly the elastic net with the quadratic term switched off.
inline BaselineFit fit_lasso_cv(const Dataset& data,
                                const std::vector<double>& lambdas, int folds,
                                std::uint64_t seed) {
  BaselineFit fit = fit_enet_cv(data, lambdas, {0.0}, folds, seed);
  fit.selected.erase("alpha");
  return fit;
}

}  // namespace bridgekit
