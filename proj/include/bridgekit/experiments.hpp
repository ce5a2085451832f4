#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "bridgekit/baselines.hpp"
#include "bridgekit/criteria.hpp"
#include "bridgekit/data.hpp"
#include "bridgekit/selection.hpp"
#include "bridgekit/threading.hpp"

namespace bridgekit {

// Seed-stream tags (see mix_seed): EIC resampling and baseline fold shuffles
// draw from their own derived streams so adding or removing one consumer
// never shifts another.
inline constexpr std::uint64_t kEicStream = 0xE1C;
inline constexpr std::uint64_t kLassoStream = 0x1A550;
inline constexpr std::uint64_t kEnetStream = 0xE4E7;
inline constexpr std::uint64_t kRidgeStream = 0x41D6E;  // reserved

inline const std::vector<std::string>& known_baselines() {
  static const std::vector<std::string> names = {"ols", "ridge", "lasso",
                                                 "enet"};
  return names;
}

struct CriterionTrialResult {
  double mse = 0.0;
  double lambda = 0.0;
  double q = 0.0;
};

struct SimulationTrial {
  int trial = 0;  // 1-based; the trial seed is base_seed + trial
  bool ok = false;
  std::string note;
  std::map<std::string, CriterionTrialResult> criteria;
  std::map<std::string, double> baseline_mse;
};

struct Aggregate {
  int count = 0;
  double mse_mean = 0.0, mse_sd = 0.0;
  double log10_lambda_mean = 0.0, log10_lambda_sd = 0.0;
  double q_mean = 0.0, q_sd = 0.0;
};

struct BaselineAggregate {
  int count = 0;
  double mse_mean = 0.0, mse_sd = 0.0;
};

struct SimulationReport {
  int setting = 0;
  int trials = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::string> criteria;   // column order for reports
  std::vector<std::string> baselines;  // column order for reports
  std::vector<SimulationTrial> rows;
  std::map<std::string, Aggregate> aggregates;
  std::map<std::string, BaselineAggregate> baseline_aggregates;
};

struct MonteCarloOptions {
  Grid grid = default_simulation_grid();
  FitConfig fit;
  int threads = 1;
  bool warm_start = false;
  int eic_b = 100;
  int cv_folds = 5;
  std::vector<double> alphas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                0.6, 0.7, 0.8, 0.9, 1.0};
  // Individual trials may fail (no valid grid point, singular systems); the
  // run aborts only when more than this fraction of trials fail.
  double failure_tolerance = 0.05;
};

namespace detail {

inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

inline void validate_baseline_names(const std::vector<std::string>& names) {
  for (const auto& name : names) {
    bool known = false;
    for (const auto& k : known_baselines()) known = known || k == name;
    if (!known) throw Error("unknown baseline: " + name);
  }
}

}  // namespace detail

// Monte Carlo protocol: per trial, generate a fresh train/test pair, pick
// (lambda, q) per criterion on the standardized training data, and score
// MSE = ||yhat - y*||^2 / n_test against the noisy test responses.
// Trial r draws with seed base_seed + r, so overlapping trial ranges agree
// trial by trial.
inline SimulationReport run_monte_carlo(
    int setting_id, int trials, const std::vector<Criterion>& criteria,
    const std::vector<std::string>& baselines, std::uint64_t base_seed,
    const MonteCarloOptions& opts = {}) {
  if (trials < 1) throw Error("run_monte_carlo: need at least one trial");
  detail::validate_baseline_names(baselines);
  const SimulationSetting setting = simulation_setting(setting_id);

  SimulationReport report;
  report.setting = setting_id;
  report.trials = trials;
  report.base_seed = base_seed;
  for (Criterion c : criteria) report.criteria.push_back(criterion_name(c));
  report.baselines = baselines;
  report.rows.resize(trials);

  auto run_trial = [&](int t) {
    SimulationTrial& row = report.rows[t];
    row.trial = t + 1;
    const std::uint64_t seed_r = base_seed + static_cast<std::uint64_t>(t + 1);
    try {
      GeneratedData gd = generate_setting(setting, seed_r);
      auto [train, params] = standardize(gd.train);
      const int n_test = gd.test.n();
      for (Criterion c : criteria) {
        SelectOptions so;
        so.fit = opts.fit;
        so.threads = 1;
        so.warm_start = opts.warm_start;
        so.eic_b = opts.eic_b;
        so.seed = mix_seed(seed_r, kEicStream);
        SelectionResult res = select(train, opts.grid, c, so);
        Vector pred = predict(res.best_fit, gd.test.x, params);
        row.criteria[criterion_name(c)] = {
            (pred - gd.test.y).squaredNorm() / n_test, res.best.lambda,
            res.best.q};
      }
      for (const auto& name : baselines) {
        BaselineFit bf;
        if (name == "ols")
          bf = fit_ols(train);
        else if (name == "ridge")
          bf = fit_ridge_loocv(train, opts.grid.lambdas);
        else if (name == "lasso")
          bf = fit_lasso_cv(train, opts.grid.lambdas, opts.cv_folds,
                            mix_seed(seed_r, kLassoStream));
        else
          bf = fit_enet_cv(train, opts.grid.lambdas, opts.alphas,
                           opts.cv_folds, mix_seed(seed_r, kEnetStream));
        Vector pred = predict(bf.beta_hat, gd.test.x, params);
        row.baseline_mse[name] = (pred - gd.test.y).squaredNorm() / n_test;
      }
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.note = e.what();
    }
  };
  parallel_for(trials, opts.threads, run_trial);

  int failed = 0;
  for (const auto& row : report.rows)
    if (!row.ok) ++failed;
  if (failed > opts.failure_tolerance * trials)
    throw Error("run_monte_carlo: " + std::to_string(failed) + " of " +
                std::to_string(trials) + " trials failed");

  for (const auto& name : report.criteria) {
    std::vector<double> mse, loglam, q;
    for (const auto& row : report.rows) {
      if (!row.ok) continue;
      const auto& r = row.criteria.at(name);
      mse.push_back(r.mse);
      loglam.push_back(std::log10(r.lambda));
      q.push_back(r.q);
    }
    Aggregate agg;
    agg.count = static_cast<int>(mse.size());
    std::tie(agg.mse_mean, agg.mse_sd) = detail::mean_sd(mse);
    std::tie(agg.log10_lambda_mean, agg.log10_lambda_sd) =
        detail::mean_sd(loglam);
    std::tie(agg.q_mean, agg.q_sd) = detail::mean_sd(q);
    report.aggregates[name] = agg;
  }
  for (const auto& name : report.baselines) {
    std::vector<double> mse;
    for (const auto& row : report.rows)
      if (row.ok) mse.push_back(row.baseline_mse.at(name));
    BaselineAggregate agg;
    agg.count = static_cast<int>(mse.size());
    std::tie(agg.mse_mean, agg.mse_sd) = detail::mean_sd(mse);
    report.baseline_aggregates[name] = agg;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Pollution-data experiment
// ---------------------------------------------------------------------------

struct PollutionOptions {
  Grid grid = default_pollution_grid();
  FitConfig fit;
  int threads = 1;
  Criterion criterion = Criterion::kGbic;
  int eic_b = 100;
  int cv_folds = 5;
  std::vector<double> alphas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                0.6, 0.7, 0.8, 0.9, 1.0};
  int train_size = 40;
};

struct PollutionSplit {
  int split = 0;  // 1-based; the split seed is base_seed + split
  std::map<std::string, double> pred_error;  // bridge + baselines, raw units
  Hyperparams bridge_best;
  int bridge_active = 0;
};

struct PollutionReport {
  std::uint64_t base_seed = 0;
  std::vector<PollutionSplit> splits;
  std::map<std::string, double> median_pred_error;
  // Selection on all observations.
  Hyperparams full_best;
  std::vector<int> full_active;  // 1-based covariate indices
  Vector full_beta;              // standardized coordinates, full length
  double full_sigma2 = 0.0;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

// One random train/test split of the pollution data: select (lambda, q) on
// the standardized training block, measure squared prediction error per
// observation on the held-out block in raw response units, and do the same
// for the OLS/ridge/lasso/enet baselines.
inline PollutionSplit run_pollution_split(const Dataset& raw,
                                          std::uint64_t seed,
                                          const PollutionOptions& opts = {}) {
  const int n = raw.n();
  if (opts.train_size < 2 || opts.train_size >= n)
    throw Error("pollution: train size out of range");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<int> train_rows(order.begin(), order.begin() + opts.train_size);
  std::vector<int> test_rows(order.begin() + opts.train_size, order.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  Dataset train_raw = detail::take_rows(raw, train_rows);
  Dataset test_raw = detail::take_rows(raw, test_rows);
  auto [train, params] = standardize(train_raw);
  const int n_test = test_raw.n();

  PollutionSplit split;
  SelectOptions so;
  so.fit = opts.fit;
  so.threads = opts.threads;
  so.eic_b = opts.eic_b;
  so.seed = mix_seed(seed, kEicStream);
  SelectionResult res = select(train, opts.grid, opts.criterion, so);
  split.bridge_best = res.best;
  split.bridge_active = static_cast<int>(res.best_fit.active_set.size());
  Vector pred = predict(res.best_fit, test_raw.x, params);
  split.pred_error["bridge"] = (pred - test_raw.y).squaredNorm() / n_test;

  auto record = [&](const std::string& name, const BaselineFit& bf) {
    Vector bp = predict(bf.beta_hat, test_raw.x, params);
    split.pred_error[name] = (bp - test_raw.y).squaredNorm() / n_test;
  };
  record("ols", fit_ols(train));
  record("ridge", fit_ridge_loocv(train, opts.grid.lambdas));
  record("lasso", fit_lasso_cv(train, opts.grid.lambdas, opts.cv_folds,
                               mix_seed(seed, kLassoStream)));
  record("enet", fit_enet_cv(train, opts.grid.lambdas, opts.alphas,
                             opts.cv_folds, mix_seed(seed, kEnetStream)));
  return split;
}

// Repeated random splits plus one selection on the full data.  Split s uses
// seed base_seed + s.
inline PollutionReport run_pollution(const Dataset& raw, int splits,
                                     std::uint64_t base_seed,
                                     const PollutionOptions& opts = {}) {
  if (splits < 1) throw Error("pollution: need at least one split");
  PollutionReport report;
  report.base_seed = base_seed;
  report.splits.resize(splits);
  PollutionOptions split_opts = opts;
  split_opts.threads = 1;
  parallel_for(splits, opts.threads, [&](int s) {
    report.splits[s] =
        run_pollution_split(raw, base_seed + static_cast<std::uint64_t>(s + 1),
                            split_opts);
    report.splits[s].split = s + 1;
  });
  for (const char* name : {"bridge", "ols", "ridge", "lasso", "enet"}) {
    std::vector<double> errs;
    for (const auto& s : report.splits) errs.push_back(s.pred_error.at(name));
    report.median_pred_error[name] = detail::median(std::move(errs));
  }

  auto [full, params] = standardize(raw);
  SelectOptions so;
  so.fit = opts.fit;
  so.threads = opts.threads;
  so.eic_b = opts.eic_b;
  so.seed = mix_seed(base_seed, kEicStream);
  SelectionResult res = select(full, opts.grid, opts.criterion, so);
  report.full_best = res.best;
  for (int j : res.best_fit.active_set) report.full_active.push_back(j + 1);
  report.full_beta = res.best_fit.beta_hat;
  report.full_sigma2 = res.best_fit.sigma2_hat;
  return report;
}

}  // namespace bridgekit
