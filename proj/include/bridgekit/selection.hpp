#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "bridgekit/criteria.hpp"
#include "bridgekit/data.hpp"
#include "bridgekit/errors.hpp"
#include "bridgekit/estimator.hpp"
#include "bridgekit/threading.hpp"

namespace bridgekit {

struct Grid {
  std::vector<double> lambdas;  // strictly descending, all positive
  std::vector<double> qs;       // positive, no duplicates
};

// lambda_i = 10^(-0.1 i + 3), i = 1..100 (roughly 794 down to 1e-7).
inline std::vector<double> default_lambda_grid() {
  std::vector<double> lambdas;
  lambdas.reserve(100);
  for (int i = 1; i <= 100; ++i)
    lambdas.push_back(std::pow(10.0, -0.1 * i + 3.0));
  return lambdas;
}

inline Grid default_simulation_grid() {
  return {default_lambda_grid(), {0.1, 0.4, 0.7, 1.0, 1.3, 1.7, 2.0, 2.3, 2.7}};
}

inline Grid default_pollution_grid() {
  return {default_lambda_grid(),
          {0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0, 1.3, 1.7, 2.0}};
}

inline void validate(const Grid& grid) {
  if (grid.lambdas.empty() || grid.qs.empty())
    throw Error("grid: lambda and q lists must be nonempty");
  for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
    if (!(grid.lambdas[i] > 0.0))
      throw Error("grid: lambdas must be positive");
    if (i > 0 && !(grid.lambdas[i] < grid.lambdas[i - 1]))
      throw Error("grid: lambdas must be strictly descending");
  }
  for (std::size_t i = 0; i < grid.qs.size(); ++i) {
    if (!(grid.qs[i] > 0.0)) throw Error("grid: qs must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (grid.qs[i] == grid.qs[j]) throw Error("grid: duplicate q value");
  }
}

struct SelectionEntry {
  Hyperparams hp;
  CriterionValue score;
  int active_size = 0;
  bool converged = false;
  int iterations = 0;
};

struct SelectionResult {
  // One entry per grid point, q-major (all lambdas of qs[0] first), lambdas
  // in grid order.
  std::vector<SelectionEntry> table;
  std::size_t best_index = 0;
  Hyperparams best;
  BridgeFit best_fit;
};

struct SelectOptions {
  FitConfig fit;
  int threads = 1;
  // Chain each fit from the previous lambda's estimate within a q slice
  // (the ridge initializer is the fallback when everything was pruned).
  // Off by default: every grid point gets the cold Step-2 initializer.
  bool warm_start = false;
  int eic_b = 100;
  std::uint64_t seed = 0;  // EIC resampling stream
};

namespace detail {

// Tie window: scores within 1e-10 (relative to their size) count as equal,
// and ties prefer the larger lambda, then the smaller q.
inline bool entry_improves(const SelectionEntry& candidate,
                           const SelectionEntry& incumbent) {
  if (!candidate.score.valid) return false;
  if (!incumbent.score.valid) return true;
  const double a = candidate.score.value;
  const double b = incumbent.score.value;
  const double tol =
      1e-10 * std::max({1.0, std::abs(a), std::abs(b)});
  if (a < b - tol) return true;
  if (a > b + tol) return false;
  if (candidate.hp.lambda != incumbent.hp.lambda)
    return candidate.hp.lambda > incumbent.hp.lambda;
  return candidate.hp.q < incumbent.hp.q;
}

}  // namespace detail

// Scans the (lambda, q) grid, scoring each fit with the criterion, and
// returns the winning fit along with the whole table.  Grid points where the
// fit or the criterion fails come back as invalid entries; only a table with
// no valid entry at all raises NoValidCandidate.
inline SelectionResult select(const Dataset& data, const Grid& grid,
                              Criterion crit, const SelectOptions& opts = {}) {
  validate(grid);
  if (!data.standardized)
    throw Error("select: dataset must be standardized first");

  const DesignGram gram = compute_gram(data);
  std::optional<EicContext> eic_ctx;
  if (crit == Criterion::kEic)
    eic_ctx.emplace(EicContext::build(data, opts.eic_b, opts.seed));

  const std::size_t n_lambda = grid.lambdas.size();
  const std::size_t count = n_lambda * grid.qs.size();
  std::vector<SelectionEntry> table(count);
  std::vector<std::optional<BridgeFit>> fits(count);

  auto run_q_slice = [&](int qi) {
    Vector warm;
    bool have_warm = false;
    for (std::size_t li = 0; li < n_lambda; ++li) {
      const std::size_t idx = static_cast<std::size_t>(qi) * n_lambda + li;
      Hyperparams hp{grid.lambdas[li], grid.qs[static_cast<std::size_t>(qi)]};
      SelectionEntry& entry = table[idx];
      entry.hp = hp;
      BridgeFit fit;
      try {
        fit = fit_bridge_gram(data, gram, hp, opts.fit,
                              (opts.warm_start && have_warm) ? &warm : nullptr);
      } catch (const SingularSystem& e) {
        entry.score = detail::invalid(std::string("fit failed: ") + e.what());
        have_warm = false;
        continue;
      }
      entry.active_size = static_cast<int>(fit.active_set.size());
      entry.converged = fit.converged;
      entry.iterations = fit.iterations;
      switch (crit) {
        case Criterion::kGbic: entry.score = gbic(fit, data); break;
        case Criterion::kMaic: entry.score = maic(fit, data); break;
        case Criterion::kMbic: entry.score = mbic(fit, data); break;
        case Criterion::kAicc: entry.score = aicc(fit, data); break;
        case Criterion::kCv:   entry.score = cv_score(fit, data); break;
        case Criterion::kGcv:  entry.score = gcv(fit, data); break;
        case Criterion::kEic:
          entry.score = eic_with_context(fit, data, *eic_ctx, opts.fit);
          break;
      }
      if (opts.warm_start) {
        have_warm = !fit.active_set.empty();
        if (have_warm) warm = fit.beta_hat;
      }
      fits[idx] = std::move(fit);
    }
  };

  parallel_for(static_cast<int>(grid.qs.size()), opts.threads, run_q_slice);

  std::optional<std::size_t> best;
  for (std::size_t idx = 0; idx < count; ++idx) {
    if (!table[idx].score.valid || !fits[idx]) continue;
    if (!best || detail::entry_improves(table[idx], table[*best])) best = idx;
  }
  if (!best)
    throw NoValidCandidate("select: no grid point produced a valid score");

  SelectionResult result;
  result.table = std::move(table);
  result.best_index = *best;
  result.best = result.table[*best].hp;
  result.best_fit = std::move(*fits[*best]);
  return result;
}

}  // namespace bridgekit
