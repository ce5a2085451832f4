// Acceptance gate for the bridge-regression toolkit.  Each numbered check
// prints one PASS/FAIL line; the process exits nonzero if any check fails.
// Cheap oracle checks run first so failures surface before the long Monte
// Carlo reproductions.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bridgekit/baselines.hpp"
#include "bridgekit/experiments.hpp"
#include "test_support.hpp"

using namespace bridgekit;
using testsupport::coefs;
using testsupport::toy_dataset;

namespace {

struct Gate {
  int id;
  std::string label;
  bool pass;
  std::string detail;
};

std::vector<Gate> gates;
std::chrono::steady_clock::time_point block_start;

void begin_block() { block_start = std::chrono::steady_clock::now(); }

void record(int id, const std::string& label, bool pass,
            const std::string& detail) {
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - block_start)
                    .count();
  gates.push_back({id, label, pass, detail});
  std::printf("[%s] criterion %d (%s): %s  [%.1fs]\n",
              pass ? "PASS" : "FAIL", id, label.c_str(), detail.c_str(),
              secs);
  std::fflush(stdout);
}

template <typename Fn>
void guarded(int id, const std::string& label, Fn&& fn) {
  begin_block();
  try {
    fn();
  } catch (const std::exception& e) {
    record(id, label, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

Dataset standardized_toy(std::uint64_t seed, int n, const Vector& beta,
                         double sigma, double rho) {
  return standardize(toy_dataset(seed, n, beta, sigma, rho)).first;
}

// Orthogonal design from Hadamard columns repeated `replicates` times; unit
// column variance, y centered, so the dataset is already in standardized form.
Dataset hadamard_dataset(const Vector& beta, double sigma, std::uint64_t seed,
                         int replicates = 1) {
  const int n = 8 * replicates;
  const int cols[4] = {1, 2, 4, 7};
  Dataset d;
  d.x.resize(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j)
      d.x(i, j) = (__builtin_popcount((i % 8) & cols[j]) % 2) ? -1.0 : 1.0;
  Rng rng(seed);
  d.y = d.x * beta;
  for (int i = 0; i < n; ++i) d.y[i] += sigma * rng.normal();
  d.y.array() -= d.y.mean();
  d.standardized = true;
  return d;
}

int threads() { return default_thread_count(); }

// --- criterion 7: GBIC vs quadrature ---------------------------------------

void criterion7() {
  // Penalties are kept weak enough that the fitted basin dominates the
  // marginal-likelihood integral; otherwise the Laplace expansion at the
  // estimate cannot be expected to track the quadrature oracle.
  const double hps[3][2] = {{0.15, 0.7}, {0.3, 1.0}, {0.02, 2.0}};
  int tried = 0, used = 0, ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 101; used < 12 && tried < 40; ++seed, ++tried) {
    Hyperparams hp{hps[tried % 3][0], hps[tried % 3][1]};
    Dataset data = standardized_toy(seed, 14, coefs({2.5, 0}), 1.0, 0.3);
    BridgeFit fit = fit_bridge(data, hp);
    if (fit.active_set.size() > 2) continue;
    auto g = gbic(fit, data);
    if (!g.valid) continue;
    ++used;
    double log_pml = testsupport::log_pml_quadrature(data, hp, fit);
    double rel = std::abs(g.value + 2.0 * log_pml) / std::abs(g.value);
    worst = std::max(worst, rel);
    if (rel <= 0.05) ++ok;
  }
  std::ostringstream d;
  d << ok << "/" << used << " toys within 5% (worst rel err " << fmt(worst)
    << ", need >= 10 instances all within)";
  record(7, "gbic quadrature oracle", used >= 10 && ok == used, d.str());
}

// --- criterion 8: estimator oracles -----------------------------------------

void criterion8() {
  bool pass = true;
  std::ostringstream d;

  // Fixed-point identities hold at the exact LQA limit, so every fit here
  // uses a tightened stopping rule; the production default delta = 1e-5
  // leaves ~1e-6 slack that would drown the comparisons.
  FitConfig tight;
  tight.delta = 1e-12;
  tight.max_iters = 10000;

  // (a) q = 2: the fixed point must solve the stationary ridge system
  double worst_ridge = 0.0;
  Dataset rdata = standardized_toy(51, 25, coefs({2, -1, 0, 1}), 1.0, 0.4);
  for (double lambda : {0.05, 0.5, 5.0}) {
    BridgeFit fit = fit_bridge(rdata, {lambda, 2.0}, tight);
    Matrix m = rdata.x.transpose() * rdata.x;
    m.diagonal().array() += rdata.n() * lambda * fit.sigma2_hat / 2.0;
    Vector target = solve_spd(m, rdata.x.transpose() * rdata.y);
    worst_ridge = std::max(
        worst_ridge, (fit.beta_hat - target).cwiseAbs().maxCoeff());
  }
  pass = pass && worst_ridge <= 1e-6;
  d << "q=2 fixed-point residual " << fmt(worst_ridge) << " (<= 1e-6)";

  // (b) q = 1 on an orthogonal design: soft threshold at lambda sigma2 / 4
  // Stable partial-prune window validated empirically: at lambda = 2 the
  // fitted threshold settles near 0.1, pruning exactly the true-zero column.
  Dataset h = hadamard_dataset(coefs({5, 3, 1, 0}), 0.4, 7, 8);
  const double lambda1 = 2.0;
  BridgeFit hfit = fit_bridge(h, {lambda1, 1.0}, tight);
  Vector z = h.x.transpose() * h.y / h.n();
  double t = lambda1 * hfit.sigma2_hat / 4.0;
  double worst_soft = 0.0;
  for (int j = 0; j < 4; ++j) {
    double target =
        std::abs(z[j]) > t ? std::copysign(std::abs(z[j]) - t, z[j]) : 0.0;
    worst_soft = std::max(worst_soft, std::abs(hfit.beta_hat[j] - target));
  }
  pass = pass && worst_soft <= 1e-5;
  d << "; q=1 soft-threshold gap " << fmt(worst_soft) << " (<= 1e-5)";

  // (c) q = 1 vs coordinate-descent lasso at the matched penalty scale,
  // with sigma2 frozen at the bridge estimate
  const double lams[3] = {0.2, 0.5, 1.0};
  double worst_cd = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Dataset data =
        standardized_toy(seed, 30, coefs({2, -1, 0.5, 0}), 1.0, 0.3);
    double lambda = lams[seed % 3];
    BridgeFit fit = fit_bridge(data, {lambda, 1.0}, tight);
    Vector cd = detail::enet_cd(data.x, data.y,
                                lambda * fit.sigma2_hat / 4.0, 0.0, nullptr,
                                1e-12);
    worst_cd =
        std::max(worst_cd, (fit.beta_hat - cd).cwiseAbs().maxCoeff());
  }
  pass = pass && worst_cd <= 1e-4;
  d << "; q=1 vs CD lasso gap " << fmt(worst_cd) << " (<= 1e-4, 20 runs)";

  record(8, "estimator oracles", pass, d.str());
}

// --- criterion 9: property spot checks --------------------------------------

void criterion9() {
  bool pass = true;
  std::ostringstream d;

  // LQA majorization and MM monotonicity for q <= 2 from the iterate trace
  bool mono_ok = true;
  for (double q : {0.5, 1.0, 2.0}) {
    for (std::uint64_t seed : {71, 72}) {
      Dataset data =
          standardized_toy(seed, 25, coefs({3, 0, 1, -2}), 1.0, 0.4);
      Hyperparams hp{0.4, q};
      FitTrace trace;
      fit_bridge_gram(data, compute_gram(data), hp, {}, nullptr, &trace);
      for (std::size_t k = 1; k < trace.betas.size(); ++k) {
        double prev = testsupport::effective_objective(
            data, hp, trace.betas[k - 1], trace.sigma2s[k - 1]);
        double next = testsupport::effective_objective(
            data, hp, trace.betas[k], trace.sigma2s[k]);
        if (next > prev + 1e-8 * std::max(1.0, std::abs(prev)))
          mono_ok = false;
      }
    }
  }
  pass = pass && mono_ok;
  d << "MM monotonicity q<=2 " << (mono_ok ? "ok" : "VIOLATED");

  // bridge prior integrates to one
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  bool prior_ok = true;
  for (auto [q, nl] : {std::pair{0.7, 4.0}, std::pair{2.0, 1.0}}) {
    Hyperparams hp{nl / 10.0, q};
    double mass =
        2.0 * GK::integrate(
                  [&](double t) {
                    return std::exp(log_prior(coefs({t}), hp, 10));
                  },
                  0.0, std::numeric_limits<double>::infinity(), 15, 1e-10);
    if (std::abs(mass - 1.0) > 1e-6) prior_ok = false;
  }
  pass = pass && prior_ok;
  d << "; prior mass " << (prior_ok ? "ok" : "BAD");

  // CV shortcut equals literal LOO refits at the frozen penalty (needs the
  // exact fixed point, hence the tight config)
  {
    Dataset data = standardized_toy(17, 12, coefs({2, -1, 1}), 1.0, 0.3);
    FitConfig tight;
    tight.delta = 1e-12;
    tight.max_iters = 10000;
    BridgeFit fit = fit_bridge(data, {0.4, 1.3}, tight);
    const int n = data.n();
    const int r = static_cast<int>(fit.active_set.size());
    Matrix xa(n, r);
    for (int a = 0; a < r; ++a) xa.col(a) = data.x.col(fit.active_set[a]);
    Matrix base = xa.transpose() * xa;
    for (int a = 0; a < r; ++a)
      base(a, a) += lqa_weight(fit.beta_hat[fit.active_set[a]],
                               fit.hyperparams, fit.sigma2_hat, n);
    Vector xty = xa.transpose() * data.y;
    double refit_cv = 0.0;
    for (int i = 0; i < n; ++i) {
      Matrix m = base - xa.row(i).transpose() * xa.row(i);
      Vector b = xty - xa.row(i).transpose() * data.y[i];
      double e = data.y[i] - xa.row(i).dot(solve_spd(m, b));
      refit_cv += e * e;
    }
    refit_cv /= n;
    auto shortcut = cv_score(fit, data);
    bool cv_ok = shortcut.valid &&
                 std::abs(shortcut.value - refit_cv) <=
                     1e-8 * std::max(1.0, refit_cv);
    pass = pass && cv_ok;
    d << "; CV shortcut " << (cv_ok ? "ok" : "BAD");
  }

  // hat-matrix trace bounds
  {
    Dataset data =
        standardized_toy(7, 20, coefs({3, 1, 0, -2, 0}), 1.0, 0.4);
    BridgeFit fit = fit_bridge(data, {0.3, 1.3});
    double tr = hat_matrix(fit, data).trace();
    bool hat_ok = tr >= 0.0 && tr <= fit.active_set.size() + 1e-10;
    pass = pass && hat_ok;
    d << "; trS in [0,|A|] " << (hat_ok ? "ok" : "BAD");
  }

  // selection argmin rescan + determinism across seeds and thread counts
  {
    Dataset data =
        standardized_toy(3, 30, coefs({3, 0, 1.5, 0, -2}), 1.0, 0.5);
    Grid grid{{31.6, 10.0, 3.16, 1.0, 0.316, 0.1}, {0.7, 1.0, 2.0}};
    SelectOptions one;
    one.eic_b = 20;
    one.seed = 5;
    SelectOptions four = one;
    four.threads = 4;
    bool sel_ok = true;
    for (Criterion crit : {Criterion::kGbic, Criterion::kEic}) {
      SelectionResult a = select(data, grid, crit, one);
      SelectionResult b = select(data, grid, crit, four);
      std::size_t best = a.table.size();
      for (std::size_t i = 0; i < a.table.size(); ++i) {
        if (!a.table[i].score.valid) continue;
        if (best == a.table.size() ||
            detail::entry_improves(a.table[i], a.table[best]))
          best = i;
      }
      sel_ok = sel_ok && best == a.best_index && b.best_index == a.best_index;
      for (std::size_t i = 0; i < a.table.size(); ++i)
        if (a.table[i].score.valid &&
            a.table[i].score.value != b.table[i].score.value)
          sel_ok = false;
    }
    MonteCarloOptions mc;
    mc.grid = grid;
    mc.eic_b = 10;
    MonteCarloOptions mc2 = mc;
    mc2.threads = 2;
    SimulationReport ra =
        run_monte_carlo(3, 2, {Criterion::kGbic}, {}, 5, mc);
    SimulationReport rb =
        run_monte_carlo(3, 2, {Criterion::kGbic}, {}, 5, mc2);
    for (int t = 0; t < 2; ++t) {
      const auto& x = ra.rows[t].criteria.at("gbic");
      const auto& y = rb.rows[t].criteria.at("gbic");
      if (x.mse != y.mse || x.lambda != y.lambda || x.q != y.q)
        sel_ok = false;
    }
    pass = pass && sel_ok;
    d << "; argmin/determinism " << (sel_ok ? "ok" : "BAD");
  }

  record(9, "property spot checks", pass, d.str());
}

// --- criteria 5 and 6: pollution data ---------------------------------------

void criteria56() {
  Dataset raw =
      load_pollution(std::string(BRIDGEKIT_DATA_DIR) + "/pollution.csv");
  PollutionOptions opts;
  opts.threads = threads();
  PollutionReport rep = run_pollution(raw, 50, 1, opts);

  bool has_required = true;
  for (int j : {1, 8, 9, 14})
    has_required =
        has_required && std::count(rep.full_active.begin(),
                                   rep.full_active.end(), j) == 1;
  double lq = rep.full_best.q;
  bool q_ok = lq == 0.55 || lq == 0.7 || lq == 0.85;
  double loglam = std::log10(rep.full_best.lambda);
  bool lam_ok = std::abs(loglam + 2.1) <= 0.1 + 1e-9;
  {
    std::ostringstream d;
    d << "active={";
    for (std::size_t i = 0; i < rep.full_active.size(); ++i)
      d << (i ? "," : "") << rep.full_active[i];
    d << "} contains {1,8,9,14}: " << (has_required ? "yes" : "NO")
      << "; q=" << fmt(lq) << " in {0.55,0.7,0.85}: " << (q_ok ? "yes" : "NO")
      << "; log10(lambda)=" << fmt(loglam) << " within 0.1 of -2.1: "
      << (lam_ok ? "yes" : "NO") << " (reported point: lambda="
      << fmt(rep.full_best.lambda) << ", q=" << fmt(lq) << ")";
    record(5, "pollution full-data selection", has_required && q_ok && lam_ok,
           d.str());
  }

  begin_block();
  double bridge = rep.median_pred_error.at("bridge");
  double ols = rep.median_pred_error.at("ols");
  double ridge = rep.median_pred_error.at("ridge");
  std::ostringstream d;
  d << "median pred error bridge=" << fmt(bridge) << " ols=" << fmt(ols)
    << " ridge=" << fmt(ridge) << " (lasso="
    << fmt(rep.median_pred_error.at("lasso")) << ", enet="
    << fmt(rep.median_pred_error.at("enet")) << ")";
  record(6, "pollution prediction ordering", bridge < ols && bridge < ridge,
         d.str());
}

// --- criteria 1-4: Monte Carlo reproductions --------------------------------

void criterion1() {
  MonteCarloOptions opts;
  opts.threads = threads();
  SimulationReport rep =
      run_monte_carlo(1, 100, {Criterion::kGbic}, {}, 1, opts);
  const Aggregate& a = rep.aggregates.at("gbic");
  bool mse_ok = std::abs(a.mse_mean - 15.67) <= 3.0;
  bool q_ok = std::abs(a.q_mean - 0.598) <= 0.25;
  std::ostringstream d;
  d << "gbic mse_mean=" << fmt(a.mse_mean) << " (15.67 +- 3.0), q_mean="
    << fmt(a.q_mean) << " (0.598 +- 0.25), count=" << a.count;
  record(1, "setting 1 reproduction", mse_ok && q_ok, d.str());
}

void criterion2() {
  MonteCarloOptions opts;
  opts.threads = threads();
  SimulationReport rep =
      run_monte_carlo(2, 100, {Criterion::kGbic}, {}, 1, opts);
  int above_one = 0;
  std::map<double, int> q_counts;
  for (const auto& row : rep.rows) {
    if (!row.ok) continue;
    double q = row.criteria.at("gbic").q;
    if (q > 1.0) ++above_one;
    ++q_counts[q];
  }
  double modal_q = 0.0;
  int best_count = -1;
  for (const auto& [q, c] : q_counts)
    if (c > best_count) {
      best_count = c;
      modal_q = q;
    }
  double loglam = rep.aggregates.at("gbic").log10_lambda_mean;
  bool pass = above_one >= 95 && modal_q == 2.7 && loglam <= -3.0;
  std::ostringstream d;
  d << "q>1 in " << above_one << "/100 (>=95), modal q=" << fmt(modal_q)
    << " (=2.7), log10(lambda) mean=" << fmt(loglam) << " (<= -3.0)";
  record(2, "setting 2 reproduction", pass, d.str());
}

// Known failure: on setting 4 the GBIC argmin consistently lands on dense,
// weakly penalized fits (active size ~29 of 40, mse ~14.1), so the
// 11.76 +- 2.0 target is out of reach. Independent quadrature cross-checks
// confirm the criterion values, and every variant of the fit path or
// criterion tried that still matches the other gates (pollution full-data
// selection, settings 1/2/5, the mbic/cv columns of setting 4) leaves this
// number where it is. The target is kept unchanged rather than loosened.
void criterion3() {
  MonteCarloOptions opts;
  opts.threads = threads();
  SimulationReport r3 =
      run_monte_carlo(3, 100, {Criterion::kGbic}, {}, 1, opts);
  SimulationReport r4 =
      run_monte_carlo(4, 100, {Criterion::kGbic}, {}, 1, opts);
  double q3 = r3.aggregates.at("gbic").q_mean;
  double mse4 = r4.aggregates.at("gbic").mse_mean;
  bool pass = q3 <= 1.0 && std::abs(mse4 - 11.76) <= 2.0;
  std::ostringstream d;
  d << "setting 3 q_mean=" << fmt(q3) << " (<= 1.0); setting 4 mse_mean="
    << fmt(mse4) << " (11.76 +- 2.0)";
  record(3, "settings 3 and 4", pass, d.str());
}

void criterion4() {
  MonteCarloOptions opts;
  opts.threads = threads();
  SimulationReport rep = run_monte_carlo(
      5, 100, {Criterion::kGbic, Criterion::kEic}, {}, 1, opts);
  double gbic_mse = rep.aggregates.at("gbic").mse_mean;
  double eic_mse = rep.aggregates.at("eic").mse_mean;
  bool pass = eic_mse < gbic_mse && std::abs(gbic_mse - 14.39) <= 2.5;
  std::ostringstream d;
  d << "eic mse_mean=" << fmt(eic_mse) << " < gbic mse_mean=" << fmt(gbic_mse)
    << "? " << (eic_mse < gbic_mse ? "yes" : "NO") << "; gbic within 14.39"
    << " +- 2.5: " << (std::abs(gbic_mse - 14.39) <= 2.5 ? "yes" : "NO");
  record(4, "setting 5 ordering", pass, d.str());
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  guarded(7, "gbic quadrature oracle", criterion7);
  guarded(8, "estimator oracles", criterion8);
  guarded(9, "property spot checks", criterion9);
  guarded(5, "pollution full-data selection", criteria56);
  guarded(1, "setting 1 reproduction", criterion1);
  guarded(2, "setting 2 reproduction", criterion2);
  guarded(3, "settings 3 and 4", criterion3);
  guarded(4, "setting 5 ordering", criterion4);

  for (int id = 1; id <= 9; ++id) {
    bool seen = false;
    for (const auto& g : gates) seen = seen || g.id == id;
    if (!seen) gates.push_back({id, "missing", false, "check did not run"});
  }
  std::sort(gates.begin(), gates.end(),
            [](const Gate& a, const Gate& b) { return a.id < b.id; });
  int failures = 0;
  std::printf("\n=== acceptance summary ===\n");
  for (const auto& g : gates) {
    if (!g.pass) ++failures;
    std::printf("%d. [%s] %s\n", g.id, g.pass ? "PASS" : "FAIL",
                g.label.c_str());
  }
  double total = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
  std::printf("%d/%zu criteria passed in %.0fs\n", int(gates.size()) - failures,
              gates.size(), total);
  return failures == 0 ? 0 : 1;
}
