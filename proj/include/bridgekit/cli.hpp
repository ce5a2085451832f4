#pragma once

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bridgekit/experiments.hpp"
#include "bridgekit/io.hpp"

namespace bridgekit {

namespace detail {

inline std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(csv);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "table1.csv" -> "table1_trials.csv"
inline std::string trials_path(const std::string& path) {
  auto dot = path.find_last_of('.');
  auto slash = path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + "_trials";
  return path.substr(0, dot) + "_trials" + path.substr(dot);
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<double> parse_number_list(const std::string& csv,
                                             const char* flag) {
  std::vector<double> out;
  for (const auto& item : split_list(csv)) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": not a number: '" + item + "'");
    }
  }
  return out;
}

inline std::vector<Criterion> parse_criteria_list(const std::string& csv,
                                                  const char* flag) {
  std::vector<Criterion> out;
  for (const auto& name : split_list(csv)) {
    auto c = parse_criterion(name);
    if (!c)
      throw UsageError(std::string(flag) + ": unknown criterion '" + name +
                       "' (expected gbic, maic, mbic, aicc, cv, gcv or eic)");
    out.push_back(*c);
  }
  return out;
}

inline void print_fit_summary(std::ostream& out, const BridgeFit& fit,
                              int n) {
  out << "n=" << n << " p=" << fit.beta_hat.size()
      << " lambda=" << fmt_human(fit.hyperparams.lambda)
      << " q=" << fmt_human(fit.hyperparams.q) << "\n";
  out << (fit.converged ? "converged" : "not converged") << " after "
      << fit.iterations << " iterations (last step "
      << fmt_human(fit.final_step_norm) << ")\n";
  out << "sigma2_hat=" << fmt_human(fit.sigma2_hat)
      << " penalized_loglik=" << fmt_human(fit.penalized_loglik) << "\n";
  out << "active set (1-based):";
  if (fit.active_set.empty()) out << " (empty)";
  for (int j : fit.active_set) out << ' ' << (j + 1);
  out << "\n";
  for (int j : fit.active_set)
    out << "  beta_" << (j + 1) << " = " << fmt_human(fit.beta_hat[j]) << "\n";
}

}  // namespace detail

// The `bridgekit` command line: fit / select / simulate / pollution.
// Returns 0 on success, 1 on usage errors, 2 on data or computation errors.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"bridge regression with LQA estimation and"
               " information-criterion tuning"};
  app.require_subcommand(1);

  // Shared option state.
  std::string input, output, format = "csv";
  int threads = default_thread_count();
  std::uint64_t seed = 1;

  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };
  auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads,
                    "worker threads (default: BRIDGEKIT_THREADS or hardware)")
        ->check(CLI::PositiveNumber);
  };

  // --- fit ---
  auto* fit_cmd = app.add_subcommand(
      "fit", "fit one bridge model at a fixed (lambda, q)");
  double lambda = 0.0, q = 0.0;
  FitConfig fit_cfg;
  fit_cmd->add_option("--input", input, "CSV with y first or mort last")
      ->required();
  fit_cmd->add_option("--lambda", lambda, "penalty level")
      ->required()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--q", q, "bridge exponent")
      ->required()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--gamma", fit_cfg.ridge_init_gamma,
                      "ridge initializer level")
      ->capture_default_str();
  fit_cmd->add_option("--delta", fit_cfg.delta, "convergence threshold")
      ->capture_default_str();
  fit_cmd->add_option("--max-iters", fit_cfg.max_iters, "iteration budget")
      ->capture_default_str();
  fit_cmd->add_option("--prune-threshold", fit_cfg.prune_threshold,
                      "zero threshold")
      ->capture_default_str();
  fit_cmd->add_option("--out", output, "write the fit to this file");
  add_format(fit_cmd);

  // --- select ---
  auto* select_cmd = app.add_subcommand(
      "select", "grid-search (lambda, q) under a criterion");
  std::string criterion_name_arg = "gbic";
  std::string grid_name = "simulation";
  std::string lambdas_arg, qs_arg;
  bool warm_start = false;
  int eic_b = 100;
  select_cmd->add_option("--input", input, "CSV with y first or mort last")
      ->required();
  select_cmd->add_option("--criterion", criterion_name_arg,
                         "gbic|maic|mbic|aicc|cv|gcv|eic")
      ->capture_default_str();
  select_cmd->add_option("--grid", grid_name, "which default grid")
      ->check(CLI::IsMember({"simulation", "pollution"}))
      ->capture_default_str();
  select_cmd->add_option("--lambdas", lambdas_arg,
                         "explicit lambda list, descending (overrides --grid)");
  select_cmd->add_option("--qs", qs_arg,
                         "explicit q list (overrides --grid)");
  select_cmd->add_flag("--warm-start", warm_start,
                       "chain fits along each lambda path");
  select_cmd->add_option("--eic-b", eic_b, "EIC bootstrap replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  select_cmd->add_option("--seed", seed, "EIC resampling seed")
      ->capture_default_str();
  select_cmd->add_option("--out", output, "write the scan table to this file");
  add_threads(select_cmd);
  add_format(select_cmd);

  // --- simulate ---
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Monte Carlo study on a synthetic setting");
  int setting = 0;
  int trials = 100;
  std::string criteria_arg = "gbic,maic,mbic,aicc,cv,gcv,eic";
  std::string baselines_arg;
  sim_cmd->add_option("--setting", setting, "scenario 1..5")->required();
  sim_cmd->add_option("--trials", trials, "Monte Carlo trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--criteria", criteria_arg, "comma list of criteria")
      ->capture_default_str();
  sim_cmd->add_option("--baselines", baselines_arg,
                      "comma list from: ols,ridge,lasso,enet");
  sim_cmd->add_option("--seed", seed, "base seed; trial r uses base + r")
      ->capture_default_str();
  sim_cmd->add_option("--eic-b", eic_b, "EIC bootstrap replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_flag("--warm-start", warm_start,
                    "chain fits along each lambda path");
  sim_cmd->add_option("--out", output,
                      "aggregate table path (default table<setting>.csv; csv"
                      " format also writes <out stem>_trials.csv)");
  add_threads(sim_cmd);
  add_format(sim_cmd);

  // --- pollution ---
  auto* pol_cmd = app.add_subcommand(
      "pollution", "random-split study on the pollution data");
  std::string pol_input = "data/pollution.csv";
  int splits = 50;
  std::string pol_criterion = "gbic";
  pol_cmd->add_option("--input", pol_input, "pollution CSV")
      ->capture_default_str();
  pol_cmd->add_option("--splits", splits, "number of random 40/20 splits")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pol_cmd->add_option("--criterion", pol_criterion, "selection criterion")
      ->capture_default_str();
  pol_cmd->add_option("--seed", seed, "base seed; split s uses base + s")
      ->capture_default_str();
  pol_cmd->add_option("--eic-b", eic_b, "EIC bootstrap replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pol_cmd->add_option("--out", output,
                      "split table path (default pollution_report.csv)");
  add_threads(pol_cmd);
  add_format(pol_cmd);

  std::vector<const char*> argv;
  argv.push_back("bridgekit");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()),
              const_cast<char**>(argv.data()));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(fit_cmd)) {
      auto [data, params] = standardize(read_dataset_csv(input));
      BridgeFit fit = fit_bridge(data, {lambda, q}, fit_cfg);
      detail::print_fit_summary(out, fit, data.n());
      if (!output.empty()) {
        write_file(output, format == "csv" ? render_fit_csv(fit)
                                           : fit_to_json(fit).dump(2) + "\n");
        out << "wrote " << output << "\n";
      }
      return 0;
    }

    if (app.got_subcommand(select_cmd)) {
      auto crit = parse_criterion(criterion_name_arg);
      if (!crit)
        throw detail::UsageError(
            "--criterion: unknown criterion '" + criterion_name_arg +
            "' (expected gbic, maic, mbic, aicc, cv, gcv or eic)");
      Grid grid = grid_name == "pollution" ? default_pollution_grid()
                                           : default_simulation_grid();
      if (!lambdas_arg.empty())
        grid.lambdas = detail::parse_number_list(lambdas_arg, "--lambdas");
      if (!qs_arg.empty())
        grid.qs = detail::parse_number_list(qs_arg, "--qs");
      auto [data, params] = standardize(read_dataset_csv(input));
      SelectOptions so;
      so.threads = threads;
      so.warm_start = warm_start;
      so.eic_b = eic_b;
      so.seed = seed;
      SelectionResult res = select(data, grid, *crit, so);
      std::size_t valid = 0;
      for (const auto& e : res.table)
        if (e.score.valid) ++valid;
      out << "criterion=" << criterion_name(*crit)
          << " grid points=" << res.table.size() << " valid=" << valid << "\n";
      out << "best: lambda=" << fmt_human(res.best.lambda)
          << " (log10=" << fmt_human(std::log10(res.best.lambda))
          << ") q=" << fmt_human(res.best.q)
          << " value=" << fmt_human(res.table[res.best_index].score.value)
          << "\n";
      detail::print_fit_summary(out, res.best_fit, data.n());
      if (!output.empty()) {
        write_file(output, format == "csv"
                               ? render_selection_csv(res)
                               : selection_to_json(res).dump(2) + "\n");
        out << "wrote " << output << "\n";
      }
      return 0;
    }

    if (app.got_subcommand(sim_cmd)) {
      auto criteria = detail::parse_criteria_list(criteria_arg, "--criteria");
      if (criteria.empty())
        throw detail::UsageError("--criteria: list must not be empty");
      auto baseline_names = detail::split_list(baselines_arg);
      MonteCarloOptions opts;
      opts.threads = threads;
      opts.warm_start = warm_start;
      opts.eic_b = eic_b;
      try {
        detail::validate_baseline_names(baseline_names);
      } catch (const Error& e) {
        throw detail::UsageError(std::string("--baselines: ") + e.what());
      }
      SimulationReport report = run_monte_carlo(setting, trials, criteria,
                                                baseline_names, seed, opts);
      out << "setting " << setting << ", " << trials << " trials, seed "
          << seed << "\n";
      for (const auto& name : report.criteria) {
        const auto& a = report.aggregates.at(name);
        out << "  " << name << ": mse=" << fmt_human(a.mse_mean) << " ("
            << fmt_human(a.mse_sd) << ")"
            << " log10(lambda)=" << fmt_human(a.log10_lambda_mean) << " ("
            << fmt_human(a.log10_lambda_sd) << ")"
            << " q=" << fmt_human(a.q_mean) << " (" << fmt_human(a.q_sd)
            << ")\n";
      }
      for (const auto& name : report.baselines) {
        const auto& a = report.baseline_aggregates.at(name);
        out << "  " << name << ": mse=" << fmt_human(a.mse_mean) << " ("
            << fmt_human(a.mse_sd) << ")\n";
      }
      std::string path = output.empty()
                             ? "table" + std::to_string(setting) +
                                   (format == "csv" ? ".csv" : ".json")
                             : output;
      if (format == "csv") {
        write_file(path, render_simulation_table_csv(report));
        std::string tpath = detail::trials_path(path);
        write_file(tpath, render_simulation_trials_csv(report));
        out << "wrote " << path << " and " << tpath << "\n";
      } else {
        write_file(path, simulation_to_json(report).dump(2) + "\n");
        out << "wrote " << path << "\n";
      }
      return 0;
    }

    // pollution
    auto crit = parse_criterion(pol_criterion);
    if (!crit)
      throw detail::UsageError(
          "--criterion: unknown criterion '" + pol_criterion +
          "' (expected gbic, maic, mbic, aicc, cv, gcv or eic)");
    PollutionOptions opts;
    opts.threads = threads;
    opts.criterion = *crit;
    opts.eic_b = eic_b;
    Dataset raw = load_pollution(pol_input);
    PollutionReport report = run_pollution(raw, splits, seed, opts);
    out << splits << " random 40/20 splits, seed " << seed << ", criterion "
        << criterion_name(*crit) << "\n";
    out << "median squared prediction error:\n";
    for (const char* name : {"bridge", "ols", "ridge", "lasso", "enet"})
      out << "  " << name << ": "
          << fmt_human(report.median_pred_error.at(name)) << "\n";
    out << "full data: lambda=" << fmt_human(report.full_best.lambda)
        << " (log10=" << fmt_human(std::log10(report.full_best.lambda))
        << ") q=" << fmt_human(report.full_best.q) << "\n";
    out << "full-data active set (1-based):";
    for (int j : report.full_active) out << ' ' << j;
    out << "\n";
    std::string path = output.empty()
                           ? std::string("pollution_report") +
                                 (format == "csv" ? ".csv" : ".json")
                           : output;
    write_file(path, format == "csv"
                         ? render_pollution_csv(report)
                         : pollution_to_json(report).dump(2) + "\n");
    out << "wrote " << path << "\n";
    return 0;
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace bridgekit
