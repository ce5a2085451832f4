#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bridgekit/experiments.hpp"
#include "bridgekit/selection.hpp"

namespace bridgekit {

using Json = nlohmann::json;

// Machine outputs carry full precision; human summaries are rounded.
inline std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_human(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

// --- bridge fit -----------------------------------------------------------

inline Json fit_to_json(const BridgeFit& fit) {
  Json j;
  j["lambda"] = fit.hyperparams.lambda;
  j["q"] = fit.hyperparams.q;
  j["sigma2_hat"] = fit.sigma2_hat;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["final_step_norm"] = fit.final_step_norm;
  j["penalized_loglik"] = fit.penalized_loglik;
  Json active = Json::array();
  for (int a : fit.active_set) active.push_back(a + 1);  // 1-based
  j["active_set"] = active;
  Json beta = Json::array();
  for (Eigen::Index i = 0; i < fit.beta_hat.size(); ++i)
    beta.push_back(fit.beta_hat[i]);
  j["beta_hat"] = beta;
  return j;
}

inline std::string render_fit_csv(const BridgeFit& fit) {
  std::ostringstream out;
  out << "field,value\n";
  out << "lambda," << fmt_full(fit.hyperparams.lambda) << "\n";
  out << "q," << fmt_full(fit.hyperparams.q) << "\n";
  out << "sigma2_hat," << fmt_full(fit.sigma2_hat) << "\n";
  out << "iterations," << fit.iterations << "\n";
  out << "converged," << (fit.converged ? 1 : 0) << "\n";
  out << "final_step_norm," << fmt_full(fit.final_step_norm) << "\n";
  out << "penalized_loglik," << fmt_full(fit.penalized_loglik) << "\n";
  std::string active;
  for (std::size_t i = 0; i < fit.active_set.size(); ++i) {
    if (i) active += ';';
    active += std::to_string(fit.active_set[i] + 1);
  }
  out << "active_set," << detail::csv_escape(active) << "\n";
  for (Eigen::Index i = 0; i < fit.beta_hat.size(); ++i)
    out << "beta_" << (i + 1) << "," << fmt_full(fit.beta_hat[i]) << "\n";
  return out.str();
}

// --- selection ------------------------------------------------------------

inline Json selection_to_json(const SelectionResult& res) {
  Json j;
  j["best"] = {{"lambda", res.best.lambda},
               {"q", res.best.q},
               {"index", res.best_index},
               {"value", res.table[res.best_index].score.value}};
  j["best_fit"] = fit_to_json(res.best_fit);
  Json table = Json::array();
  for (const auto& e : res.table) {
    table.push_back({{"lambda", e.hp.lambda},
                     {"q", e.hp.q},
                     {"value", e.score.value},
                     {"valid", e.score.valid},
                     {"note", e.score.note},
                     {"active_size", e.active_size},
                     {"converged", e.converged},
                     {"iterations", e.iterations}});
  }
  j["table"] = table;
  return j;
}

inline std::string render_selection_csv(const SelectionResult& res) {
  std::ostringstream out;
  out << "lambda,q,value,valid,note,active_size,converged,iterations,best\n";
  for (std::size_t i = 0; i < res.table.size(); ++i) {
    const auto& e = res.table[i];
    out << fmt_full(e.hp.lambda) << ',' << fmt_full(e.hp.q) << ','
        << (e.score.valid ? fmt_full(e.score.value) : std::string()) << ','
        << (e.score.valid ? 1 : 0) << ',' << detail::csv_escape(e.score.note)
        << ',' << e.active_size << ',' << (e.converged ? 1 : 0) << ','
        << e.iterations << ',' << (i == res.best_index ? 1 : 0) << "\n";
  }
  return out.str();
}

// --- simulation -----------------------------------------------------------

inline Json simulation_to_json(const SimulationReport& r) {
  Json j;
  j["setting"] = r.setting;
  j["trials"] = r.trials;
  j["base_seed"] = r.base_seed;
  j["criteria"] = r.criteria;
  j["baselines"] = r.baselines;
  Json aggs = Json::object();
  for (const auto& name : r.criteria) {
    const Aggregate& a = r.aggregates.at(name);
    aggs[name] = {{"count", a.count},
                  {"mse_mean", a.mse_mean},
                  {"mse_sd", a.mse_sd},
                  {"log10_lambda_mean", a.log10_lambda_mean},
                  {"log10_lambda_sd", a.log10_lambda_sd},
                  {"q_mean", a.q_mean},
                  {"q_sd", a.q_sd}};
  }
  j["aggregates"] = aggs;
  Json baggs = Json::object();
  for (const auto& name : r.baselines) {
    const BaselineAggregate& a = r.baseline_aggregates.at(name);
    baggs[name] = {{"count", a.count},
                   {"mse_mean", a.mse_mean},
                   {"mse_sd", a.mse_sd}};
  }
  j["baseline_aggregates"] = baggs;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json jr;
    jr["trial"] = row.trial;
    jr["ok"] = row.ok;
    jr["note"] = row.note;
    Json crit = Json::object();
    for (const auto& [name, res] : row.criteria)
      crit[name] = {{"mse", res.mse}, {"lambda", res.lambda}, {"q", res.q}};
    jr["criteria"] = crit;
    jr["baselines"] = row.baseline_mse;
    rows.push_back(jr);
  }
  j["rows"] = rows;
  return j;
}

// Aggregate summary table: one column per criterion, rows for the
// MSE / log10(lambda) / q means and standard deviations.
inline std::string render_simulation_table_csv(const SimulationReport& r) {
  std::ostringstream out;
  out << "statistic";
  for (const auto& name : r.criteria) out << ',' << name;
  out << "\n";
  auto row = [&](const char* label, auto getter) {
    out << label;
    for (const auto& name : r.criteria)
      out << ',' << fmt_full(getter(r.aggregates.at(name)));
    out << "\n";
  };
  row("mse_mean", [](const Aggregate& a) { return a.mse_mean; });
  row("mse_sd", [](const Aggregate& a) { return a.mse_sd; });
  row("log10_lambda_mean",
      [](const Aggregate& a) { return a.log10_lambda_mean; });
  row("log10_lambda_sd", [](const Aggregate& a) { return a.log10_lambda_sd; });
  row("q_mean", [](const Aggregate& a) { return a.q_mean; });
  row("q_sd", [](const Aggregate& a) { return a.q_sd; });
  out << "count";
  for (const auto& name : r.criteria)
    out << ',' << r.aggregates.at(name).count;
  out << "\n";
  return out.str();
}

// Per-trial rows for criteria and baselines (baseline rows leave lambda/q
// empty); failed trials are reported in the JSON mirror, not here.
inline std::string render_simulation_trials_csv(const SimulationReport& r) {
  std::ostringstream out;
  out << "trial,selector,mse,lambda,q\n";
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    for (const auto& name : r.criteria) {
      const auto& res = row.criteria.at(name);
      out << row.trial << ',' << name << ',' << fmt_full(res.mse) << ','
          << fmt_full(res.lambda) << ',' << fmt_full(res.q) << "\n";
    }
    for (const auto& name : r.baselines)
      out << row.trial << ',' << name << ','
          << fmt_full(row.baseline_mse.at(name)) << ",,\n";
  }
  return out.str();
}

// --- pollution ------------------------------------------------------------

inline Json pollution_to_json(const PollutionReport& r) {
  Json j;
  j["base_seed"] = r.base_seed;
  Json splits = Json::array();
  for (const auto& s : r.splits) {
    splits.push_back({{"split", s.split},
                      {"pred_error", s.pred_error},
                      {"lambda", s.bridge_best.lambda},
                      {"q", s.bridge_best.q},
                      {"active_size", s.bridge_active}});
  }
  j["splits"] = splits;
  j["median_pred_error"] = r.median_pred_error;
  Json full;
  full["lambda"] = r.full_best.lambda;
  full["q"] = r.full_best.q;
  full["active_set"] = r.full_active;  // 1-based
  full["sigma2_hat"] = r.full_sigma2;
  Json beta = Json::array();
  for (Eigen::Index i = 0; i < r.full_beta.size(); ++i)
    beta.push_back(r.full_beta[i]);
  full["beta_hat"] = beta;
  j["full_data"] = full;
  return j;
}

// Split rows plus a median row; the full-data selection lives in the JSON
// mirror and the CLI summary.
inline std::string render_pollution_csv(const PollutionReport& r) {
  std::ostringstream out;
  out << "split,bridge,ols,ridge,lasso,enet,lambda,q,active_size\n";
  for (const auto& s : r.splits) {
    out << s.split;
    for (const char* name : {"bridge", "ols", "ridge", "lasso", "enet"})
      out << ',' << fmt_full(s.pred_error.at(name));
    out << ',' << fmt_full(s.bridge_best.lambda) << ','
        << fmt_full(s.bridge_best.q) << ',' << s.bridge_active << "\n";
  }
  out << "median";
  for (const char* name : {"bridge", "ols", "ridge", "lasso", "enet"})
    out << ',' << fmt_full(r.median_pred_error.at(name));
  out << ",,,\n";
  return out.str();
}

}  // namespace bridgekit
