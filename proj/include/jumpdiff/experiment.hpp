#pragma once

#include "jumpdiff/estimator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace jumpdiff {

enum class Target { g, sigma2 };

inline const char* target_name(Target t) { return t == Target::g ? "g" : "sigma2"; }

//! Estimation interval defaults: the 95% radius of the stationary law of
//! each built-in model, measured once from a 2e6-step simulation at
//! delta = 1e-3 and frozen here.
inline Interval default_interval(int model_id) {
  switch (model_id) {
    case 1: return Interval(-1.38, 1.38);
    case 2: return Interval(-2.04, 2.04);
    case 3: return Interval(-1.98, 1.98);
    case 4: return Interval(-2.20, 2.20);
    default: throw std::invalid_argument("unknown model id " + std::to_string(model_id));
  }
}

//! One Monte Carlo cell: a (model, n, delta) triple replicated over seeds.
struct CellConfig {
  int model_id = 1;
  long n = 10000;
  double delta = 1e-2;
  int replications = 20;
  std::optional<Interval> interval; // default: per-model stationary radius
  double kappa_g = 2.0;
  double kappa_sigma = 6.0;
  Bounds::Source bounds_mode = Bounds::Source::known;
  std::uint64_t base_seed = 1;
  int threads = 0; // 0 = hardware concurrency
  int substeps = 0;
  double burn_in = 10.0;
  BuiltinOptions model_opts;
  EstimatorOptions estimator_opts;

  Interval resolved_interval() const {
    return interval ? *interval : default_interval(model_id);
  }
};

//! Empirical squared error of a fitted function at the sample points inside
//! A, normalized by the full number of increments.
inline double empirical_error(const std::function<double(double)>& fitted,
                              const std::function<double(double)>& truth,
                              const Path& path, Interval interval) {
  const long n = path.n();
  double sum = 0.0;
  for (long k = 0; k < n; ++k) {
    const double x = path.values[static_cast<std::size_t>(k)];
    if (!interval.contains(x)) continue;
    const double e = fitted(x) - truth(x);
    sum += e * e;
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

//! Per-replication record behind one table cell.
struct RepStats {
  double err = 0.0;
  double err_min = 0.0;
  int m_sel = 0;
  int r_sel = 0;
  int m_min = 0;
  int r_min = 0;
  double t_e = 0.0; // estimation seconds, excluded from determinism checks
};

//! Aggregate statistics of one cell for one target.
struct ExperimentReport {
  Target target = Target::g;
  double risk = 0.0;   // mean err of the adaptive pick
  double oracle = 0.0; // mean err / err_min
  double m_est = 0.0;
  double r_est = 0.0;
  double t_e = 0.0;
  std::vector<RepStats> per_replication;
};

namespace detail {

//! err of every non-singular grid fit; fills err_min and its (m, r).
inline RepStats grid_errors(const AdaptiveResult& res,
                            const std::function<double(double)>& truth,
                            const Path& path, Interval interval) {
  RepStats st;
  st.m_sel = res.m_sel;
  st.r_sel = res.r_sel;
  const long n = path.n();
  bool have_min = false;
  for (const Fit& f : res.all_fits) {
    if (f.singular) continue;
    const SplineBasis basis(interval, f.m, f.r);
    double sum = 0.0;
    for (long k = 0; k < n; ++k) {
      const double x = path.values[static_cast<std::size_t>(k)];
      if (!interval.contains(x)) continue;
      const double e = basis.eval_function(f.coef, x) - truth(x);
      sum += e * e;
    }
    const double err = sum / static_cast<double>(n);
    if (f.m == res.m_sel && f.r == res.r_sel) st.err = err;
    if (!have_min || err < st.err_min) {
      st.err_min = err;
      st.m_min = f.m;
      st.r_min = f.r;
      have_min = true;
    }
  }
  return st;
}

//! Runs fn(i) for i in [0, count) on the requested number of threads.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

inline ExperimentReport aggregate(Target target, std::vector<RepStats> stats) {
  ExperimentReport rep;
  rep.target = target;
  const double r = static_cast<double>(stats.size());
  for (const RepStats& s : stats) {
    rep.risk += s.err / r;
    rep.oracle += (s.err_min > 0.0 ? s.err / s.err_min : 1.0) / r;
    rep.m_est += s.m_sel / r;
    rep.r_est += s.r_sel / r;
    rep.t_e += s.t_e / r;
  }
  rep.per_replication = std::move(stats);
  return rep;
}

} // namespace detail

//! Runs one cell: per replication, simulate with seed base_seed + i, fit
//! both targets adaptively, and score the adaptive pick against the best
//! grid fit. Deterministic for a given config (timing aside), regardless of
//! thread count.
inline std::pair<ExperimentReport, ExperimentReport> run_cell(const CellConfig& cfg) {
  if (cfg.replications < 1)
    throw std::invalid_argument("run_cell: replications must be >= 1");
  const ModelSpec model = builtin_model(cfg.model_id, cfg.model_opts);
  const Interval interval = cfg.resolved_interval();
  const auto g_truth = [&model](double x) { return model.quadratic_mean(x); };
  const auto s_truth = [&model](double x) { return model.sigma_sq(x); };

  std::vector<RepStats> g_stats(static_cast<std::size_t>(cfg.replications));
  std::vector<RepStats> s_stats(static_cast<std::size_t>(cfg.replications));
  std::vector<std::string> failures(static_cast<std::size_t>(cfg.replications));

  detail::parallel_for(cfg.replications, cfg.threads, [&](int i) {
    try {
      SimConfig sim;
      sim.n = cfg.n;
      sim.delta = cfg.delta;
      sim.substeps = cfg.substeps;
      sim.burn_in = cfg.burn_in;
      sim.seed = cfg.base_seed + static_cast<std::uint64_t>(i);
      const Path path = simulate(model, sim);

      const Bounds bounds = (cfg.bounds_mode == Bounds::Source::known)
                                ? Bounds::known_for(model)
                                : plugin_bounds(path);
      const auto t0 = std::chrono::steady_clock::now();
      const AdaptiveResult g_res =
          estimate_g(path, interval, bounds, cfg.kappa_g, cfg.estimator_opts);
      const AdaptiveResult s_res = estimate_sigma2(path, interval, bounds,
                                                   cfg.kappa_sigma, cfg.estimator_opts);
      const auto t1 = std::chrono::steady_clock::now();
      const double seconds = std::chrono::duration<double>(t1 - t0).count();

      g_stats[static_cast<std::size_t>(i)] =
          detail::grid_errors(g_res, g_truth, path, interval);
      s_stats[static_cast<std::size_t>(i)] =
          detail::grid_errors(s_res, s_truth, path, interval);
      g_stats[static_cast<std::size_t>(i)].t_e = seconds;
      s_stats[static_cast<std::size_t>(i)].t_e = seconds;
    } catch (const std::exception& ex) {
      failures[static_cast<std::size_t>(i)] = ex.what();
    }
  });

  for (std::size_t i = 0; i < failures.size(); ++i)
    if (!failures[i].empty())
      throw std::runtime_error("replication " + std::to_string(i) + ": " + failures[i]);

  return {detail::aggregate(Target::g, std::move(g_stats)),
          detail::aggregate(Target::sigma2, std::move(s_stats))};
}

//! Truth curve plus one fitted curve per replication on a uniform grid
//! (cell midpoints of A).
struct FigureData {
  Target target = Target::g;
  std::vector<double> grid;
  std::vector<double> truth;
  std::vector<std::vector<double>> estimates; // one column per replication
};

inline std::pair<FigureData, FigureData> figure_data(const CellConfig& cfg,
                                                     int grid_points = 512) {
  const ModelSpec model = builtin_model(cfg.model_id, cfg.model_opts);
  const Interval interval = cfg.resolved_interval();

  FigureData g_fig, s_fig;
  g_fig.target = Target::g;
  s_fig.target = Target::sigma2;
  for (int j = 0; j < grid_points; ++j) {
    const double x = interval.lo +
                     (j + 0.5) * interval.length() / static_cast<double>(grid_points);
    g_fig.grid.push_back(x);
    s_fig.grid.push_back(x);
    g_fig.truth.push_back(model.quadratic_mean(x));
    s_fig.truth.push_back(model.sigma_sq(x));
  }
  g_fig.estimates.resize(static_cast<std::size_t>(cfg.replications));
  s_fig.estimates.resize(static_cast<std::size_t>(cfg.replications));

  std::vector<std::string> failures(static_cast<std::size_t>(cfg.replications));
  detail::parallel_for(cfg.replications, cfg.threads, [&](int i) {
    try {
      SimConfig sim;
      sim.n = cfg.n;
      sim.delta = cfg.delta;
      sim.substeps = cfg.substeps;
      sim.burn_in = cfg.burn_in;
      sim.seed = cfg.base_seed + static_cast<std::uint64_t>(i);
      const Path path = simulate(model, sim);
      const Bounds bounds = (cfg.bounds_mode == Bounds::Source::known)
                                ? Bounds::known_for(model)
                                : plugin_bounds(path);
      const AdaptiveResult g_res =
          estimate_g(path, interval, bounds, cfg.kappa_g, cfg.estimator_opts);
      const AdaptiveResult s_res = estimate_sigma2(path, interval, bounds,
                                                   cfg.kappa_sigma, cfg.estimator_opts);
      auto& g_col = g_fig.estimates[static_cast<std::size_t>(i)];
      auto& s_col = s_fig.estimates[static_cast<std::size_t>(i)];
      g_col.reserve(g_fig.grid.size());
      s_col.reserve(s_fig.grid.size());
      for (double x : g_fig.grid) {
        g_col.push_back(g_res(x));
        s_col.push_back(s_res(x));
      }
    } catch (const std::exception& ex) {
      failures[static_cast<std::size_t>(i)] = ex.what();
    }
  });
  for (std::size_t i = 0; i < failures.size(); ++i)
    if (!failures[i].empty())
      throw std::runtime_error("replication " + std::to_string(i) + ": " + failures[i]);
  return {std::move(g_fig), std::move(s_fig)};
}

//! Risk and mean selected dimension per penalty constant.
struct CalibrationRow {
  double kappa = 0.0;
  double g_risk = 0.0;
  double g_oracle = 0.0;
  double g_dim = 0.0;
  double sigma_risk = 0.0;
  double sigma_oracle = 0.0;
  double sigma_dim = 0.0;
};

inline std::vector<CalibrationRow> calibration_sweep(const CellConfig& cfg,
                                                     const std::vector<double>& kappas) {
  std::vector<CalibrationRow> rows;
  for (double kappa : kappas) {
    CellConfig c = cfg;
    c.kappa_g = kappa;
    c.kappa_sigma = kappa;
    const auto [g_rep, s_rep] = run_cell(c);
    CalibrationRow row;
    row.kappa = kappa;
    row.g_risk = g_rep.risk;
    row.g_oracle = g_rep.oracle;
    row.sigma_risk = s_rep.risk;
    row.sigma_oracle = s_rep.oracle;
    const double nr = static_cast<double>(g_rep.per_replication.size());
    for (const RepStats& s : g_rep.per_replication)
      row.g_dim += static_cast<double>((1 << s.m_sel) + s.r_sel) / nr;
    for (const RepStats& s : s_rep.per_replication)
      row.sigma_dim += static_cast<double>((1 << s.m_sel) + s.r_sel) / nr;
    rows.push_back(row);
  }
  return rows;
}

} // namespace jumpdiff
