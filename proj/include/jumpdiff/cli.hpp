#pragma once

#include "jumpdiff/config.hpp"
#include "jumpdiff/experiment.hpp"
#include "jumpdiff/svg.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace jumpdiff {
namespace cli {

inline int parse_model_id(const std::string& s) {
  if (s == "1" || s == "model1") return 1;
  if (s == "2" || s == "model2") return 2;
  if (s == "3" || s == "model3") return 3;
  if (s == "4" || s == "model4") return 4;
  throw std::invalid_argument("config: model must be 1..4 or model1..model4, got '" +
                              s + "'");
}

//! "delta:n" pairs, comma separated, e.g. "1e-2:1e4,1e-1:1e4".
inline std::vector<std::pair<double, long>> parse_cells(const std::string& s) {
  std::vector<std::pair<double, long>> cells;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("config: cells entry '" + item +
                                  "' must look like delta:n");
    try {
      const double delta = std::stod(item.substr(0, colon));
      const double n = std::stod(item.substr(colon + 1));
      if (!(delta > 0.0) || !(n >= 2.0))
        throw std::invalid_argument("bad range");
      cells.emplace_back(delta, static_cast<long>(std::llround(n)));
    } catch (const std::exception&) {
      throw std::invalid_argument("config: cells entry '" + item +
                                  "' must be positive delta:n");
    }
  }
  if (cells.empty()) throw std::invalid_argument("config: cells is empty");
  return cells;
}

inline std::vector<double> parse_kappas(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const double k = std::stod(item);
      if (!(k > 0.0)) throw std::invalid_argument("bad kappa");
      out.push_back(k);
    } catch (const std::exception&) {
      throw std::invalid_argument("config: kappas entry '" + item +
                                  "' must be a positive number");
    }
  }
  if (out.empty()) throw std::invalid_argument("config: kappas is empty");
  return out;
}

inline CellConfig cell_config(const RunConfig& cfg) {
  CellConfig cell;
  cell.model_id = parse_model_id(cfg.model);
  cell.n = cfg.n;
  cell.delta = cfg.delta;
  cell.replications = cfg.reps;
  if (cfg.interval_lo != cfg.interval_hi)
    cell.interval = Interval(cfg.interval_lo, cfg.interval_hi);
  cell.kappa_g = cfg.kappa_g;
  cell.kappa_sigma = cfg.kappa_sigma;
  cell.bounds_mode =
      cfg.bounds == "known" ? Bounds::Source::known : Bounds::Source::plugin;
  cell.base_seed = cfg.seed;
  cell.threads = cfg.threads;
  cell.substeps = cfg.substeps;
  cell.burn_in = cfg.burn_in;
  cell.model_opts.levy_truncation = cfg.levy_levels;
  cell.model_opts.laplace_rate = cfg.laplace_lambda;
  cell.estimator_opts.trunc_form = cfg.trunc_form == "sqrt_log"
                                       ? TruncationRule::Form::sqrt_log
                                       : TruncationRule::Form::log_outside;
  cell.estimator_opts.sigma_pen_form = cfg.sigma_pen == "dim"
                                           ? Penalty::SigmaForm::dim_scaled
                                           : Penalty::SigmaForm::flat;
  return cell;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file " + p.string());
  return os;
}

inline void write_table_csv(std::ostream& os,
                            const std::vector<std::pair<double, long>>& cells,
                            const std::vector<std::pair<ExperimentReport, ExperimentReport>>& reports) {
  os << "delta,n,g_risk,g_oracle,g_m_est,g_r_est,g_t_e,"
        "sigma_risk,sigma_oracle,sigma_m_est,sigma_r_est,sigma_t_e\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& [g, s] = reports[i];
    write_csv_row(os, {format_number(cells[i].first), format_number(cells[i].second),
                       format_number(g.risk), format_number(g.oracle),
                       format_number(g.m_est), format_number(g.r_est),
                       format_number(g.t_e), format_number(s.risk),
                       format_number(s.oracle), format_number(s.m_est),
                       format_number(s.r_est), format_number(s.t_e)});
  }
}

inline void write_figure_csv(std::ostream& os, const FigureData& fig) {
  os << "x,truth";
  for (std::size_t i = 0; i < fig.estimates.size(); ++i) os << ",estimate_" << i + 1;
  os << '\n';
  for (std::size_t j = 0; j < fig.grid.size(); ++j) {
    std::vector<std::string> row{format_number(fig.grid[j]),
                                 format_number(fig.truth[j])};
    for (const auto& col : fig.estimates) row.push_back(format_number(col[j]));
    write_csv_row(os, row);
  }
}

inline void write_figure_svg(std::ostream& os, const FigureData& fig,
                             const std::string& title) {
  static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  std::vector<SvgSeries> series;
  series.push_back({"truth", "#000000", false, fig.truth});
  for (std::size_t i = 0; i < fig.estimates.size(); ++i)
    series.push_back({"estimate " + std::to_string(i + 1), palette[i % 6], true,
                      fig.estimates[i]});
  write_line_chart(os, title, fig.grid, series);
}

inline int run_simulate(const RunConfig& cfg, std::ostream& out) {
  BuiltinOptions mo;
  mo.levy_truncation = cfg.levy_levels;
  mo.laplace_rate = cfg.laplace_lambda;
  const ModelSpec model = builtin_model(parse_model_id(cfg.model), mo);
  SimConfig sim;
  sim.n = cfg.n;
  sim.delta = cfg.delta;
  sim.substeps = cfg.substeps;
  sim.burn_in = cfg.burn_in;
  sim.seed = cfg.seed;
  const Path path = simulate(model, sim);
  std::filesystem::create_directories(cfg.out_dir);
  const auto file = std::filesystem::path(cfg.out_dir) /
                    ("path_" + model.name + ".csv");
  auto os = open_output(file);
  write_path_csv(os, path);
  out << "wrote " << file.string() << " (" << path.values.size() << " rows)\n";
  return 0;
}

inline int run_estimate(const RunConfig& cfg, std::ostream& out) {
  const CellConfig cell = cell_config(cfg);
  const ModelSpec model = builtin_model(cell.model_id, cell.model_opts);
  const Interval interval = cell.resolved_interval();
  SimConfig sim;
  sim.n = cfg.n;
  sim.delta = cfg.delta;
  sim.substeps = cfg.substeps;
  sim.burn_in = cfg.burn_in;
  sim.seed = cfg.seed;
  const Path path = simulate(model, sim);
  const Bounds bounds = cell.bounds_mode == Bounds::Source::known
                            ? Bounds::known_for(model)
                            : plugin_bounds(path);
  const double cap = std::sqrt(static_cast<double>(path.n()) * path.delta);

  std::filesystem::create_directories(cfg.out_dir);
  auto summary = open_output(std::filesystem::path(cfg.out_dir) / "estimate_summary.csv");
  summary << "target,m,r,dim,dim_cap,contrast,penalty,n_in_A\n";

  std::optional<AdaptiveResult> g_res, s_res;
  if (cfg.target == "g" || cfg.target == "both")
    g_res = estimate_g(path, interval, bounds, cfg.kappa_g, cell.estimator_opts);
  if (cfg.target == "sigma2" || cfg.target == "both")
    s_res = estimate_sigma2(path, interval, bounds, cfg.kappa_sigma,
                            cell.estimator_opts);

  const auto emit = [&](const AdaptiveResult& res, Target target,
                        const std::function<double(double)>& truth) {
    const std::string name = target_name(target);
    auto os = open_output(std::filesystem::path(cfg.out_dir) /
                          ("estimate_" + name + ".csv"));
    os << "x,value,truth\n";
    for (int j = 0; j < cfg.grid_points; ++j) {
      const double x =
          interval.lo + (j + 0.5) * interval.length() / cfg.grid_points;
      write_csv_row(os, {format_number(x), format_number(res(x)),
                         format_number(truth(x))});
    }
    write_csv_row(summary,
                  {name, format_number(res.m_sel), format_number(res.r_sel),
                   format_number(res.fit.dim), format_number(cap),
                   format_number(res.fit.contrast), format_number(res.fit.penalty),
                   format_number(res.fit.n_in_A)});
    out << name << ": m=" << res.m_sel << " r=" << res.r_sel
        << " dim=" << res.fit.dim << " (cap " << format_number(cap) << ")"
        << " contrast=" << format_number(res.fit.contrast)
        << " penalty=" << format_number(res.fit.penalty) << '\n';
  };
  if (g_res) emit(*g_res, Target::g, [&](double x) { return model.quadratic_mean(x); });
  if (s_res)
    emit(*s_res, Target::sigma2, [&](double x) { return model.sigma_sq(x); });
  if (g_res && s_res) {
    const Xi2Estimate xi2 = estimate_xi2(*g_res, *s_res, cfg.clip_xi2);
    auto os = open_output(std::filesystem::path(cfg.out_dir) / "estimate_xi2.csv");
    os << "x,value,truth\n";
    for (int j = 0; j < cfg.grid_points; ++j) {
      const double x =
          interval.lo + (j + 0.5) * interval.length() / cfg.grid_points;
      const double jc = model.jump_coeff(x);
      write_csv_row(os, {format_number(x), format_number(xi2(x)),
                         format_number(jc * jc)});
    }
  }
  return 0;
}

inline int run_table(const RunConfig& cfg, std::ostream& out) {
  const auto cells = parse_cells(cfg.cells);
  std::vector<std::pair<ExperimentReport, ExperimentReport>> reports;
  for (const auto& [delta, n] : cells) {
    CellConfig cell = cell_config(cfg);
    cell.delta = delta;
    cell.n = n;
    reports.push_back(run_cell(cell));
    const auto& [g, s] = reports.back();
    out << "cell delta=" << format_number(delta) << " n=" << n
        << ": g risk=" << format_number(g.risk)
        << " sigma2 risk=" << format_number(s.risk) << '\n';
  }
  std::filesystem::create_directories(cfg.out_dir);
  const auto file = std::filesystem::path(cfg.out_dir) /
                    ("table_model" + std::to_string(parse_model_id(cfg.model)) + ".csv");
  auto os = open_output(file);
  write_table_csv(os, cells, reports);
  out << "wrote " << file.string() << '\n';
  return 0;
}

inline int run_figure(const RunConfig& cfg, std::ostream& out) {
  CellConfig cell = cell_config(cfg);
  const auto [g_fig, s_fig] = figure_data(cell, cfg.grid_points);
  std::filesystem::create_directories(cfg.out_dir);
  for (const FigureData* fig : {&g_fig, &s_fig}) {
    const std::string name = target_name(fig->target);
    const auto file =
        std::filesystem::path(cfg.out_dir) / ("figure_" + name + ".csv");
    auto os = open_output(file);
    write_figure_csv(os, *fig);
    out << "wrote " << file.string() << '\n';
    if (cfg.format == "svg") {
      const auto svg_file =
          std::filesystem::path(cfg.out_dir) / ("figure_" + name + ".svg");
      auto svg = open_output(svg_file);
      write_figure_svg(svg, *fig,
                       "model " + cfg.model + ": " + name + " estimators");
      out << "wrote " << svg_file.string() << '\n';
    }
  }
  return 0;
}

inline int run_calibrate(const RunConfig& cfg, std::ostream& out) {
  const CellConfig cell = cell_config(cfg);
  const auto rows = calibration_sweep(cell, parse_kappas(cfg.kappas));
  std::filesystem::create_directories(cfg.out_dir);
  const auto file = std::filesystem::path(cfg.out_dir) / "calibrate.csv";
  auto os = open_output(file);
  os << "kappa,g_risk,g_oracle,g_dim,sigma_risk,sigma_oracle,sigma_dim\n";
  for (const auto& row : rows)
    write_csv_row(os, {format_number(row.kappa), format_number(row.g_risk),
                       format_number(row.g_oracle), format_number(row.g_dim),
                       format_number(row.sigma_risk), format_number(row.sigma_oracle),
                       format_number(row.sigma_dim)});
  out << "wrote " << file.string() << '\n';
  return 0;
}

//! Parses flags (optionally on top of a JSON config file) and dispatches.
//! Exit codes: 0 success, 1 user error, 2 internal failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  RunConfig cfg;
  std::string config_path;
  bool dump_config = false;

  // config file first, so flags can override its values
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  if (!config_path.empty()) {
    try {
      std::ifstream is(config_path);
      if (!is) throw std::runtime_error("cannot read config file " + config_path);
      nlohmann::json j = nlohmann::json::parse(is);
      cfg = config_from_json(j);
    } catch (const std::exception& ex) {
      err << "error: " << ex.what() << '\n';
      return 1;
    }
  }

  CLI::App app{"penalized spline estimation of jump-diffusion coefficients"};
  std::string ignored_config;
  app.add_option("subcommand", cfg.subcommand,
                 "simulate|estimate|table|figure|calibrate");
  app.add_option("--config", ignored_config, "JSON config file (flags override it)");
  app.add_flag("--dump-config", dump_config, "print the effective config and exit");
  app.add_option("--model", cfg.model, "model id 1..4");
  app.add_option("--n", cfg.n, "number of observed increments");
  app.add_option("--delta", cfg.delta, "observation step");
  app.add_option("--seed", cfg.seed, "base seed; replication i uses seed+i");
  app.add_option("--reps", cfg.reps, "replications per cell");
  app.add_option("--cells", cfg.cells, "table cells, e.g. 1e-2:1e4,1e-1:1e4");
  app.add_option("--interval-lo", cfg.interval_lo, "estimation interval lower end");
  app.add_option("--interval-hi", cfg.interval_hi, "estimation interval upper end");
  app.add_option("--kappa-g", cfg.kappa_g, "penalty constant, g target");
  app.add_option("--kappa-sigma", cfg.kappa_sigma, "penalty constant, sigma2 target");
  app.add_option("--bounds", cfg.bounds, "known|plugin coefficient bounds");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--format", cfg.format, "csv|svg figure output");
  app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  app.add_option("--substeps", cfg.substeps, "Euler substeps per delta (0 = auto)");
  app.add_option("--burn-in", cfg.burn_in, "discarded warm-up time");
  app.add_option("--levy-k", cfg.levy_levels, "discrete-atom truncation level");
  app.add_option("--laplace-lambda", cfg.laplace_lambda, "Laplace jump rate");
  app.add_option("--target", cfg.target, "g|sigma2|both");
  app.add_option("--kappas", cfg.kappas, "calibration sweep list");
  app.add_option("--trunc-form", cfg.trunc_form, "sqrt_log|log threshold form");
  app.add_option("--sigma-pen", cfg.sigma_pen, "dim|flat sigma2 penalty form");
  app.add_flag("--clip-xi2", cfg.clip_xi2, "clip negative xi2 estimates at zero");
  app.add_option("--grid-points", cfg.grid_points, "export grid resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    cfg.validate();
    if (dump_config) {
      out << to_json(cfg).dump(2) << '\n';
      return 0;
    }
    if (cfg.subcommand == "simulate") return run_simulate(cfg, out);
    if (cfg.subcommand == "estimate") return run_estimate(cfg, out);
    if (cfg.subcommand == "table") return run_table(cfg, out);
    if (cfg.subcommand == "figure") return run_figure(cfg, out);
    return run_calibrate(cfg, out);
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << '\n';
    return 1;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return 2;
  }
}

} // namespace cli
} // namespace jumpdiff
