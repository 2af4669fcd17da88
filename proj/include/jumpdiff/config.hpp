#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

namespace jumpdiff {

//! Fully resolved run description: one subcommand plus every knob it may
//! read. Serializes to a flat JSON object; unknown keys are rejected on
//! load so experiment records stay trustworthy.
struct RunConfig {
  std::string subcommand = "simulate"; // simulate|estimate|table|figure|calibrate
  std::string model = "1";
  long n = 10000;
  double delta = 1e-2;
  std::uint64_t seed = 1;
  int reps = 20;
  std::string cells; // "delta:n" pairs, comma separated (table)
  double interval_lo = 0.0;
  double interval_hi = 0.0; // lo == hi means per-model default
  double kappa_g = 2.0;
  double kappa_sigma = 6.0;
  std::string bounds = "known"; // known|plugin
  std::string out_dir = "out";
  std::string format = "csv"; // csv|svg (figure: svg adds charts)
  int threads = 0;
  int substeps = 0;
  double burn_in = 10.0;
  int levy_levels = 25;
  double laplace_lambda = 1.4142135623730951;
  std::string target = "both"; // g|sigma2|both (estimate, calibrate)
  std::string kappas = "0.5,1,2,4";
  std::string trunc_form = "sqrt_log"; // sqrt_log|log
  std::string sigma_pen = "dim";       // dim|flat
  bool clip_xi2 = false;
  int grid_points = 512;

  bool operator==(const RunConfig&) const = default;

  //! Throws std::invalid_argument naming the violated constraint.
  void validate() const {
    const auto fail = [](const std::string& msg) {
      throw std::invalid_argument("config: " + msg);
    };
    if (subcommand != "simulate" && subcommand != "estimate" && subcommand != "table" &&
        subcommand != "figure" && subcommand != "calibrate")
      fail("subcommand must be simulate|estimate|table|figure|calibrate");
    if (n < 2) fail("n must be >= 2");
    if (!(delta > 0.0)) fail("delta must be > 0");
    if (reps < 1) fail("reps must be >= 1");
    if (!(kappa_g > 0.0)) fail("kappa_g must be > 0");
    if (!(kappa_sigma > 0.0)) fail("kappa_sigma must be > 0");
    if (bounds != "known" && bounds != "plugin") fail("bounds must be known|plugin");
    if (format != "csv" && format != "svg") fail("format must be csv|svg");
    if (threads < 0) fail("threads must be >= 0");
    if (substeps < 0) fail("substeps must be >= 0");
    if (burn_in < 0.0) fail("burn_in must be >= 0");
    if (levy_levels < 1) fail("levy_levels must be >= 1");
    if (!(laplace_lambda > 0.0)) fail("laplace_lambda must be > 0");
    if (target != "g" && target != "sigma2" && target != "both")
      fail("target must be g|sigma2|both");
    if (trunc_form != "sqrt_log" && trunc_form != "log")
      fail("trunc_form must be sqrt_log|log");
    if (sigma_pen != "dim" && sigma_pen != "flat") fail("sigma_pen must be dim|flat");
    if (grid_points < 2) fail("grid_points must be >= 2");
    if (interval_lo != interval_hi && !(interval_lo < interval_hi))
      fail("interval_lo must be < interval_hi");
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{{"subcommand", c.subcommand},
                        {"model", c.model},
                        {"n", c.n},
                        {"delta", c.delta},
                        {"seed", c.seed},
                        {"reps", c.reps},
                        {"cells", c.cells},
                        {"interval_lo", c.interval_lo},
                        {"interval_hi", c.interval_hi},
                        {"kappa_g", c.kappa_g},
                        {"kappa_sigma", c.kappa_sigma},
                        {"bounds", c.bounds},
                        {"out_dir", c.out_dir},
                        {"format", c.format},
                        {"threads", c.threads},
                        {"substeps", c.substeps},
                        {"burn_in", c.burn_in},
                        {"levy_levels", c.levy_levels},
                        {"laplace_lambda", c.laplace_lambda},
                        {"target", c.target},
                        {"kappas", c.kappas},
                        {"trunc_form", c.trunc_form},
                        {"sigma_pen", c.sigma_pen},
                        {"clip_xi2", c.clip_xi2},
                        {"grid_points", c.grid_points}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  const std::set<std::string> known = {
      "subcommand", "model",       "n",           "delta",          "seed",
      "reps",       "cells",       "interval_lo", "interval_hi",    "kappa_g",
      "kappa_sigma", "bounds",     "out_dir",     "format",         "threads",
      "substeps",   "burn_in",     "levy_levels", "laplace_lambda", "target",
      "kappas",     "trunc_form",  "sigma_pen",   "clip_xi2",       "grid_points"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");
  const auto get = [&j](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("subcommand", c.subcommand);
  get("model", c.model);
  get("n", c.n);
  get("delta", c.delta);
  get("seed", c.seed);
  get("reps", c.reps);
  get("cells", c.cells);
  get("interval_lo", c.interval_lo);
  get("interval_hi", c.interval_hi);
  get("kappa_g", c.kappa_g);
  get("kappa_sigma", c.kappa_sigma);
  get("bounds", c.bounds);
  get("out_dir", c.out_dir);
  get("format", c.format);
  get("threads", c.threads);
  get("substeps", c.substeps);
  get("burn_in", c.burn_in);
  get("levy_levels", c.levy_levels);
  get("laplace_lambda", c.laplace_lambda);
  get("target", c.target);
  get("kappas", c.kappas);
  get("trunc_form", c.trunc_form);
  get("sigma_pen", c.sigma_pen);
  get("clip_xi2", c.clip_xi2);
  get("grid_points", c.grid_points);
  return c;
}

} // namespace jumpdiff
