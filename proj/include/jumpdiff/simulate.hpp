#pragma once

#include "jumpdiff/csv.hpp"
#include "jumpdiff/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jumpdiff {

//! Trajectory observed at t = 0, delta, ..., n*delta.
struct Path {
  double delta = 0.0;
  std::vector<double> values; // n+1 observations
  std::string model_name;
  std::uint64_t seed = 0;

  long n() const { return static_cast<long>(values.size()) - 1; }
};

//! Simulation controls.
struct SimConfig {
  long n = 10000;        // number of observed increments
  double delta = 1e-2;   // observation step
  int substeps = 0;      // internal Euler refinements per delta; 0 = auto
  double burn_in = 10.0; // warm-up time discarded before X_0
  std::uint64_t seed = 1;

  //! Auto rule: internal Euler step at most 1e-4.
  int effective_substeps() const {
    if (substeps > 0) return substeps;
    return std::max(1, static_cast<int>(std::lround(delta / 1e-4)));
  }
};

namespace detail {

//! One internal Euler substep of length h with exactly embedded jumps.
//! Jumps are applied at the pre-jump state; Brownian/drift segments fill the
//! gaps between jump times.
inline double advance_substep(const ModelSpec& model, double x, double h,
                              Rng& rng, std::vector<JumpEvent>& scratch,
                              const std::function<void(double)>& on_jump) {
  scratch.clear();
  const double comp_drift = model.levy.sample_jumps(h, rng, scratch);
  std::sort(scratch.begin(), scratch.end(),
            [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
  const double comp_rate = (h > 0.0) ? comp_drift / h : 0.0;
  double t = 0.0;
  for (const auto& ev : scratch) {
    const double dt = ev.time - t;
    if (dt > 0.0)
      x += (model.drift(x) + model.jump_coeff(x) * comp_rate) * dt +
           model.diffusion(x) * std::sqrt(dt) * rng.gaussian();
    x += model.jump_coeff(x) * ev.size;
    if (on_jump) on_jump(ev.size);
    t = ev.time;
  }
  const double dt = h - t;
  if (dt > 0.0)
    x += (model.drift(x) + model.jump_coeff(x) * comp_rate) * dt +
         model.diffusion(x) * std::sqrt(dt) * rng.gaussian();
  return x;
}

} // namespace detail

//! Simulates the SDE on t in [0, n*delta] after a discarded warm-up of
//! length burn_in. Identical (model, cfg) reproduces the identical Path.
//! An optional observer receives every applied jump size (diagnostics).
inline Path simulate(const ModelSpec& model, const SimConfig& cfg,
                     const std::function<void(double)>& on_jump = nullptr) {
  if (cfg.n < 2) throw std::invalid_argument("simulate: n must be >= 2");
  if (!(cfg.delta > 0.0))
    throw std::invalid_argument("simulate: delta must be > 0");
  if (cfg.burn_in < 0.0)
    throw std::invalid_argument("simulate: burn_in must be >= 0");

  Rng rng(cfg.seed);
  const int sub = cfg.effective_substeps();
  const double h = cfg.delta / sub;
  std::vector<JumpEvent> scratch;
  scratch.reserve(64);

  double x = model.initial_law(rng);

  const long burn_steps =
      (cfg.burn_in > 0.0)
          ? static_cast<long>(std::ceil(cfg.burn_in / h - 1e-9))
          : 0;
  for (long s = 0; s < burn_steps; ++s) {
    x = detail::advance_substep(model, x, h, rng, scratch, nullptr);
    if (!std::isfinite(x))
      throw std::runtime_error("simulate: non-finite state during burn-in at substep " +
                               std::to_string(s));
  }

  Path path;
  path.delta = cfg.delta;
  path.model_name = model.name;
  path.seed = cfg.seed;
  path.values.reserve(static_cast<std::size_t>(cfg.n) + 1);
  path.values.push_back(x);
  for (long k = 0; k < cfg.n; ++k) {
    for (int s = 0; s < sub; ++s)
      x = detail::advance_substep(model, x, h, rng, scratch, on_jump);
    if (!std::isfinite(x))
      throw std::runtime_error("simulate: non-finite state at observation step " +
                               std::to_string(k + 1));
    path.values.push_back(x);
  }
  return path;
}

//! Squared normalized increments (X_{(k+1)d} - X_{kd})^2 / d, k = 0..n-1.
inline std::vector<double> increments(const Path& path) {
  if (path.values.size() < 2 || !(path.delta > 0.0))
    throw std::invalid_argument("increments: malformed path");
  std::vector<double> t(path.values.size() - 1);
  for (std::size_t k = 0; k + 1 < path.values.size(); ++k) {
    const double d = path.values[k + 1] - path.values[k];
    t[k] = d * d / path.delta;
  }
  return t;
}

//! Two-column CSV (t, X_t).
inline void write_path_csv(std::ostream& os, const Path& path) {
  os << "t,x\n";
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    os << format_number(static_cast<double>(k) * path.delta) << ','
       << format_number(path.values[k]) << '\n';
  }
}

} // namespace jumpdiff
