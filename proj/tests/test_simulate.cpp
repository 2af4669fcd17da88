#include <catch2/catch_amalgamated.hpp>

#include "jumpdiff/simulate.hpp"

#include <cmath>
#include <numeric>
#include <vector>

using namespace jumpdiff;

namespace {

ModelSpec frozen_model(double level) {
  ModelSpec m;
  m.name = "frozen";
  m.drift = [](double) { return 0.0; };
  m.diffusion = [](double) { return 0.0; };
  m.jump_coeff = [](double) { return 0.0; };
  m.levy = LevyMeasure::compound_poisson(1.0, JumpLaw::binomial());
  m.initial_law = [level](Rng&) { return level; };
  return m;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

TEST_CASE("zero dynamics give a constant path") {
  SimConfig cfg;
  cfg.n = 50;
  cfg.delta = 0.1;
  cfg.burn_in = 2.0;
  cfg.seed = 3;
  const Path path = simulate(frozen_model(4.5), cfg);
  REQUIRE(path.values.size() == 51);
  for (double v : path.values) CHECK(v == 4.5);
}

TEST_CASE("same seed reproduces the identical path") {
  SimConfig cfg;
  cfg.n = 500;
  cfg.delta = 1e-2;
  cfg.seed = 99;
  const Path a = simulate(builtin_model(1), cfg);
  const Path b = simulate(builtin_model(1), cfg);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
  cfg.seed = 100;
  const Path c = simulate(builtin_model(1), cfg);
  CHECK(a.values.back() != c.values.back());
}

TEST_CASE("Ornstein-Uhlenbeck without jumps hits its stationary variance") {
  ModelSpec m = builtin_model(1);
  m.jump_coeff = [](double) { return 0.0; };
  SimConfig cfg;
  cfg.n = 100000;
  cfg.delta = 1e-2;
  cfg.substeps = 5;
  cfg.seed = 2024;
  const Path path = simulate(m, cfg);
  double ss = 0.0;
  for (double v : path.values) ss += v * v;
  const double var = ss / static_cast<double>(path.values.size());
  CHECK(var == Catch::Approx(0.25).epsilon(0.10)); // sigma^2 / (2 theta)
}

TEST_CASE("mean squared increment estimates sigma^2 + xi^2") {
  SimConfig cfg;
  cfg.n = 100000;
  cfg.delta = 1e-3;
  cfg.seed = 5;
  const Path path = simulate(builtin_model(1), cfg);
  CHECK(mean(increments(path)) == Catch::Approx(2.0).epsilon(0.10));
}

TEST_CASE("increments pair consecutive observations") {
  Path path;
  path.delta = 0.5;
  path.values = {0.0, 1.0, 0.0};
  const auto t = increments(path);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == Catch::Approx(2.0));
  CHECK(t[1] == Catch::Approx(2.0));

  Path flat;
  flat.delta = 0.1;
  flat.values = {1.0, 1.0, 1.0, 1.0};
  for (double v : increments(flat)) CHECK(v == 0.0);
}

TEST_CASE("pure-jump path equals the running jump sum exactly") {
  ModelSpec m;
  m.name = "pure_jump";
  m.drift = [](double) { return 0.0; };
  m.diffusion = [](double) { return 0.0; };
  m.jump_coeff = [](double) { return 1.0; };
  m.levy = LevyMeasure::compound_poisson(5.0, JumpLaw::binomial());
  m.initial_law = [](Rng&) { return 0.0; };
  SimConfig cfg;
  cfg.n = 2000;
  cfg.delta = 0.05;
  cfg.burn_in = 0.0;
  cfg.seed = 17;
  double jump_sum = 0.0;
  long jump_count = 0;
  const Path path = simulate(m, cfg, [&](double z) {
    jump_sum += z;
    ++jump_count;
  });
  CHECK(jump_count > 100);
  CHECK(path.values.back() - path.values.front() == jump_sum);
}

TEST_CASE("halving the internal step leaves increment statistics stable") {
  SimConfig coarse;
  coarse.n = 10000;
  coarse.delta = 1e-2;
  coarse.substeps = 4;
  coarse.seed = 31;
  SimConfig fine = coarse;
  fine.substeps = 8;
  const double a = mean(increments(simulate(builtin_model(1), coarse)));
  const double b = mean(increments(simulate(builtin_model(1), fine)));
  // Var(T) ~ (1/delta) E[zeta^4] P(jump) ~ 100 at this cell; two independent
  // 1e4-sample means
  const double mc_error = 4.0 * std::sqrt(2.0 * 100.0 / 10000.0);
  CHECK(std::fabs(a - b) <= mc_error);
}

TEST_CASE("divergence aborts with the failing step index") {
  ModelSpec m;
  m.name = "explosive";
  m.drift = [](double x) { return x * x * x; };
  m.diffusion = [](double) { return 0.0; };
  m.jump_coeff = [](double) { return 0.0; };
  m.levy = LevyMeasure::compound_poisson(1.0, JumpLaw::binomial());
  m.initial_law = [](Rng&) { return 10.0; };
  SimConfig cfg;
  cfg.n = 100;
  cfg.delta = 1.0;
  cfg.substeps = 1;
  cfg.burn_in = 0.0;
  cfg.seed = 1;
  CHECK_THROWS_WITH(simulate(m, cfg), Catch::Matchers::ContainsSubstring("step"));
}

TEST_CASE("simulate validates its configuration") {
  SimConfig cfg;
  cfg.n = 1;
  CHECK_THROWS_AS(simulate(builtin_model(1), cfg), std::invalid_argument);
  cfg.n = 10;
  cfg.delta = -0.5;
  CHECK_THROWS_AS(simulate(builtin_model(1), cfg), std::invalid_argument);
}
