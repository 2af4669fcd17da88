#pragma once

#include "jumpdiff/levy.hpp"
#include "jumpdiff/rng.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace jumpdiff {

//! Coefficients and driving noise of one jump diffusion
//!   dX = b(X) dt + sigma(X) dW + xi(X) dL.
struct ModelSpec {
  std::string name;
  std::function<double(double)> drift;
  std::function<double(double)> diffusion;
  std::function<double(double)> jump_coeff;
  LevyMeasure levy = LevyMeasure::compound_poisson(1.0, JumpLaw::binomial());
  std::function<double(Rng&)> initial_law = [](Rng&) { return 0.0; };

  // sup bounds of sigma^2 and xi^2, used as the known-bounds mode
  double sigma_sq_bound = 1.0;
  double xi_sq_bound = 1.0;

  //! sigma^2(x).
  double sigma_sq(double x) const {
    const double s = diffusion(x);
    return s * s;
  }

  //! sigma^2(x) + xi^2(x) * int z^2 nu(dz), the mean of the squared
  //! normalized increment.
  double quadratic_mean(double x) const {
    const double s = diffusion(x);
    const double j = jump_coeff(x);
    return s * s + j * j * levy.second_moment();
  }
};

//! Tunables of the built-in models.
struct BuiltinOptions {
  double laplace_rate = 1.4142135623730951; // sqrt(2): unit jump variance
  int levy_truncation = 25;                 // dyadic atom cutoff (model 4)
};

//! The four benchmark models.
//!   1: dX = -2X dt + dW + dL, binomial jumps
//!   2: dX = -2X dt + (X^2+3)/(X^2+1) dW + dL, Laplace jumps
//!   3: dX = (-2X + sin 3X) dt + sqrt(2 + 0.5 sin pi X) (dW + dL), normal jumps
//!   4: dX = -2X dt + dW + dL, dyadic discrete-atom measure
inline ModelSpec builtin_model(int id, const BuiltinOptions& opts = {}) {
  ModelSpec m;
  switch (id) {
    case 1:
      m.name = "model1";
      m.drift = [](double x) { return -2.0 * x; };
      m.diffusion = [](double) { return 1.0; };
      m.jump_coeff = [](double) { return 1.0; };
      m.levy = LevyMeasure::compound_poisson(1.0, JumpLaw::binomial());
      m.sigma_sq_bound = 1.0;
      m.xi_sq_bound = 1.0;
      return m;
    case 2:
      m.name = "model2";
      m.drift = [](double x) { return -2.0 * x; };
      m.diffusion = [](double x) { return (x * x + 3.0) / (x * x + 1.0); };
      m.jump_coeff = [](double) { return 1.0; };
      m.levy = LevyMeasure::compound_poisson(1.0, JumpLaw::laplace(opts.laplace_rate));
      m.sigma_sq_bound = 9.0;
      m.xi_sq_bound = 1.0;
      return m;
    case 3:
      m.name = "model3";
      m.drift = [](double x) { return -2.0 * x + std::sin(3.0 * x); };
      m.diffusion = [](double x) {
        return std::sqrt(2.0 + 0.5 * std::sin(3.14159265358979323846 * x));
      };
      m.jump_coeff = [](double x) {
        return std::sqrt(2.0 + 0.5 * std::sin(3.14159265358979323846 * x));
      };
      m.levy = LevyMeasure::compound_poisson(1.0, JumpLaw::standard_normal());
      m.sigma_sq_bound = 2.5;
      m.xi_sq_bound = 2.5;
      return m;
    case 4:
      m.name = "model4";
      m.drift = [](double x) { return -2.0 * x; };
      m.diffusion = [](double) { return 1.0; };
      m.jump_coeff = [](double) { return 1.0; };
      m.levy = LevyMeasure::dyadic_atoms(opts.levy_truncation);
      m.sigma_sq_bound = 1.0;
      m.xi_sq_bound = 1.0;
      return m;
    default:
      throw std::invalid_argument("unknown model id " + std::to_string(id));
  }
}

} // namespace jumpdiff
