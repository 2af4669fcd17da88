#pragma once

#include "jumpdiff/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace jumpdiff {

//! Centered law of a single compound-Poisson jump.
struct JumpLaw {
  enum class Kind { binomial, laplace, standard_normal };

  Kind kind = Kind::binomial;
  double laplace_rate = 0.0; // inverse scale, laplace only

  //! +1 or -1 with probability 1/2 each.
  static JumpLaw binomial() { return {Kind::binomial, 0.0}; }

  //! Double exponential with density (rate/2) exp(-rate |z|).
  static JumpLaw laplace(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("laplace rate must be > 0");
    return {Kind::laplace, rate};
  }

  static JumpLaw standard_normal() { return {Kind::standard_normal, 0.0}; }

  double variance() const {
    switch (kind) {
      case Kind::binomial: return 1.0;
      case Kind::laplace: return 2.0 / (laplace_rate * laplace_rate);
      case Kind::standard_normal: return 1.0;
    }
    return 0.0;
  }

  double sample(Rng& rng) const {
    switch (kind) {
      case Kind::binomial: return rng.uniform() < 0.5 ? 1.0 : -1.0;
      case Kind::laplace: {
        const double mag = rng.exponential(laplace_rate);
        return rng.uniform() < 0.5 ? mag : -mag;
      }
      case Kind::standard_normal: return rng.gaussian();
    }
    return 0.0;
  }
};

//! One jump of the driving process inside a sampling window.
struct JumpEvent {
  double time; // offset in [0, dt)
  double size;
};

//! Jump intensity measure of the driving Levy process.
//!
//! Two variants are supported: a compound Poisson process with centered
//! jump law, and a finite family of symmetric discrete atoms at +-2^-k with
//! mass 2^(k+1), k = 1..truncation_level.
class LevyMeasure {
public:
  struct CompoundPoisson {
    double intensity;
    JumpLaw law;
  };

  struct Atom {
    double position;
    double mass;
  };

  struct DiscreteAtoms {
    std::vector<Atom> atoms;
    int truncation_level;
  };

  static LevyMeasure compound_poisson(double intensity, JumpLaw law) {
    if (!(intensity > 0.0))
      throw std::invalid_argument("compound Poisson intensity must be > 0");
    return LevyMeasure(CompoundPoisson{intensity, law});
  }

  //! Atoms at +-2^-k with mass 2^(k+1) for k = 1..levels.
  static LevyMeasure dyadic_atoms(int levels) {
    if (levels < 1)
      throw std::invalid_argument("truncation level must be >= 1");
    DiscreteAtoms da;
    da.truncation_level = levels;
    da.atoms.reserve(2 * static_cast<std::size_t>(levels));
    for (int k = 1; k <= levels; ++k) {
      const double z = std::ldexp(1.0, -k);
      const double mass = std::ldexp(1.0, k + 1);
      da.atoms.push_back({z, mass});
      da.atoms.push_back({-z, mass});
    }
    LevyMeasure lm((std::move(da)));
    // signed atoms come in exactly cancelling pairs
    if (lm.compensator_rate() != 0.0)
      throw std::logic_error("dyadic atom compensator must vanish");
    return lm;
  }

  bool is_compound_poisson() const {
    return std::holds_alternative<CompoundPoisson>(body_);
  }

  const CompoundPoisson& compound() const {
    return std::get<CompoundPoisson>(body_);
  }

  const DiscreteAtoms& atoms() const { return std::get<DiscreteAtoms>(body_); }

  //! Integral of z^2 against the measure.
  double second_moment() const {
    if (is_compound_poisson()) {
      const auto& cp = compound();
      return cp.intensity * cp.law.variance();
    }
    double s = 0.0;
    for (const auto& a : atoms().atoms) s += a.mass * a.position * a.position;
    return s;
  }

  //! Integral of z against the measure (drift compensated by sample_jumps).
  double compensator_rate() const {
    if (is_compound_poisson()) return 0.0; // centered jump law
    double s = 0.0;
    const auto& list = atoms().atoms;
    for (std::size_t i = 0; i + 1 < list.size(); i += 2)
      s += list[i].mass * list[i].position + list[i + 1].mass * list[i + 1].position;
    return s;
  }

  //! Draws all jumps in a window of length dt. Events are appended to `out`
  //! unsorted; the returned value is the compensator drift -dt * int z nu(dz)
  //! to be added to the driving process over the window.
  double sample_jumps(double dt, Rng& rng, std::vector<JumpEvent>& out) const {
    if (dt < 0.0) throw std::invalid_argument("sample_jumps: dt must be >= 0");
    if (dt == 0.0) return 0.0;
    if (is_compound_poisson()) {
      const auto& cp = compound();
      const std::uint64_t n = rng.poisson(cp.intensity * dt);
      for (std::uint64_t i = 0; i < n; ++i)
        out.push_back({rng.uniform() * dt, cp.law.sample(rng)});
      return 0.0;
    }
    for (const auto& a : atoms().atoms) {
      const std::uint64_t n = rng.poisson(a.mass * dt);
      for (std::uint64_t i = 0; i < n; ++i)
        out.push_back({rng.uniform() * dt, a.position});
    }
    return -dt * compensator_rate();
  }

private:
  explicit LevyMeasure(std::variant<CompoundPoisson, DiscreteAtoms> body)
      : body_(std::move(body)) {}

  std::variant<CompoundPoisson, DiscreteAtoms> body_;
};

//! Integral of z^2 against the measure.
inline double second_moment(const LevyMeasure& levy) {
  return levy.second_moment();
}

} // namespace jumpdiff
