#pragma once

#include "jumpdiff/simulate.hpp"
#include "jumpdiff/spline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace jumpdiff {

//! Upper bounds for sigma^2 and xi^2 entering penalties and the jump filter.
struct Bounds {
  enum class Source { known, plugin };

  double sigma0_sq = 1.0;
  double xi0_sq = 1.0;
  Source source = Source::known;

  static Bounds known(double sigma0_sq, double xi0_sq) {
    if (!(sigma0_sq > 0.0) || !(xi0_sq > 0.0))
      throw std::invalid_argument("bounds must be positive");
    return {sigma0_sq, xi0_sq, Source::known};
  }

  static Bounds known_for(const ModelSpec& model) {
    return known(model.sigma_sq_bound, model.xi_sq_bound);
  }
};

//! Increment filter |X_{(k+1)d} - X_{kd}| <= C used to suppress jumps when
//! targeting sigma^2.
//!
//! The default threshold is (sigma0 + xi0) sqrt(d ln n) + sqrt(d). The
//! log-outside variant (sigma0 + xi0) ln(n) sqrt(d) + sqrt(d) is available
//! but useless at coarse sampling: once C exceeds xi0 times the typical jump
//! size nothing is filtered at all, and the fit collapses onto the
//! sigma^2 + xi^2 target.
struct TruncationRule {
  enum class Form { sqrt_log, log_outside };

  double threshold = std::numeric_limits<double>::infinity();
  double sigma0 = 0.0;
  double xi0 = 0.0;
  long n = 0;
  double delta = 0.0;

  static TruncationRule from_bounds(const Bounds& bounds, long n, double delta,
                                    Form form = Form::sqrt_log) {
    if (n < 2 || !(delta > 0.0))
      throw std::invalid_argument("truncation rule: need n >= 2 and delta > 0");
    TruncationRule rule;
    rule.sigma0 = std::sqrt(bounds.sigma0_sq);
    rule.xi0 = std::sqrt(bounds.xi0_sq);
    rule.n = n;
    rule.delta = delta;
    const double logn = std::log(static_cast<double>(n));
    const double root = std::sqrt(delta);
    rule.threshold = (form == Form::sqrt_log)
                         ? (rule.sigma0 + rule.xi0) * std::sqrt(delta * logn) + root
                         : (rule.sigma0 + rule.xi0) * logn * root + root;
    return rule;
  }

  static TruncationRule fixed(double threshold) {
    TruncationRule rule;
    rule.threshold = threshold;
    return rule;
  }
};

//! Filtered squared increments: T_{kd} kept when the raw increment stays
//! below the threshold, zero otherwise.
inline std::vector<double> truncate(const Path& path, const TruncationRule& rule) {
  std::vector<double> y(static_cast<std::size_t>(path.n()));
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double d = path.values[k + 1] - path.values[k];
    y[k] = (std::fabs(d) <= rule.threshold) ? d * d / path.delta : 0.0;
  }
  return y;
}

//! One least-squares solve on a single spline space.
struct Fit {
  int m = 0;
  int r = 0;
  int dim = 0;
  Eigen::VectorXd coef;
  double contrast = 0.0;
  double penalty = 0.0;
  long n_in_A = 0;
  double condition = std::numeric_limits<double>::infinity();
  bool singular = false;

  double penalized() const { return contrast + penalty; }
};

//! Minimizes (1/n) sum_{X_k in A} (t(X_k) - response_k)^2 over the space.
//!
//! A fit is flagged singular when the empirical Gram is under-determined
//! (dim > points in A) or its eigenvalue ratio exceeds 1e8; only then is the
//! ridge term applied before solving. Pass ridge_eps < 0 for the default
//! 1e-8 * trace(gram)/dim.
inline Fit fit_ls(const SplineBasis& basis, std::span<const double> xs,
                  std::span<const double> responses, double ridge_eps = -1.0) {
  const DesignSystem ds = assemble(basis, xs, responses);
  Fit fit;
  fit.m = basis.m();
  fit.r = basis.r();
  fit.dim = basis.dim();
  fit.n_in_A = ds.n_in_A;
  fit.condition = ds.condition_estimate;
  fit.singular = (ds.n_in_A < basis.dim()) || !(ds.condition_estimate <= 1e8);

  Eigen::MatrixXd lhs = ds.gram;
  if (fit.singular) {
    const double eps =
        (ridge_eps >= 0.0) ? ridge_eps : 1e-8 * ds.gram.trace() / basis.dim();
    lhs.diagonal().array() += eps;
  }
  fit.coef = lhs.ldlt().solve(ds.moment);
  if (!fit.coef.allFinite()) {
    fit.coef.setZero();
    fit.singular = true;
  }

  double sum = 0.0;
  int first = 0;
  std::array<double, SplineBasis::max_order + 1> vals{};
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!basis.eval_local(xs[k], first, vals)) continue;
    double v = 0.0;
    for (int i = 0; i <= basis.r(); ++i) v += fit.coef[first + i] * vals[i];
    const double e = v - responses[k];
    sum += e * e;
  }
  fit.contrast = xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
  return fit;
}

//! Dimension-proportional model-selection penalty.
struct Penalty {
  enum class Kind { g, sigma };
  enum class SigmaForm { dim_scaled, flat };

  Kind kind = Kind::g;
  double kappa = 2.0;
  double bound_sq = 1.0; // xi0^2 for g, sigma0^2 for sigma
  SigmaForm sigma_form = SigmaForm::dim_scaled;

  double value(int dim, long n, double delta) const {
    const double nn = static_cast<double>(n);
    if (kind == Kind::g)
      return kappa * bound_sq * bound_sq * static_cast<double>(dim) / (nn * delta);
    if (sigma_form == SigmaForm::flat) return kappa * bound_sq / nn;
    return kappa * bound_sq * bound_sq * static_cast<double>(dim) / nn;
  }
};

inline double penalty_value(const Penalty& pen, int m, int r, long n, double delta) {
  return pen.value((1 << m) + r, n, delta);
}

//! Search grid {(m, r): r <= 4, m <= 7, 2^m + r <= dim_cap}.
struct GridSpec {
  int max_m = 7;
  int max_r = SplineBasis::max_order;
  double dim_cap = 0.0; // typically sqrt(n*delta)

  std::vector<std::pair<int, int>> points() const {
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r <= max_r; ++r)
      for (int m = 0; m <= max_m; ++m)
        if (static_cast<double>((1 << m) + r) <= dim_cap) out.emplace_back(m, r);
    return out;
  }
};

//! Adaptive choice over the (m, r) grid with its full fit table.
struct AdaptiveResult {
  int m_sel = 0;
  int r_sel = 0;
  Interval interval;
  Fit fit;
  std::vector<Fit> all_fits;

  double operator()(double x) const {
    return SplineBasis(interval, m_sel, r_sel).eval_function(fit.coef, x);
  }
};

namespace detail {

//! True when `a` beats `b` under the selection order: smaller penalized
//! contrast, ties toward smaller dimension, then smaller order.
inline bool selection_before(const Fit& a, const Fit& b) {
  if (a.penalized() != b.penalized()) return a.penalized() < b.penalized();
  if (a.dim != b.dim) return a.dim < b.dim;
  return a.r < b.r;
}

} // namespace detail

//! Two-stage minimization of contrast + penalty: best m within each order,
//! then best order. Equivalent to the global grid minimum under the tie
//! rules (dimension is strictly increasing in m at fixed r).
inline AdaptiveResult select(std::vector<Fit> fits, Interval interval) {
  const Fit* best = nullptr;
  for (int r = 0; r <= SplineBasis::max_order; ++r) {
    const Fit* best_m = nullptr;
    for (const Fit& f : fits) {
      if (f.r != r || f.singular) continue;
      if (!best_m || detail::selection_before(f, *best_m)) best_m = &f;
    }
    if (best_m && (!best || detail::selection_before(*best_m, *best))) best = best_m;
  }
  if (!best) throw std::runtime_error("select: every candidate fit is singular");
  AdaptiveResult res;
  res.m_sel = best->m;
  res.r_sel = best->r;
  res.interval = interval;
  res.fit = *best;
  res.all_fits = std::move(fits);
  return res;
}

namespace detail {

inline AdaptiveResult estimate_on_grid(std::span<const double> xs,
                                       std::span<const double> ys,
                                       Interval interval, const Penalty& pen,
                                       long n, double delta, const GridSpec& grid) {
  std::vector<Fit> fits;
  for (const auto& [m, r] : grid.points()) {
    Fit f = fit_ls(SplineBasis(interval, m, r), xs, ys);
    f.penalty = pen.value(f.dim, n, delta);
    fits.push_back(std::move(f));
  }
  if (fits.empty())
    throw std::invalid_argument(
        "estimate: empty search grid; need n*delta >= 1 so the dimension cap "
        "admits at least the constant space");
  return select(std::move(fits), interval);
}

} // namespace detail

//! Extra knobs of the two estimators.
struct EstimatorOptions {
  TruncationRule::Form trunc_form = TruncationRule::Form::sqrt_log;
  Penalty::SigmaForm sigma_pen_form = Penalty::SigmaForm::dim_scaled;
  int max_m = 7;
  int max_r = SplineBasis::max_order;
};

//! Adaptive estimator of sigma^2 + xi^2 from raw squared increments.
inline AdaptiveResult estimate_g(const Path& path, Interval interval,
                                 const Bounds& bounds, double kappa = 2.0,
                                 const EstimatorOptions& opts = {}) {
  const std::vector<double> t = increments(path);
  const std::span<const double> xs(path.values.data(), t.size());
  const GridSpec grid{opts.max_m, opts.max_r,
                      std::sqrt(static_cast<double>(path.n()) * path.delta)};
  const Penalty pen{Penalty::Kind::g, kappa, bounds.xi0_sq};
  return detail::estimate_on_grid(xs, t, interval, pen, path.n(), path.delta, grid);
}

//! Adaptive estimator of sigma^2 from jump-filtered squared increments.
//!
//! The default penalty constant is larger than for the g target: the
//! per-dimension contrast drop from overfitting the filtered responses is
//! about 2 sigma0^4 / n, so kappa must sit clearly above 2 for the penalty
//! to bite.
inline AdaptiveResult estimate_sigma2(const Path& path, Interval interval,
                                      const Bounds& bounds, double kappa = 6.0,
                                      const EstimatorOptions& opts = {}) {
  const TruncationRule rule =
      TruncationRule::from_bounds(bounds, path.n(), path.delta, opts.trunc_form);
  const std::vector<double> y = truncate(path, rule);
  const std::span<const double> xs(path.values.data(), y.size());
  const GridSpec grid{opts.max_m, opts.max_r,
                      std::sqrt(static_cast<double>(path.n()) * path.delta)};
  const Penalty pen{Penalty::Kind::sigma, kappa, bounds.sigma0_sq,
                    opts.sigma_pen_form};
  return detail::estimate_on_grid(xs, y, interval, pen, path.n(), path.delta, grid);
}

//! Pointwise difference of the two adaptive fits. Negative values are
//! reported as-is unless clipping is requested.
struct Xi2Estimate {
  AdaptiveResult g;
  AdaptiveResult sigma2;
  bool clip_at_zero = false;

  double operator()(double x) const {
    const double d = g(x) - sigma2(x);
    return (clip_at_zero && d < 0.0) ? 0.0 : d;
  }
};

inline Xi2Estimate estimate_xi2(AdaptiveResult g, AdaptiveResult sigma2,
                                bool clip_at_zero = false) {
  return Xi2Estimate{std::move(g), std::move(sigma2), clip_at_zero};
}

namespace detail {

inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("percentile of empty sample");
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(v.size()) - 1.0,
                       std::floor(p * static_cast<double>(v.size()))));
  return v[idx];
}

} // namespace detail

//! Rough data-driven upper bounds: 1.5x the 99.5th percentile of the raw
//! squared increments bounds sigma^2 + xi^2, and the same percentile of the
//! filtered increments (filter built from the combined bound, split evenly)
//! bounds sigma^2. The combined bound doubles as the xi^2 bound.
inline Bounds plugin_bounds(const Path& path) {
  if (path.n() < 100)
    throw std::invalid_argument("plugin_bounds: need at least 100 increments");
  const std::vector<double> t = increments(path);
  if (*std::max_element(t.begin(), t.end()) <= 0.0)
    throw std::invalid_argument("plugin_bounds: degenerate (constant) path");
  const double combined = 1.5 * detail::percentile(t, 0.995);
  Bounds provisional;
  provisional.sigma0_sq = combined / 2.0;
  provisional.xi0_sq = combined / 2.0;
  const TruncationRule rule =
      TruncationRule::from_bounds(provisional, path.n(), path.delta);
  const double sigma = 1.5 * detail::percentile(truncate(path, rule), 0.995);
  Bounds out;
  out.sigma0_sq = sigma;
  out.xi0_sq = combined;
  out.source = Bounds::Source::plugin;
  return out;
}

} // namespace jumpdiff
