#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace jumpdiff {

//! Compact estimation interval A.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {
    if (!(lo < hi)) throw std::invalid_argument("interval: need lo < hi");
  }

  bool contains(double x) const { return x >= lo && x <= hi; }
  double length() const { return hi - lo; }
};

//! Dyadic spline space on A at resolution m with spline order r.
//!
//! Basis functions are 2^(m/2) g_r(2^m u - k) restricted to A, where u is x
//! affinely mapped so that A becomes the unit reference interval and g_r is
//! the degree-r B-spline (the (r+1)-fold convolution of the unit-interval
//! indicator, support [0, r+1], integer knots). Kept shifts are
//! k = -r..2^m - 1, so dim = 2^m + r. Boundary-truncated members are kept
//! unnormalized, which preserves exact nesting into the next level.
class SplineBasis {
public:
  static constexpr int max_order = 4;

  SplineBasis(Interval interval, int m, int r)
      : interval_(interval), m_(m), r_(r) {
    if (r < 0 || r > max_order)
      throw std::invalid_argument("spline order must be in 0..4");
    if (m < 0 || m > 30) throw std::invalid_argument("resolution must be in 0..30");
    cells_ = 1 << m;
    dim_ = cells_ + r;
  }

  const Interval& interval() const { return interval_; }
  int m() const { return m_; }
  int r() const { return r_; }
  int dim() const { return dim_; }

  //! Evaluates the at most r+1 basis functions supported at x. Returns false
  //! (no entries) when x lies outside A. Entries map to coefficient indices
  //! first_col..first_col+r.
  bool eval_local(double x, int& first_col, std::array<double, max_order + 1>& vals) const {
    if (!interval_.contains(x)) return false;
    double u = (x - interval_.lo) / (interval_.hi - interval_.lo);
    if (u < 0.0) u = 0.0;
    if (u > 1.0) u = 1.0;
    const double t = std::ldexp(u, m_);
    int j0 = static_cast<int>(t);
    if (j0 >= cells_) {
      if (r_ == 0) return false; // right endpoint: box family is half-open
      j0 = cells_ - 1;
    }
    // Triangular recurrence for all nonzero uniform B-splines at t;
    // vals[i] = B_{j0-r+i, r}(t).
    vals[0] = 1.0;
    for (int p = 1; p <= r_; ++p) {
      vals[p] = (t - j0) / p * vals[p - 1];
      for (int i = p - 1; i >= 1; --i)
        vals[i] = ((t - j0 + p - i) * vals[i - 1] + (j0 + i + 1 - t) * vals[i]) / p;
      vals[0] = (j0 + 1 - t) / p * vals[0];
    }
    const double scale = std::ldexp(1.0, m_ / 2) * (m_ % 2 ? 1.4142135623730951 : 1.0);
    for (int i = 0; i <= r_; ++i) vals[i] *= scale;
    first_col = j0; // k = j0 - r + i  ->  column k + r = j0 + i
    return true;
  }

  //! Dense evaluation vector, zero outside A.
  Eigen::VectorXd eval(double x) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    int first = 0;
    std::array<double, max_order + 1> vals{};
    if (eval_local(x, first, vals))
      for (int i = 0; i <= r_; ++i) v[first + i] = vals[i];
    return v;
  }

  //! Value of the expansion sum_k coef_k phi_k at x.
  double eval_function(const Eigen::VectorXd& coef, double x) const {
    int first = 0;
    std::array<double, max_order + 1> vals{};
    if (!eval_local(x, first, vals)) return 0.0;
    double s = 0.0;
    for (int i = 0; i <= r_; ++i) s += coef[first + i] * vals[i];
    return s;
  }

  //! Exact representation of the expansion in the space at level m+1
  //! (two-scale relation); the returned coefficients reproduce the function
  //! pointwise on A.
  Eigen::VectorXd refine_coefficients(const Eigen::VectorXd& coef) const {
    if (coef.size() != dim_)
      throw std::invalid_argument("refine: coefficient length mismatch");
    const SplineBasis fine(interval_, m_ + 1, r_);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(fine.dim());
    // binomial weights C(r+1, i) / 2^(r + 1/2)
    std::array<double, max_order + 2> w{};
    double c = 1.0;
    for (int i = 0; i <= r_ + 1; ++i) {
      w[i] = c * std::ldexp(1.0, -r_) / 1.4142135623730951;
      c = c * (r_ + 1 - i) / (i + 1);
    }
    for (int col = 0; col < dim_; ++col) {
      const int k = col - r_;
      for (int i = 0; i <= r_ + 1; ++i) {
        const int child = 2 * k + i; // shift index at level m+1
        const int child_col = child + r_;
        if (child_col < 0 || child_col >= fine.dim()) continue; // zero on A
        out[child_col] += coef[col] * w[i];
      }
    }
    return out;
  }

private:
  Interval interval_;
  int m_;
  int r_;
  int cells_;
  int dim_;
};

//! Normal equations of one penalized least-squares fit, accumulated over the
//! sample points that fall in A.
struct DesignSystem {
  Eigen::MatrixXd gram;       // (1/n) sum phi phi^T over in-A points
  Eigen::VectorXd moment;     // (1/n) sum phi * response over in-A points
  long n_in_A = 0;
  double condition_estimate = std::numeric_limits<double>::infinity();
};

//! Largest/smallest eigenvalue ratio of a symmetric PSD matrix; infinity when
//! the matrix is singular (or empty).
inline double gram_condition(const Eigen::MatrixXd& gram) {
  if (gram.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

//! Accumulates the design system of the contrast over (xs, responses).
//! Points outside A contribute nothing; normalization is by the full sample
//! size.
inline DesignSystem assemble(const SplineBasis& basis, std::span<const double> xs,
                             std::span<const double> responses) {
  if (xs.size() != responses.size())
    throw std::invalid_argument("assemble: xs/responses length mismatch");
  const int d = basis.dim();
  DesignSystem ds;
  ds.gram = Eigen::MatrixXd::Zero(d, d);
  ds.moment = Eigen::VectorXd::Zero(d);
  int first = 0;
  std::array<double, SplineBasis::max_order + 1> vals{};
  const int width = basis.r() + 1;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!basis.eval_local(xs[k], first, vals)) continue;
    ++ds.n_in_A;
    const double y = responses[k];
    for (int i = 0; i < width; ++i) {
      ds.moment[first + i] += vals[i] * y;
      for (int j = i; j < width; ++j)
        ds.gram(first + i, first + j) += vals[i] * vals[j];
    }
  }
  const double n = static_cast<double>(xs.size());
  if (n > 0) {
    ds.gram /= n;
    ds.moment /= n;
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) ds.gram(j, i) = ds.gram(i, j);
  ds.condition_estimate = gram_condition(ds.gram);
  return ds;
}

//! Convenience wrapper matching the construction parameters.
inline SplineBasis build_basis(Interval interval, int m, int r) {
  return SplineBasis(interval, m, r);
}

} // namespace jumpdiff
