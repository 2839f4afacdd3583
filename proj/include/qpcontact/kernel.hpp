#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "qpcontact/error.hpp"
#include "qpcontact/model.hpp"
#include "qpcontact/roots.hpp"

namespace qpcontact {

namespace detail {

// Dense polynomial with coefficients in increasing degree.
struct Poly {
  std::vector<double> c;

  double operator()(double x) const {
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
    return s;
  }

  double derivative(double x) const {
    double s = 0.0;
    for (std::size_t e = c.size(); e-- > 1;) s = s * x + static_cast<double>(e) * c[e];
    return s;
  }

  bool has_convex_part() const {
    for (std::size_t e = 2; e < c.size(); ++e)
      if (c[e] > 0.0) return true;
    return false;
  }
};

}  // namespace detail

// Zero set of a one-variable slice of the kernel on [0, inf). Slices are convex,
// so there are at most two roots.
struct SliceRoots {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double argmin = 0.0;
  double minimum = 0.0;
  bool real = false;  // false when the slice stays positive
};

class Kernel {
 public:
  explicit Kernel(StepDistribution weights) : p_(std::move(weights)) {
    if (p_.min_k() < -1 || p_.min_l() < -1)
      throw Error(ErrorKind::InvalidModel, "kernel needs interior jumps with k,l >= -1");
  }

  const StepDistribution& weights() const noexcept { return p_; }

  double operator()(double a, double b) const {
    double s = 0.0;
    for (const Atom& at : p_.atoms())
      s += at.weight * std::pow(a, at.jump.k + 1) * std::pow(b, at.jump.l + 1);
    return s - a * b;
  }

  double d_alpha(double a, double b) const {
    double s = 0.0;
    for (const Atom& at : p_.atoms())
      if (at.jump.k + 1 > 0)
        s += at.weight * (at.jump.k + 1) * std::pow(a, at.jump.k) * std::pow(b, at.jump.l + 1);
    return s - b;
  }

  double d_beta(double a, double b) const {
    double s = 0.0;
    for (const Atom& at : p_.atoms())
      if (at.jump.l + 1 > 0)
        s += at.weight * (at.jump.l + 1) * std::pow(a, at.jump.k + 1) * std::pow(b, at.jump.l);
    return s - a;
  }

  // L(x,y) = sum p e^{kx+ly} - 1, equal to e^{-(x+y)} K(e^x, e^y).
  double exp_transform(double x, double y) const {
    return p_.expectation([&](Jump j) { return std::exp(j.k * x + j.l * y); }) - 1.0;
  }

  SliceRoots alpha_roots(double beta) const { return slice_roots(alpha_slice(beta), beta); }
  SliceRoots beta_roots(double alpha) const { return slice_roots(beta_slice(alpha), alpha); }

 private:
  detail::Poly alpha_slice(double beta) const {
    detail::Poly poly{std::vector<double>(static_cast<std::size_t>(p_.max_k() + 2) + 1, 0.0)};
    for (const Atom& at : p_.atoms())
      poly.c[static_cast<std::size_t>(at.jump.k + 1)] += at.weight * std::pow(beta, at.jump.l + 1);
    poly.c[1] -= beta;
    return poly;
  }

  detail::Poly beta_slice(double alpha) const {
    detail::Poly poly{std::vector<double>(static_cast<std::size_t>(p_.max_l() + 2) + 1, 0.0)};
    for (const Atom& at : p_.atoms())
      poly.c[static_cast<std::size_t>(at.jump.l + 1)] += at.weight * std::pow(alpha, at.jump.k + 1);
    poly.c[1] -= alpha;
    return poly;
  }

  // `scale` is the value of the frozen variable; roots are of that order.
  static SliceRoots slice_roots(const detail::Poly& f, double scale) {
    const RootOptions opt{.max_iterations = 4000};
    SliceRoots out;
    const double c0 = f.c[0];
    const double slope0 = f.c[1];
    if (slope0 >= 0.0) {
      out.argmin = 0.0;
      out.minimum = c0;
      out.real = (c0 == 0.0);
      out.lower = 0.0;
      out.upper = f.has_convex_part() || slope0 > 0.0 ? 0.0 : out.upper;
      return out;
    }
    if (!f.has_convex_part()) {
      // Decreasing line: a single root, nothing above it.
      out.real = true;
      out.lower = c0 / -slope0;
      out.argmin = std::numeric_limits<double>::infinity();
      out.minimum = -std::numeric_limits<double>::infinity();
      return out;
    }
    const double start = scale > 0.0 ? scale : 1.0;
    const double hi = expand_until([&](double x) { return f.derivative(x) > 0.0; }, start);
    out.argmin = solve_bracketed([&](double x) { return f.derivative(x); }, 0.0, hi, opt);
    out.minimum = f(out.argmin);
    if (out.minimum > 0.0) return out;
    out.real = true;
    if (out.minimum == 0.0) {
      out.lower = out.upper = out.argmin;
      return out;
    }
    out.lower = c0 == 0.0 ? 0.0 : solve_bracketed(f, 0.0, out.argmin, opt);
    const double top = expand_until([&](double x) { return f(x) > 0.0; }, 2.0 * out.argmin);
    out.upper = solve_bracketed(f, out.argmin, top, opt);
    return out;
  }

  StepDistribution p_;
};

inline constexpr double kBranchClamp = 1e-12;

// Kernel of a singular walk together with the maximizers of its two branches.
// u(alpha) is the upper beta-root of K(alpha, .), v(beta) the upper alpha-root
// of K(., beta); u* and v* invert their increasing parts.
class KernelCurve {
 public:
  const Kernel& kernel() const noexcept { return kernel_; }
  double alpha_hat() const noexcept { return alpha_hat_; }
  double beta_hat() const noexcept { return beta_hat_; }
  double alpha_tilde() const noexcept { return alpha_tilde_; }
  double beta_tilde() const noexcept { return beta_tilde_; }

  double u(double alpha) const { return kernel_.beta_roots(alpha).upper; }
  double v(double beta) const { return kernel_.alpha_roots(beta).upper; }

  double u_star(double beta) const {
    if (beta < 0.0 || beta > beta_hat_ + kBranchClamp)
      throw Error(ErrorKind::OutOfBranch, "u* needs beta in [0, beta_hat]");
    if (beta >= beta_hat_) return alpha_hat_;
    const SliceRoots r = kernel_.alpha_roots(beta);
    return std::min(r.real ? r.lower : r.argmin, alpha_hat_);
  }

  double v_star(double alpha) const {
    if (alpha < 0.0 || alpha > alpha_tilde_ + kBranchClamp)
      throw Error(ErrorKind::OutOfBranch, "v* needs alpha in [0, alpha_tilde]");
    if (alpha >= alpha_tilde_) return beta_tilde_;
    const SliceRoots r = kernel_.beta_roots(alpha);
    return std::min(r.real ? r.lower : r.argmin, beta_tilde_);
  }

  std::vector<std::pair<double, double>> sample_u(int samples) const {
    std::vector<std::pair<double, double>> out;
    for (int s = 0; s <= samples; ++s) {
      const double a = static_cast<double>(s) / samples;
      out.emplace_back(a, u(a));
    }
    return out;
  }

  friend KernelCurve find_branch_maximizers(const StepDistribution& weights);

 private:
  explicit KernelCurve(Kernel k) : kernel_(std::move(k)) {}

  Kernel kernel_;
  double alpha_hat_ = 0.0;
  double beta_hat_ = 0.0;
  double alpha_tilde_ = 0.0;
  double beta_tilde_ = 0.0;
};

inline KernelCurve find_branch_maximizers(const StepDistribution& weights) {
  KernelCurve curve{Kernel(weights)};
  const Kernel& K = curve.kernel_;
  // Along the upper branch, du/dalpha has the sign of -K_alpha; it changes
  // sign exactly once on (0,1).
  constexpr double lo = 1e-6;
  const RootOptions opt{.max_iterations = 4000};
  auto slope_u = [&](double a) { return K.d_alpha(a, curve.u(a)); };
  auto slope_v = [&](double b) { return K.d_beta(curve.v(b), b); };
  if (!(slope_u(lo) < 0.0 && slope_u(1.0) > 0.0))
    throw Error(ErrorKind::MaximizerNotBracketed, "no sign change of K_alpha along u on (0,1)");
  if (!(slope_v(lo) < 0.0 && slope_v(1.0) > 0.0))
    throw Error(ErrorKind::MaximizerNotBracketed, "no sign change of K_beta along v on (0,1)");
  curve.alpha_hat_ = solve_bracketed(slope_u, lo, 1.0, opt);
  curve.beta_hat_ = curve.u(curve.alpha_hat_);
  curve.beta_tilde_ = solve_bracketed(slope_v, lo, 1.0, opt);
  curve.alpha_tilde_ = curve.v(curve.beta_tilde_);
  return curve;
}

struct AxisFixedPoints {
  double alpha_1 = 0.0;
  double beta_minus1 = 0.0;
};

// alpha_1 solves alpha = sum p alpha^{k+1}, i.e. K(alpha, 1) = 0, and is the
// probability of ever hitting the vertical axis from (1, .); beta_{-1} mirrors it.
inline AxisFixedPoints axis_fixed_points(const StepDistribution& weights) {
  const Kernel K(weights);
  if (!weights.any_of([](Jump j) { return j.k == -1; }) ||
      !weights.any_of([](Jump j) { return j.l == -1; }))
    throw Error(ErrorKind::NoNegativeJumps, "interior law never steps toward an axis");
  const MomentSummary m = drift(weights);
  if (!(m.mean_x > 0.0 && m.mean_y > 0.0))
    throw Error(ErrorKind::NoInteriorRoot, "interior drift is not positive");
  auto root = [](const SliceRoots& r) {
    if (!r.real || !(r.lower > 0.0) || !(r.lower < 1.0))
      throw Error(ErrorKind::NoInteriorRoot, "fixed-point equation has no root in (0,1)");
    return r.lower;
  };
  return {root(K.alpha_roots(1.0)), root(K.beta_roots(1.0))};
}

}  // namespace qpcontact
