#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "qpcontact/error.hpp"

namespace qpcontact {

struct RootOptions {
  // Stop once the bracket is this small relative to its endpoints.
  double rel_width = 4.0 * std::numeric_limits<double>::epsilon();
  double abs_width = 1e-300;
  int max_iterations = 500;
};

// Root of f on [lo, hi] given a sign change. Secant steps are taken while they
// at least halve the bracket, bisection otherwise.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, RootOptions opt = {}) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw Error(ErrorKind::NoSignChange, "root not bracketed");

  bool bisect = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double width = hi - lo;
    if (width <= opt.rel_width * std::max(std::abs(lo), std::abs(hi)) + opt.abs_width) break;
    double x = lo - flo * width / (fhi - flo);
    if (bisect || !(x > lo && x < hi)) x = lo + 0.5 * width;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    bisect = (hi - lo) > 0.5 * width;
  }
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

// Smallest x >= start with pred(x) true, found by doubling.
template <class Pred>
double expand_until(Pred&& pred, double start, int max_doublings = 1100) {
  double x = start;
  for (int n = 0; n < max_doublings; ++n, x *= 2.0)
    if (pred(x)) return x;
  throw Error(ErrorKind::NoSignChange, "could not bracket by doubling");
}

}  // namespace qpcontact
