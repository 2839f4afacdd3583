#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "qpcontact/compensation.hpp"
#include "qpcontact/error.hpp"
#include "qpcontact/kernel.hpp"
#include "qpcontact/model.hpp"
#include "qpcontact/montecarlo.hpp"
#include "qpcontact/pmf.hpp"

namespace qpcontact {

// Dense values with per-entry error bounds over a rectangle of starts.
class GridTable {
 public:
  explicit GridTable(Rect rect) : rect_(rect), v_(rect.count(), 0.0), e_(v_.size(), 0.0) {
    if (rect.empty() || rect.i0 < 0 || rect.j0 < 0)
      throw Error(ErrorKind::InvalidArgument, "grid rectangle must be nonempty and in the quadrant");
  }

  const Rect& rect() const noexcept { return rect_; }
  double at(int i, int j) const { return v_[slot(i, j)]; }
  double error(int i, int j) const { return e_[slot(i, j)]; }
  void set(int i, int j, double value, double err = 0.0) {
    const std::size_t s = slot(i, j);
    v_[s] = value;
    e_[s] = err;
  }

 private:
  std::size_t slot(int i, int j) const {
    if (!rect_.contains(i, j)) throw Error(ErrorKind::MarginExhausted, "grid entry outside the trusted margin");
    return static_cast<std::size_t>(i - rect_.i0) * static_cast<std::size_t>(rect_.height()) +
           static_cast<std::size_t>(j - rect_.j0);
  }

  Rect rect_;
  std::vector<double> v_;
  std::vector<double> e_;
};

enum class F0Provenance { ClosedForm, Compensation, MonteCarlo };

constexpr std::string_view to_string(F0Provenance p) {
  switch (p) {
    case F0Provenance::ClosedForm: return "ClosedForm";
    case F0Provenance::Compensation: return "Compensation";
    case F0Provenance::MonteCarlo: return "MonteCarlo";
  }
  return "Unknown";
}

// f_0 on a trusted margin; the margin is the table's rectangle.
struct F0Table {
  GridTable values;
  F0Provenance provenance = F0Provenance::ClosedForm;

  const Rect& margin() const noexcept { return values.rect(); }
};

namespace detail {

inline void require_coupling(const QuadrantModel& model) {
  if (!model.has_identical_reflections())
    throw Error(ErrorKind::NotApplicable, "the contact recursion needs identical boundary laws");
}

inline bool shift_fits(const Rect& outer, const Rect& inner, const StepDistribution& eta) {
  for (const Atom& a : eta.atoms())
    if (!outer.contains(Rect{inner.i0 + a.jump.k, inner.i1 + a.jump.k, inner.j0 + a.jump.l, inner.j1 + a.jump.l}))
      return false;
  return true;
}

}  // namespace detail

// One layer of f_1(x) = E f_0(x + eta) - f_0(x), or f_{n+1}(x) = E f_n(x + eta).
inline GridTable recursion_step(const GridTable& prev, const StepDistribution& eta, bool first_step,
                                const Rect& out) {
  if (!detail::shift_fits(prev.rect(), out, eta) || (first_step && !prev.rect().contains(out)))
    throw Error(ErrorKind::MarginExhausted, "output rectangle reaches beyond the previous layer");
  GridTable next(out);
  for (int i = out.i0; i <= out.i1; ++i) {
    for (int j = out.j0; j <= out.j1; ++j) {
      double v = 0.0;
      double e = 0.0;
      for (const Atom& a : eta.atoms()) {
        v += a.weight * prev.at(i + a.jump.k, j + a.jump.l);
        e += a.weight * prev.error(i + a.jump.k, j + a.jump.l);
      }
      if (first_step) {
        v -= prev.at(i, j);
        e += prev.error(i, j);
      }
      next.set(i, j, v, e);
    }
  }
  return next;
}

// Rectangle needed by n_max recursion steps that end on `out`.
inline Rect required_margin(const Rect& out, const StepDistribution& eta, int n_max) {
  if (eta.min_k() < 0 || eta.min_l() < 0)
    throw Error(ErrorKind::InvalidModel, "boundary jumps must have nonnegative components");
  return {out.i0, out.i1 + n_max * eta.max_k(), out.j0, out.j1 + n_max * eta.max_l()};
}

// f_n on `out` for n = 0..n_max by iterating the recursion from f_0.
inline ContactPmf coupling_pmf(const QuadrantModel& model, const F0Table& f0, const Rect& out, int n_max) {
  detail::require_coupling(model);
  const StepDistribution& eta = model.origin();
  if (!f0.margin().contains(required_margin(out, eta, n_max)))
    throw Error(ErrorKind::MarginExhausted, "f_0 margin too small for the requested rectangle and n_max");
  ContactPmf pmf(out, n_max, PmfMethod::CouplingRecursion);
  auto store = [&](const GridTable& layer, int n) {
    for (int i = out.i0; i <= out.i1; ++i)
      for (int j = out.j0; j <= out.j1; ++j) pmf.set(i, j, n, layer.at(i, j), layer.error(i, j));
  };
  GridTable layer = f0.values;
  store(layer, 0);
  for (int n = 1; n <= n_max; ++n) {
    layer = recursion_step(layer, eta, n == 1, required_margin(out, eta, n_max - n));
    store(layer, n);
  }
  return pmf;
}

// P(Z_x <= n) = E f_0(x + eta_1 + ... + eta_n).
inline double cdf_via_convolution(const F0Table& f0, const StepDistribution& eta, int i, int j, int n) {
  const StepDistribution shift = convolve_power(eta, n);
  double sum = 0.0;
  for (const Atom& a : shift.atoms()) {
    if (!f0.margin().contains(i + a.jump.k, j + a.jump.l))
      throw Error(ErrorKind::MarginExhausted, "convolved support leaves the f_0 margin");
    sum += a.weight * f0.values.at(i + a.jump.k, j + a.jump.l);
  }
  return sum;
}

struct TailBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// U = alpha_1^i r_1^n + beta_{-1}^j r_2^n with r_1 = E alpha_1^{eta_1}, r_2 = E beta_{-1}^{eta_2}; L = U/2.
inline TailBounds tail_bounds(const AxisFixedPoints& fp, const StepDistribution& eta, int i, int j, int n) {
  const double r1 = eta.expectation([&](Jump y) { return std::pow(fp.alpha_1, y.k); });
  const double r2 = eta.expectation([&](Jump y) { return std::pow(fp.beta_minus1, y.l); });
  const double upper = std::pow(fp.alpha_1, i) * std::pow(r1, n) + std::pow(fp.beta_minus1, j) * std::pow(r2, n);
  return {0.5 * upper, upper};
}

// f_0 over `margin`: a supplied closed form first, then the compensation
// series, then simulation with `sim`.
inline F0Table make_f0_table(const QuadrantModel& model, const Rect& margin,
                             const std::function<double(int, int)>& closed_form = {}, const SimConfig& sim = {},
                             double tol = kDefaultTolerance) {
  detail::require_coupling(model);
  F0Table table{GridTable(margin), F0Provenance::ClosedForm};
  if (closed_form) {
    for (int i = margin.i0; i <= margin.i1; ++i)
      for (int j = margin.j0; j <= margin.j1; ++j) table.values.set(i, j, i == 0 || j == 0 ? 0.0 : closed_form(i, j));
    return table;
  }
  try {
    const ContactPmf pmf = with_adaptive_order(model, [&](const Compensation& c) {
      return extract_pmf(c, model, margin, 0, tol);
    });
    table.provenance = F0Provenance::Compensation;
    for (int i = margin.i0; i <= margin.i1; ++i)
      for (int j = margin.j0; j <= margin.j1; ++j) table.values.set(i, j, pmf.at(i, j, 0), pmf.error(i, j, 0));
    return table;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotApplicable) throw;
  }
  table.provenance = F0Provenance::MonteCarlo;
  for (int i = margin.i0; i <= margin.i1; ++i) {
    for (int j = margin.j0; j <= margin.j1; ++j) {
      if (i == 0 || j == 0) continue;
      const SimEstimate est = simulate_contacts(model, i, j, sim);
      const Estimate p0 = est.pmf.empty() ? Estimate{} : est.pmf.front();
      table.values.set(i, j, p0.value, 3.0 * p0.stderr_ + sim.escape_epsilon);
    }
  }
  return table;
}

}  // namespace qpcontact
