#pragma once

#include <optional>
#include <string_view>

#include "qpcontact/compensation.hpp"
#include "qpcontact/coupling.hpp"
#include "qpcontact/error.hpp"
#include "qpcontact/montecarlo.hpp"
#include "qpcontact/pmf.hpp"

namespace qpcontact {

inline PmfMethod parse_method(std::string_view s) {
  for (PmfMethod m : {PmfMethod::CompensationSeries, PmfMethod::ClosedFormIdentical, PmfMethod::FiniteGroupSum,
                      PmfMethod::CouplingRecursion, PmfMethod::MonteCarlo})
    if (s == to_string(m)) return m;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + std::string(s) + "'");
}

struct PmfRequest {
  Rect rect;
  int n_max = 10;
  double tol = kDefaultTolerance;
  std::optional<PmfMethod> method;  // empty: best applicable
  SimConfig sim;                    // MonteCarlo method and f_0 fallback
};

namespace detail {

inline ContactPmf monte_carlo_pmf(const QuadrantModel& model, const PmfRequest& req) {
  ContactPmf pmf(req.rect, req.n_max, PmfMethod::MonteCarlo);
  for (int i = req.rect.i0; i <= req.rect.i1; ++i)
    for (int j = req.rect.j0; j <= req.rect.j1; ++j) {
      const SimEstimate est = simulate_contacts(model, i, j, req.sim);
      for (int n = 0; n <= req.n_max; ++n) {
        const auto k = static_cast<std::size_t>(n);
        const Estimate e = k < est.pmf.size() ? est.pmf[k] : Estimate{};
        pmf.set(i, j, n, e.value, 3.0 * e.stderr_ + req.sim.escape_epsilon);
      }
    }
  return pmf;
}

inline ContactPmf coupling_route(const QuadrantModel& model, const PmfRequest& req) {
  const Rect margin = required_margin(req.rect, model.origin(), req.n_max);
  const F0Table f0 = make_f0_table(model, margin, {}, req.sim, req.tol);
  return coupling_pmf(model, f0, req.rect, req.n_max);
}

}  // namespace detail

// Exact finite sums first, then telescoped closed forms, then the general
// series, then the contact recursion.
inline ContactPmf analytic_pmf(const QuadrantModel& model, const PmfRequest& req) {
  if (req.method == PmfMethod::MonteCarlo) return detail::monte_carlo_pmf(model, req);
  if (req.method == PmfMethod::CouplingRecursion) return detail::coupling_route(model, req);
  const ProductForm form = req.method == PmfMethod::CompensationSeries ? ProductForm::Cumulative : ProductForm::Telescoped;
  try {
    ContactPmf pmf = with_adaptive_order(
        model, [&](const Compensation& c) { return extract_pmf(c, model, req.rect, req.n_max, req.tol); }, form);
    if (req.method && *req.method != pmf.method())
      throw Error(ErrorKind::NotApplicable, "method " + std::string(to_string(*req.method)) +
                                                " does not apply; best available is " +
                                                std::string(to_string(pmf.method())));
    return pmf;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotApplicable || req.method) throw;
  }
  return detail::coupling_route(model, req);
}

}  // namespace qpcontact
