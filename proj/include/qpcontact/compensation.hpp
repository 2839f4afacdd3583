#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpcontact/error.hpp"
#include "qpcontact/factor_list.hpp"
#include "qpcontact/kernel.hpp"
#include "qpcontact/model.hpp"
#include "qpcontact/pmf.hpp"

namespace qpcontact {

inline constexpr double kFiniteGroupTolerance = 1e-10;
inline constexpr double kTieTolerance = 1e-12;
inline constexpr double kPoleSeparation = 1e-9;
inline constexpr double kDefaultTolerance = 1e-13;
inline constexpr int kDefaultMaxPeriod = 64;
// Below this the sequence is treated as exactly zero.
inline constexpr double kUnderflow = 1e-280;

namespace detail {

// a^k b^l with 0^0 = 1; monomials that involve an underflowed base vanish.
inline double monomial(double a, int k, double b, int l) {
  if ((a == 0.0 && k != 0) || (b == 0.0 && l != 0)) return 0.0;
  return std::pow(a, k) * std::pow(b, l);
}

inline double power(double x, int e) { return e == 0 ? 1.0 : std::pow(x, e); }

}  // namespace detail

// Points (alpha_m, beta_m) on the kernel curve. Periodic sequences store one
// period starting at m = 0 and are indexed cyclically.
class CompensationSeries {
 public:
  int order() const noexcept { return order_; }
  int min_index() const noexcept { return first_; }
  int max_index() const noexcept { return first_ + static_cast<int>(alpha_.size()) - 1; }
  std::optional<int> period() const noexcept { return period_; }
  bool periodic() const noexcept { return period_.has_value(); }
  double decay_ratio() const noexcept { return decay_ratio_; }

  double alpha(int m) const { return alpha_[slot(m)]; }
  double beta(int m) const { return beta_[slot(m)]; }

  friend CompensationSeries build_sequence(const KernelCurve& curve, int order);
  friend CompensationSeries build_periodic_sequence(const Kernel& kernel, int max_period);

 private:
  std::size_t slot(int m) const {
    if (period_) return static_cast<std::size_t>(((m % *period_) + *period_) % *period_);
    if (m < min_index() || m > max_index())
      throw Error(ErrorKind::InvalidArgument, "sequence index " + std::to_string(m) + " out of range");
    return static_cast<std::size_t>(m - first_);
  }

  int order_ = 0;
  int first_ = 0;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  std::optional<int> period_;
  double decay_ratio_ = std::numeric_limits<double>::quiet_NaN();
};

// Singular walks: alpha_m = u*(beta_{m-1}), beta_m = v*(alpha_m) going up,
// beta_m = v*(alpha_{m+1}), alpha_m = u*(beta_m) going down.
inline CompensationSeries build_sequence(const KernelCurve& curve, int order) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "truncation order must be at least 1");
  CompensationSeries s;
  s.order_ = order;
  s.first_ = -order;
  s.alpha_.assign(static_cast<std::size_t>(2 * order + 2), 0.0);
  s.beta_.assign(s.alpha_.size(), 0.0);
  auto at = [&](int m) { return static_cast<std::size_t>(m + order); };
  s.alpha_[at(0)] = s.beta_[at(0)] = 1.0;

  const double a_box = curve.alpha_hat() * (1.0 + 1e-12);
  const double b_box = curve.beta_tilde() * (1.0 + 1e-12);
  auto check = [&](int m, double a, double b, double a_prev, double b_prev) {
    const bool inside = a >= 0.0 && a <= a_box && b >= 0.0 && b <= b_box;
    const bool shrinking = (a < a_prev || a == 0.0) && (b < b_prev || b == 0.0);
    if (!inside || !shrinking)
      throw Error(ErrorKind::BranchEscape, "iterate " + std::to_string(m) + " left the branch box");
  };
  auto u_star = [&](double b) { return b < kUnderflow ? 0.0 : curve.u_star(b); };
  auto v_star = [&](double a) { return a < kUnderflow ? 0.0 : curve.v_star(a); };

  for (int m = 1; m <= order + 1; ++m) {
    const double a = u_star(s.beta_[at(m - 1)]);
    const double b = v_star(a);
    check(m, a, b, s.alpha_[at(m - 1)], s.beta_[at(m - 1)]);
    s.alpha_[at(m)] = a;
    s.beta_[at(m)] = b;
  }
  for (int m = -1; m >= -order; --m) {
    const double b = v_star(s.alpha_[at(m + 1)]);
    const double a = u_star(b);
    check(m, a, b, s.alpha_[at(m + 1)], s.beta_[at(m + 1)]);
    s.alpha_[at(m)] = a;
    s.beta_[at(m)] = b;
  }
  s.decay_ratio_ = (curve.alpha_hat() / curve.beta_hat()) * (curve.beta_tilde() / curve.alpha_tilde());
  return s;
}

// Non-singular walks: each step moves to the other root of the same kernel
// slice. Succeeds only when the orbit returns to (1,1).
inline CompensationSeries build_periodic_sequence(const Kernel& kernel, int max_period = kDefaultMaxPeriod) {
  auto other = [](const SliceRoots& r, double previous) {
    if (!r.real) throw Error(ErrorKind::NotApplicable, "kernel slice has no real root");
    if (!std::isfinite(r.upper)) return r.lower;
    return std::abs(r.lower - previous) >= std::abs(r.upper - previous) ? r.lower : r.upper;
  };
  CompensationSeries s;
  s.alpha_ = {1.0};
  s.beta_ = {1.0};
  for (int m = 1; m <= max_period; ++m) {
    const double a = other(kernel.alpha_roots(s.beta_.back()), s.alpha_.back());
    const double b = other(kernel.beta_roots(a), s.beta_.back());
    if (std::abs(a - 1.0) < kFiniteGroupTolerance && std::abs(b - 1.0) < kFiniteGroupTolerance) {
      s.period_ = m;
      s.order_ = m;
      return s;
    }
    s.alpha_.push_back(a);
    s.beta_.push_back(b);
  }
  throw Error(ErrorKind::NotApplicable,
              "compensation sequence does not close up within " + std::to_string(max_period) + " steps");
}

struct BoundaryQuantities {
  double v_hat = 0.0;
  double v_tilde = std::numeric_limits<double>::quiet_NaN();
  double h_hat = 0.0;
  double h_tilde = std::numeric_limits<double>::quiet_NaN();
};

inline double boundary_moment(const StepDistribution& law, double a, double b) {
  return law.expectation([&](Jump j) { return detail::monomial(a, j.k, b, j.l); });
}

class QuantityTable {
 public:
  const BoundaryQuantities& at(int m) const {
    if (period_) return rows_[static_cast<std::size_t>(((m % *period_) + *period_) % *period_)];
    if (m < first_ || m >= first_ + static_cast<int>(rows_.size()))
      throw Error(ErrorKind::InvalidArgument, "quantity index out of range");
    return rows_[static_cast<std::size_t>(m - first_)];
  }
  int min_index() const noexcept { return first_; }
  int max_index() const noexcept { return first_ + static_cast<int>(rows_.size()) - 1; }

  friend QuantityTable hat_tilde_quantities(const CompensationSeries& s, const QuadrantModel& model);

 private:
  int first_ = 0;
  std::optional<int> period_;
  std::vector<BoundaryQuantities> rows_;
};

// v_hat_m = E_v[a_m^k b_m^l], v_tilde_m = E_v[a_m^k b_{m-1}^l], same for h.
inline QuantityTable hat_tilde_quantities(const CompensationSeries& s, const QuadrantModel& model) {
  QuantityTable t;
  t.first_ = s.min_index();
  t.period_ = s.period();
  for (int m = s.min_index(); m <= s.max_index(); ++m) {
    BoundaryQuantities q;
    const double a = s.alpha(m);
    const double b = s.beta(m);
    q.v_hat = boundary_moment(model.vertical(), a, b);
    q.h_hat = boundary_moment(model.horizontal(), a, b);
    if (s.periodic() || m > s.min_index()) {
      const double b_prev = s.beta(m - 1);
      q.v_tilde = boundary_moment(model.vertical(), a, b_prev);
      q.h_tilde = boundary_moment(model.horizontal(), a, b_prev);
    }
    t.rows_.push_back(q);
  }
  return t;
}

// One summand coeff(z) * alpha_{ia}^i * beta_{ib}^j of the generating function.
struct SeriesTerm {
  FactorList coeff;
  int alpha_index = 0;
  int beta_index = 0;
  int side = -1;  // which one-sided tail it belongs to; -1 for exact terms
  int rank = 0;   // distance from the centre along that side
};

enum class ProductForm { Telescoped, Cumulative };

class CoefficientProducts {
 public:
  const QuantityTable& quantities() const noexcept { return q_; }
  bool closed_form() const noexcept { return closed_form_; }
  bool periodic() const noexcept { return periodic_; }
  int order() const noexcept { return order_; }

  const FactorList& c(int m) const { return c_.at(static_cast<std::size_t>(m - c_first_)); }
  const FactorList& d(int m) const {
    if (periodic_ && m == 0) m = order_;
    return d_.at(static_cast<std::size_t>(m - d_first_));
  }
  int c_min() const noexcept { return c_first_; }
  int c_max() const noexcept { return c_first_ + static_cast<int>(c_.size()) - 1; }
  int d_min() const noexcept { return d_first_; }
  int d_max() const noexcept { return d_first_ + static_cast<int>(d_.size()) - 1; }

  std::span<const SeriesTerm> terms() const noexcept { return terms_; }

  friend CoefficientProducts coefficient_products(const CompensationSeries&, const QuantityTable&,
                                                  bool identical, ProductForm);

 private:
  QuantityTable q_;
  bool closed_form_ = false;
  bool periodic_ = false;
  int order_ = 0;
  int c_first_ = 0;
  int d_first_ = 0;
  std::vector<FactorList> c_;
  std::vector<FactorList> d_;
  std::vector<SeriesTerm> terms_;
};

// c_0 = 1, d_{m+1} = -c_m (1 - v_hat_m z)/(1 - v_tilde_{m+1} z),
// c_m = -d_m (1 - h_tilde_m z)/(1 - h_hat_m z). With identical reflections the
// products telescope to c_m = (1-z)/(1-v_hat_m z), d_m = -(1-z)/(1-v_tilde_m z).
inline CoefficientProducts coefficient_products(const CompensationSeries& s, const QuantityTable& q,
                                                bool identical, ProductForm form = ProductForm::Telescoped) {
  CoefficientProducts out;
  out.q_ = q;
  out.order_ = s.order();
  out.periodic_ = s.periodic();
  out.closed_form_ = identical && (form == ProductForm::Telescoped || s.periodic());
  if (s.periodic() && !identical)
    throw Error(ErrorKind::NotApplicable, "finite sums are implemented for identical reflections only");

  const int M = s.order();
  auto closed_c = [&](int m) { return m == 0 ? FactorList{} : FactorList(1, {{1.0, q.at(m).v_hat}}); };
  auto closed_d = [&](int m) { return FactorList(-1, {{1.0, q.at(m).v_tilde}}); };

  if (s.periodic()) {
    out.c_first_ = 0;
    out.d_first_ = 1;
    for (int m = 0; m < M; ++m) out.c_.push_back(closed_c(m));
    for (int m = 1; m <= M; ++m) out.d_.push_back(closed_d(m));
    for (int m = 0; m < M; ++m) {
      out.terms_.push_back({out.c(m), m, m, -1, 0});
      out.terms_.push_back({out.d(m + 1), m + 1, m, -1, 0});
    }
    return out;
  }

  out.c_first_ = -M;
  out.d_first_ = -M + 1;
  out.c_.resize(static_cast<std::size_t>(2 * M + 1));
  out.d_.resize(static_cast<std::size_t>(2 * M + 1));
  auto C = [&](int m) -> FactorList& { return out.c_[static_cast<std::size_t>(m + M)]; };
  auto D = [&](int m) -> FactorList& { return out.d_[static_cast<std::size_t>(m + M - 1)]; };
  if (out.closed_form_) {
    for (int m = -M; m <= M; ++m) C(m) = closed_c(m);
    for (int m = -M + 1; m <= M + 1; ++m) D(m) = closed_d(m);
  } else {
    C(0) = FactorList{};
    for (int m = 0; m <= M; ++m) {
      D(m + 1) = C(m).negated_times({q.at(m).v_hat, q.at(m + 1).v_tilde});
      if (m + 1 <= M) C(m + 1) = D(m + 1).negated_times({q.at(m + 1).h_tilde, q.at(m + 1).h_hat});
    }
    D(0) = C(0).negated_times({q.at(0).h_hat, q.at(0).h_tilde});
    for (int m = -1; m >= -M; --m) {
      C(m) = D(m + 1).negated_times({q.at(m + 1).v_tilde, q.at(m).v_hat});
      if (m >= -M + 1) D(m) = C(m).negated_times({q.at(m).h_hat, q.at(m).h_tilde});
    }
  }
  for (int m = -M; m <= M; ++m) {
    const int c_side = m > 0 ? 0 : (m < 0 ? 1 : -1);
    out.terms_.push_back({C(m).simplified(), m, m, c_side, std::abs(m)});
    const int dm = m + 1;
    out.terms_.push_back({D(dm).simplified(), dm, m, dm >= 1 ? 2 : 3, dm >= 1 ? dm : 1 - dm});
  }
  return out;
}

// Sequence plus coefficient products for one model at one truncation order.
struct Compensation {
  CompensationSeries series;
  CoefficientProducts products;
  PmfMethod method = PmfMethod::CompensationSeries;
};

namespace detail {

inline double term_weight(const CompensationSeries& s, const SeriesTerm& t, int i, int j) {
  return power(s.alpha(t.alpha_index), i) * power(s.beta(t.beta_index), j);
}

// Tail of a one-sided sum from its last terms, assuming geometric decay at the
// worse of the last two observed ratios.
inline double geometric_tail(const std::vector<double>& by_rank) {
  if (by_rank.size() < 2) return 0.0;
  const std::size_t R = by_rank.size() - 1;
  const double last = by_rank[R];
  if (last == 0.0) return 0.0;
  if (R < 3 || by_rank[R - 1] == 0.0 || by_rank[R - 2] == 0.0) return std::numeric_limits<double>::infinity();
  const double rho = std::max(last / by_rank[R - 1], by_rank[R - 1] / by_rank[R - 2]);
  if (!(rho < 1.0)) return std::numeric_limits<double>::infinity();
  return last * rho / (1.0 - rho);
}

struct TailAccumulator {
  std::array<std::vector<double>, 4> sides;

  void add(const SeriesTerm& t, double magnitude) {
    if (t.side < 0) return;
    auto& v = sides[static_cast<std::size_t>(t.side)];
    const auto r = static_cast<std::size_t>(t.rank);
    if (v.size() <= r) v.resize(r + 1, 0.0);
    v[r] += magnitude;
  }
  double bound() const {
    double total = 0.0;
    for (const auto& v : sides) total += geometric_tail(v);
    return total;
  }
};

inline double rounding_weight(const FactorList& f) {
  return 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(f.size() + 2) *
         f.coefficient_bound();
}

}  // namespace detail

struct GValue {
  double value = 0.0;
  double error_bound = 0.0;  // truncation plus rounding
  double truncation = 0.0;
};

inline GValue evaluate_G(const CompensationSeries& s, const CoefficientProducts& p, int i, int j, double z,
                         double tol = kDefaultTolerance) {
  if (i < 0 || j < 0 || (i == 0 && j == 0))
    throw Error(ErrorKind::InvalidArgument, "G is evaluated away from the origin");
  if (z == 1.0) return {1.0, 0.0, 0.0};
  if (!(std::abs(z) <= 1.0 - 1e-9)) throw Error(ErrorKind::InvalidArgument, "need |z| <= 1 - 1e-9");
  GValue out;
  double rounding = 0.0;
  detail::TailAccumulator tails;
  for (const SeriesTerm& t : p.terms()) {
    const double w = detail::term_weight(s, t, i, j);
    if (w == 0.0) continue;
    out.value += t.coeff(z) * w;
    rounding += detail::rounding_weight(t.coeff) * w;
    tails.add(t, t.coeff.coefficient_bound() * w);
  }
  out.truncation = p.periodic() ? 0.0 : tails.bound();
  out.error_bound = out.truncation + rounding;
  if (out.truncation > tol)
    throw Error(ErrorKind::TruncationInsufficient, "tail bound exceeds tolerance; raise the order");
  return out;
}

// Per-start sequences indexed by n.
struct PointSeries {
  std::vector<double> value;
  std::vector<double> error;
  double truncation = 0.0;
};

enum class SeriesKind { Pmf, Tail };

namespace detail {

// Coefficients of (1-z)/(1-bz) (pmf) or of -1/(1-bz) (tail), times sign.
inline void closed_form_coefficients(const FactorList& f, SeriesKind kind, std::vector<double>& out) {
  const int n_max = static_cast<int>(out.size()) - 1;
  if (f.size() == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    if (kind == SeriesKind::Pmf) out[0] = f.sign();
    return;
  }
  const double b = f.factors()[0].b;
  const double sign = f.sign();
  if (kind == SeriesKind::Pmf) {
    out[0] = sign;
    double bn = 1.0;
    for (int n = 1; n <= n_max; ++n) {
      out[static_cast<std::size_t>(n)] = -sign * (1.0 - b) * bn;
      bn *= b;
    }
  } else {
    double bn = 1.0;
    for (int n = 0; n <= n_max; ++n) {
      out[static_cast<std::size_t>(n)] = -sign * bn;
      bn *= b;
    }
  }
}

inline FactorList tail_list(const FactorList& f) {
  FactorList t = f.without_unit_root();
  return FactorList(-t.sign(), std::vector<Factor>(t.factors().begin(), t.factors().end()));
}

// Coefficient series for every term, shared by all starts.
struct TermSeries {
  std::vector<std::vector<double>> coeffs;
  std::vector<double> bound;
  std::vector<double> rounding;
};

inline TermSeries term_series(const CoefficientProducts& p, int n_max, SeriesKind kind) {
  TermSeries ts;
  for (const SeriesTerm& t : p.terms()) {
    const bool constant = t.coeff.size() == 0;
    std::vector<double> c(static_cast<std::size_t>(n_max) + 1, 0.0);
    double bound = 0.0;
    double rounding = 0.0;
    if (kind == SeriesKind::Pmf || !constant) {
      const FactorList f = kind == SeriesKind::Pmf ? t.coeff : tail_list(t.coeff);
      if (p.closed_form())
        closed_form_coefficients(t.coeff, kind, c);
      else
        c = f.taylor(n_max);
      bound = f.coefficient_bound();
      rounding = rounding_weight(f);
    }
    ts.coeffs.push_back(std::move(c));
    ts.bound.push_back(bound);
    ts.rounding.push_back(rounding);
  }
  return ts;
}

inline PointSeries point_series(const CompensationSeries& s, const CoefficientProducts& p, const TermSeries& ts,
                                int i, int j, double tol) {
  const std::size_t N = ts.coeffs.empty() ? 0 : ts.coeffs.front().size();
  PointSeries out{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0), 0.0};
  double rounding = 0.0;
  TailAccumulator tails;
  const auto terms = p.terms();
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const double w = term_weight(s, terms[t], i, j);
    if (w == 0.0) continue;
    const auto& c = ts.coeffs[t];
    for (std::size_t n = 0; n < N; ++n) out.value[n] += c[n] * w;
    rounding += ts.rounding[t] * w;
    tails.add(terms[t], ts.bound[t] * w);
  }
  out.truncation = p.periodic() ? 0.0 : tails.bound();
  if (out.truncation > tol)
    throw Error(ErrorKind::TruncationInsufficient, "tail bound exceeds tolerance; raise the order");
  for (auto& e : out.error) e = out.truncation + rounding;
  return out;
}

}  // namespace detail

// f_n(i,j) or P(Z > n) for n = 0..n_max at every start of `rect`. The origin is
// reached through f_n(0,0) = sum q f_{n-1}(k,l).
inline std::vector<PointSeries> extract_series(const CompensationSeries& s, const CoefficientProducts& p,
                                               const QuadrantModel& model, const Rect& rect, int n_max,
                                               double tol, SeriesKind kind) {
  if (rect.empty() || rect.i0 < 0 || rect.j0 < 0 || n_max < 0)
    throw Error(ErrorKind::InvalidArgument, "bad start rectangle or n_max");
  const detail::TermSeries ts = detail::term_series(p, n_max, kind);
  std::vector<PointSeries> out;
  out.reserve(rect.count());
  for (int i = rect.i0; i <= rect.i1; ++i) {
    for (int j = rect.j0; j <= rect.j1; ++j) {
      if (i != 0 || j != 0) {
        out.push_back(detail::point_series(s, p, ts, i, j, tol));
        continue;
      }
      const auto N = static_cast<std::size_t>(n_max) + 1;
      PointSeries origin{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0), 0.0};
      const double self = model.origin().weight({0, 0});
      std::vector<std::pair<double, PointSeries>> targets;
      for (const Atom& a : model.origin().atoms())
        if (a.jump != Jump{0, 0})
          targets.emplace_back(a.weight, detail::point_series(s, p, ts, a.jump.k, a.jump.l, tol));
      if (kind == SeriesKind::Tail) origin.value[0] = 1.0;
      for (std::size_t n = 1; n < N; ++n) {
        double v = self * origin.value[n - 1];
        double e = self * origin.error[n - 1];
        for (const auto& [w, ps] : targets) {
          v += w * ps.value[n - 1];
          e += w * ps.error[n - 1];
        }
        origin.value[n] = v;
        origin.error[n] = e;
      }
      for (const auto& [w, ps] : targets) origin.truncation = std::max(origin.truncation, ps.truncation);
      out.push_back(std::move(origin));
    }
  }
  return out;
}

inline ContactPmf extract_pmf(const Compensation& comp, const QuadrantModel& model, const Rect& rect, int n_max,
                              double tol = kDefaultTolerance) {
  const auto rows = extract_series(comp.series, comp.products, model, rect, n_max, tol, SeriesKind::Pmf);
  ContactPmf pmf(rect, n_max, comp.method);
  std::size_t r = 0;
  for (int i = rect.i0; i <= rect.i1; ++i)
    for (int j = rect.j0; j <= rect.j1; ++j, ++r)
      for (int n = 0; n <= n_max; ++n)
        pmf.set(i, j, n, rows[r].value[static_cast<std::size_t>(n)], rows[r].error[static_cast<std::size_t>(n)]);
  return pmf;
}

// P(Z_(i,j) > n) for n = 0..n_max, from the series of (1 - G(z))/(1 - z); this
// keeps full relative accuracy deep in the tail.
inline PointSeries tail_probabilities(const Compensation& comp, const QuadrantModel& model, int i, int j, int n_max,
                                      double tol = kDefaultTolerance) {
  return extract_series(comp.series, comp.products, model, Rect::point(i, j), n_max, tol, SeriesKind::Tail)
      .front();
}

inline Compensation build_compensation(const QuadrantModel& model, int order,
                                       ProductForm form = ProductForm::Telescoped) {
  const ValidationReport report = validate(model);
  const bool identical = model.has_identical_reflections();
  if (passes_singular_class(report)) {
    const KernelCurve curve = find_branch_maximizers(model.interior());
    CompensationSeries s = build_sequence(curve, order);
    QuantityTable q = hat_tilde_quantities(s, model);
    CoefficientProducts p = coefficient_products(s, q, identical, form);
    const PmfMethod method = p.closed_form() ? PmfMethod::ClosedFormIdentical : PmfMethod::CompensationSeries;
    return {std::move(s), std::move(p), method};
  }
  if (identical && passes_identical_class(report)) {
    CompensationSeries s = build_periodic_sequence(Kernel(model.interior()));
    QuantityTable q = hat_tilde_quantities(s, model);
    CoefficientProducts p = coefficient_products(s, q, true, form);
    return {std::move(s), std::move(p), PmfMethod::FiniteGroupSum};
  }
  throw Error(ErrorKind::NotApplicable,
              "model is neither a valid singular walk nor an identical-reflection finite-group walk");
}

inline constexpr int kStartOrder = 8;
inline constexpr int kMaxOrder = 4096;

// Runs `f` on compensations of increasing order until no truncation error is raised.
template <class F>
auto with_adaptive_order(const QuadrantModel& model, F&& f, ProductForm form = ProductForm::Telescoped,
                         int start = kStartOrder, int max_order = kMaxOrder) {
  for (int order = start;; order *= 2) {
    const Compensation comp = build_compensation(model, order, form);
    try {
      return f(comp);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TruncationInsufficient || comp.series.periodic() || order >= max_order) throw;
    }
  }
}

enum class TailRegime { VDominant, Tie, HDominant };

constexpr std::string_view to_string(TailRegime r) {
  switch (r) {
    case TailRegime::VDominant: return "VDominant";
    case TailRegime::Tie: return "Tie";
    case TailRegime::HDominant: return "HDominant";
  }
  return "Unknown";
}

struct TailAsymptotics {
  double rate = 0.0;
  double constant = 0.0;
  TailRegime regime = TailRegime::Tie;
};

namespace detail {

inline double ratio_at(const FactorList& num, const FactorList& den, double z0) {
  const FactorList r = num.divided_by(den);
  for (const Factor& f : r.factors()) {
    if (f.b <= 0.0) continue;
    if (1.0 / f.b < z0 + kPoleSeparation)
      throw Error(ErrorKind::PoleCollision, "a retained pole is not beyond the dominant one");
  }
  return r(z0);
}

// S_1 = sum_{m>=1} (d_m/d_1) a_m^i b_{m-1}^j + (c_m/d_1) a_m^i b_m^j
inline double s_one(const CompensationSeries& s, const CoefficientProducts& p, int i, int j, double z0) {
  double sum = 0.0;
  for (int m = 1; m <= p.order(); ++m) {
    sum += ratio_at(p.d(m), p.d(1), z0) * power(s.alpha(m), i) * power(s.beta(m - 1), j);
    sum += ratio_at(p.c(m), p.d(1), z0) * power(s.alpha(m), i) * power(s.beta(m), j);
  }
  return sum;
}

// S_0 = sum_{m<=0} (d_m/d_0) a_m^i b_{m-1}^j + (c_{m-1}/d_0) a_{m-1}^i b_{m-1}^j
inline double s_zero(const CompensationSeries& s, const CoefficientProducts& p, int i, int j, double z0) {
  double sum = 0.0;
  for (int m = 0; m >= -p.order() + 1; --m) {
    sum += ratio_at(p.d(m), p.d(0), z0) * power(s.alpha(m), i) * power(s.beta(m - 1), j);
    sum += ratio_at(p.c(m - 1), p.d(0), z0) * power(s.alpha(m - 1), i) * power(s.beta(m - 1), j);
  }
  return sum;
}

}  // namespace detail

// f_n(i,j) ~ C rate^n with rate = max(v_tilde_1, h_tilde_0).
inline TailAsymptotics tail_asymptotics(const CompensationSeries& s, const CoefficientProducts& p, int i, int j) {
  if (i < 0 || j < 0 || (i == 0 && j == 0))
    throw Error(ErrorKind::InvalidArgument, "asymptotics are computed away from the origin");
  const double vt1 = p.quantities().at(1).v_tilde;
  const double ht0 = p.quantities().at(0).h_tilde;
  TailAsymptotics out;
  out.rate = std::max(vt1, ht0);
  out.regime = std::abs(vt1 - ht0) <= kTieTolerance ? TailRegime::Tie
               : vt1 > ht0                           ? TailRegime::VDominant
                                                     : TailRegime::HDominant;
  if (p.periodic()) {
    // Finite sum of s w (1-z)/(1-bz): the pole at 1/rate has residue weight s w (1 - 1/b).
    for (const SeriesTerm& t : p.terms()) {
      if (t.coeff.size() == 0) continue;
      const double b = t.coeff.factors()[0].b;
      if (b > out.rate + kTieTolerance)
        throw Error(ErrorKind::PoleCollision, "a finite-sum pole lies inside the dominant one");
      if (std::abs(b - out.rate) <= kTieTolerance)
        out.constant += t.coeff.sign() * detail::term_weight(s, t, i, j) * (1.0 - 1.0 / b);
    }
    return out;
  }
  const double z0 = 1.0 / out.rate;
  double S = 0.0;
  if (out.regime != TailRegime::HDominant) S += detail::s_one(s, p, i, j, z0);
  if (out.regime != TailRegime::VDominant) S += detail::s_zero(s, p, i, j, z0);
  out.constant = (z0 - 1.0) * S;
  return out;
}

// Both geometric components (1 - v_tilde_1) S_1(1/v_tilde_1) v_tilde_1^{n-1} and
// (1 - h_tilde_0) S_0(1/h_tilde_0) h_tilde_0^{n-1}, each at its own pole.
struct TwoTermAsymptotics {
  double v_rate = 0.0;
  double v_amplitude = 0.0;
  double h_rate = 0.0;
  double h_amplitude = 0.0;
  bool separated = false;  // min(v_tilde_1, h_tilde_0) > max(h_hat_1, v_hat_{-1})

  double approximate(int n) const {
    return v_amplitude * std::pow(v_rate, n - 1) + h_amplitude * std::pow(h_rate, n - 1);
  }
};

inline TwoTermAsymptotics two_term_asymptotics(const CompensationSeries& s, const CoefficientProducts& p, int i,
                                               int j) {
  if (p.periodic()) throw Error(ErrorKind::NotApplicable, "finite sums are exact; no expansion needed");
  const auto& q = p.quantities();
  TwoTermAsymptotics out;
  out.v_rate = q.at(1).v_tilde;
  out.h_rate = q.at(0).h_tilde;
  out.separated = std::min(out.v_rate, out.h_rate) > std::max(q.at(1).h_hat, q.at(-1).v_hat);
  out.v_amplitude = (1.0 - out.v_rate) * detail::s_one(s, p, i, j, 1.0 / out.v_rate);
  out.h_amplitude = (1.0 - out.h_rate) * detail::s_zero(s, p, i, j, 1.0 / out.h_rate);
  return out;
}

// Geometric profiles multiplying alpha_1^i and beta_{-1}^j when i + j is large.
struct FarField {
  double profile_v = 0.0;
  double profile_h = 0.0;
  double alpha_1 = 0.0;
  double beta_minus1 = 0.0;

  double approximate(int i, int j) const {
    return profile_v * detail::power(alpha_1, i) + profile_h * detail::power(beta_minus1, j);
  }
};

inline FarField far_field_asymptotics(const AxisFixedPoints& fp, const QuantityTable& q, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "far-field profiles start at n = 1");
  const double vt1 = q.at(1).v_tilde;
  const double ht0 = q.at(0).h_tilde;
  return {(1.0 - vt1) * std::pow(vt1, n - 1), (1.0 - ht0) * std::pow(ht0, n - 1), fp.alpha_1, fp.beta_minus1};
}

}  // namespace qpcontact
