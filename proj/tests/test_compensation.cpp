#include <cmath>
#include <set>

#include "catch_amalgamated.hpp"
#include "qpcontact/compensation.hpp"
#include "qpcontact/registry.hpp"

using namespace qpcontact;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const QuadrantModel& fib() {
  static const QuadrantModel m = get_reference("fibonacci-identical").model;
  return m;
}
const QuadrantModel& mixed() {
  static const QuadrantModel m = get_reference("fibonacci-mixed").model;
  return m;
}
const QuadrantModel& group() {
  static const QuadrantModel m = get_reference("finite-group-simple").model;
  return m;
}
const QuadrantModel& demo() {
  static const QuadrantModel m = get_reference("generic-singular-demo").model;
  return m;
}

bool near_integer(double x, double tol) { return std::abs(x - std::round(x)) <= tol; }

}  // namespace

TEST_CASE("Fibonacci sequence") {
  const Compensation c = build_compensation(fib(), 4);
  const CompensationSeries& s = c.series;
  CHECK(s.alpha(0) == 1.0);
  CHECK(s.beta(0) == 1.0);
  std::set<long> seen;
  for (int m = -4; m <= 4; ++m) {
    CHECK(near_integer(1 / s.alpha(m), 1e-8));
    CHECK(near_integer(1 / s.beta(m), 1e-8));
    seen.insert(std::lround(1 / s.alpha(m)));
    seen.insert(std::lround(1 / s.beta(m)));
  }
  for (long v : {1, 2, 5, 13, 34, 89, 233, 610, 1597}) CHECK(seen.count(v) == 1);
  CHECK_FALSE(s.periodic());
  CHECK(s.decay_ratio() > 0.0);
  CHECK(s.decay_ratio() < 1.0);
}

TEST_CASE("sequence obeys the branch recursions and decays") {
  const KernelCurve curve = find_branch_maximizers(demo().interior());
  const CompensationSeries s = build_sequence(curve, 12);
  for (int m = 1; m <= 12; ++m) {
    CHECK_THAT(s.alpha(m), WithinRel(curve.u_star(s.beta(m - 1)), 1e-12));
    CHECK_THAT(s.beta(m), WithinRel(curve.v_star(s.alpha(m)), 1e-12));
    if (m >= 2) {
      CHECK(s.alpha(m) < s.alpha(m - 1));
      CHECK(s.beta(m) < s.beta(m - 1));
    }
  }
  for (int m = -1; m >= -12; --m) {
    CHECK_THAT(s.beta(m), WithinRel(curve.v_star(s.alpha(m + 1)), 1e-12));
    CHECK_THAT(s.alpha(m), WithinRel(curve.u_star(s.beta(m)), 1e-12));
    if (m <= -2) {
      CHECK(s.alpha(m) < s.alpha(m + 1));
      CHECK(s.beta(m) < s.beta(m + 1));
    }
  }
  // Geometric decay at no worse than the decay ratio, up to the first-excursion constant.
  const double C = s.alpha(1) / s.decay_ratio();
  for (int m = 1; m <= 12; ++m) CHECK(s.alpha(m) <= C * std::pow(s.decay_ratio(), m) * (1 + 1e-9));
}

TEST_CASE("finite group closes after four pairs") {
  const Compensation c = build_compensation(group(), 8);
  const CompensationSeries& s = c.series;
  REQUIRE(s.periodic());
  CHECK(*s.period() == 2);
  CHECK(c.method == PmfMethod::FiniteGroupSum);
  CHECK_THAT(s.alpha(1), WithinAbs(1.0 / 3, 1e-12));
  CHECK_THAT(s.beta(1), WithinAbs(1.0 / 3, 1e-12));
  CHECK_THAT(s.beta(0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("hat and tilde quantities of the Fibonacci walk") {
  const Compensation c = build_compensation(fib(), 6);
  const QuantityTable& q = c.products.quantities();
  CHECK_THAT(q.at(1).v_tilde, WithinAbs(0.5, 1e-12));
  CHECK_THAT(q.at(1).h_hat, WithinAbs(0.1, 1e-12));
  for (int m = -5; m <= 5; ++m) {
    CHECK(q.at(m).v_tilde == q.at(m).h_tilde);
    CHECK(q.at(m).v_hat == q.at(m).h_hat);
  }
}

TEST_CASE("coefficient products") {
  const Compensation c = build_compensation(fib(), 6);
  for (double z : {-0.5, 0.0, 0.4, 0.95}) {
    CHECK(c.products.c(0)(z) == 1.0);
    CHECK_THAT(c.products.d(1)(z), WithinAbs(-(1 - z) / (1 - z / 2), 1e-14));
  }
  // Telescoped closed form against the raw cumulative recursion.
  const Compensation raw = build_compensation(fib(), 6, ProductForm::Cumulative);
  CHECK_FALSE(raw.products.closed_form());
  for (int m = -5; m <= 5; ++m)
    for (double z : {-0.7, 0.3, 0.9}) {
      CHECK_THAT(raw.products.c(m)(z), WithinAbs(c.products.c(m)(z), 1e-12));
      CHECK_THAT(raw.products.d(m + 1)(z), WithinAbs(c.products.d(m + 1)(z), 1e-12));
    }
  // Every coefficient but c_0 vanishes at z = 1.
  for (const SeriesTerm& t : c.products.terms())
    if (t.alpha_index != 0 || t.beta_index != 0) CHECK(t.coeff.vanishes_at_one());
}

TEST_CASE("coefficient Taylor series sum back to the factor product") {
  const Compensation c = build_compensation(demo(), 8, ProductForm::Cumulative);
  for (const SeriesTerm& t : c.products.terms()) {
    double smallest_pole = 1e300;
    for (const Factor& f : t.coeff.factors())
      if (f.b > 0) smallest_pole = std::min(smallest_pole, 1 / f.b);
    const double z = std::min(0.9 * smallest_pole, 5.0);
    const auto s = t.coeff.taylor(600);
    double sum = 0.0;
    for (std::size_t n = s.size(); n-- > 0;) sum = sum * z + s[n];
    CHECK_THAT(sum, WithinAbs(t.coeff(z), 1e-10));
  }
}

TEST_CASE("G at the worked points") {
  const Compensation f = build_compensation(fib(), 32);
  CHECK(evaluate_G(f.series, f.products, 1, 1, 1.0).value == 1.0);
  const GValue g = evaluate_G(f.series, f.products, 1, 1, 0.0);
  CHECK_THAT(g.value, WithinAbs(get_reference("fibonacci-identical").known_f0(1, 1), 1e-13));

  const Compensation b = build_compensation(group(), 8);
  CHECK_THAT(evaluate_G(b.series, b.products, 1, 1, 0.0).value, WithinAbs(4.0 / 9, 1e-15));
  CHECK_THROWS_AS(evaluate_G(b.series, b.products, 0, 0, 0.5), Error);
  CHECK_THROWS_AS(evaluate_G(b.series, b.products, 1, 1, 1.5), Error);
}

TEST_CASE("truncation is reported") {
  const Compensation low = build_compensation(demo(), 4, ProductForm::Cumulative);
  try {
    evaluate_G(low.series, low.products, 0, 1, 0.5, 1e-15);
    FAIL("expected TruncationInsufficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationInsufficient);
  }
  const GValue g = evaluate_G(low.series, low.products, 0, 1, 0.5, 1.0);
  CHECK(g.truncation > 0.0);
  CHECK(g.error_bound >= g.truncation);
  const Compensation high = build_compensation(demo(), 16, ProductForm::Cumulative);
  const GValue h = evaluate_G(high.series, high.products, 0, 1, 0.5, 1e-12);
  CHECK(std::abs(h.value - g.value) <= g.error_bound + h.error_bound);

  // Too few ranks to estimate a decay ratio: the bound is infinite.
  const Compensation tiny = build_compensation(demo(), 2, ProductForm::Cumulative);
  CHECK_THROWS_AS(evaluate_G(tiny.series, tiny.products, 0, 1, 0.5, 1e300), Error);
}

TEST_CASE("closed form and cumulative extraction agree") {
  const Rect rect{0, 4, 0, 4};
  const ContactPmf a = with_adaptive_order(fib(), [&](const Compensation& c) { return extract_pmf(c, fib(), rect, 8); });
  const ContactPmf b = with_adaptive_order(
      fib(), [&](const Compensation& c) { return extract_pmf(c, fib(), rect, 8); }, ProductForm::Cumulative);
  CHECK(a.method() == PmfMethod::ClosedFormIdentical);
  CHECK(b.method() == PmfMethod::CompensationSeries);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j)
      for (int n = 0; n <= 8; ++n) CHECK_THAT(a.at(i, j, n), WithinAbs(b.at(i, j, n), 1e-12));
}

TEST_CASE("origin start") {
  for (const QuadrantModel* m : {&fib(), &mixed(), &group(), &demo()}) {
    const ContactPmf p =
        with_adaptive_order(*m, [&](const Compensation& c) { return extract_pmf(c, *m, Rect{0, 3, 0, 3}, 6); });
    CHECK(p.at(0, 0, 0) == 0.0);
    for (int n = 1; n <= 6; ++n) {
      double expect = 0.0;
      for (const Atom& a : m->origin().atoms()) expect += a.weight * p.at(a.jump.k, a.jump.l, n - 1);
      CHECK_THAT(p.at(0, 0, n), WithinAbs(expect, 1e-14));
    }
  }
}

TEST_CASE("interior and boundary equations on the general series") {
  const QuadrantModel& m = demo();
  const ContactPmf p =
      with_adaptive_order(m, [&](const Compensation& c) { return extract_pmf(c, m, Rect{0, 8, 0, 8}, 6); });
  for (int n = 0; n <= 6; ++n) {
    for (int i = 1; i <= 6; ++i)
      for (int j = 1; j <= 6; ++j) {
        double rhs = 0.0;
        for (const Atom& a : m.interior().atoms()) rhs += a.weight * p.at(i + a.jump.k, j + a.jump.l, n);
        CHECK_THAT(p.at(i, j, n), WithinAbs(rhs, 1e-11));
      }
    for (int k = 1; k <= 6; ++k) {
      CHECK_THAT(p.at(k, 0, 0), WithinAbs(0.0, 1e-12));
      CHECK_THAT(p.at(0, k, 0), WithinAbs(0.0, 1e-12));
      if (n == 0) continue;
      double h = 0.0;
      double v = 0.0;
      for (const Atom& a : m.horizontal().atoms()) h += a.weight * p.at(k + a.jump.k, a.jump.l, n - 1);
      for (const Atom& a : m.vertical().atoms()) v += a.weight * p.at(a.jump.k, k + a.jump.l, n - 1);
      CHECK_THAT(p.at(k, 0, n), WithinAbs(h, 1e-11));
      CHECK_THAT(p.at(0, k, n), WithinAbs(v, 1e-11));
    }
  }
}

TEST_CASE("tail probabilities agree with the pmf") {
  const QuadrantModel& m = mixed();
  with_adaptive_order(m, [&](const Compensation& c) {
    const ContactPmf p = extract_pmf(c, m, Rect::point(2, 3), 20);
    const PointSeries t = tail_probabilities(c, m, 2, 3, 20);
    double cdf = 0.0;
    for (int n = 0; n <= 20; ++n) {
      cdf += p.at(2, 3, n);
      CHECK_THAT(t.value[static_cast<std::size_t>(n)], WithinAbs(1.0 - cdf, 1e-12));
    }
    return 0;
  });
}

TEST_CASE("dominant-pole asymptotics") {
  SECTION("Fibonacci ties at one half") {
    const Compensation c = build_compensation(fib(), 32);
    const TailAsymptotics t = tail_asymptotics(c.series, c.products, 1, 1);
    CHECK_THAT(t.rate, WithinAbs(0.5, 1e-12));
    CHECK(t.regime == TailRegime::Tie);
    const ContactPmf p = extract_pmf(c, fib(), Rect::point(1, 1), 40);
    CHECK_THAT(p.at(1, 1, 40) / std::pow(0.5, 40), WithinRel(t.constant, 1e-6));
  }
  SECTION("finite group decays at one third") {
    const Compensation c = build_compensation(group(), 8);
    const TailAsymptotics t = tail_asymptotics(c.series, c.products, 1, 1);
    CHECK_THAT(t.rate, WithinAbs(1.0 / 3, 1e-12));
    CHECK_THAT(t.constant, WithinAbs(4.0 / 3, 1e-12));  // 2/3^{n+1} + 2/3^{n+1} = (4/3) 3^{-n}
  }
  SECTION("asymmetric walk has a single dominant side") {
    const Compensation c = build_compensation(demo(), 64);
    const TailAsymptotics t = tail_asymptotics(c.series, c.products, 2, 1);
    CHECK(t.regime == TailRegime::HDominant);
    const QuantityTable& q = c.products.quantities();
    for (int m = q.min_index(); m <= q.max_index(); ++m) {
      if (m == 0) continue;
      CHECK(t.rate >= q.at(m).h_hat);
      CHECK(t.rate >= q.at(m).v_hat);
    }
    const ContactPmf p = extract_pmf(c, demo(), Rect::point(2, 1), 60, 1e-12);
    CHECK_THAT(p.at(2, 1, 60) / std::pow(t.rate, 60), WithinRel(t.constant, 1e-4));
  }
}

TEST_CASE("far-field profiles") {
  const Compensation c = build_compensation(fib(), 16);
  const AxisFixedPoints fp = axis_fixed_points(fib().interior());
  const FarField one = far_field_asymptotics(fp, c.products.quantities(), 1);
  CHECK_THAT(one.profile_v, WithinAbs(1 - c.products.quantities().at(1).v_tilde, 1e-15));
  const FarField two = far_field_asymptotics(fp, c.products.quantities(), 2);
  CHECK_THAT(two.profile_v, WithinAbs(0.25, 1e-12));
  CHECK_THAT(two.profile_h, WithinAbs(0.25, 1e-12));
}

TEST_CASE("non-applicable models are refused") {
  const auto walk = QuadrantModel::singular(
      StepDistribution({{{1, 0}, 3.0 / 8}, {{0, 1}, 3.0 / 8}, {{-1, 0}, 1.0 / 8}, {{0, -1}, 1.0 / 8}}),
      StepDistribution::atom({1, 1}), StepDistribution::atom({1, 0}), StepDistribution::atom({1, 1}));
  try {
    build_compensation(walk, 8);
    FAIL("expected NotApplicable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotApplicable);
  }
}
