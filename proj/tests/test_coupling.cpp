#include <cmath>

#include "catch_amalgamated.hpp"
#include "qpcontact/coupling.hpp"
#include "qpcontact/registry.hpp"

using namespace qpcontact;
using Catch::Matchers::WithinAbs;

namespace {

double f0_biased(int i, int j) { return (1 - std::pow(3.0, -i)) * (1 - std::pow(3.0, -j)); }

double fn_biased(int i, int j, int n) {
  if (n == 0) return f0_biased(i, j);
  return 2 / (std::pow(3.0, n) * std::pow(3.0, i)) - 8 / (std::pow(9.0, n) * std::pow(3.0, i + j)) +
         2 / (std::pow(3.0, n) * std::pow(3.0, j));
}

F0Table biased_table(const Rect& r) {
  F0Table t{GridTable(r), F0Provenance::ClosedForm};
  for (int i = r.i0; i <= r.i1; ++i)
    for (int j = r.j0; j <= r.j1; ++j) t.values.set(i, j, f0_biased(i, j));
  return t;
}

const StepDistribution kUnit = StepDistribution::atom({1, 1});

}  // namespace

TEST_CASE("first recursion step on the biased walk") {
  const F0Table f0 = biased_table({0, 12, 0, 12});
  const GridTable f1 = recursion_step(f0.values, kUnit, true, {0, 10, 0, 10});
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) {
      const double substituted = (2.0 / 3) / std::pow(3.0, i) + (2.0 / 3) / std::pow(3.0, j) - (8.0 / 9) / std::pow(3.0, i + j);
      CHECK_THAT(f1.at(i, j), WithinAbs(substituted, 1e-15));
      CHECK_THAT(f1.at(i, j), WithinAbs(fn_biased(i, j, 1), 1e-15));
    }
}

TEST_CASE("the expectation of a constant is the constant") {
  GridTable ones(Rect{0, 5, 0, 5});
  for (int i = 0; i <= 5; ++i)
    for (int j = 0; j <= 5; ++j) ones.set(i, j, 1.0);
  const GridTable next = recursion_step(ones, kUnit, false, {0, 4, 0, 4});
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j) CHECK(next.at(i, j) == 1.0);
}

TEST_CASE("margins are enforced") {
  const F0Table f0 = biased_table({0, 5, 0, 5});
  try {
    recursion_step(f0.values, kUnit, false, {0, 5, 0, 5});
    FAIL("expected MarginExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MarginExhausted);
  }
  CHECK_THROWS_AS(cdf_via_convolution(f0, kUnit, 1, 1, 6), Error);
  const auto model = get_reference("finite-group-simple").model;
  CHECK_THROWS_AS(coupling_pmf(model, f0, {1, 3, 1, 3}, 5), Error);
}

TEST_CASE("cdf by convolution") {
  const F0Table f0 = biased_table({0, 30, 0, 30});
  CHECK(cdf_via_convolution(f0, kUnit, 1, 1, 0) == f0_biased(1, 1));
  CHECK_THAT(cdf_via_convolution(f0, kUnit, 1, 1, 1), WithinAbs(64.0 / 81, 1e-15));
  double prev = 0.0;
  for (int n = 1; n <= 20; ++n) {
    const double cdf = cdf_via_convolution(f0, kUnit, 1, 1, n);
    CHECK_THAT(cdf - cdf_via_convolution(f0, kUnit, 1, 1, n - 1), WithinAbs(fn_biased(1, 1, n), 1e-15));
    CHECK(cdf >= prev);
    CHECK(cdf <= 1.0);
    prev = cdf;
  }
}

TEST_CASE("recursion layers sum to the convolution cdf") {
  const auto model = get_reference("finite-group-simple").model;
  const Rect out{1, 4, 1, 4};
  const int n_max = 12;
  const F0Table f0 = biased_table(required_margin(out, model.origin(), n_max));
  const ContactPmf pmf = coupling_pmf(model, f0, out, n_max);
  CHECK(pmf.method() == PmfMethod::CouplingRecursion);
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) {
      double sum = 0.0;
      for (int n = 0; n <= n_max; ++n) {
        sum += pmf.at(i, j, n);
        CHECK_THAT(sum, WithinAbs(cdf_via_convolution(f0, model.origin(), i, j, n), 1e-12));
      }
    }
}

TEST_CASE("coupling and compensation agree on the Fibonacci walk") {
  const ReferenceModel ref = get_reference("fibonacci-identical");
  const Rect out{1, 5, 1, 5};
  const int n_max = 10;
  const F0Table f0 = make_f0_table(ref.model, required_margin(out, ref.model.origin(), n_max));
  CHECK(f0.provenance == F0Provenance::Compensation);
  const ContactPmf a = coupling_pmf(ref.model, f0, out, n_max);
  const ContactPmf b = with_adaptive_order(ref.model, [&](const Compensation& c) { return extract_pmf(c, ref.model, out, n_max); });
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j)
      for (int n = 0; n <= n_max; ++n)
        CHECK_THAT(a.at(i, j, n), WithinAbs(b.at(i, j, n), a.error(i, j, n) + b.error(i, j, n) + 1e-14));
}

TEST_CASE("closed-form f0 takes precedence") {
  const ReferenceModel ref = get_reference("finite-group-simple");
  const F0Table t = make_f0_table(ref.model, {0, 3, 0, 3}, ref.known_f0);
  CHECK(t.provenance == F0Provenance::ClosedForm);
  CHECK(t.values.at(0, 2) == 0.0);
  CHECK(t.values.at(2, 2) == ref.known_f0(2, 2));
}

TEST_CASE("general singular models are refused") {
  const auto model = get_reference("fibonacci-mixed").model;
  try {
    make_f0_table(model, {0, 3, 0, 3});
    FAIL("expected NotApplicable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotApplicable);
  }
}

TEST_CASE("tail bounds") {
  const AxisFixedPoints fib = axis_fixed_points(get_reference("fibonacci-identical").model.interior());
  const TailBounds zero = tail_bounds(fib, kUnit, 2, 3, 0);
  CHECK_THAT(zero.upper, WithinAbs(std::pow(0.5, 2) + std::pow(0.5, 3), 1e-15));
  CHECK_THAT(zero.lower, WithinAbs(zero.upper / 2, 1e-15));
  // r_1 = r_2 = E (1/2)^1 = 1/2 for the unit jump.
  const TailBounds five = tail_bounds(fib, kUnit, 1, 1, 5);
  CHECK_THAT(five.upper, WithinAbs(2 * std::pow(0.5, 6), 1e-15));

  const ReferenceModel ref = get_reference("fibonacci-identical");
  with_adaptive_order(ref.model, [&](const Compensation& c) {
    for (int i = 1; i <= 6; ++i)
      for (int j = 1; j <= 6; ++j) {
        const PointSeries t = tail_probabilities(c, ref.model, i, j, 15);
        for (int n = 0; n <= 15; ++n) {
          const TailBounds b = tail_bounds(fib, ref.model.origin(), i, j, n);
          const double p = t.value[static_cast<std::size_t>(n)];
          CHECK(p >= b.lower);
          CHECK(p <= b.upper * (1 + 1e-12));
        }
      }
    return 0;
  });
}

TEST_CASE("projection expectations lie in (0,1)") {
  const AxisFixedPoints fp = axis_fixed_points(get_reference("finite-group-simple").model.interior());
  const StepDistribution eta({{{1, 0}, 0.5}, {{0, 2}, 0.5}});
  const TailBounds one = tail_bounds(fp, eta, 0, 0, 1);
  const double r1 = 0.5 / 3 + 0.5;
  const double r2 = 0.5 + 0.5 / 9;
  CHECK_THAT(one.upper, WithinAbs(r1 + r2, 1e-15));
  CHECK(r1 < 1.0);
  CHECK(r2 < 1.0);
}
