#include "catch_amalgamated.hpp"
#include "qpcontact/model.hpp"

using namespace qpcontact;
using Catch::Matchers::WithinAbs;

namespace {

StepDistribution fib_interior() {
  return StepDistribution({{{-1, 1}, 1.0 / 3}, {{1, -1}, 1.0 / 3}, {{1, 1}, 1.0 / 3}});
}

StepDistribution biased_interior() {
  return StepDistribution({{{1, 0}, 3.0 / 8}, {{0, 1}, 3.0 / 8}, {{-1, 0}, 1.0 / 8}, {{0, -1}, 1.0 / 8}});
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("step distributions reject malformed weights") {
  CHECK(kind_of([] { StepDistribution({}); }) == ErrorKind::EmptySupport);
  CHECK(kind_of([] { StepDistribution({{{1, 0}, 0.0}}); }) == ErrorKind::EmptySupport);
  CHECK(kind_of([] { StepDistribution({{{1, 0}, 0.5}, {{0, 1}, 0.4}}); }) == ErrorKind::NotNormalized);
  CHECK(kind_of([] { StepDistribution({{{1, 0}, 1.5}, {{0, 1}, -0.5}}); }) == ErrorKind::NegativeWeight);
  CHECK(kind_of([] { StepDistribution({{{1, 0}, 0.5}, {{1, 0}, 0.5}}); }) == ErrorKind::DuplicateJump);
  CHECK_NOTHROW(StepDistribution({{{1, 0}, 0.5}, {{0, 1}, 0.5 + 5e-13}}));
}

TEST_CASE("zero weights are dropped and atoms sorted") {
  const StepDistribution d({{{1, 1}, 0.5}, {{0, 0}, 0.0}, {{-1, 2}, 0.5}});
  REQUIRE(d.size() == 2);
  CHECK(d.atoms()[0].jump == Jump{-1, 2});
  CHECK(d.weight({0, 0}) == 0.0);
  CHECK(d.weight({1, 1}) == 0.5);
}

TEST_CASE("drift is the exact mean jump") {
  const MomentSummary f = drift(fib_interior());
  CHECK_THAT(f.mean_x, WithinAbs(1.0 / 3, 1e-15));
  CHECK_THAT(f.mean_y, WithinAbs(1.0 / 3, 1e-15));
  const MomentSummary a = drift(StepDistribution::atom({1, 1}));
  CHECK(a.mean_x == 1.0);
  CHECK(a.mean_y == 1.0);
  const MomentSummary b = drift(biased_interior());
  CHECK_THAT(b.mean_x, WithinAbs(0.25, 1e-15));
  CHECK_THAT(b.mean_y, WithinAbs(0.25, 1e-15));
}

TEST_CASE("convolution powers") {
  const StepDistribution shift = convolve_power(StepDistribution::atom({1, 1}), 3);
  REQUIRE(shift.size() == 1);
  CHECK(shift.atoms()[0].jump == Jump{3, 3});
  CHECK(shift.atoms()[0].weight == 1.0);

  const StepDistribution coin({{{1, 0}, 0.5}, {{0, 1}, 0.5}});
  const StepDistribution two = convolve_power(coin, 2);
  CHECK(two.size() == 3);
  CHECK_THAT(two.weight({2, 0}), WithinAbs(0.25, 1e-15));
  CHECK_THAT(two.weight({1, 1}), WithinAbs(0.5, 1e-15));
  CHECK_THAT(two.weight({0, 2}), WithinAbs(0.25, 1e-15));

  const StepDistribution zero = convolve_power(fib_interior(), 0);
  REQUIRE(zero.size() == 1);
  CHECK(zero.atoms()[0].jump == Jump{0, 0});

  // Semigroup: d^(m+n) == d^m * d^n atomwise.
  const StepDistribution d = biased_interior();
  const StepDistribution lhs = convolve_power(d, 5);
  const StepDistribution rhs = convolve(convolve_power(d, 2), convolve_power(d, 3));
  REQUIRE(lhs.size() == rhs.size());
  for (std::size_t n = 0; n < lhs.size(); ++n) {
    CHECK(lhs.atoms()[n].jump == rhs.atoms()[n].jump);
    CHECK_THAT(lhs.atoms()[n].weight, WithinAbs(rhs.atoms()[n].weight, 1e-12));
  }

  CHECK(kind_of([&] { convolve_power(d, 40, 100); }) == ErrorKind::SupportOverflow);
}

TEST_CASE("identical-reflection models need one boundary law") {
  CHECK(kind_of([] {
          QuadrantModel(fib_interior(), StepDistribution::atom({1, 1}), StepDistribution::atom({1, 0}),
                        StepDistribution::atom({1, 1}), ModelClass::IdenticalReflections);
        }) == ErrorKind::InvalidModel);
}

TEST_CASE("validation of the worked examples") {
  const auto fib = QuadrantModel::identical(fib_interior(), StepDistribution::atom({1, 1}));
  const ValidationReport r = validate(fib);
  for (const char* id : {"B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8", "A1", "A2", "A3", "A4", "A5", "A6"})
    CHECK(r.passed(id));
  CHECK(r.usable);

  const auto biased = QuadrantModel::identical(biased_interior(), StepDistribution::atom({1, 1}));
  const ValidationReport b = validate(biased);
  for (const char* id : {"A1", "A2", "A3", "A4", "A5", "A6"}) CHECK(b.passed(id));
  CHECK_FALSE(b.passed("B3"));
  CHECK(b.usable);

  const auto left = QuadrantModel::identical(StepDistribution::atom({-1, 0}), StepDistribution::atom({1, 1}));
  const ValidationReport l = validate(left);
  CHECK_FALSE(l.passed("B3"));
  CHECK_FALSE(l.passed("A4"));
  CHECK_FALSE(l.usable);
}

TEST_CASE("singular class requires the singular interior") {
  const auto m = QuadrantModel::singular(biased_interior(), StepDistribution::atom({1, 1}),
                                         StepDistribution::atom({1, 1}), StepDistribution::atom({1, 1}));
  const ValidationReport r = validate(m);
  CHECK_FALSE(r.usable);
  const auto failed = r.failed_ids();
  CHECK(std::find(failed.begin(), failed.end(), "B3") != failed.end());
}

TEST_CASE("boundary laws must re-enter and drift inward") {
  // Vertical law pushing left off the axis.
  const auto bad_v = QuadrantModel::singular(fib_interior(), StepDistribution::atom({1, 1}),
                                             StepDistribution::atom({-1, 1}), StepDistribution::atom({1, 1}));
  CHECK_FALSE(validate(bad_v).passed("B7"));
  // Horizontal law with no upward drift.
  const auto flat_h = QuadrantModel::singular(fib_interior(), StepDistribution::atom({1, 0}),
                                              StepDistribution::atom({1, 0}), StepDistribution::atom({1, 1}));
  CHECK_FALSE(validate(flat_h).passed("B8"));
}

TEST_CASE("support cap and drift floor") {
  const auto wide = QuadrantModel::identical(
      StepDistribution({{{-1, 1}, 0.5}, {{100, 1}, 0.5}}), StepDistribution::atom({1, 1}));
  CHECK_FALSE(validate(wide).passed("S1"));
  const auto driftless = QuadrantModel::identical(
      StepDistribution({{{-1, 1}, 0.25}, {{1, -1}, 0.25}, {{1, 0}, 0.25}, {{-1, 0}, 0.25}}),
      StepDistribution::atom({1, 1}));
  CHECK_FALSE(validate(driftless).passed("S2"));
}

TEST_CASE("validate is pure") {
  const auto fib = QuadrantModel::identical(fib_interior(), StepDistribution::atom({1, 1}));
  CHECK(validate(fib).to_text() == validate(fib).to_text());
}

TEST_CASE("coordinate swap exchanges the boundary laws") {
  const auto m = QuadrantModel::singular(fib_interior(), StepDistribution::atom({1, 1}),
                                         StepDistribution::atom({1, 0}), StepDistribution::atom({1, 1}));
  const auto s = m.swapped();
  CHECK(s.horizontal() == StepDistribution::atom({0, 1}));
  CHECK(s.vertical() == StepDistribution::atom({1, 1}));
  CHECK(s.swapped() == m);
}
