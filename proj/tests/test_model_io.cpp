#include "catch_amalgamated.hpp"
#include "qpcontact/model_io.hpp"

using namespace qpcontact;
using Catch::Matchers::WithinAbs;

namespace {

ErrorKind parse_error(std::string_view text) {
  try {
    parse_model(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a parse failure");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("identical model with rational weights") {
  const QuadrantModel m = parse_model(R"(
# unit-jump reflections
class = identical
[interior]
-1 1 1/3
 1 -1 1/3
 1 1 1/3   # trailing comment
[origin]
1 1 1
)");
  CHECK(m.model_class() == ModelClass::IdenticalReflections);
  CHECK_THAT(m.interior().weight({-1, 1}), WithinAbs(1.0 / 3, 0));
  CHECK(m.horizontal() == StepDistribution::atom({1, 1}));
  CHECK(m.vertical() == StepDistribution::atom({1, 1}));
}

TEST_CASE("singular model needs all four sections") {
  const char* text = R"(class = singular
[interior]
-1 1 0.25
1 -1 0.25
1 1 0.5
[horizontal]
1 1 1
[vertical]
1 0 1
)";
  CHECK(parse_error(text) == ErrorKind::ParseError);
  const QuadrantModel m = parse_model(std::string(text) + "[origin]\n1 1 1\n");
  CHECK(m.vertical() == StepDistribution::atom({1, 0}));
}

TEST_CASE("malformed input") {
  CHECK(parse_error("[interior]\n1 1 1\n") == ErrorKind::ParseError);
  CHECK(parse_error("class = sideways\n") == ErrorKind::ParseError);
  CHECK(parse_error("class = identical\n[interior]\n1 1\n") == ErrorKind::ParseError);
  CHECK(parse_error("class = identical\n[interior]\n1 x 1\n") == ErrorKind::ParseError);
  CHECK(parse_error("class = identical\n[elsewhere]\n") == ErrorKind::ParseError);
  CHECK(parse_error("class = identical\n1 1 1\n") == ErrorKind::ParseError);
  CHECK(parse_error("class = identical\n[interior]\n1 1 1/0\n") == ErrorKind::ParseError);
  CHECK(parse_error("class = identical\n[interior]\n1 1 0.5\n1 1 0.5\n[origin]\n1 1 1\n") == ErrorKind::DuplicateJump);
  CHECK(parse_error("class = identical\n[interior]\n1 1 0.5\n0 1 0.4\n[origin]\n1 1 1\n") == ErrorKind::NotNormalized);
  CHECK(parse_error("class = identical\n[interior]\n1 1 1\n[vertical]\n1 1 1\n[horizontal]\n1 0 1\n") ==
        ErrorKind::InvalidModel);
}

TEST_CASE("serialization round-trips exactly") {
  const QuadrantModel m = QuadrantModel::singular(
      StepDistribution({{{-1, 1}, 0.2}, {{1, -1}, 0.2}, {{1, 0}, 0.3}, {{0, 1}, 0.1}, {{1, 1}, 0.2}}),
      StepDistribution({{{0, 1}, 0.5}, {{1, 1}, 0.5}}), StepDistribution({{{1, 0}, 0.25}, {{1, 2}, 0.75}}),
      StepDistribution::atom({1, 1}));
  const std::string text = serialize_model(m);
  CHECK(parse_model(text) == m);
  CHECK(serialize_model(parse_model(text)) == text);
  CHECK(model_hash(m) == model_hash(parse_model(text)));
  CHECK(model_hash(m) != model_hash(m.swapped()));
  CHECK(hex(model_hash(m)).size() == 16);
}

TEST_CASE("missing files are I/O errors") {
  try {
    load_model("/nonexistent/model.cfg");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
    CHECK(e.category() == ErrorCategory::Io);
  }
}
