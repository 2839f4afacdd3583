#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qpcontact/error.hpp"
#include "qpcontact/model.hpp"

namespace qpcontact {

// Text format:
//
//   class = identical | singular
//   [interior]
//   -1 1 1/3
//   ...
//   [horizontal] / [vertical] / [origin]
//
// Each section lists `k l weight` triples; weights may be decimals or p/q.
// '#' starts a comment. An identical model may give a single boundary section;
// the others are copied from it.

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string at_line(int line, const std::string& msg) { return "line " + std::to_string(line) + ": " + msg; }

inline int parse_int(std::string_view s, int line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, at_line(line, "bad integer '" + std::string(s) + "'"));
  return v;
}

inline double parse_real(std::string_view s, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, at_line(line, "bad number '" + std::string(s) + "'"));
  return v;
}

inline double parse_weight(std::string_view s, int line) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_real(s, line);
  const double num = parse_real(s.substr(0, slash), line);
  const double den = parse_real(s.substr(slash + 1), line);
  if (den == 0.0) throw Error(ErrorKind::ParseError, at_line(line, "zero denominator"));
  return num / den;
}

inline constexpr std::array<std::string_view, 4> kSections{"interior", "horizontal", "vertical", "origin"};

}  // namespace detail

inline QuadrantModel parse_model(std::string_view text) {
  std::optional<ModelClass> cls;
  std::array<std::optional<std::vector<Atom>>, 4> sections;
  int current = -1;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::ParseError, detail::at_line(line_no, "unterminated section"));
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      current = -1;
      for (std::size_t s = 0; s < detail::kSections.size(); ++s)
        if (name == detail::kSections[s]) current = static_cast<int>(s);
      if (current < 0)
        throw Error(ErrorKind::ParseError, detail::at_line(line_no, "unknown section '" + std::string(name) + "'"));
      auto& slot = sections[static_cast<std::size_t>(current)];
      if (slot) throw Error(ErrorKind::ParseError, detail::at_line(line_no, "section repeated"));
      slot.emplace();
      continue;
    }

    if (const auto eq = line.find('='); eq != std::string_view::npos) {
      const auto key = detail::trim(line.substr(0, eq));
      const auto value = detail::trim(line.substr(eq + 1));
      if (key != "class") throw Error(ErrorKind::ParseError, detail::at_line(line_no, "unknown key '" + std::string(key) + "'"));
      if (value == "identical")
        cls = ModelClass::IdenticalReflections;
      else if (value == "singular")
        cls = ModelClass::GeneralSingular;
      else
        throw Error(ErrorKind::ParseError, detail::at_line(line_no, "class must be identical or singular"));
      continue;
    }

    if (current < 0) throw Error(ErrorKind::ParseError, detail::at_line(line_no, "triple outside a section"));
    std::istringstream fields{std::string(line)};
    std::string k, l, w, extra;
    if (!(fields >> k >> l >> w) || (fields >> extra))
      throw Error(ErrorKind::ParseError, detail::at_line(line_no, "expected 'k l weight'"));
    auto& atoms = *sections[static_cast<std::size_t>(current)];
    const Jump j{detail::parse_int(k, line_no), detail::parse_int(l, line_no)};
    for (const Atom& a : atoms)
      if (a.jump == j) throw Error(ErrorKind::DuplicateJump, detail::at_line(line_no, "jump listed twice"));
    atoms.push_back({j, detail::parse_weight(w, line_no)});
  }

  if (!cls) throw Error(ErrorKind::ParseError, "missing 'class = identical | singular'");
  if (!sections[0]) throw Error(ErrorKind::ParseError, "missing [interior] section");

  auto law = [&](std::size_t s) { return StepDistribution(*sections[s]); };
  if (*cls == ModelClass::IdenticalReflections) {
    std::optional<StepDistribution> boundary;
    for (std::size_t s = 1; s < 4; ++s) {
      if (!sections[s]) continue;
      StepDistribution d = law(s);
      if (boundary && !(*boundary == d))
        throw Error(ErrorKind::InvalidModel, "identical model lists different boundary laws");
      boundary = std::move(d);
    }
    if (!boundary) throw Error(ErrorKind::ParseError, "identical model needs a boundary section");
    return QuadrantModel::identical(law(0), *boundary);
  }
  for (std::size_t s = 1; s < 4; ++s)
    if (!sections[s])
      throw Error(ErrorKind::ParseError, "singular model needs a [" + std::string(detail::kSections[s]) + "] section");
  return QuadrantModel::singular(law(0), law(1), law(2), law(3));
}

inline QuadrantModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open model file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_model(text.str());
}

// Weights are written with 17 significant digits, so parse(serialize(m)) == m.
inline std::string serialize_model(const QuadrantModel& model) {
  std::ostringstream out;
  out.precision(17);
  out << "class = " << to_string(model.model_class()) << '\n';
  const std::array<const StepDistribution*, 4> laws{&model.interior(), &model.horizontal(), &model.vertical(),
                                                    &model.origin()};
  for (std::size_t s = 0; s < 4; ++s) {
    out << '[' << detail::kSections[s] << "]\n";
    for (const Atom& a : laws[s]->atoms()) out << a.jump.k << ' ' << a.jump.l << ' ' << a.weight << '\n';
  }
  return out.str();
}

// FNV-1a over the serialized form; identifies a model in run manifests.
inline std::uint64_t model_hash(const QuadrantModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : serialize_model(model)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

}  // namespace qpcontact
