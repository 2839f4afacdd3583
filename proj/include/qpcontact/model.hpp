#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qpcontact/error.hpp"

namespace qpcontact {

struct Jump {
  int k = 0;
  int l = 0;

  friend constexpr auto operator<=>(const Jump&, const Jump&) = default;
  friend constexpr Jump operator+(Jump a, Jump b) { return {a.k + b.k, a.l + b.l}; }
};

struct Atom {
  Jump jump;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr int kSupportCap = 64;
inline constexpr double kMinDrift = 1e-6;
inline constexpr std::size_t kDefaultConvolutionCap = 10'000'000;

// Finite law on Z^2. Atoms are kept sorted by jump, zero weights are dropped.
class StepDistribution {
 public:
  explicit StepDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.jump < b.jump; });
    for (std::size_t n = 1; n < atoms_.size(); ++n) {
      if (atoms_[n].jump == atoms_[n - 1].jump) {
        throw Error(ErrorKind::DuplicateJump, "jump (" + std::to_string(atoms_[n].jump.k) + "," +
                                                  std::to_string(atoms_[n].jump.l) +
                                                  ") listed twice");
      }
    }
    double total = 0.0;
    for (const Atom& a : atoms_) {
      if (!std::isfinite(a.weight) || a.weight < 0.0) {
        throw Error(ErrorKind::NegativeWeight, "weights must be finite and nonnegative");
      }
      total += a.weight;
    }
    std::erase_if(atoms_, [](const Atom& a) { return a.weight == 0.0; });
    if (atoms_.empty()) throw Error(ErrorKind::EmptySupport, "distribution has no positive weight");
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "weights sum to " << total;
      throw Error(ErrorKind::NotNormalized, msg.str());
    }
  }

  static StepDistribution atom(Jump j) { return StepDistribution({{j, 1.0}}); }

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double weight(Jump j) const noexcept {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), j,
                               [](const Atom& a, Jump key) { return a.jump < key; });
    return (it != atoms_.end() && it->jump == j) ? it->weight : 0.0;
  }

  double total() const noexcept {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight;
    return s;
  }

  int min_k() const noexcept { return bound([](Jump j) { return j.k; }, std::less<>{}); }
  int max_k() const noexcept { return bound([](Jump j) { return j.k; }, std::greater<>{}); }
  int min_l() const noexcept { return bound([](Jump j) { return j.l; }, std::less<>{}); }
  int max_l() const noexcept { return bound([](Jump j) { return j.l; }, std::greater<>{}); }

  template <class F>
  double expectation(F&& f) const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight * f(a.jump);
    return s;
  }

  template <class Pred>
  bool any_of(Pred&& pred) const {
    return std::any_of(atoms_.begin(), atoms_.end(), [&](const Atom& a) { return pred(a.jump); });
  }

  // Coordinate swap (k,l) -> (l,k).
  StepDistribution swapped() const {
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    for (const Atom& a : atoms_) out.push_back({{a.jump.l, a.jump.k}, a.weight});
    return StepDistribution(std::move(out));
  }

  friend bool operator==(const StepDistribution&, const StepDistribution&) = default;

 private:
  template <class Proj, class Cmp>
  int bound(Proj proj, Cmp cmp) const noexcept {
    int best = proj(atoms_.front().jump);
    for (const Atom& a : atoms_)
      if (cmp(proj(a.jump), best)) best = proj(a.jump);
    return best;
  }

  std::vector<Atom> atoms_;
};

struct MomentSummary {
  double mean_x = 0.0;
  double mean_y = 0.0;
};

inline MomentSummary drift(const StepDistribution& dist) {
  return {dist.expectation([](Jump j) { return static_cast<double>(j.k); }),
          dist.expectation([](Jump j) { return static_cast<double>(j.l); })};
}

// Law of the sum of two independent jumps, accumulated on the bounding box.
inline StepDistribution convolve(const StepDistribution& a, const StepDistribution& b,
                                 std::size_t cap = kDefaultConvolutionCap) {
  const int k0 = a.min_k() + b.min_k();
  const int l0 = a.min_l() + b.min_l();
  const auto width = static_cast<std::size_t>(a.max_k() + b.max_k() - k0 + 1);
  const auto height = static_cast<std::size_t>(a.max_l() + b.max_l() - l0 + 1);
  if (width * height > cap) {
    throw Error(ErrorKind::SupportOverflow,
                "convolution box of " + std::to_string(width * height) + " atoms exceeds cap");
  }
  std::vector<double> grid(width * height, 0.0);
  for (const Atom& x : a.atoms())
    for (const Atom& y : b.atoms()) {
      const Jump s = x.jump + y.jump;
      grid[static_cast<std::size_t>(s.k - k0) * height + static_cast<std::size_t>(s.l - l0)] +=
          x.weight * y.weight;
    }
  std::vector<Atom> atoms;
  for (std::size_t r = 0; r < width; ++r)
    for (std::size_t c = 0; c < height; ++c)
      if (double w = grid[r * height + c]; w > 0.0)
        atoms.push_back({{k0 + static_cast<int>(r), l0 + static_cast<int>(c)}, w});
  return StepDistribution(std::move(atoms));
}

inline StepDistribution convolve_power(const StepDistribution& dist, int n,
                                       std::size_t cap = kDefaultConvolutionCap) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "convolution power must be nonnegative");
  StepDistribution out = StepDistribution::atom({0, 0});
  for (int r = 0; r < n; ++r) out = convolve(out, dist, cap);
  return out;
}

enum class ModelClass { IdenticalReflections, GeneralSingular };

constexpr std::string_view to_string(ModelClass c) {
  return c == ModelClass::IdenticalReflections ? "identical" : "singular";
}

class QuadrantModel {
 public:
  QuadrantModel(StepDistribution interior, StepDistribution horizontal, StepDistribution vertical,
                StepDistribution origin, ModelClass cls)
      : interior_(std::move(interior)),
        horizontal_(std::move(horizontal)),
        vertical_(std::move(vertical)),
        origin_(std::move(origin)),
        class_(cls) {
    if (class_ == ModelClass::IdenticalReflections &&
        !(horizontal_ == vertical_ && vertical_ == origin_)) {
      throw Error(ErrorKind::InvalidModel,
                  "identical-reflection model needs equal horizontal, vertical and origin laws");
    }
  }

  static QuadrantModel identical(StepDistribution interior, const StepDistribution& boundary) {
    return {std::move(interior), boundary, boundary, boundary, ModelClass::IdenticalReflections};
  }

  static QuadrantModel singular(StepDistribution interior, StepDistribution horizontal,
                                StepDistribution vertical, StepDistribution origin) {
    return {std::move(interior), std::move(horizontal), std::move(vertical), std::move(origin),
            ModelClass::GeneralSingular};
  }

  const StepDistribution& interior() const noexcept { return interior_; }
  const StepDistribution& horizontal() const noexcept { return horizontal_; }
  const StepDistribution& vertical() const noexcept { return vertical_; }
  const StepDistribution& origin() const noexcept { return origin_; }
  ModelClass model_class() const noexcept { return class_; }

  // True when all three boundary laws coincide, whatever the declared class.
  bool has_identical_reflections() const {
    return horizontal_ == vertical_ && vertical_ == origin_;
  }

  // Mirror image under (i,j) -> (j,i): the horizontal and vertical laws trade places.
  QuadrantModel swapped() const {
    return {interior_.swapped(), vertical_.swapped(), horizontal_.swapped(), origin_.swapped(),
            class_};
  }

  friend bool operator==(const QuadrantModel&, const QuadrantModel&) = default;

 private:
  StepDistribution interior_;
  StepDistribution horizontal_;
  StepDistribution vertical_;
  StepDistribution origin_;
  ModelClass class_;
};

struct AssumptionCheck {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;  // offending weights, empty when passed
};

struct ValidationReport {
  ModelClass model_class = ModelClass::IdenticalReflections;
  std::vector<AssumptionCheck> checks;
  bool usable = false;

  const AssumptionCheck* find(std::string_view id) const {
    for (const auto& c : checks)
      if (c.id == id) return &c;
    return nullptr;
  }

  bool passed(std::string_view id) const {
    const auto* c = find(id);
    return c != nullptr && c->passed;
  }

  std::vector<std::string> failed_ids() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c.id);
    return out;
  }

  std::string to_text() const {
    std::ostringstream out;
    out << "class: " << to_string(model_class) << '\n';
    for (const auto& c : checks) {
      out << (c.passed ? "pass " : "FAIL ") << c.id << "  " << c.title;
      if (!c.detail.empty()) out << "  [" << c.detail << ']';
      out << '\n';
    }
    out << "usable: " << (usable ? "yes" : "no") << '\n';
    return out.str();
  }
};

namespace detail {

inline std::string describe(char law, Jump j, double w) {
  std::ostringstream out;
  out.precision(6);
  out << law << '(' << j.k << ',' << j.l << ")=" << w;
  return out.str();
}

// Lists every atom of `dist` matching `bad`, e.g. "p(-1,0)=1 q(0,-1)=0.5".
template <class Pred>
std::string offenders(char law, const StepDistribution& dist, Pred&& bad) {
  std::string out;
  for (const Atom& a : dist.atoms()) {
    if (!bad(a.jump)) continue;
    if (!out.empty()) out += ' ';
    out += describe(law, a.jump, a.weight);
  }
  return out;
}

inline void append(std::string& out, const std::string& more) {
  if (more.empty()) return;
  if (!out.empty()) out += ' ';
  out += more;
}

inline std::string fmt_drift(char law, MomentSummary m) {
  std::ostringstream out;
  out.precision(6);
  out << "E" << law << "=(" << m.mean_x << ',' << m.mean_y << ')';
  return out.str();
}

}  // namespace detail

inline ValidationReport validate(const QuadrantModel& model) {
  using detail::append;
  using detail::offenders;
  const StepDistribution& p = model.interior();
  const StepDistribution& h = model.horizontal();
  const StepDistribution& v = model.vertical();
  const StepDistribution& q = model.origin();
  const MomentSummary dp = drift(p);
  const MomentSummary dh = drift(h);
  const MomentSummary dv = drift(v);
  const MomentSummary dq = drift(q);

  ValidationReport report;
  report.model_class = model.model_class();
  auto add = [&](std::string id, std::string title, std::string detail) {
    const bool ok = detail.empty();
    report.checks.push_back({std::move(id), std::move(title), ok, std::move(detail)});
  };
  auto normalization = [&] {
    std::string out;
    const std::pair<char, const StepDistribution*> laws[] = {{'p', &p}, {'h', &h}, {'v', &v}, {'q', &q}};
    for (auto [name, law] : laws)
      if (std::abs(law->total() - 1.0) > kNormalizationTolerance)
        append(out, std::string(1, name) + " sums to " + std::to_string(law->total()));
    return out;
  };
  const auto small_negative = offenders('p', p, [](Jump j) { return j.k <= -2 || j.l <= -2; });
  const bool down = p.any_of([](Jump j) { return j.l == -1; });
  const bool left = p.any_of([](Jump j) { return j.k == -1; });
  std::string drift_detail = (dp.mean_x > 0.0 && dp.mean_y > 0.0) ? "" : detail::fmt_drift('p', dp);

  // Boundary-law checks of the identical-reflection family apply to each of h, v, q.
  std::string nonneg;
  std::string bdrift;
  const std::pair<char, const StepDistribution*> boundary[] = {{'h', &h}, {'v', &v}, {'q', &q}};
  for (auto [name, law] : boundary) {
    append(nonneg, offenders(name, *law, [](Jump j) { return j.k < 0 || j.l < 0; }));
    const MomentSummary m = drift(*law);
    if (!(m.mean_x > 0.0 && m.mean_y > 0.0)) append(bdrift, detail::fmt_drift(name, m));
  }

  add("A1", "normalization", normalization());
  add("A2", "interior negative jumps are at most one step", small_negative);
  add("A3", "interior has jumps with l=-1 and with k=-1",
      (down && left) ? "" : std::string(down ? "" : "no p(k,-1)>0") + (left ? "" : " no p(-1,l)>0"));
  add("A4", "interior drift positive", drift_detail);
  add("A5", "boundary jumps nonnegative", nonneg);
  add("A6", "boundary drift positive", bdrift);

  add("B1", "normalization", normalization());
  add("B2", "interior negative jumps are at most one step", small_negative);
  add("B3", "singular walk: p(-1,-1)=p(-1,0)=p(0,-1)=0",
      offenders('p', p, [](Jump j) {
        return j == Jump{-1, -1} || j == Jump{-1, 0} || j == Jump{0, -1};
      }));
  {
    const double w = p.weight({-1, 1}) * p.weight({1, -1});
    add("B4", "non-degeneracy p(-1,1)p(1,-1)>0",
        w > 0.0 ? "" : "p(-1,1)=" + std::to_string(p.weight({-1, 1})) +
                           " p(1,-1)=" + std::to_string(p.weight({1, -1})));
  }
  add("B5", "some interior jump with k+l>0",
      p.any_of([](Jump j) { return j.k + j.l > 0; }) ? "" : "no p(k,l)>0 with k+l>0");
  add("B6", "moment condition (automatic for finite support)", "");
  {
    std::string out;
    auto toward_origin = [](Jump j) { return j.k <= 0 && j.l <= 0; };
    append(out, offenders('h', h, toward_origin));
    append(out, offenders('v', v, toward_origin));
    append(out, offenders('q', q, toward_origin));
    // Boundary jumps must also land back in the closed quadrant.
    append(out, offenders('h', h, [](Jump j) { return j.l < 0 || j.k < -1; }));
    append(out, offenders('v', v, [](Jump j) { return j.k < 0 || j.l < -1; }));
    append(out, offenders('q', q, [](Jump j) { return j.k < 0 || j.l < 0; }));
    add("B7", "boundary jumps point into the quadrant", out);
  }
  {
    std::string out;
    if (!(dh.mean_y > 0.0)) append(out, detail::fmt_drift('h', dh));
    if (!(dv.mean_x > 0.0)) append(out, detail::fmt_drift('v', dv));
    if (!(dq.mean_x > 0.0 && dq.mean_y > 0.0)) append(out, detail::fmt_drift('q', dq));
    add("B8", "boundary drift conditions", out);
  }

  {
    std::string out;
    const std::pair<char, const StepDistribution*> laws[] = {{'p', &p}, {'h', &h}, {'v', &v}, {'q', &q}};
    for (auto [name, law] : laws)
      append(out, offenders(name, *law, [](Jump j) {
               return std::abs(j.k) > kSupportCap || std::abs(j.l) > kSupportCap;
             }));
    add("S1", "support within |k|,|l| <= 64", out);
  }
  add("S2", "interior drift components at least 1e-6",
      (dp.mean_x >= kMinDrift && dp.mean_y >= kMinDrift) ? "" : detail::fmt_drift('p', dp));

  const char prefix = model.model_class() == ModelClass::IdenticalReflections ? 'A' : 'B';
  report.usable = std::all_of(report.checks.begin(), report.checks.end(), [&](const AssumptionCheck& c) {
    return c.passed || (c.id[0] != prefix && c.id[0] != 'S');
  });
  return report;
}

// Interior law admits the singular-walk machinery (B2-B5 plus the drift floor).
inline bool is_singular_interior(const ValidationReport& r) {
  return r.passed("B2") && r.passed("B3") && r.passed("B4") && r.passed("B5") && r.passed("S2");
}

inline bool passes_singular_class(const ValidationReport& r) {
  for (const char* id : {"B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8", "S1", "S2"})
    if (!r.passed(id)) return false;
  return true;
}

inline bool passes_identical_class(const ValidationReport& r) {
  for (const char* id : {"A1", "A2", "A3", "A4", "A5", "A6", "S1", "S2"})
    if (!r.passed(id)) return false;
  return true;
}

}  // namespace qpcontact
