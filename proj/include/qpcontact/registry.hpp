#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "qpcontact/error.hpp"
#include "qpcontact/factor_list.hpp"
#include "qpcontact/model.hpp"

namespace qpcontact {

struct SequencePoint {
  int m = 0;
  double alpha = 0.0;
  double beta = 0.0;
};

// One generating-function term coeff(z) * alpha^i * beta^j with its reference
// coefficient chain written out factor by factor.
struct ReferenceTerm {
  std::string label;
  FactorList coeff;
  int alpha_index = 0;
  int beta_index = 0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct ReferenceModel {
  std::string name;
  std::string summary;
  QuadrantModel model;
  std::vector<SequencePoint> known_sequence;
  std::function<double(int, int)> known_f0;
  std::function<double(int, int, int)> known_fn;
  std::vector<ReferenceTerm> known_terms;
};

namespace detail {

inline StepDistribution fibonacci_interior() {
  return StepDistribution({{{-1, 1}, 1.0 / 3}, {{1, -1}, 1.0 / 3}, {{1, 1}, 1.0 / 3}});
}

inline constexpr int kReferenceRange = 40;

// (alpha_m, beta_m) = sqrt5 / (rho^{4m-1} + rho^{1-4m}), sqrt5 / (rho^{4m+1} + rho^{-4m-1}).
inline SequencePoint fibonacci_point(int m) {
  const double s5 = std::sqrt(5.0);
  const double rho = (1.0 + s5) / 2.0;
  auto inv_lucas_like = [&](int e) { return s5 / (std::pow(rho, e) + std::pow(rho, -e)); };
  return {m, inv_lucas_like(4 * m - 1), inv_lucas_like(4 * m + 1)};
}

// Identical reflections with one deterministic jump (a, b): the generating
// function is sum_m [(1-z)/(1-q_m z) a_m^i b_m^j - (1-z)/(1-q'_m z) a_{m+1}^i b_m^j]
// with q_m = a_m^a b_m^b and q'_m = a_{m+1}^a b_m^b.
inline double identical_sum(int i, int j, int n, Jump q, int range) {
  double sum = 0.0;
  auto layer = [n](double r) { return n == 0 ? 1.0 : -(1.0 - r) * std::pow(r, n - 1); };
  for (int m = -range; m <= range; ++m) {
    const SequencePoint cur = fibonacci_point(m);
    const SequencePoint next = fibonacci_point(m + 1);
    const double r_hat = std::pow(cur.alpha, q.k) * std::pow(cur.beta, q.l);
    const double r_tilde = std::pow(next.alpha, q.k) * std::pow(cur.beta, q.l);
    sum += layer(r_hat) * std::pow(cur.alpha, i) * std::pow(cur.beta, j);
    sum -= layer(r_tilde) * std::pow(next.alpha, i) * std::pow(cur.beta, j);
  }
  return sum;
}

inline ReferenceModel fibonacci_identical() {
  ReferenceModel r{"fibonacci-identical",
                   "p(-1,1)=p(1,-1)=p(1,1)=1/3, every boundary law the unit jump (1,1)",
                   QuadrantModel::identical(fibonacci_interior(), StepDistribution::atom({1, 1})),
                   {},
                   {},
                   {},
                   {}};
  for (int m = -kReferenceRange; m <= kReferenceRange + 1; ++m) r.known_sequence.push_back(fibonacci_point(m));
  r.known_f0 = [](int i, int j) { return identical_sum(i, j, 0, {1, 1}, kReferenceRange); };
  r.known_fn = [](int i, int j, int n) { return identical_sum(i, j, n, {1, 1}, kReferenceRange); };
  return r;
}

inline ReferenceModel fibonacci_mixed() {
  ReferenceModel r{"fibonacci-mixed",
                   "same interior as fibonacci-identical, v(1,0)=1, h(1,1)=q(1,1)=1",
                   QuadrantModel::singular(fibonacci_interior(), StepDistribution::atom({1, 1}),
                                           StepDistribution::atom({1, 0}), StepDistribution::atom({1, 1})),
                   {},
                   {},
                   {},
                   {}};
  for (int m = -kReferenceRange; m <= kReferenceRange + 1; ++m) r.known_sequence.push_back(fibonacci_point(m));
  auto term = [](std::string label, int sign, std::vector<Factor> f, int am, int bm, double inv_a, double inv_b) {
    return ReferenceTerm{std::move(label), FactorList(sign, std::move(f)), am, bm, 1.0 / inv_a, 1.0 / inv_b};
  };
  r.known_terms = {
      term("c0", +1, {}, 0, 0, 1, 1),
      term("d1", -1, {{1, 0.5}}, 1, 0, 2, 1),
      term("c1", +1, {{1, 0.5}, {0.5, 0.1}}, 1, 1, 2, 5),
      term("d2", -1, {{1, 0.5}, {0.5, 0.1}, {0.5, 1.0 / 13}}, 2, 1, 13, 5),
      term("d0", -1, {{1, 0.5}}, 0, -1, 1, 2),
      term("c-1", +1, {{1, 0.5}, {1, 0.2}}, -1, -1, 5, 2),
      term("d-1", -1, {{1, 0.5}, {1, 0.2}, {0.1, 1.0 / 65}}, -1, -2, 5, 13),
  };
  return r;
}

inline double pow3(int e) { return std::pow(3.0, -e); }

inline ReferenceModel finite_group_simple() {
  ReferenceModel r{"finite-group-simple",
                   "p(1,0)=p(0,1)=3/8, p(-1,0)=p(0,-1)=1/8, every boundary law the unit jump (1,1)",
                   QuadrantModel::identical(
                       StepDistribution({{{1, 0}, 3.0 / 8}, {{0, 1}, 3.0 / 8}, {{-1, 0}, 1.0 / 8}, {{0, -1}, 1.0 / 8}}),
                       StepDistribution::atom({1, 1})),
                   {{0, 1.0, 1.0}, {1, 1.0 / 3, 1.0 / 3}},
                   {},
                   {},
                   {}};
  r.known_f0 = [](int i, int j) { return 1.0 - pow3(i) + pow3(i + j) - pow3(j); };
  r.known_fn = [](int i, int j, int n) {
    if (n == 0) return 1.0 - pow3(i) + pow3(i + j) - pow3(j);
    return 2.0 * pow3(n + i) - 8.0 * std::pow(9.0, -n) * pow3(i + j) + 2.0 * pow3(n + j);
  };
  return r;
}

// Asymmetric singular walk with randomized reflections and no closed forms;
// exercises the general coefficient recursion and an h-dominant tail.
inline ReferenceModel generic_singular_demo() {
  return {"generic-singular-demo",
          "asymmetric singular walk with randomized horizontal and vertical reflections",
          QuadrantModel::singular(
              StepDistribution({{{-1, 1}, 0.2}, {{1, -1}, 0.2}, {{1, 0}, 0.3}, {{0, 1}, 0.1}, {{1, 1}, 0.2}}),
              StepDistribution({{{0, 1}, 0.5}, {{1, 1}, 0.5}}), StepDistribution({{{1, 0}, 0.25}, {{1, 2}, 0.75}}),
              StepDistribution::atom({1, 1})),
          {},
          {},
          {},
          {}};
}

}  // namespace detail

inline std::vector<std::string> registry_names() {
  return {"fibonacci-identical", "fibonacci-mixed", "finite-group-simple", "generic-singular-demo"};
}

inline ReferenceModel get_reference(std::string_view name) {
  if (name == "fibonacci-identical") return detail::fibonacci_identical();
  if (name == "fibonacci-mixed") return detail::fibonacci_mixed();
  if (name == "finite-group-simple") return detail::finite_group_simple();
  if (name == "generic-singular-demo") return detail::generic_singular_demo();
  throw Error(ErrorKind::UnknownModel, "no registry model named '" + std::string(name) + "'");
}

}  // namespace qpcontact
