#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "qpcontact/error.hpp"
#include "qpcontact/kernel.hpp"
#include "qpcontact/model.hpp"

namespace qpcontact {

struct SimConfig {
  std::uint64_t paths = 100'000;
  double escape_epsilon = 1e-9;
  std::uint64_t seed = 1;
  std::uint64_t max_steps = 10'000'000;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

inline Estimate binomial_estimate(std::uint64_t hits, std::uint64_t trials) {
  if (trials == 0) return {0.0, 0.0};
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

enum class Axis : std::uint8_t { None, Vertical, Horizontal };

// Per-worker counts; merging is a plain sum, so any split of the paths gives
// the same totals.
struct SimCounts {
  std::uint64_t paths = 0;
  std::uint64_t truncated = 0;
  std::vector<std::uint64_t> contacts;  // histogram of the contact count
  std::uint64_t first_vertical = 0;
  std::uint64_t first_horizontal = 0;
  std::uint64_t first_none = 0;
  // Contact number `conditioning_index` on a given axis, then what followed.
  std::uint64_t at_vertical = 0;
  std::uint64_t at_horizontal = 0;
  std::uint64_t vertical_next = 0;
  std::uint64_t horizontal_next = 0;
  std::uint64_t vertical_cross = 0;
  std::uint64_t horizontal_cross = 0;

  void merge(const SimCounts& o) {
    paths += o.paths;
    truncated += o.truncated;
    if (contacts.size() < o.contacts.size()) contacts.resize(o.contacts.size(), 0);
    for (std::size_t n = 0; n < o.contacts.size(); ++n) contacts[n] += o.contacts[n];
    first_vertical += o.first_vertical;
    first_horizontal += o.first_horizontal;
    first_none += o.first_none;
    at_vertical += o.at_vertical;
    at_horizontal += o.at_horizontal;
    vertical_next += o.vertical_next;
    horizontal_next += o.horizontal_next;
    vertical_cross += o.vertical_cross;
    horizontal_cross += o.horizontal_cross;
  }
};

struct SimEstimate {
  std::vector<Estimate> pmf;
  Estimate f_v;
  Estimate f_h;
  Estimate f_0;
  std::uint64_t paths = 0;
  std::uint64_t truncated_paths = 0;
  SimCounts counts;
};

namespace detail {

// Inverse-CDF sampling from a small finite law.
class JumpSampler {
 public:
  explicit JumpSampler(const StepDistribution& d) {
    double acc = 0.0;
    for (const Atom& a : d.atoms()) {
      acc += a.weight;
      cdf_.push_back(acc);
      jumps_.push_back(a.jump);
    }
    cdf_.back() = 2.0;  // absorbs rounding in the total
  }

  Jump operator()(double u) const {
    std::size_t n = 0;
    while (u >= cdf_[n]) ++n;
    return jumps_[n];
  }

 private:
  std::vector<double> cdf_;
  std::vector<Jump> jumps_;
};

// x^k for k = 0, 1, ..., tabulated until the power underflows.
class PowerTable {
 public:
  explicit PowerTable(double x) : x_(x) {
    for (double p = 1.0; p > 0.0 && pow_.size() < 1u << 16; p *= x) pow_.push_back(p);
  }
  double operator()(int k) const {
    const auto n = static_cast<std::size_t>(k);
    return n < pow_.size() ? pow_[n] : std::pow(x_, k);
  }

 private:
  double x_;
  std::vector<double> pow_;
};

// One independent stream per path: mt19937_64 keyed by (seed, path index).
inline std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

struct Walker {
  JumpSampler interior, horizontal, vertical, origin;
  PowerTable alpha_pow, beta_pow;
  double epsilon;
  std::uint64_t max_steps;
  int conditioning_index;
  bool singular;

  // Runs one path from (i, j) and adds it to `c`.
  void run(int i, int j, std::mt19937_64& g, SimCounts& c) const {
    std::uint64_t contacts = 0;
    Axis first = Axis::None;
    Axis conditioned = Axis::None;
    for (std::uint64_t step = 0;; ++step) {
      if (step >= max_steps) {
        ++c.truncated;
        ++c.paths;
        return;
      }
      Jump jump;
      if (i == 0 || j == 0) {
        const Axis axis = i == 0 ? Axis::Vertical : Axis::Horizontal;
        ++contacts;
        if (contacts == 1) first = axis;
        if (contacts == static_cast<std::uint64_t>(conditioning_index)) {
          conditioned = axis;
          ++(axis == Axis::Vertical ? c.at_vertical : c.at_horizontal);
        } else if (contacts == static_cast<std::uint64_t>(conditioning_index) + 1) {
          ++(conditioned == Axis::Vertical ? c.vertical_next : c.horizontal_next);
          if (axis != conditioned) ++(conditioned == Axis::Vertical ? c.vertical_cross : c.horizontal_cross);
        }
        const double u = uniform01(g);
        jump = i == 0 && j == 0 ? origin(u) : i == 0 ? vertical(u) : horizontal(u);
      } else {
        if (alpha_pow(i) + beta_pow(j) <= epsilon) break;
        jump = interior(uniform01(g));
        if (singular && i + jump.k == 0 && j + jump.l == 0)
          throw Error(ErrorKind::UnreachableOrigin, "singular walk stepped from the interior onto the origin");
      }
      i += jump.k;
      j += jump.l;
    }
    ++c.paths;
    if (c.contacts.size() <= contacts) c.contacts.resize(contacts + 1, 0);
    ++c.contacts[contacts];
    ++(first == Axis::Vertical ? c.first_vertical : first == Axis::Horizontal ? c.first_horizontal : c.first_none);
  }
};

inline unsigned worker_count(unsigned requested, std::uint64_t paths) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(n, std::max<std::uint64_t>(paths, 1)));
}

inline SimCounts simulate_counts(const QuadrantModel& model, int i, int j, const SimConfig& cfg,
                                 int conditioning_index = 1) {
  if (i < 0 || j < 0) throw Error(ErrorKind::InvalidArgument, "start must lie in the quadrant");
  if (!(cfg.escape_epsilon > 0.0 && cfg.escape_epsilon < 1.0))
    throw Error(ErrorKind::InvalidArgument, "escape epsilon must lie in (0,1)");
  if (cfg.paths == 0) throw Error(ErrorKind::InvalidArgument, "need at least one path");
  const AxisFixedPoints fp = axis_fixed_points(model.interior());
  const Walker walker{JumpSampler(model.interior()),
                      JumpSampler(model.horizontal()),
                      JumpSampler(model.vertical()),
                      JumpSampler(model.origin()),
                      PowerTable(fp.alpha_1),
                      PowerTable(fp.beta_minus1),
                      cfg.escape_epsilon,
                      cfg.max_steps,
                      conditioning_index,
                      model.model_class() == ModelClass::GeneralSingular};

  const unsigned workers = worker_count(cfg.threads, cfg.paths);
  std::vector<SimCounts> partial(workers);
  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          const std::uint64_t begin = cfg.paths * w / workers;
          const std::uint64_t end = cfg.paths * (w + 1) / workers;
          for (std::uint64_t path = begin; path < end; ++path) {
            auto g = path_stream(cfg.seed, path);
            walker.run(i, j, g, partial[w]);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  SimCounts total;
  for (const SimCounts& c : partial) total.merge(c);
  return total;
}

}  // namespace detail

// Contact-count law from `paths` independent walks started at (i, j). A path
// stops once alpha_1^i + beta_{-1}^j <= epsilon, which bounds the chance of a
// missed later contact by epsilon.
inline SimEstimate simulate_contacts(const QuadrantModel& model, int i, int j, const SimConfig& cfg) {
  SimEstimate out;
  out.counts = detail::simulate_counts(model, i, j, cfg);
  const SimCounts& c = out.counts;
  out.paths = c.paths;
  out.truncated_paths = c.truncated;
  for (const std::uint64_t k : c.contacts) out.pmf.push_back(binomial_estimate(k, c.paths));
  out.f_v = binomial_estimate(c.first_vertical, c.paths);
  out.f_h = binomial_estimate(c.first_horizontal, c.paths);
  out.f_0 = binomial_estimate(c.first_none, c.paths);
  return out;
}

inline constexpr std::uint64_t kMinInformativeCount = 100;

struct Splitting {
  Estimate f_v;
  Estimate f_h;
  Estimate f_0;
  bool low_information = false;  // fewer than kMinInformativeCount hits on some axis
};

// First contact on the vertical axis (origin included), on the horizontal axis, or never.
inline Splitting estimate_splitting(const QuadrantModel& model, int i, int j, const SimConfig& cfg) {
  const SimCounts c = detail::simulate_counts(model, i, j, cfg);
  return {binomial_estimate(c.first_vertical, c.paths), binomial_estimate(c.first_horizontal, c.paths),
          binomial_estimate(c.first_none, c.paths),
          c.first_vertical < kMinInformativeCount || c.first_horizontal < kMinInformativeCount};
}

struct ConditionalNext {
  int n = 1;
  std::uint64_t conditioning_vertical = 0;
  std::uint64_t conditioning_horizontal = 0;
  Estimate next_given_vertical;   // P(contact n+1 | contact n on the vertical axis)
  Estimate next_given_horizontal;
  Estimate cross_given_vertical;  // P(contact n+1 on the horizontal axis | contact n vertical)
  Estimate cross_given_horizontal;
  bool low_sample = false;
};

inline ConditionalNext estimate_conditional_next(const QuadrantModel& model, int i, int j, const SimConfig& cfg,
                                                 int n = 1) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "conditioning contact index starts at 1");
  const SimCounts c = detail::simulate_counts(model, i, j, cfg, n);
  ConditionalNext out;
  out.n = n;
  out.conditioning_vertical = c.at_vertical;
  out.conditioning_horizontal = c.at_horizontal;
  out.next_given_vertical = binomial_estimate(c.vertical_next, c.at_vertical);
  out.next_given_horizontal = binomial_estimate(c.horizontal_next, c.at_horizontal);
  out.cross_given_vertical = binomial_estimate(c.vertical_cross, c.at_vertical);
  out.cross_given_horizontal = binomial_estimate(c.horizontal_cross, c.at_horizontal);
  out.low_sample = c.at_vertical < kMinInformativeCount || c.at_horizontal < kMinInformativeCount;
  return out;
}

}  // namespace qpcontact
