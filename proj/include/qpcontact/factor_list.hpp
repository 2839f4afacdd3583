#pragma once

#include <cmath>
#include <limits>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qpcontact/error.hpp"

namespace qpcontact {

inline constexpr double kPoleTolerance = 1e-12;

// One rational factor (1 - a z) / (1 - b z).
struct Factor {
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const Factor&, const Factor&) = default;
};

// sign * prod (1 - a_k z)/(1 - b_k z)
class FactorList {
 public:
  FactorList() = default;
  FactorList(int sign, std::vector<Factor> factors) : sign_(sign < 0 ? -1 : 1), f_(std::move(factors)) {}

  int sign() const noexcept { return sign_; }
  std::span<const Factor> factors() const noexcept { return f_; }
  std::size_t size() const noexcept { return f_.size(); }

  // -this * (1 - a z)/(1 - b z), the step shape of both coefficient recursions.
  FactorList negated_times(Factor next) const {
    FactorList out(-sign_, f_);
    out.f_.push_back(next);
    return out;
  }

  FactorList inverse() const {
    FactorList out(sign_, {});
    out.f_.reserve(f_.size());
    for (const Factor& f : f_) out.f_.push_back({f.b, f.a});
    return out;
  }

  FactorList operator*(const FactorList& other) const {
    FactorList out(sign_ * other.sign_, f_);
    out.f_.insert(out.f_.end(), other.f_.begin(), other.f_.end());
    return out;
  }

  FactorList divided_by(const FactorList& other) const { return (*this * other.inverse()).simplified(); }

  // Cancels numerator roots against equal denominator roots and drops trivial factors.
  FactorList simplified() const {
    std::vector<double> num;
    std::vector<double> den;
    for (const Factor& f : f_) {
      if (f.a != 0.0) num.push_back(f.a);
      if (f.b != 0.0) den.push_back(f.b);
    }
    for (std::size_t n = 0; n < num.size();) {
      bool cancelled = false;
      for (std::size_t d = 0; d < den.size(); ++d) {
        if (num[n] == den[d]) {
          den.erase(den.begin() + static_cast<std::ptrdiff_t>(d));
          num.erase(num.begin() + static_cast<std::ptrdiff_t>(n));
          cancelled = true;
          break;
        }
      }
      if (!cancelled) ++n;
    }
    FactorList out(sign_, {});
    const std::size_t count = std::max(num.size(), den.size());
    for (std::size_t k = 0; k < count; ++k)
      out.f_.push_back({k < num.size() ? num[k] : 0.0, k < den.size() ? den[k] : 0.0});
    return out;
  }

  // Removes one (1 - z) numerator, i.e. divides by (1 - z).
  FactorList without_unit_root() const {
    FactorList out = *this;
    for (Factor& f : out.f_) {
      if (f.a == 1.0) {
        f.a = 0.0;
        return out;
      }
    }
    throw Error(ErrorKind::InvalidArgument, "factor list has no (1 - z) numerator");
  }

  bool vanishes_at_one() const {
    for (const Factor& f : f_)
      if (f.a == 1.0) return true;
    return false;
  }

  double operator()(double z) const {
    double value = sign_;
    for (const Factor& f : f_) {
      const double den = 1.0 - f.b * z;
      if (std::abs(den) < kPoleTolerance)
        throw Error(ErrorKind::PoleAtEvaluation, "evaluation point is a pole");
      value *= (1.0 - f.a * z) / den;
    }
    return value;
  }

  // Taylor coefficients up to z^n_max: multiply by (1 - a z), then back-substitute (1 - b z).
  std::vector<double> taylor(int n_max) const {
    std::vector<double> s(static_cast<std::size_t>(n_max) + 1, 0.0);
    s[0] = sign_;
    for (const Factor& f : f_) {
      if (f.a != 0.0)
        for (std::size_t n = s.size(); n-- > 1;) s[n] -= f.a * s[n - 1];
      if (f.b != 0.0)
        for (std::size_t n = 1; n < s.size(); ++n) s[n] += f.b * s[n - 1];
    }
    return s;
  }

  // Upper bound on the l1 norm of the Taylor series, hence on every coefficient
  // and on |value| for |z| <= 1. Needs |b| < 1 for every factor.
  double coefficient_bound() const {
    double bound = 1.0;
    for (const Factor& f : f_) {
      if (!(std::abs(f.b) < 1.0)) return std::numeric_limits<double>::infinity();
      bound *= 1.0 + std::abs(f.b - f.a) / (1.0 - std::abs(f.b));
    }
    return bound;
  }

  friend bool operator==(const FactorList&, const FactorList&) = default;

 private:
  int sign_ = 1;
  std::vector<Factor> f_;
};

}  // namespace qpcontact
