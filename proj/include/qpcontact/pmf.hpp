#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qpcontact/error.hpp"

namespace qpcontact {

enum class PmfMethod { CompensationSeries, ClosedFormIdentical, FiniteGroupSum, CouplingRecursion, MonteCarlo };

constexpr std::string_view to_string(PmfMethod m) {
  switch (m) {
    case PmfMethod::CompensationSeries: return "CompensationSeries";
    case PmfMethod::ClosedFormIdentical: return "ClosedFormIdentical";
    case PmfMethod::FiniteGroupSum: return "FiniteGroupSum";
    case PmfMethod::CouplingRecursion: return "CouplingRecursion";
    case PmfMethod::MonteCarlo: return "MonteCarlo";
  }
  return "Unknown";
}

// Closed rectangle [i0, i1] x [j0, j1] of lattice points.
struct Rect {
  int i0 = 0;
  int i1 = 0;
  int j0 = 0;
  int j1 = 0;

  static Rect point(int i, int j) { return {i, i, j, j}; }

  bool empty() const noexcept { return i1 < i0 || j1 < j0; }
  int width() const noexcept { return i1 - i0 + 1; }
  int height() const noexcept { return j1 - j0 + 1; }
  std::size_t count() const noexcept {
    return empty() ? 0 : static_cast<std::size_t>(width()) * static_cast<std::size_t>(height());
  }
  bool contains(int i, int j) const noexcept { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
  bool contains(const Rect& r) const noexcept {
    return r.empty() || (contains(r.i0, r.j0) && contains(r.i1, r.j1));
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// f_n(i,j) with a per-entry error bound, over a rectangle of starts and n = 0..n_max.
class ContactPmf {
 public:
  ContactPmf(Rect rect, int n_max, PmfMethod method)
      : rect_(rect), n_max_(n_max), method_(method),
        p_(rect.count() * static_cast<std::size_t>(n_max + 1), 0.0),
        err_(p_.size(), 0.0) {
    if (rect.empty() || n_max < 0) throw Error(ErrorKind::InvalidArgument, "empty pmf table");
  }

  const Rect& rect() const noexcept { return rect_; }
  int n_max() const noexcept { return n_max_; }
  PmfMethod method() const noexcept { return method_; }

  double at(int i, int j, int n) const { return p_[slot(i, j, n)]; }
  double error(int i, int j, int n) const { return err_[slot(i, j, n)]; }

  // Stores a probability clamped to [0,1]; the clamp never moves it by more
  // than the distance to the true value, so the bound stays valid.
  void set(int i, int j, int n, double p, double err) {
    const std::size_t s = slot(i, j, n);
    p_[s] = std::clamp(p, 0.0, 1.0);
    err_[s] = err;
  }

 private:
  std::size_t slot(int i, int j, int n) const {
    if (!rect_.contains(i, j) || n < 0 || n > n_max_)
      throw Error(ErrorKind::InvalidArgument, "pmf entry outside the table");
    const auto cell = static_cast<std::size_t>(i - rect_.i0) * static_cast<std::size_t>(rect_.height()) +
                      static_cast<std::size_t>(j - rect_.j0);
    return cell * static_cast<std::size_t>(n_max_ + 1) + static_cast<std::size_t>(n);
  }

  Rect rect_;
  int n_max_;
  PmfMethod method_;
  std::vector<double> p_;
  std::vector<double> err_;
};

}  // namespace qpcontact
