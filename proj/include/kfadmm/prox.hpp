#pragma once

#include <limits>
#include <stdexcept>

#include "kfadmm/types.hpp"

namespace kfadmm {

/// Extended real used for regularizer values. The infinite value is a
/// distinct state rather than an IEEE inf, so it cannot slip unnoticed
/// through accumulations; callers must branch on finite() or go through
/// value(), which throws when infinite.
class ExtReal {
 public:
  ExtReal() = default;
  ExtReal(double v) : value_(v) {}  // NOLINT: implicit by design

  static ExtReal infinity() {
    ExtReal r;
    r.finite_ = false;
    return r;
  }

  bool finite() const { return finite_; }

  double value() const {
    if (!finite_) throw std::domain_error("ExtReal: value() on infinite");
    return value_;
  }

  /// Finite value, or IEEE +inf for reporting/printing contexts.
  double value_or_inf() const {
    return finite_ ? value_ : std::numeric_limits<double>::infinity();
  }

  ExtReal operator+(const ExtReal& o) const {
    if (!finite_ || !o.finite_) return infinity();
    return ExtReal(value_ + o.value_);
  }

  /// Scaling by a nonnegative factor; infinity is absorbing.
  ExtReal operator*(double c) const {
    if (c < 0) throw std::invalid_argument("ExtReal: negative scale");
    if (!finite_) return infinity();
    return ExtReal(value_ * c);
  }

 private:
  double value_ = 0.0;
  bool finite_ = true;
};

enum class RegKind { None, L1, L0, Box };

/// Regularizer g(x): none, lambda*||x||_1, lambda*||x||_0, or the indicator
/// of the box {lo <= x <= hi}. Box bounds are stored as vectors of size 1
/// (scalar broadcast) or full length.
struct RegSpec {
  RegKind kind = RegKind::None;
  double lambda = 0.0;
  Vec lo, hi;

  static RegSpec none() { return RegSpec{}; }

  static RegSpec l1(double lambda) {
    if (lambda < 0) throw std::invalid_argument("RegSpec: lambda must be >= 0");
    return RegSpec{RegKind::L1, lambda, {}, {}};
  }

  static RegSpec l0(double lambda) {
    if (lambda < 0) throw std::invalid_argument("RegSpec: lambda must be >= 0");
    return RegSpec{RegKind::L0, lambda, {}, {}};
  }

  static RegSpec box(double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("RegSpec: lo > hi");
    RegSpec r{RegKind::Box, 0.0, Vec(1), Vec(1)};
    r.lo(0) = lo;
    r.hi(0) = hi;
    return r;
  }

  static RegSpec box(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw std::invalid_argument("RegSpec: bound size mismatch");
    if ((lo.array() > hi.array()).any()) throw std::invalid_argument("RegSpec: lo > hi");
    return RegSpec{RegKind::Box, 0.0, std::move(lo), std::move(hi)};
  }

  double lo_at(Index i) const { return lo.size() == 1 ? lo(0) : lo(i); }
  double hi_at(Index i) const { return hi.size() == 1 ? hi(0) : hi(i); }
};

/// g(x). None -> 0, L1 -> lambda*sum|x_i|, L0 -> lambda*#nonzeros,
/// Box -> 0 if feasible else infinity.
ExtReal reg_value(const RegSpec& reg, const Vec& x);

/// prox_{g/rho}(v) = argmin_nu g(nu) + (rho/2)||nu - v||^2, elementwise in
/// O(n). L0 ties (v_i^2 == 2*lambda/rho) resolve to 0.
Vec prox_apply(const RegSpec& reg, const Vec& v, double rho);

/// Elementwise clamp onto [lo, hi]; bounds broadcast from size 1.
Vec project_box(const Vec& x, const Vec& lo, const Vec& hi);
Vec project_box(const Vec& x, double lo, double hi);
Vec project_box(const Vec& x, const RegSpec& box);

}  // namespace kfadmm
