#include "kfadmm/prox.hpp"

#include <cmath>
#include <limits>

namespace kfadmm {

namespace {

void check_box(const RegSpec& reg, Index n) {
  if (reg.lo.size() != 1 && reg.lo.size() != n)
    throw std::invalid_argument("box bounds do not match vector length");
  if (reg.hi.size() != 1 && reg.hi.size() != n)
    throw std::invalid_argument("box bounds do not match vector length");
}

}  // namespace

ExtReal reg_value(const RegSpec& reg, const Vec& x) {
  switch (reg.kind) {
    case RegKind::None:
      return ExtReal(0.0);
    case RegKind::L1:
      return ExtReal(reg.lambda * x.array().abs().sum());
    case RegKind::L0: {
      Index nnz = 0;
      for (Index i = 0; i < x.size(); ++i)
        if (x(i) != 0.0) ++nnz;
      return ExtReal(reg.lambda * static_cast<double>(nnz));
    }
    case RegKind::Box: {
      check_box(reg, x.size());
      for (Index i = 0; i < x.size(); ++i)
        if (x(i) < reg.lo_at(i) || x(i) > reg.hi_at(i)) return ExtReal::infinity();
      return ExtReal(0.0);
    }
  }
  throw std::logic_error("unreachable");
}

Vec prox_apply(const RegSpec& reg, const Vec& v, double rho) {
  if (!(rho > 0)) throw std::invalid_argument("prox_apply: rho must be > 0");
  switch (reg.kind) {
    case RegKind::None:
      return v;
    case RegKind::L1: {
      const double kappa = reg.lambda / rho;
      Vec out(v.size());
      for (Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i)) - kappa;
        out(i) = mag > 0 ? (v(i) > 0 ? mag : -mag) : 0.0;
      }
      return out;
    }
    case RegKind::L0: {
      // Keep v_i iff (rho/2)v_i^2 strictly beats lambda, i.e. v_i^2 > 2*lambda/rho.
      const double thresh_sq = 2.0 * reg.lambda / rho;
      Vec out(v.size());
      for (Index i = 0; i < v.size(); ++i) out(i) = (v(i) * v(i) > thresh_sq) ? v(i) : 0.0;
      return out;
    }
    case RegKind::Box: {
      check_box(reg, v.size());
      Vec out(v.size());
      for (Index i = 0; i < v.size(); ++i)
        out(i) = std::min(std::max(v(i), reg.lo_at(i)), reg.hi_at(i));
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

Vec project_box(const Vec& x, const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("project_box: bound size mismatch");
  const bool scalar = lo.size() == 1;
  if (!scalar && lo.size() != x.size())
    throw std::invalid_argument("project_box: bounds do not match vector length");
  Vec out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double l = scalar ? lo(0) : lo(i);
    const double h = scalar ? hi(0) : hi(i);
    if (l > h) throw std::invalid_argument("project_box: lo > hi");
    out(i) = std::min(std::max(x(i), l), h);
  }
  return out;
}

Vec project_box(const Vec& x, double lo, double hi) {
  Vec l(1), h(1);
  l(0) = lo;
  h(0) = hi;
  return project_box(x, l, h);
}

Vec project_box(const Vec& x, const RegSpec& box) {
  if (box.kind != RegKind::Box) throw std::invalid_argument("project_box: RegSpec is not a box");
  return project_box(x, box.lo, box.hi);
}

}  // namespace kfadmm
