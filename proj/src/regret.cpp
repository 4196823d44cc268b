#include "kfadmm/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kfadmm {

double batch_objective(const Dataset& data, const ModelSpec& model, const Vec& x, double weight) {
  double acc = 0.0;
  for (const auto& s : data.samples)
    acc += 0.5 * weight * (s.y - model_eval(model, x, s)).squaredNorm();
  return acc;
}

Vec batch_gradient(const Dataset& data, const ModelSpec& model, const Vec& x, double weight) {
  Vec g = Vec::Zero(x.size());
  for (const auto& s : data.samples) {
    const Vec h = model_eval(model, x, s);
    const Mat C = model_jacobian(model, x, s);
    g.noalias() += weight * (C.transpose() * (h - s.y));
  }
  return g;
}

double objective_regret(const Trace& trace, double hindsight_objective) {
  double acc = 0.0;
  for (const auto& r : trace.steps) acc += r.f + r.g_nu;
  return acc - hindsight_objective;
}

double constraint_regret(const Trace& trace) {
  double acc = 0.0;
  for (const auto& r : trace.steps) acc += r.gap_sq;
  return acc;
}

RegretCurves regret_curves(const Trace& trace, const std::vector<double>& comparator_cost,
                           bool g_at_nu) {
  const std::size_t n = trace.steps.size();
  if (comparator_cost.size() != n)
    throw std::invalid_argument("regret_curves: comparator length mismatch");
  RegretCurves out;
  out.rf.resize(n);
  out.rf_per_n.resize(n);
  out.rc.resize(n);
  out.rc_per_n.resize(n);
  double rf = 0.0, rc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = trace.steps[k];
    rf += r.f + (g_at_nu ? r.g_nu : r.g_x) - comparator_cost[k];
    rc += r.gap_sq;
    out.rf[k] = rf;
    out.rc[k] = rc;
    out.rf_per_n[k] = rf / static_cast<double>(k + 1);
    out.rc_per_n[k] = rc / static_cast<double>(k + 1);
  }
  return out;
}

HindsightSolution hindsight_prox_grad(const Dataset& data, const ModelSpec& model,
                                      const RegSpec& reg, double tol, int max_iter, double weight,
                                      const Vec* x0) {
  if (data.size() == 0) throw std::invalid_argument("hindsight_prox_grad: empty dataset");
  if (!(tol > 0.0) || max_iter < 1 || !(weight > 0.0))
    throw std::invalid_argument("hindsight_prox_grad: bad tol/max_iter/weight");
  const int n_x = model.param_count();
  const double N = static_cast<double>(data.size());

  Vec x = x0 ? *x0 : Vec::Zero(n_x);
  if (x.size() != n_x) throw std::invalid_argument("hindsight_prox_grad: x0 dimension mismatch");
  // Start feasible so the objective is finite from the first iterate.
  if (reg.kind == RegKind::Box) x = project_box(x, reg);

  const double sigma = 1e-4;
  auto phi = [&](const Vec& v, double fv) {
    return ExtReal(fv) + reg_value(reg, v) * N;
  };

  double f_x = batch_objective(data, model, x, weight);
  double phi_x = phi(x, f_x).value_or_inf();
  double t = 1.0;
  HindsightSolution out;

  int it = 0;
  for (; it < max_iter; ++it) {
    const Vec grad = batch_gradient(data, model, x, weight);
    Vec x_new;
    double f_new = 0.0, phi_new = 0.0;
    // Halving backtracking: scaling the prox by 1/(t*N) matches the N-fold
    // regularizer in the batch objective.
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      x_new = prox_apply(reg, x - t * grad, 1.0 / (t * N));
      const Vec d = x_new - x;
      f_new = batch_objective(data, model, x_new, weight);
      phi_new = phi(x_new, f_new).value_or_inf();
      if (phi_new <= phi_x - sigma * d.squaredNorm() / t) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    const double move = (x_new - x).norm() / t;
    x = std::move(x_new);
    f_x = f_new;
    phi_x = phi_new;
    if (move <= tol) {
      out.tolerance_met = true;
      ++it;
      break;
    }
    t = std::min(t * 2.0, 1e6);
  }

  out.x_star = std::move(x);
  out.objective = phi_x;
  out.iterations = it;
  return out;
}

SegmentHindsight segment_hindsight(const Dataset& data, const std::vector<long>& boundaries,
                                   const ModelSpec& model, const RegSpec& reg, double tol,
                                   int max_iter, double weight, const Vec* x0,
                                   const std::vector<Vec>* warm_starts) {
  const long n = data.size();
  std::vector<long> starts{0};
  for (long b : boundaries) {
    if (b <= starts.back() || b >= n)
      throw std::invalid_argument("segment_hindsight: boundaries must be increasing in (0, N)");
    starts.push_back(b);
  }
  if (warm_starts && warm_starts->size() != starts.size())
    throw std::invalid_argument("segment_hindsight: need one warm start per segment");

  SegmentHindsight out;
  out.starts = starts;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const long lo = starts[i];
    const long hi = (i + 1 < starts.size()) ? starts[i + 1] : n;
    Dataset seg;
    seg.samples.assign(data.samples.begin() + lo, data.samples.begin() + hi);
    HindsightSolution best = hindsight_prox_grad(seg, model, reg, tol, max_iter, weight, x0);
    if (warm_starts) {
      HindsightSolution warm =
          hindsight_prox_grad(seg, model, reg, tol, max_iter, weight, &(*warm_starts)[i]);
      if (warm.objective < best.objective) best = std::move(warm);
    }
    out.parts.push_back(std::move(best));
    out.objective += out.parts.back().objective;
  }
  return out;
}

PerfIndices perf_indices(const Vec& x, const Dataset& data, const ModelSpec& model,
                         const RegSpec& reg, double weight) {
  if (data.size() == 0) throw std::invalid_argument("perf_indices: empty dataset");
  PerfIndices out;
  out.mse = batch_objective(data, model, x, weight) / static_cast<double>(data.size());
  out.reg = reg_value(reg, x).value_or_inf();
  out.loss = out.mse + out.reg;
  if (reg.kind == RegKind::Box) out.cv = (x - project_box(x, reg)).squaredNorm();
  int zeros = 0;
  for (Index i = 0; i < x.size(); ++i)
    if (x(i) == 0.0) ++zeros;
  out.sparsity = static_cast<double>(zeros) / static_cast<double>(x.size());
  return out;
}

}  // namespace kfadmm
