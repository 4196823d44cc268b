#pragma once

#include <vector>

#include "kfadmm/model.hpp"
#include "kfadmm/prox.hpp"
#include "kfadmm/types.hpp"

namespace kfadmm {

/// Per-step scalars recorded by an online run. f is evaluated at the
/// pre-step estimate x_k (the parameters in force when sample k arrived)
/// and g at both x_k and the consensus copy nu_k, since the two regret
/// flavors weigh different iterates. gap_sq pairs the post-step estimate
/// with the pre-step nu: ||x_{k+1} - nu_k||^2.
struct StepRecord {
  double f = 0.0;
  double g_x = 0.0;  // may be +inf for indicator regularizers
  double g_nu = 0.0;
  double gap_sq = 0.0;
  double wall_us = 0.0;
};

/// Run history feeding the regret functionals. Vector snapshots are kept
/// only on request; all regret computations need just the scalars.
struct Trace {
  std::vector<StepRecord> steps;
  bool keep_vectors = false;
  std::vector<Vec> x, nu, x_next;

  long size() const { return static_cast<long>(steps.size()); }
};

/// R_f(N) = sum_k (f_k(x_k) + g(nu_k)) - hindsight_objective.
double objective_regret(const Trace& trace, double hindsight_objective);

/// R_c(N) = sum_k ||x_{k+1} - nu_k||^2.
double constraint_regret(const Trace& trace);

/// Running regret sequences against per-step comparator costs c_k
/// (typically f_k(x*) + g(nu*)): rf[n-1] = sum_{k<n} (f_k + g_k - c_k),
/// rc likewise, plus the sample (per-n) versions. g_at_nu selects which
/// g-flavor enters the objective regret.
struct RegretCurves {
  std::vector<double> rf, rf_per_n, rc, rc_per_n;
};
RegretCurves regret_curves(const Trace& trace, const std::vector<double>& comparator_cost,
                           bool g_at_nu = true);

/// F(x) = sum_k (weight/2)||y_k - h_k(x)||^2 and its gradient; building
/// blocks of the hindsight problem, exported for scale estimation and
/// oracle tests.
double batch_objective(const Dataset& data, const ModelSpec& model, const Vec& x,
                       double weight = 1.0);
Vec batch_gradient(const Dataset& data, const ModelSpec& model, const Vec& x,
                   double weight = 1.0);

struct HindsightSolution {
  Vec x_star;
  double objective = 0.0;
  int iterations = 0;
  bool tolerance_met = false;
};

/// Best fixed parameters in hindsight: full-batch proximal gradient on
///   Phi(x) = sum_k f_k(x) + N g(x),  f_k(x) = (weight/2)||y_k - h_k(x)||^2,
/// with halving backtracking (sufficient-decrease constant 1e-4). Stops
/// when the gradient-mapping norm drops below tol or after max_iter
/// iterations; tolerance_met records which. For non-convex g (L0) the
/// result is a stationary point only.
HindsightSolution hindsight_prox_grad(const Dataset& data, const ModelSpec& model,
                                      const RegSpec& reg, double tol, int max_iter,
                                      double weight = 1.0, const Vec* x0 = nullptr);

/// Independent hindsight solutions per segment; comparator for
/// time-varying data. boundaries are the interior segment starts,
/// strictly increasing in (0, N). Every segment solve starts from the same
/// x0 (tanh networks have a zero-gradient trap at the all-zeros point, so
/// callers pass the online run's initial parameters). When warm_starts is
/// given (one vector per segment, typically the online iterate at the
/// segment's end) each segment is additionally solved from its warm start
/// and the lower-objective solution wins.
struct SegmentHindsight {
  std::vector<HindsightSolution> parts;
  std::vector<long> starts;  // includes leading 0
  double objective = 0.0;
};
SegmentHindsight segment_hindsight(const Dataset& data, const std::vector<long>& boundaries,
                                   const ModelSpec& model, const RegSpec& reg, double tol,
                                   int max_iter, double weight = 1.0, const Vec* x0 = nullptr,
                                   const std::vector<Vec>* warm_starts = nullptr);

/// Loss/Mse/Reg/Cv of a fixed parameter vector over a dataset, plus the
/// exact-zero sparsity fraction. Cv is meaningful for box constraints and 0
/// otherwise; Loss and Reg report +inf when x is infeasible.
struct PerfIndices {
  double loss = 0.0;
  double mse = 0.0;
  double reg = 0.0;
  double cv = 0.0;
  double sparsity = 0.0;
};
PerfIndices perf_indices(const Vec& x, const Dataset& data, const ModelSpec& model,
                         const RegSpec& reg, double weight = 1.0);

}  // namespace kfadmm
