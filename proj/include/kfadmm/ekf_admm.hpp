#pragma once

#include "kfadmm/ekf.hpp"
#include "kfadmm/prox.hpp"
#include "kfadmm/types.hpp"

namespace kfadmm {

/// ADMM consensus state carried across filter steps. The dual w is never
/// reset between steps; it warm-starts the next step's inner iterations.
///
/// Convention: step_naive/step_fast use the scaled dual (updates
/// w <- w + x - nu); step_frozen uses the unscaled dual (updates
/// w <- w + rho(x - nu), prox argument x + w/rho). The two are related by
/// w_scaled = w_unscaled / rho.
struct AdmmState {
  Vec nu;
  Vec w;
  double rho = 1.0;
  int n_a = 1;
};

/// nu starts at the initial estimate, w at zero.
AdmmState admm_init(const Vec& x0, double rho, int n_a);

struct StepResult {
  FilterState fs;  // corrected-then-predicted
  AdmmState as;
};

/// One filter step with regularization handled by inner ADMM iterations.
/// The consensus target nu - w enters the correction as a direct "fake"
/// observation of the parameters with covariance (1/rho) I; the joint gain
/// is computed once and every inner iteration restarts from the predicted
/// estimate. Covariance update is Joseph-stabilized, then inflated by
/// 1/forget_alpha and propagated with Q.
StepResult step_naive(const FilterState& fs, const AdmmState& as, const Mat& C, const Mat& R,
                      const Mat& Q, const Vec& y, const RegSpec& reg, double forget_alpha = 1.0);

/// Same contract as step_naive (results match to high accuracy), but the
/// true measurement is processed once, and a single precomputed gain
/// K_f = P'(P' + (1/rho) I)^{-1} handles the fake measurements, so the inner
/// loop is factorization-free: O(n_x^3 + n_a n_x^2) per step. Rows(y) may be
/// zero, in which case only the regularization processing runs.
StepResult step_fast(const FilterState& fs, const AdmmState& as, const Mat& C, const Mat& R,
                     const Mat& Q, const Vec& y, const RegSpec& reg, double forget_alpha = 1.0);

/// Penalty schedule rho_k = 10^(k/N - 2) * lambda: fake measurements get
/// little weight early and progressively more as the estimate settles.
double rho_tv(long k, long N, double lambda);

/// Hyper-parameters of the frozen-covariance online variant.
struct FrozenConfig {
  double eta = 1.0;
  double rho = 1.0;
  long k_n = 0;  // covariance updates stop at step k_n
};

/// One step of the n_a = 1, frozen-P online variant (unscaled dual):
///   x+  = argmin_x (1/2)||y - Cx||^2_{R^-1} + w'(x - nu)
///           + (rho/2)||x - nu||^2 + (eta/2)||x - x_k||^2_{P^-1}
///   nu+ = prox_{g/rho}(x+ + w/rho),   w+ = w + rho(x+ - nu+)
/// with P updated through step k_n and held fixed afterwards. as.rho is
/// ignored; the penalty comes from cfg.
StepResult step_frozen(const FilterState& fs, const AdmmState& as, const FrozenConfig& cfg,
                       const Mat& C, const Mat& R, const Mat& Q, const Vec& y, const RegSpec& reg,
                       long k);

/// Constants appearing in the sublinear-regret guarantee. alpha_strong is
/// the strong-convexity lower bound on the P^{-1} metric (distinct from a
/// forgetting factor).
struct RegretConstants {
  double G_f = 1.0;      // bound on ||grad f_k||
  double D_x = 1.0;      // bound with (1/2)||x*||^2_{P^-1} <= D_x^2
  double alpha_strong = 1.0;
  double D_nu = 1.0;     // bound on ||nu*||^2
  double M_kn = 0.0;     // transient covariance-drift budget
  double F = 1.0;        // lower bound on per-step optimality gap
};

struct Schedule {
  double eta = 0.0;
  double rho = 0.0;
  double rf_bound = 0.0;  // guaranteed bound on the objective regret
  double rc_bound = 0.0;  // guaranteed bound on the constraint regret
};

/// The (eta, rho) choice that yields sublinear regret, plus the two bound
/// values it guarantees:
///   eta = G_f sqrt(N) / (D_x sqrt(2 alpha)),  rho = sqrt(N).
Schedule theorem_schedule(const RegretConstants& c, long N);

}  // namespace kfadmm
