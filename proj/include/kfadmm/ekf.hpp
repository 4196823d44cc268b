#pragma once

#include <vector>

#include "kfadmm/types.hpp"

namespace kfadmm {

/// Which half of the filter recursion produced the state. Corrections
/// require Predicted, predictions require Corrected; getting this wrong is
/// the classic filter bug, so it is enforced at runtime.
enum class Phase { Predicted, Corrected };

/// The filter's belief: estimate and covariance. Treated as a value; every
/// operation returns a fresh state. P is re-symmetrized after each update.
struct FilterState {
  Vec xhat;
  Mat P;
  Phase phase = Phase::Predicted;
};

/// Process/measurement noise covariances.
struct NoiseSpec {
  Mat Q;
  Mat R;

  /// Scalar-times-identity shorthand.
  static NoiseSpec iso(Index n_x, Index n_y, double q, double r);
};

/// One step of a linear time-varying estimation problem, as consumed by the
/// batch oracle.
struct LtvStep {
  Mat C;
  Mat R;
  Vec y;
  Mat Q;
};

FilterState make_state(Vec x0, Mat P0);

/// Kalman gain K = P C' (R + C P C')^{-1} via an SPD factorization solve.
Mat gain(const Mat& P, const Mat& C, const Mat& R);

/// Measurement update in Joseph form:
///   xhat <- xhat + K(y - C xhat),  P <- (I-KC)P(I-KC)' + KRK'.
FilterState correct(const FilterState& state, const Mat& C, const Mat& R, const Vec& y);

/// Time update: P <- P + Q, estimate unchanged.
FilterState predict(const FilterState& state, const Mat& Q);

/// Forgetting-factor covariance inflation P <- P/alpha, alpha in (0,1].
FilterState forget(const FilterState& state, double alpha);

/// Dense solve of the full-trajectory quadratic program the recursive filter
/// optimizes, by factoring the block-tridiagonal normal equations. Returns
/// the smoothed trajectory x_{0|k}, ..., x_{k|k}, x_{k+1|k} (steps.size()+1
/// vectors). Oracle for equivalence testing; problem sizes stay small.
std::vector<Vec> batch_solve(const Vec& x0, const Mat& P0, const std::vector<LtvStep>& steps);

}  // namespace kfadmm
