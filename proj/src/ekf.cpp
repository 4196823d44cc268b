#include "kfadmm/ekf.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace kfadmm {

namespace {

void symmetrize(Mat& P) { P = 0.5 * (P + P.transpose()).eval(); }

#ifndef NDEBUG
void check_spd(const Mat& P, const char* what) {
  Eigen::SelfAdjointEigenSolver<Mat> es(P, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::runtime_error(std::string(what) + ": covariance lost positive definiteness");
}
#endif

Eigen::LLT<Mat> factor_spd(const Mat& S, const char* what) {
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": SPD factorization failed");
  return llt;
}

}  // namespace

NoiseSpec NoiseSpec::iso(Index n_x, Index n_y, double q, double r) {
  if (q <= 0 || r <= 0) throw std::invalid_argument("NoiseSpec: covariances must be positive");
  return NoiseSpec{q * Mat::Identity(n_x, n_x), r * Mat::Identity(n_y, n_y)};
}

FilterState make_state(Vec x0, Mat P0) {
  if (P0.rows() != P0.cols() || P0.rows() != x0.size())
    throw std::invalid_argument("make_state: dimension mismatch");
  return FilterState{std::move(x0), std::move(P0), Phase::Predicted};
}

Mat gain(const Mat& P, const Mat& C, const Mat& R) {
  if (C.cols() != P.rows() || R.rows() != C.rows() || R.rows() != R.cols())
    throw std::invalid_argument("gain: dimension mismatch");
  Mat S = R + C * P * C.transpose();
  symmetrize(S);
  // K = P C' S^{-1}; solve S K' = C P instead of inverting S.
  return factor_spd(S, "gain").solve(C * P).transpose();
}

FilterState correct(const FilterState& state, const Mat& C, const Mat& R, const Vec& y) {
  if (state.phase != Phase::Predicted)
    throw std::logic_error("correct: state must be in Predicted phase");
  if (C.cols() != state.xhat.size() || y.size() != C.rows() || R.rows() != C.rows())
    throw std::invalid_argument("correct: dimension mismatch");

  const Mat K = gain(state.P, C, R);
  FilterState out;
  out.xhat = state.xhat + K * (y - C * state.xhat);
  // Joseph form, expanded so the cost stays O(n_x^2 n_y):
  //   (I-KC)P(I-KC)' + KRK' = P - K(CP) - (P - K(CP))C'K' + KRK'.
  const Mat CP = C * state.P;
  Mat AP = state.P - K * CP;             // (I-KC)P
  out.P = AP - (AP * C.transpose()) * K.transpose() + K * R * K.transpose();
  symmetrize(out.P);
#ifndef NDEBUG
  check_spd(out.P, "correct");
#endif
  out.phase = Phase::Corrected;
  return out;
}

FilterState predict(const FilterState& state, const Mat& Q) {
  if (state.phase != Phase::Corrected)
    throw std::logic_error("predict: state must be in Corrected phase");
  if (Q.rows() != state.P.rows() || Q.cols() != state.P.cols())
    throw std::invalid_argument("predict: dimension mismatch");
  FilterState out;
  out.xhat = state.xhat;
  out.P = state.P + Q;
  symmetrize(out.P);
  out.phase = Phase::Predicted;
  return out;
}

FilterState forget(const FilterState& state, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("forget: alpha must be in (0, 1]");
  FilterState out = state;
  out.P /= alpha;
  return out;
}

std::vector<Vec> batch_solve(const Vec& x0, const Mat& P0, const std::vector<LtvStep>& steps) {
  const Index n_x = x0.size();
  const Index k1 = static_cast<Index>(steps.size());  // measurements 0..k, k = k1-1
  if (k1 == 0) throw std::invalid_argument("batch_solve: need at least one step");
  const Index n_blocks = k1 + 1;  // unknowns x_0..x_{k+1}
  const Index dim = n_blocks * n_x;

  Mat H = Mat::Zero(dim, dim);
  Vec rhs = Vec::Zero(dim);

  const Mat P0inv = factor_spd(P0, "batch_solve").solve(Mat::Identity(n_x, n_x));
  H.topLeftCorner(n_x, n_x) = P0inv;
  rhs.head(n_x) = P0inv * x0;

  for (Index i = 0; i < k1; ++i) {
    const auto& st = steps[static_cast<std::size_t>(i)];
    const Mat Rinv = factor_spd(st.R, "batch_solve").solve(Mat::Identity(st.R.rows(), st.R.rows()));
    const Mat Qinv = factor_spd(st.Q, "batch_solve").solve(Mat::Identity(n_x, n_x));
    const Index bi = i * n_x;
    H.block(bi, bi, n_x, n_x) += st.C.transpose() * Rinv * st.C + Qinv;
    H.block(bi + n_x, bi + n_x, n_x, n_x) += Qinv;
    H.block(bi, bi + n_x, n_x, n_x) -= Qinv;
    H.block(bi + n_x, bi, n_x, n_x) -= Qinv;
    rhs.segment(bi, n_x) += st.C.transpose() * Rinv * st.y;
  }

  symmetrize(H);
  const Vec sol = factor_spd(H, "batch_solve").solve(rhs);

  std::vector<Vec> traj;
  traj.reserve(static_cast<std::size_t>(n_blocks));
  for (Index b = 0; b < n_blocks; ++b) traj.push_back(sol.segment(b * n_x, n_x));
  return traj;
}

}  // namespace kfadmm
