#include "kfadmm/ekf_admm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace kfadmm {

namespace {

void symmetrize(Mat& P) { P = 0.5 * (P + P.transpose()).eval(); }

Eigen::LLT<Mat> factor_spd(const Mat& S, const char* what) {
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": SPD factorization failed");
  return llt;
}

void check_step_inputs(const FilterState& fs, const AdmmState& as, const Mat& C, const Mat& R,
                       const Mat& Q, const Vec& y, const char* what) {
  const Index n_x = fs.xhat.size();
  if (fs.phase != Phase::Predicted)
    throw std::logic_error(std::string(what) + ": state must be in Predicted phase");
  if (as.nu.size() != n_x || as.w.size() != n_x)
    throw std::invalid_argument(std::string(what) + ": ADMM state dimension mismatch");
  if (!(as.rho > 0)) throw std::invalid_argument(std::string(what) + ": rho must be > 0");
  if (as.n_a < 1) throw std::invalid_argument(std::string(what) + ": n_a must be >= 1");
  if (C.cols() != n_x || C.rows() != y.size() || R.rows() != y.size() || R.cols() != y.size())
    throw std::invalid_argument(std::string(what) + ": measurement dimension mismatch");
  if (Q.rows() != n_x || Q.cols() != n_x)
    throw std::invalid_argument(std::string(what) + ": Q dimension mismatch");
}

void check_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument(std::string(what) + ": forget_alpha must be in (0, 1]");
}

}  // namespace

AdmmState admm_init(const Vec& x0, double rho, int n_a) {
  if (!(rho > 0)) throw std::invalid_argument("admm_init: rho must be > 0");
  if (n_a < 1) throw std::invalid_argument("admm_init: n_a must be >= 1");
  return AdmmState{x0, Vec::Zero(x0.size()), rho, n_a};
}

StepResult step_naive(const FilterState& fs, const AdmmState& as, const Mat& C, const Mat& R,
                      const Mat& Q, const Vec& y, const RegSpec& reg, double forget_alpha) {
  check_step_inputs(fs, as, C, R, Q, y, "step_naive");
  check_alpha(forget_alpha, "step_naive");
  const Index n_x = fs.xhat.size();
  const Index n_y = y.size();

  // Augmented measurement: the true block stacked over n_x direct "fake"
  // observations of the parameters with covariance (1/rho) I.
  Mat Cbar(n_y + n_x, n_x);
  Cbar.topRows(n_y) = C;
  Cbar.bottomRows(n_x) = Mat::Identity(n_x, n_x);
  Mat Rbar = Mat::Zero(n_y + n_x, n_y + n_x);
  Rbar.topLeftCorner(n_y, n_y) = R;
  Rbar.bottomRightCorner(n_x, n_x) = (1.0 / as.rho) * Mat::Identity(n_x, n_x);

  const Mat K = gain(fs.P, Cbar, Rbar);

  Vec xkk = fs.xhat;
  Vec nu = as.nu;
  Vec w = as.w;
  Vec ybar(n_y + n_x);
  ybar.head(n_y) = y;
  for (int t = 0; t < as.n_a; ++t) {
    ybar.tail(n_x) = nu - w;
    xkk = fs.xhat + K * (ybar - Cbar * fs.xhat);  // restart from the predicted estimate
    nu = prox_apply(reg, xkk + w, as.rho);
    w += xkk - nu;
  }

  // Joseph-stabilized covariance for the joint correction.
  const Mat A = Mat::Identity(n_x, n_x) - K * Cbar;
  Mat Pkk = A * fs.P * A.transpose() + K * Rbar * K.transpose();
  symmetrize(Pkk);

  StepResult out;
  out.fs.xhat = std::move(xkk);
  out.fs.P = Pkk / forget_alpha + Q;
  symmetrize(out.fs.P);
  out.fs.phase = Phase::Predicted;
  out.as = AdmmState{std::move(nu), std::move(w), as.rho, as.n_a};
  return out;
}

StepResult step_fast(const FilterState& fs, const AdmmState& as, const Mat& C, const Mat& R,
                     const Mat& Q, const Vec& y, const RegSpec& reg, double forget_alpha) {
  check_step_inputs(fs, as, C, R, Q, y, "step_fast");
  check_alpha(forget_alpha, "step_fast");
  const Index n_x = fs.xhat.size();
  const Index n_y = y.size();

  // Stage 1: the true measurement, processed once (Joseph form, O(n_x^2 n_y)).
  Vec xp = fs.xhat;
  Mat Pp = fs.P;
  if (n_y > 0) {
    const Mat K = gain(fs.P, C, R);
    xp += K * (y - C * fs.xhat);
    const Mat CP = C * fs.P;
    Mat AP = fs.P - K * CP;
    Pp = AP - (AP * C.transpose()) * K.transpose() + K * R * K.transpose();
    symmetrize(Pp);
  }

  // Stage 2: fake-measurement gain K_f = P'(P' + s I)^{-1}, s = 1/rho,
  // computed once; the inner loop is matrix-vector only.
  const double s = 1.0 / as.rho;
  Mat M = Pp + s * Mat::Identity(n_x, n_x);
  Mat Kf = factor_spd(M, "step_fast").solve(Pp).transpose();  // P' M^{-1}
  symmetrize(Kf);

  Vec xkk = xp;
  Vec nu = as.nu;
  Vec w = as.w;
  for (int t = 0; t < as.n_a; ++t) {
    xkk = xp + Kf * (nu - w - xp);  // restart from the post-true-measurement estimate
    nu = prox_apply(reg, xkk + w, as.rho);
    w += xkk - nu;
  }

  // Joint posterior covariance ((P')^{-1} + rho I)^{-1} = s K_f; this form
  // stays accurate for extreme rho where I - s M^{-1} would cancel.
  Mat Pkk = s * Kf;

  StepResult out;
  out.fs.xhat = std::move(xkk);
  out.fs.P = Pkk / forget_alpha + Q;
  symmetrize(out.fs.P);
  out.fs.phase = Phase::Predicted;
  out.as = AdmmState{std::move(nu), std::move(w), as.rho, as.n_a};
  return out;
}

double rho_tv(long k, long N, double lambda) {
  if (N < 1 || k < 0) throw std::invalid_argument("rho_tv: need 0 <= k, N >= 1");
  if (!(lambda > 0)) throw std::invalid_argument("rho_tv: lambda must be > 0");
  return std::pow(10.0, static_cast<double>(k) / static_cast<double>(N) - 2.0) * lambda;
}

StepResult step_frozen(const FilterState& fs, const AdmmState& as, const FrozenConfig& cfg,
                       const Mat& C, const Mat& R, const Mat& Q, const Vec& y, const RegSpec& reg,
                       long k) {
  const Index n_x = fs.xhat.size();
  if (fs.phase != Phase::Predicted)
    throw std::logic_error("step_frozen: state must be in Predicted phase");
  if (as.nu.size() != n_x || as.w.size() != n_x)
    throw std::invalid_argument("step_frozen: ADMM state dimension mismatch");
  if (!(cfg.rho > 0) || !(cfg.eta > 0))
    throw std::invalid_argument("step_frozen: eta and rho must be > 0");
  if (C.cols() != n_x || C.rows() != y.size() || R.rows() != y.size())
    throw std::invalid_argument("step_frozen: measurement dimension mismatch");

  const Mat I = Mat::Identity(n_x, n_x);
  const Mat Pinv = factor_spd(fs.P, "step_frozen").solve(I);
  const Mat CtRinv = factor_spd(R, "step_frozen").solve(C).transpose();  // C' R^{-1}
  const Mat CtRinvC = CtRinv * C;

  // Stationarity of the x-update.
  Mat A = CtRinvC + cfg.rho * I + cfg.eta * Pinv;
  symmetrize(A);
  const Vec rhs = CtRinv * y - as.w + cfg.rho * as.nu + cfg.eta * (Pinv * fs.xhat);
  Vec x_next = factor_spd(A, "step_frozen").solve(rhs);

  Vec nu_next = prox_apply(reg, x_next + as.w / cfg.rho, cfg.rho);
  Vec w_next = as.w + cfg.rho * (x_next - nu_next);

  StepResult out;
  out.fs.xhat = std::move(x_next);
  if (k < cfg.k_n) {
    // P_{k+1} = Q + (P^{-1} + Cbar' Rbar^{-1} Cbar)^{-1}, where the fake
    // block contributes rho I.
    Mat info = Pinv + CtRinvC + cfg.rho * I;
    symmetrize(info);
    out.fs.P = Q + factor_spd(info, "step_frozen").solve(I);
    symmetrize(out.fs.P);
  } else {
    out.fs.P = fs.P;  // frozen, bit-identical
  }
  out.fs.phase = Phase::Predicted;
  out.as = AdmmState{std::move(nu_next), std::move(w_next), cfg.rho, 1};
  return out;
}

Schedule theorem_schedule(const RegretConstants& c, long N) {
  if (N < 1) throw std::invalid_argument("theorem_schedule: N must be >= 1");
  if (!(c.G_f > 0) || !(c.D_x > 0) || !(c.alpha_strong > 0) || !(c.D_nu > 0) || !(c.F > 0) ||
      c.M_kn < 0)
    throw std::invalid_argument("theorem_schedule: constants must be positive (M_kn >= 0)");
  const double sqrt_n = std::sqrt(static_cast<double>(N));
  const double root2a = std::sqrt(2.0 * c.alpha_strong);
  Schedule s;
  s.eta = c.G_f * sqrt_n / (c.D_x * root2a);
  s.rho = sqrt_n;
  s.rf_bound = sqrt_n * c.D_nu / 2.0 + c.G_f * c.D_x * sqrt_n / root2a +
               c.G_f * sqrt_n * (c.D_x * c.D_x + c.M_kn) / (c.D_x * root2a);
  s.rc_bound = 2.0 * c.F * sqrt_n + c.D_nu + 2.0 * c.G_f * (c.D_x * c.D_x + c.M_kn) / (c.D_x * root2a);
  return s;
}

}  // namespace kfadmm
