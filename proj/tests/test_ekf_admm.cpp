#include <doctest.h>

#include <kfadmm/ekf_admm.hpp>
#include <kfadmm/rng.hpp>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"

using namespace kfadmm;

namespace {
Mat m1(double v) {
  Mat m(1, 1);
  m << v;
  return m;
}
Vec v1(double v) {
  Vec x(1);
  x << v;
  return x;
}

struct Instance {
  FilterState fs;
  Mat C, R, Q;
  Vec y;
};

Instance random_instance(std::mt19937_64& eng, GaussianDraw& gauss, Index n_x, Index n_y) {
  Instance in;
  in.fs = make_state(oracle::random_vec(eng, gauss, n_x), oracle::random_spd(eng, gauss, n_x));
  in.C = oracle::random_mat(eng, gauss, n_y, n_x);
  in.R = n_y > 0 ? oracle::random_spd(eng, gauss, n_y) : Mat(0, 0);
  in.y = oracle::random_vec(eng, gauss, n_y);
  in.Q = 1e-4 * Mat::Identity(n_x, n_x);
  return in;
}

// Reference inner loop: exact WLS x-update, prox, scaled dual ascent.
struct AdmmOracle {
  Vec x, nu, w;
};
AdmmOracle naive_oracle(const Instance& in, const AdmmState& as, const RegSpec& reg) {
  AdmmOracle o{in.fs.xhat, as.nu, as.w};
  for (int t = 0; t < as.n_a; ++t) {
    o.x = oracle::fake_wls(in.fs.xhat, in.fs.P, in.C, in.R, in.y, o.nu - o.w, as.rho);
    o.nu = prox_apply(reg, o.x + o.w, as.rho);
    o.w += o.x - o.nu;
  }
  return o;
}
}  // namespace

TEST_CASE("admm_init") {
  Vec x0 = v1(2.5);
  AdmmState as = admm_init(x0, 0.7, 3);
  CHECK(as.nu[0] == 2.5);
  CHECK(as.w[0] == 0.0);
  CHECK(as.rho == 0.7);
  CHECK(as.n_a == 3);
  CHECK_THROWS_AS((void)admm_init(x0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)admm_init(x0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("step_naive with vanishing rho reduces to the plain filter") {
  auto eng = substream(31, Stream::Data);
  GaussianDraw gauss;
  Instance in = random_instance(eng, gauss, 4, 2);
  AdmmState as = admm_init(in.fs.xhat, 1e-10, 1);
  StepResult out = step_naive(in.fs, as, in.C, in.R, in.Q, in.y, RegSpec::none());

  FilterState plain = predict(correct(in.fs, in.C, in.R, in.y), in.Q);
  CHECK((out.fs.xhat - plain.xhat).norm() <= 1e-6 * (1.0 + plain.xhat.norm()));
  CHECK((out.fs.P - plain.P).norm() <= 1e-6 * (1.0 + plain.P.norm()));
  CHECK(out.fs.phase == Phase::Predicted);
}

TEST_CASE("step_naive matches the WLS + prox oracle") {
  auto eng = substream(32, Stream::Data);
  GaussianDraw gauss;
  for (int rep = 0; rep < 40; ++rep) {
    const Index n_x = 2 + rep % 4;
    const Index n_y = rep % 3;
    Instance in = random_instance(eng, gauss, n_x, n_y);
    RegSpec reg = rep % 4 == 0   ? RegSpec::none()
                  : rep % 4 == 1 ? RegSpec::l1(0.2)
                  : rep % 4 == 2 ? RegSpec::l0(0.05)
                                 : RegSpec::box(-0.5, 0.5);
    AdmmState as = admm_init(in.fs.xhat, 1.5, 1 + rep % 4);
    as.w = 0.1 * oracle::random_vec(eng, gauss, n_x);  // nonzero warm-started dual
    StepResult out = step_naive(in.fs, as, in.C, in.R, in.Q, in.y, reg);
    AdmmOracle o = naive_oracle(in, as, reg);
    CHECK((out.fs.xhat - o.x).norm() <= 1e-9 * (1.0 + o.x.norm()));
    CHECK((out.as.nu - o.nu).norm() <= 1e-9 * (1.0 + o.nu.norm()));
    CHECK((out.as.w - o.w).norm() <= 1e-9 * (1.0 + o.w.norm()));

    // posterior covariance in information form, then forget/predict
    Mat info = (in.fs.P.inverse() + in.C.transpose() * in.R.inverse() * in.C +
                as.rho * Mat::Identity(n_x, n_x))
                   .inverse();
    if (n_y == 0)
      info = (in.fs.P.inverse() + as.rho * Mat::Identity(n_x, n_x)).inverse();
    CHECK((out.fs.P - (info + in.Q)).norm() <= 1e-9 * (1.0 + info.norm()));
  }
}

TEST_CASE("step_fast equals step_naive") {
  auto eng = substream(33, Stream::Data);
  GaussianDraw gauss;
  for (int rep = 0; rep < 60; ++rep) {
    const Index n_x = 2 + rep % 5;
    const Index n_y = rep % 4;  // includes measurement-free steps
    Instance in = random_instance(eng, gauss, n_x, n_y);
    RegSpec reg = rep % 4 == 0   ? RegSpec::none()
                  : rep % 4 == 1 ? RegSpec::l1(0.2)
                  : rep % 4 == 2 ? RegSpec::l0(0.05)
                                 : RegSpec::box(-0.5, 0.5);
    const double rho = std::exp(uniform(eng, std::log(1e-2), std::log(1e3)));
    const double alpha = rep % 2 == 0 ? 1.0 : 0.9;
    AdmmState as = admm_init(in.fs.xhat, rho, 1 + rep % 6);
    as.w = 0.1 * oracle::random_vec(eng, gauss, n_x);
    StepResult a = step_naive(in.fs, as, in.C, in.R, in.Q, in.y, reg, alpha);
    StepResult b = step_fast(in.fs, as, in.C, in.R, in.Q, in.y, reg, alpha);
    CHECK((a.fs.xhat - b.fs.xhat).norm() <= 1e-9 * (1.0 + a.fs.xhat.norm()));
    CHECK((a.fs.P - b.fs.P).norm() <= 1e-9 * (1.0 + a.fs.P.norm()));
    CHECK((a.as.nu - b.as.nu).norm() <= 1e-9 * (1.0 + a.as.nu.norm()));
    CHECK((a.as.w - b.as.w).norm() <= 1e-9 * (1.0 + a.as.w.norm()));
  }
}

TEST_CASE("dual bookkeeping is exact") {
  auto eng = substream(34, Stream::Data);
  GaussianDraw gauss;
  Instance in = random_instance(eng, gauss, 3, 2);
  AdmmState as = admm_init(in.fs.xhat, 2.0, 1);
  as.w = oracle::random_vec(eng, gauss, 3);
  StepResult out = step_fast(in.fs, as, in.C, in.R, in.Q, in.y, RegSpec::l1(0.3));
  Vec expect = as.w;
  expect += out.fs.xhat - out.as.nu;  // same operation the step performs
  CHECK((out.as.w - expect).norm() == 0.0);

  // from a zero dual the identity is literal
  AdmmState as0 = admm_init(in.fs.xhat, 2.0, 1);
  StepResult o2 = step_fast(in.fs, as0, in.C, in.R, in.Q, in.y, RegSpec::l1(0.3));
  CHECK((o2.as.w - (o2.fs.xhat - o2.as.nu)).norm() == 0.0);
}

TEST_CASE("large l1 penalty pins nu at zero") {
  auto eng = substream(35, Stream::Data);
  GaussianDraw gauss;
  Instance in = random_instance(eng, gauss, 4, 2);
  AdmmState as = admm_init(in.fs.xhat, 1.0, 5);
  StepResult out = step_fast(in.fs, as, in.C, in.R, in.Q, in.y, RegSpec::l1(1e6));
  CHECK(out.as.nu.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the dual warm start carries information across steps") {
  auto eng = substream(36, Stream::Data);
  GaussianDraw gauss;
  Instance in1 = random_instance(eng, gauss, 3, 2);
  Instance in2 = random_instance(eng, gauss, 3, 2);
  RegSpec reg = RegSpec::l1(0.4);
  AdmmState as = admm_init(in1.fs.xhat, 1.0, 2);
  StepResult s1 = step_fast(in1.fs, as, in1.C, in1.R, in1.Q, in1.y, reg);
  CHECK(s1.as.w.cwiseAbs().maxCoeff() > 0.0);

  StepResult carried = step_fast(s1.fs, s1.as, in2.C, in2.R, in2.Q, in2.y, reg);
  AdmmState wiped = s1.as;
  wiped.w.setZero();
  StepResult reset = step_fast(s1.fs, wiped, in2.C, in2.R, in2.Q, in2.y, reg);
  CHECK((carried.fs.xhat - reset.fs.xhat).norm() > 0.0);
}

TEST_CASE("inner iterations tighten consensus and reach the joint minimizer") {
  auto eng = substream(37, Stream::Data);
  GaussianDraw gauss;
  Instance in = random_instance(eng, gauss, 3, 2);
  RegSpec reg = RegSpec::l1(0.3);

  auto gap = [&](int n_a) {
    AdmmState as = admm_init(in.fs.xhat, 1.0, n_a);
    StepResult out = step_naive(in.fs, as, in.C, in.R, in.Q, in.y, reg);
    return (out.fs.xhat - out.as.nu).norm();
  };
  CHECK(gap(50) <= gap(1) + 1e-15);

  AdmmState as = admm_init(in.fs.xhat, 1.0, 500);
  StepResult out = step_naive(in.fs, as, in.C, in.R, in.Q, in.y, reg);
  Vec xstar = oracle::prox_grad_quadratic(in.fs.xhat, in.fs.P, in.C, in.R, in.y, reg);
  CHECK((out.fs.xhat - xstar).norm() <= 1e-4 * (1.0 + xstar.norm()));
  CHECK((out.as.nu - xstar).norm() <= 1e-4 * (1.0 + xstar.norm()));
}

TEST_CASE("rho_tv schedule") {
  const double lam = 1e-4;
  CHECK(rho_tv(0, 1000, lam) == doctest::Approx(lam / 100.0).epsilon(1e-12));
  CHECK(rho_tv(1000, 1000, lam) == doctest::Approx(lam / 10.0).epsilon(1e-12));
  CHECK(rho_tv(500, 1000, lam) == doctest::Approx(lam * std::pow(10.0, -1.5)).epsilon(1e-12));
  for (long k = 1; k <= 1000; k += 37) CHECK(rho_tv(k, 1000, lam) > rho_tv(k - 1, 1000, lam));
  CHECK_THROWS_AS((void)rho_tv(-1, 10, lam), std::invalid_argument);
  CHECK_THROWS_AS((void)rho_tv(0, 10, 0.0), std::invalid_argument);
}

TEST_CASE("step_frozen scalar example") {
  FilterState fs = make_state(v1(0.0), m1(1.0));
  AdmmState as = admm_init(v1(0.0), 1.0, 1);
  FrozenConfig cfg{1.0, 1.0, 10};
  StepResult out = step_frozen(fs, as, cfg, m1(1.0), m1(1.0), m1(1e-4), v1(3.0),
                               RegSpec::none(), 0);
  CHECK(out.fs.xhat[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.as.nu[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.as.w[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("step_frozen with tiny rho and unit eta is the measurement update") {
  auto eng = substream(38, Stream::Data);
  GaussianDraw gauss;
  Instance in = random_instance(eng, gauss, 4, 2);
  AdmmState as = admm_init(in.fs.xhat, 1.0, 1);
  FrozenConfig cfg{1.0, 1e-12, 100};
  StepResult out =
      step_frozen(in.fs, as, cfg, in.C, in.R, in.Q, in.y, RegSpec::none(), 0);
  FilterState plain = correct(in.fs, in.C, in.R, in.y);
  CHECK((out.fs.xhat - plain.xhat).norm() <= 1e-6 * (1.0 + plain.xhat.norm()));
}

TEST_CASE("step_frozen covariance freeze") {
  auto eng = substream(39, Stream::Data);
  GaussianDraw gauss;
  Instance in = random_instance(eng, gauss, 3, 2);
  AdmmState as = admm_init(in.fs.xhat, 1.0, 1);
  FrozenConfig cfg{0.5, 2.0, 5};
  RegSpec reg = RegSpec::l1(0.1);

  // below k_n the covariance moves and follows the information-form recursion
  StepResult live = step_frozen(in.fs, as, cfg, in.C, in.R, in.Q, in.y, reg, 4);
  CHECK((live.fs.P - in.fs.P).norm() > 0.0);
  Mat info = (in.fs.P.inverse() + in.C.transpose() * in.R.inverse() * in.C +
              cfg.rho * Mat::Identity(3, 3))
                 .inverse();
  CHECK((live.fs.P - (info + in.Q)).norm() <= 1e-9 * (1.0 + info.norm()));

  // at and past k_n it is carried over bit for bit
  StepResult frozen = step_frozen(in.fs, as, cfg, in.C, in.R, in.Q, in.y, reg, 5);
  CHECK((frozen.fs.P - in.fs.P).cwiseAbs().maxCoeff() == 0.0);
  StepResult later = step_frozen(in.fs, as, cfg, in.C, in.R, in.Q, in.y, reg, 50);
  CHECK((later.fs.P - in.fs.P).cwiseAbs().maxCoeff() == 0.0);

  // and the estimate update is the stationarity condition of the x-step
  Mat A = in.C.transpose() * in.R.inverse() * in.C + cfg.rho * Mat::Identity(3, 3) +
          cfg.eta * in.fs.P.inverse();
  Vec rhs = in.C.transpose() * in.R.inverse() * in.y - as.w + cfg.rho * as.nu +
            cfg.eta * in.fs.P.inverse() * in.fs.xhat;
  Vec xstar = A.ldlt().solve(rhs);
  CHECK((live.fs.xhat - xstar).norm() <= 1e-9 * (1.0 + xstar.norm()));

  // unscaled dual: w+ = w + rho (x+ - nu+)
  Vec wplus = as.w + cfg.rho * (live.fs.xhat - live.as.nu);
  CHECK((live.as.w - wplus).norm() <= 1e-12 * (1.0 + wplus.norm()));
  // nu+ = prox_{g/rho}(x+ + w/rho)
  Vec nuplus = prox_apply(reg, live.fs.xhat + as.w / cfg.rho, cfg.rho);
  CHECK((live.as.nu - nuplus).norm() == 0.0);
}

TEST_CASE("theorem_schedule") {
  RegretConstants c;  // all ones, M_kn = 0
  c.M_kn = 0.0;
  Schedule s = theorem_schedule(c, 4);
  CHECK(s.eta == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.rho == doctest::Approx(2.0).epsilon(1e-12));

  // bounds are sublinear: bound/N -> 0 along a geometric ladder
  double prev = 1e100;
  for (long N : {100L, 10000L, 1000000L}) {
    Schedule sn = theorem_schedule(c, N);
    CHECK(sn.rf_bound / static_cast<double>(N) < prev);
    prev = sn.rf_bound / static_cast<double>(N);
    CHECK(sn.rc_bound / static_cast<double>(N) <= 1e2 / std::sqrt(static_cast<double>(N)) * 10);
  }

  CHECK_THROWS_AS((void)theorem_schedule(c, 0), std::invalid_argument);
  RegretConstants bad = c;
  bad.G_f = 0.0;
  CHECK_THROWS_AS((void)theorem_schedule(bad, 10), std::invalid_argument);
}

TEST_CASE("step input validation") {
  Instance in;
  in.fs = make_state(Vec::Zero(2), Mat::Identity(2, 2));
  in.C = Mat::Ones(1, 2);
  in.R = m1(1.0);
  in.Q = Mat::Identity(2, 2);
  in.y = v1(1.0);
  AdmmState as = admm_init(Vec::Zero(2), 1.0, 1);

  AdmmState bad_dim = as;
  bad_dim.nu = Vec::Zero(3);
  CHECK_THROWS_AS((void)step_fast(in.fs, bad_dim, in.C, in.R, in.Q, in.y, RegSpec::none()),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      (void)step_naive(in.fs, as, in.C, in.R, in.Q, in.y, RegSpec::none(), 1.5),
      std::invalid_argument);
  FilterState corrected = correct(in.fs, in.C, in.R, in.y);
  CHECK_THROWS_AS((void)step_fast(corrected, as, in.C, in.R, in.Q, in.y, RegSpec::none()),
                  std::logic_error);
}
