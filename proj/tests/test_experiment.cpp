#include <doctest.h>

#include <kfadmm/config.hpp>
#include <kfadmm/experiment.hpp>
#include <kfadmm/rng.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "oracles.hpp"

using namespace kfadmm;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

std::string tmpdir(const std::string& tag) {
  std::string dir = "exp_test_" + tag;
  std::filesystem::remove_all(dir);
  return dir;
}
}  // namespace

TEST_CASE("gen_lasso is deterministic and honest about its truth") {
  Dataset a = gen_lasso(5, 50);
  Dataset b = gen_lasso(5, 50);
  Dataset c = gen_lasso(6, 50);
  REQUIRE(a.size() == 50);
  REQUIRE(a.truth.has_value());
  CHECK(a.truth->size() == 3);
  CHECK(a.samples[0].C.rows() == 2);
  CHECK(a.samples[0].C.cols() == 3);
  bool identical = true, differs = false;
  for (int k = 0; k < 50; ++k) {
    identical = identical && (a.samples[k].C - b.samples[k].C).cwiseAbs().maxCoeff() == 0.0 &&
                (a.samples[k].y - b.samples[k].y).cwiseAbs().maxCoeff() == 0.0;
    differs = differs || (a.samples[k].y - c.samples[k].y).cwiseAbs().maxCoeff() > 0.0;
  }
  CHECK(identical);
  CHECK(differs);

  Dataset clean = gen_lasso(5, 30, 3, 2, 0.0);
  for (const auto& s : clean.samples)
    CHECK((s.y - s.C * *clean.truth).cwiseAbs().maxCoeff() == 0.0);

  // near-unregularized hindsight on noiseless data recovers the truth
  HindsightSolution sol = hindsight_prox_grad(clean, ModelSpec::linear_tv(3, 2),
                                              RegSpec::l1(1e-10), 1e-10, 20000);
  CHECK((sol.x_star - *clean.truth).norm() <= 1e-6 * (1.0 + clean.truth->norm()));
}

TEST_CASE("gen_lasso noise variance is calibrated") {
  Dataset d = gen_lasso(3, 50000);  // default sigma^2 = 1e-3
  double ss = 0.0;
  long m = 0;
  for (const auto& s : d.samples) {
    Vec r = s.y - s.C * *d.truth;
    ss += r.squaredNorm();
    m += r.size();
  }
  const double var = ss / static_cast<double>(m);
  CHECK(var == doctest::Approx(1e-3).epsilon(0.05));
}

TEST_CASE("gen_static reproduces its closed-form target") {
  Dataset d = gen_static(4, 200, 0.0);
  REQUIRE(d.size() == 200);
  for (const auto& s : d.samples) {
    REQUIRE(s.z.size() == 2);
    CHECK(s.z.cwiseAbs().maxCoeff() <= 3.0);
    const double want =
        (s.z[0] * s.z[0] - std::exp(s.z[1] / 10.0)) / (3.0 + std::abs(s.z[0] + s.z[1]));
    CHECK(s.y[0] == doctest::Approx(want).epsilon(1e-15));
  }
  // spot values of the target map itself
  CHECK((0.0 - std::exp(0.0)) / 3.0 == doctest::Approx(-1.0 / 3.0));  // z = (0,0) -> -1/3
  Dataset noisy = gen_static(4, 100000, 0.01);
  double ss = 0.0;
  for (long k = 0; k < noisy.size(); ++k) {
    const auto& s = noisy.samples[static_cast<std::size_t>(k)];
    const auto& c = d.samples[static_cast<std::size_t>(k % 200)];
    (void)c;
    const double want =
        (s.z[0] * s.z[0] - std::exp(s.z[1] / 10.0)) / (3.0 + std::abs(s.z[0] + s.z[1]));
    ss += (s.y[0] - want) * (s.y[0] - want);
  }
  CHECK(ss / 100000.0 == doctest::Approx(1e-4).epsilon(0.05));
}

TEST_CASE("gen_switching switches branches at the thirds") {
  Dataset d = gen_switching(9, 9000, 0.0);
  REQUIRE(d.size() == 9000);
  for (long k = 0; k < 9000; ++k) {
    const auto& s = d.samples[static_cast<std::size_t>(k)];
    const double coef = k >= 6000 ? 0.3 : 1.0;
    const double expdiv = k >= 3000 ? 2.0 : 10.0;
    const double want =
        (coef * s.z[0] * s.z[0] - std::exp(s.z[1] / expdiv)) / (3.0 + std::abs(s.z[0] + s.z[1]));
    CHECK(s.y[0] == doctest::Approx(want).epsilon(1e-15));
  }
  // rounded down to a multiple of three
  CHECK(gen_switching(9, 10, 0.0).size() == 9);
  CHECK_THROWS_AS((void)gen_switching(9, 2, 0.0), std::invalid_argument);
}

TEST_CASE("run_on_dataset: plain filter identifies a linear model") {
  Dataset data = gen_lasso(21, 400, 3, 2, 0.0);
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Custom;
  cfg.filter = FilterKind::PlainEkf;
  cfg.N = 400;
  cfg.model = ModelSpec::linear_tv(3, 2);
  cfg.reg = RegSpec::none();
  cfg.hyper.Q_scale = 1e-9;
  cfg.hyper.R_scale = 1e-3;
  cfg.hyper.P0_scale = 1.0;
  cfg.compute_regret = false;
  RunResult res = run_on_dataset(cfg, data);
  REQUIRE(res.trace.size() == 400);
  CHECK((res.x_final - *data.truth).norm() <= 1e-5 * (1.0 + data.truth->norm()));
  CHECK((res.nu_final - res.x_final).norm() == 0.0);
  CHECK(res.perf_x.mse <= 1e-8);
  CHECK_FALSE(res.has_regret);
}

TEST_CASE("run_on_dataset: vanishing rho ADMM tracks the plain filter") {
  Dataset data = gen_lasso(22, 100, 3, 2, 0.0316227766016838);
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Custom;
  cfg.filter = FilterKind::PlainEkf;
  cfg.N = 100;
  cfg.model = ModelSpec::linear_tv(3, 2);
  cfg.reg = RegSpec::none();
  cfg.compute_regret = false;
  RunResult plain = run_on_dataset(cfg, data);
  cfg.filter = FilterKind::EkfAdmm;
  cfg.hyper.rho = 1e-10;
  RunResult admm = run_on_dataset(cfg, data);
  CHECK((plain.x_final - admm.x_final).norm() <= 1e-6 * (1.0 + plain.x_final.norm()));
}

TEST_CASE("run_on_dataset: clip filter is feasible at every step") {
  ExperimentConfig cfg = make_preset("static-bounds", 300, 3);
  cfg.filter = FilterKind::EkfClip;
  cfg.compute_regret = false;
  cfg.keep_vectors = true;
  Dataset data = gen_static(cfg.seed, cfg.N, cfg.noise_sigma);
  RunResult res = run_on_dataset(cfg, data);
  CHECK(res.nu_cv_max == 0.0);
  CHECK(res.x_final.cwiseAbs().maxCoeff() <= 0.5);
  CHECK(res.nu_final.cwiseAbs().maxCoeff() <= 0.5);
  // trace.nu[0] is the raw initial point, which may start outside the box;
  // from the first update onward the snapshots are the projected estimates
  for (std::size_t k = 1; k < res.trace.nu.size(); ++k)
    CHECK(res.trace.nu[k].cwiseAbs().maxCoeff() <= 0.5);
}

TEST_CASE("run_on_dataset: trace vectors line up") {
  ExperimentConfig cfg = make_preset("lasso", 60, 2);
  cfg.keep_vectors = true;
  cfg.compute_regret = false;
  Dataset data = gen_lasso(cfg.seed, cfg.N, 3, 2, cfg.noise_sigma);
  RunResult res = run_on_dataset(cfg, data);
  REQUIRE(res.trace.x.size() == 60);
  REQUIRE(res.trace.nu.size() == 60);
  REQUIRE(res.trace.x_next.size() == 60);
  for (int k = 0; k + 1 < 60; ++k)
    CHECK((res.trace.x_next[k] - res.trace.x[k + 1]).norm() == 0.0);
  for (int k = 0; k < 60; ++k) {
    const double gap = (res.trace.x_next[k] - res.trace.nu[k]).squaredNorm();
    CHECK(res.trace.steps[k].gap_sq == doctest::Approx(gap).epsilon(1e-12));
  }
  CHECK((res.trace.x_next.back() - res.x_final).norm() == 0.0);
}

TEST_CASE("run_on_dataset: regret wiring is consistent") {
  ExperimentConfig cfg = make_preset("lasso", 250, 4);
  Dataset data = gen_lasso(cfg.seed, cfg.N, 3, 2, cfg.noise_sigma);
  RunResult res = run_on_dataset(cfg, data);
  REQUIRE(res.has_regret);
  CHECK(res.rf_final == doctest::Approx(res.curves.rf.back()).epsilon(1e-15));
  CHECK(res.rc_final == doctest::Approx(constraint_regret(res.trace)).epsilon(1e-12));
  CHECK(res.rf_per_n == doctest::Approx(res.rf_final / 250.0).epsilon(1e-12));
  // the per-step comparator sums back to the hindsight objective, so the
  // curve's final value agrees with the scalar functional
  const double scalar_rf = objective_regret(res.trace, res.hindsight_objective);
  CHECK(std::abs(res.rf_final - scalar_rf) <=
        1e-8 * (1.0 + std::abs(scalar_rf) + std::abs(res.hindsight_objective)));
  CHECK(res.hindsight_tol_met);
  // online play can't beat hindsight by definition on this convex problem
  CHECK(res.rf_final >= -1e-6 * (1.0 + std::abs(res.hindsight_objective)));
}

TEST_CASE("run determinism is bitwise") {
  ExperimentConfig cfg = make_preset("lasso", 150, 9);
  Dataset data = gen_lasso(cfg.seed, cfg.N, 3, 2, cfg.noise_sigma);
  RunResult a = run_on_dataset(cfg, data);
  RunResult b = run_on_dataset(cfg, data);
  CHECK((a.x_final - b.x_final).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.nu_final - b.nu_final).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.rf_final == b.rf_final);
  for (long k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace.steps[k].f == b.trace.steps[k].f);
    CHECK(a.trace.steps[k].gap_sq == b.trace.steps[k].gap_sq);
  }
}

TEST_CASE("run_experiment writes the advertised files and is reproducible") {
  ExperimentConfig cfg = make_preset("lasso", 200, 1);
  const std::string d1 = tmpdir("files1"), d2 = tmpdir("files2");
  cfg.output_dir = d1;
  RunResult r1 = run_experiment(cfg);
  cfg.output_dir = d2;
  RunResult r2 = run_experiment(cfg);

  for (const std::string f :
       {"trace.csv", "regret.csv", "summary", "config.resolved", "x_final.csv", "nu_final.csv",
        "loss_mse_reg.svg", "regret.svg"}) {
    CHECK(exists(d1 + "/" + f));
  }
  CHECK(slurp(d1 + "/trace.csv") == slurp(d2 + "/trace.csv"));
  CHECK(slurp(d1 + "/regret.csv") == slurp(d2 + "/regret.csv"));
  CHECK(slurp(d1 + "/x_final.csv") == slurp(d2 + "/x_final.csv"));

  const std::string trace = slurp(d1 + "/trace.csv");
  CHECK(trace.rfind("k,f,g_x,g_nu,gap_sq", 0) == 0);
  const std::string summary = slurp(d1 + "/summary");
  CHECK(summary.find("mse_x = ") != std::string::npos);
  CHECK(summary.find("rf_final = ") != std::string::npos);

  // resolved config reloads to the same experiment
  ExperimentConfig back = experiment_from_config(Config::parse_file(d1 + "/config.resolved"));
  CHECK(back.N == cfg.N);
  CHECK(back.seed == cfg.seed);
  CHECK(back.filter == cfg.filter);
  CHECK(back.hyper.rho == doctest::Approx(cfg.hyper.rho).epsilon(1e-15));
  CHECK(back.lambda == doctest::Approx(cfg.lambda).epsilon(1e-15));

  // no SVGs when disabled
  ExperimentConfig nosvg = make_preset("lasso", 100, 1);
  nosvg.emit_svg = false;
  const std::string d3 = tmpdir("files3");
  nosvg.output_dir = d3;
  (void)run_experiment(nosvg);
  CHECK(exists(d3 + "/trace.csv"));
  CHECK_FALSE(exists(d3 + "/loss_mse_reg.svg"));

  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
  std::filesystem::remove_all(d3);
  (void)r1;
  (void)r2;
}

TEST_CASE("presets") {
  CHECK(preset_names() ==
        std::vector<std::string>({"lasso", "static-l1", "static-bounds", "switching-l0"}));

  ExperimentConfig lasso = make_preset("lasso");
  CHECK(lasso.kind == ExperimentKind::Lasso);
  CHECK(lasso.filter == FilterKind::FrozenAdmm);
  CHECK(lasso.N == 2000);
  CHECK(lasso.hyper.k_n == 1000);
  CHECK(lasso.hyper.rho == doctest::Approx(1e4 * std::sqrt(2000.0)).epsilon(1e-12));
  CHECK(lasso.hyper.eta == doctest::Approx(1e-6 * std::sqrt(2000.0)).epsilon(1e-12));
  CHECK(lasso.reg.kind == RegKind::L1);

  ExperimentConfig l1 = make_preset("static-l1", 6000, 3);
  CHECK(l1.filter == FilterKind::EkfAdmmTv);
  CHECK(l1.N == 6000);
  CHECK(l1.seed == 3);
  CHECK(l1.lambda == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(l1.model.kind == ModelKind::Mlp);
  CHECK(l1.model.param_count() == 105);
  CHECK(l1.regret_g_at_x);

  ExperimentConfig bounds = make_preset("static-bounds");
  CHECK(bounds.reg.kind == RegKind::Box);
  CHECK(bounds.hyper.n_a == 5);
  CHECK(bounds.hyper.rho == 1.0);

  ExperimentConfig sw = make_preset("switching-l0");
  CHECK(sw.kind == ExperimentKind::SwitchingL0);
  CHECK(sw.N % 3 == 0);
  CHECK(sw.reg.kind == RegKind::L0);
  CHECK(sw.hyper.alpha_forget == doctest::Approx(0.9).epsilon(1e-15));

  CHECK_THROWS_WITH_AS((void)make_preset("nope"),
                       doctest::Contains("lasso"), std::invalid_argument);
}

TEST_CASE("validate names the offending field") {
  ExperimentConfig cfg = make_preset("lasso", 100, 0);
  cfg.N = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("experiment.N"),
                       std::invalid_argument);

  cfg = make_preset("lasso", 100, 0);
  cfg.hyper.rho = 0.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("filter.rho"), std::invalid_argument);

  cfg = make_preset("static-bounds", 100, 0);
  cfg.filter = FilterKind::EkfClip;
  cfg.reg = RegSpec::l1(0.1);
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("reg.kind"), std::invalid_argument);

  cfg = make_preset("static-l1", 100, 0);
  cfg.lambda = 0.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("reg.lambda"), std::invalid_argument);

  cfg = make_preset("lasso", 100, 0);
  cfg.segment_boundaries = {50, 20};
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("regret.segments"),
                       std::invalid_argument);
}

TEST_CASE("enum round trips") {
  for (const std::string s : {"lasso", "static-l1", "static-bounds", "switching-l0", "custom"})
    CHECK(to_string(experiment_kind_from(s)) == s);
  for (const std::string s :
       {"ekf-admm", "ekf-admm-tv", "frozen-admm", "online-admm", "ekf-clip", "plain-ekf"})
    CHECK(to_string(filter_kind_from(s)) == s);
  CHECK_THROWS_AS((void)experiment_kind_from("bogus"), std::invalid_argument);
  CHECK_THROWS_AS((void)filter_kind_from("bogus"), std::invalid_argument);
}

TEST_CASE("config text binding") {
  Config c = Config::parse_string(
      "# comment\n"
      "top = 1\n"
      "[experiment]\n"
      "kind = lasso   ; trailing comment\n"
      "N = 500\n"
      "[filter]\n"
      "rho = 2.5\n");
  CHECK(c.get_num("top") == 1.0);
  CHECK(c.get_str("experiment.kind") == "lasso");
  CHECK(c.get_int("experiment.N") == 500);
  CHECK(c.get_num("filter.rho") == 2.5);
  CHECK(c.get_num_or("filter.eta", 7.0) == 7.0);
  CHECK_THROWS_WITH_AS((void)c.get_num("absent.key"), doctest::Contains("absent.key"),
                       std::runtime_error);
  Config bad = Config::parse_string("[filter]\nrho = abc\n");
  CHECK_THROWS_WITH_AS((void)bad.get_num("filter.rho"), doctest::Contains("filter.rho"),
                       std::runtime_error);

  // to_text reparses to the same items
  Config again = Config::parse_string(c.to_text());
  CHECK(again.items() == c.items());
}

TEST_CASE("experiment_from_config") {
  Config c = Config::parse_string(
      "[experiment]\n"
      "kind = lasso\n"
      "N = 750\n"
      "seed = 11\n"
      "[filter]\n"
      "kind = online-admm\n");
  ExperimentConfig cfg = experiment_from_config(c);
  CHECK(cfg.kind == ExperimentKind::Lasso);
  CHECK(cfg.N == 750);
  CHECK(cfg.seed == 11);
  CHECK(cfg.filter == FilterKind::OnlineAdmm);
  // online-admm defaults: constant small P, unit eta
  CHECK(cfg.hyper.P0_scale == doctest::Approx(1e-2).epsilon(1e-15));
  CHECK(cfg.hyper.eta == doctest::Approx(1.0).epsilon(1e-15));

  Config bad = Config::parse_string("[experiment]\nkind = lasso\n[filter]\nbogus_key = 1\n");
  CHECK_THROWS_WITH_AS((void)experiment_from_config(bad), doctest::Contains("bogus_key"),
                       std::invalid_argument);

  // full round trip through the resolved form
  for (const std::string name : preset_names()) {
    ExperimentConfig a = make_preset(name, 120, 2);
    if (a.kind == ExperimentKind::SwitchingL0) a.N = 120;
    ExperimentConfig b = experiment_from_config(experiment_to_config(a));
    CHECK(b.kind == a.kind);
    CHECK(b.filter == a.filter);
    CHECK(b.N == a.N);
    CHECK(b.seed == a.seed);
    CHECK(b.lambda == a.lambda);
    CHECK(b.hyper.rho == a.hyper.rho);
    CHECK(b.hyper.n_a == a.hyper.n_a);
    CHECK(b.hyper.k_n == a.hyper.k_n);
    CHECK(b.hyper.alpha_forget == a.hyper.alpha_forget);
    CHECK(b.hyper.Q_scale == a.hyper.Q_scale);
    CHECK(b.reg.kind == a.reg.kind);
    CHECK(b.regret_g_at_x == a.regret_g_at_x);
    CHECK(b.noise_sigma == a.noise_sigma);
  }
}

TEST_CASE("summary text carries both evaluation points") {
  ExperimentConfig cfg = make_preset("lasso", 80, 5);
  cfg.compute_regret = false;
  Dataset data = gen_lasso(cfg.seed, cfg.N, 3, 2, cfg.noise_sigma);
  RunResult res = run_on_dataset(cfg, data);
  const std::string s = summary_text(cfg, res);
  for (const std::string key : {"experiment = ", "filter = ", "N = ", "seed = ", "loss_x = ",
                                "mse_x = ", "sparsity_x = ", "loss_nu = ", "mse_nu = ",
                                "sparsity_nu = ", "wall_s = "})
    CHECK(s.find(key) != std::string::npos);
}
