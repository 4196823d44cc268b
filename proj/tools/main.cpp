#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kfadmm/ekf.hpp"
#include "kfadmm/ekf_admm.hpp"
#include "kfadmm/experiment.hpp"
#include "kfadmm/prox.hpp"
#include "kfadmm/rng.hpp"

namespace {

using namespace kfadmm;

std::string num_str(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  const auto dots = s.find("..");
  std::vector<std::uint64_t> out;
  if (dots != std::string::npos) {
    const long lo = std::stol(s.substr(0, dots));
    const long hi = std::stol(s.substr(dots + 2));
    if (lo > hi) throw std::invalid_argument("--seeds: range is empty: " + s);
    for (long v = lo; v <= hi; ++v) out.push_back(static_cast<std::uint64_t>(v));
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoull(tok));
  if (out.empty()) throw std::invalid_argument("--seeds: no seeds in '" + s + "'");
  return out;
}

// CLI overrides are layered onto the config file / preset through the same
// key = value channel the file parser uses, so precedence is uniform.
struct Overrides {
  CLI::App* cmd = nullptr;
  long N = -1;
  long seed = 0;
  std::string out, filter;
  double rho = 0, eta = 0, alpha = 0, sigma = 0, lambda = 0;
  double q_scale = 0, r_scale = 0, p0_scale = 0;
  long n_a = 0, k_n = 0;
  bool no_svg = false, no_regret = false;

  void attach(CLI::App* c, bool with_seed) {
    cmd = c;
    c->add_option("--N", N, "number of samples");
    if (with_seed) c->add_option("--seed", seed, "PRNG seed");
    c->add_option("--out", out, "output directory");
    c->add_option("--filter", filter, "ekf-admm | ekf-admm-tv | frozen-admm | online-admm | "
                                      "ekf-clip | plain-ekf");
    c->add_option("--rho", rho, "ADMM penalty");
    c->add_option("--eta", eta, "proximal weight (frozen/online variants)");
    c->add_option("--alpha", alpha, "forgetting factor in (0,1]");
    c->add_option("--sigma", sigma, "measurement noise sigma");
    c->add_option("--lambda", lambda, "regularizer weight");
    c->add_option("--n-a", n_a, "inner ADMM iterations per step");
    c->add_option("--k-n", k_n, "covariance-update cutoff step");
    c->add_option("--Q-scale", q_scale, "process noise scale");
    c->add_option("--R-scale", r_scale, "measurement noise scale");
    c->add_option("--P0-scale", p0_scale, "initial covariance scale");
    c->add_flag("--no-svg", no_svg, "skip SVG plots");
    c->add_flag("--no-regret", no_regret, "skip hindsight/regret computation");
  }

  void apply(Config& file) const {
    auto set_if = [&](const char* flag, const std::string& key, const std::string& val) {
      if (cmd->count(flag)) file.set(key, val);
    };
    set_if("--N", "experiment.N", std::to_string(N));
    if (cmd->get_option_no_throw("--seed") && cmd->count("--seed"))
      file.set("experiment.seed", std::to_string(seed));
    set_if("--out", "experiment.output_dir", out);
    set_if("--filter", "filter.kind", filter);
    set_if("--rho", "filter.rho", num_str(rho));
    set_if("--eta", "filter.eta", num_str(eta));
    set_if("--alpha", "filter.alpha_forget", num_str(alpha));
    set_if("--sigma", "experiment.noise_sigma", num_str(sigma));
    set_if("--lambda", "reg.lambda", num_str(lambda));
    set_if("--n-a", "filter.n_a", std::to_string(n_a));
    set_if("--k-n", "filter.k_n", std::to_string(k_n));
    set_if("--Q-scale", "filter.Q_scale", num_str(q_scale));
    set_if("--R-scale", "filter.R_scale", num_str(r_scale));
    set_if("--P0-scale", "filter.P0_scale", num_str(p0_scale));
    if (no_svg) file.set("experiment.emit_svg", "false");
    if (no_regret) file.set("regret.compute", "false");
  }
};

Config base_config(const std::string& target) {
  if (std::filesystem::is_regular_file(target)) return Config::parse_file(target);
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), target) != names.end()) {
    Config f;
    f.set("experiment.kind", target);
    return f;
  }
  std::string list;
  for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
  throw std::invalid_argument("'" + target + "' is neither a config file nor a preset (presets: " +
                              list + ")");
}

int do_run(const std::string& target, const Overrides& ov) {
  Config file = base_config(target);
  ov.apply(file);
  const ExperimentConfig cfg = experiment_from_config(file);
  const RunResult res = run_experiment(cfg);
  std::fputs(summary_text(cfg, res).c_str(), stdout);
  if (!cfg.output_dir.empty()) std::printf("output_dir = %s\n", cfg.output_dir.c_str());
  return 0;
}

struct Agg {
  std::vector<double> vals;
  void add(double v) { vals.push_back(v); }
  double mean() const {
    double s = 0;
    for (double v : vals) s += v;
    return s / static_cast<double>(vals.size());
  }
  double stdev() const {
    if (vals.size() < 2) return 0.0;
    const double m = mean();
    double s = 0;
    for (double v : vals) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(vals.size() - 1));
  }
};

int do_sweep(const std::string& target, const Overrides& ov, const std::string& seeds_arg) {
  const auto seeds = parse_seeds(seeds_arg);
  Config base = base_config(target);
  ov.apply(base);
  const std::string out = base.get_str_or("experiment.output_dir", "");

  std::map<std::string, Agg> agg;
  std::string filter_name, experiment_name;
  for (std::uint64_t seed : seeds) {
    Config file = base;
    file.set("experiment.seed", std::to_string(seed));
    file.set("experiment.output_dir",
             out.empty() ? "" : out + "/seed" + std::to_string(seed));
    const ExperimentConfig cfg = experiment_from_config(file);
    const RunResult res = run_experiment(cfg);
    filter_name = to_string(cfg.filter);
    experiment_name = to_string(cfg.kind);
    agg["loss_x"].add(res.perf_x.loss);
    agg["mse_x"].add(res.perf_x.mse);
    agg["reg_x"].add(res.perf_x.reg);
    agg["cv_x"].add(res.perf_x.cv);
    agg["sparsity_x"].add(res.perf_x.sparsity);
    agg["loss_nu"].add(res.perf_nu.loss);
    agg["mse_nu"].add(res.perf_nu.mse);
    agg["cv_nu"].add(res.perf_nu.cv);
    agg["sparsity_nu"].add(res.perf_nu.sparsity);
    agg["wall_s"].add(res.wall_s);
    if (res.has_regret) {
      agg["rf_per_n"].add(res.rf_per_n);
      agg["rc_per_n"].add(res.rc_per_n);
    }
  }

  std::ostringstream table;
  table << "experiment = " << experiment_name << "\nfilter = " << filter_name
        << "\nruns = " << seeds.size() << "\n";
  for (const auto& [key, a] : agg) {
    char line[128];
    std::snprintf(line, sizeof(line), "%s = %.6g (%.6g)\n", key.c_str(), a.mean(), a.stdev());
    table << line;
  }
  std::fputs(table.str().c_str(), stdout);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream f(out + "/sweep_summary");
    f << table.str();
    std::printf("output_dir = %s\n", out.c_str());
  }
  return 0;
}

// Quick oracle-equivalence smoke checks; the full suites live in the test
// binaries.
int do_selftest() {
  int failures = 0;
  auto report = [&](bool ok, const char* name) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
  };

  {  // recursive filter vs dense trajectory solve
    std::mt19937_64 eng(7);
    GaussianDraw g;
    double worst = 0;
    for (int inst = 0; inst < 5; ++inst) {
      const int n_x = 2 + inst % 3, n_y = 1 + inst % 2, N = 15;
      Mat A(n_x, n_x);
      for (int i = 0; i < n_x * n_x; ++i) A(i / n_x, i % n_x) = g(eng);
      const Mat P0 = A * A.transpose() + Mat::Identity(n_x, n_x);
      Vec x0(n_x);
      for (int i = 0; i < n_x; ++i) x0(i) = g(eng);
      std::vector<LtvStep> steps;
      FilterState fs = make_state(x0, P0);
      Vec last_corrected;
      for (int k = 0; k < N; ++k) {
        LtvStep st;
        st.C = Mat(n_y, n_x);
        for (int i = 0; i < n_y * n_x; ++i) st.C(i / n_x, i % n_x) = g(eng);
        st.R = 0.5 * Mat::Identity(n_y, n_y);
        st.Q = 0.1 * Mat::Identity(n_x, n_x);
        st.y = Vec(n_y);
        for (int i = 0; i < n_y; ++i) st.y(i) = g(eng);
        steps.push_back(st);
        fs = correct(fs, st.C, st.R, st.y);
        last_corrected = fs.xhat;
        fs = predict(fs, st.Q);
      }
      const auto traj = batch_solve(x0, P0, steps);
      worst = std::max(worst, (traj[traj.size() - 2] - last_corrected).norm() /
                                  std::max(1.0, last_corrected.norm()));
      worst = std::max(worst,
                       (traj.back() - fs.xhat).norm() / std::max(1.0, fs.xhat.norm()));
    }
    report(worst < 1e-8, "batch-recursive equivalence");
  }

  {  // fast vs naive ADMM step
    std::mt19937_64 eng(11);
    GaussianDraw g;
    double worst = 0;
    for (int inst = 0; inst < 20; ++inst) {
      const int n_x = 3 + inst % 5, n_y = 1 + inst % 3;
      Mat A(n_x, n_x);
      for (int i = 0; i < n_x * n_x; ++i) A(i / n_x, i % n_x) = g(eng);
      FilterState fs = make_state(Vec::Zero(n_x), A * A.transpose() + Mat::Identity(n_x, n_x));
      AdmmState as = admm_init(Vec::Zero(n_x), 2.0, 1 + inst % 4);
      const RegSpec reg = RegSpec::l1(0.3);
      const Mat R = 0.4 * Mat::Identity(n_y, n_y), Q = 0.05 * Mat::Identity(n_x, n_x);
      for (int k = 0; k < 5; ++k) {
        Mat C(n_y, n_x);
        for (int i = 0; i < n_y * n_x; ++i) C(i / n_x, i % n_x) = g(eng);
        Vec y(n_y);
        for (int i = 0; i < n_y; ++i) y(i) = g(eng);
        const StepResult a = step_naive(fs, as, C, R, Q, y, reg);
        const StepResult b = step_fast(fs, as, C, R, Q, y, reg);
        worst = std::max({worst, (a.fs.xhat - b.fs.xhat).norm(), (a.fs.P - b.fs.P).norm(),
                          (a.as.nu - b.as.nu).norm(), (a.as.w - b.as.w).norm()});
        fs = a.fs;
        as = a.as;
      }
    }
    report(worst < 1e-9, "fast-naive ADMM equivalence");
  }

  {  // prox vs brute grid
    std::mt19937_64 eng(13);
    double worst = 0;
    for (int c = 0; c < 300; ++c) {
      const double v = uniform(eng, -3, 3), rho = uniform(eng, 0.1, 5),
                   lam = uniform(eng, 0, 2);
      const RegSpec regs[3] = {RegSpec::l1(lam), RegSpec::l0(lam), RegSpec::box(-1.0, 1.0)};
      for (const auto& reg : regs) {
        Vec vv(1);
        vv(0) = v;
        const Vec p = prox_apply(reg, vv, rho);
        const double obj_p =
            reg_value(reg, p).value_or_inf() + 0.5 * rho * (p(0) - v) * (p(0) - v);
        for (double cand = -3.5; cand <= 3.5; cand += 1e-3) {
          Vec cv(1);
          cv(0) = cand;
          const double obj_c =
              reg_value(reg, cv).value_or_inf() + 0.5 * rho * (cand - v) * (cand - v);
          worst = std::max(worst, obj_p - obj_c);
        }
      }
    }
    report(worst < 1e-9, "prox optimality vs grid");
  }

  {  // analytic vs finite-difference jacobian
    const ModelSpec spec = ModelSpec::mlp(2, {8, 8}, 1);
    bool ok = spec.param_count() == 105;
    std::mt19937_64 eng(17);
    GaussianDraw g;
    double worst = 0;
    for (int c = 0; c < 10; ++c) {
      Vec x = mlp_init(spec, 100 + static_cast<std::uint64_t>(c));
      Sample s;
      s.z = Vec(2);
      s.z(0) = uniform(eng, -1, 1);
      s.z(1) = uniform(eng, -1, 1);
      const Mat J = model_jacobian(spec, x, s);
      const double h = 1e-6;
      for (int j = 0; j < spec.param_count(); ++j) {
        Vec xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const double fd = (model_eval(spec, xp, s)(0) - model_eval(spec, xm, s)(0)) / (2 * h);
        worst = std::max(worst, std::abs(J(0, j) - fd) / std::max(1.0, std::abs(fd)));
      }
    }
    report(ok && worst < 1e-5, "MLP jacobian vs finite differences (105 params)");
  }

  std::printf("%s\n", failures == 0 ? "selftest: all checks passed"
                                    : "selftest: FAILURES detected");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online learning of parametric models by EKF-ADMM: experiments and regret "
               "evaluation"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run one experiment from a preset or config file");
  std::string run_target;
  run_cmd->add_option("target", run_target, "preset name or config file path")->required();
  Overrides run_ov;
  run_ov.attach(run_cmd, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "repeat a preset over seeds; report mean (std)");
  std::string sweep_target, seeds_arg = "0..9";
  sweep_cmd->add_option("target", sweep_target, "preset name or config file path")->required();
  sweep_cmd->add_option("--seeds", seeds_arg, "seed list: 0..19 or 1,2,5");
  Overrides sweep_ov;
  sweep_ov.attach(sweep_cmd, false);

  auto* self_cmd = app.add_subcommand("selftest", "quick oracle-equivalence checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(run_target, run_ov);
    if (sweep_cmd->parsed()) return do_sweep(sweep_target, sweep_ov, seeds_arg);
    if (self_cmd->parsed()) return do_selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
