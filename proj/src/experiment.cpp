#include "kfadmm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "kfadmm/rng.hpp"
#include "kfadmm/svg.hpp"

namespace kfadmm {

namespace {

std::string num(double v, const char* spec = "%.12g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config: " + field + " " + why);
}

bool is_admm(FilterKind f) {
  return f == FilterKind::EkfAdmm || f == FilterKind::EkfAdmmTv ||
         f == FilterKind::FrozenAdmm || f == FilterKind::OnlineAdmm;
}

double box_violation_inf(const Vec& v, const RegSpec& reg) {
  double worst = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double below = reg.lo_at(i) - v(i);
    const double above = v(i) - reg.hi_at(i);
    worst = std::max({worst, below, above});
  }
  return worst;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Lasso: return "lasso";
    case ExperimentKind::StaticL1: return "static-l1";
    case ExperimentKind::StaticBounds: return "static-bounds";
    case ExperimentKind::SwitchingL0: return "switching-l0";
    case ExperimentKind::Custom: return "custom";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(FilterKind k) {
  switch (k) {
    case FilterKind::EkfAdmm: return "ekf-admm";
    case FilterKind::EkfAdmmTv: return "ekf-admm-tv";
    case FilterKind::FrozenAdmm: return "frozen-admm";
    case FilterKind::OnlineAdmm: return "online-admm";
    case FilterKind::EkfClip: return "ekf-clip";
    case FilterKind::PlainEkf: return "plain-ekf";
  }
  throw std::logic_error("unreachable");
}

ExperimentKind experiment_kind_from(const std::string& s) {
  if (s == "lasso") return ExperimentKind::Lasso;
  if (s == "static-l1") return ExperimentKind::StaticL1;
  if (s == "static-bounds") return ExperimentKind::StaticBounds;
  if (s == "switching-l0") return ExperimentKind::SwitchingL0;
  if (s == "custom") return ExperimentKind::Custom;
  bad_field("experiment.kind", "unknown value '" + s +
                                   "' (expected lasso, static-l1, static-bounds, "
                                   "switching-l0, custom)");
}

FilterKind filter_kind_from(const std::string& s) {
  if (s == "ekf-admm") return FilterKind::EkfAdmm;
  if (s == "ekf-admm-tv") return FilterKind::EkfAdmmTv;
  if (s == "frozen-admm") return FilterKind::FrozenAdmm;
  if (s == "online-admm") return FilterKind::OnlineAdmm;
  if (s == "ekf-clip") return FilterKind::EkfClip;
  if (s == "plain-ekf") return FilterKind::PlainEkf;
  bad_field("filter.kind", "unknown value '" + s +
                               "' (expected ekf-admm, ekf-admm-tv, frozen-admm, "
                               "online-admm, ekf-clip, plain-ekf)");
}

void ExperimentConfig::validate() const {
  if (N < 1) bad_field("experiment.N", "must be >= 1");
  if (noise_sigma < 0) bad_field("experiment.noise_sigma", "must be >= 0");
  if (model.param_count() < 1) bad_field("model", "has no parameters");
  if (hyper.n_a < 1) bad_field("filter.n_a", "must be >= 1");
  if (!(hyper.Q_scale > 0)) bad_field("filter.Q_scale", "must be > 0");
  if (!(hyper.R_scale > 0)) bad_field("filter.R_scale", "must be > 0");
  if (!(hyper.P0_scale > 0)) bad_field("filter.P0_scale", "must be > 0");
  if (!(hyper.alpha_forget > 0) || hyper.alpha_forget > 1)
    bad_field("filter.alpha_forget", "must be in (0, 1]");
  if (is_admm(filter) && !(hyper.rho > 0)) bad_field("filter.rho", "must be > 0");
  if (filter == FilterKind::EkfAdmmTv && !(lambda > 0))
    bad_field("reg.lambda", "must be > 0 for ekf-admm-tv (rho_k scales with lambda)");
  if ((filter == FilterKind::FrozenAdmm || filter == FilterKind::OnlineAdmm) && hyper.eta < 0)
    bad_field("filter.eta", "must be >= 0");
  if (filter == FilterKind::EkfClip && reg.kind != RegKind::Box)
    bad_field("reg.kind", "must be box for ekf-clip");
  if (compute_regret) {
    if (!(regret_tol > 0)) bad_field("regret.tol", "must be > 0");
    if (regret_max_iter < 1) bad_field("regret.max_iter", "must be >= 1");
    long prev = 0;
    for (long b : segment_boundaries) {
      if (b <= prev || b >= N) bad_field("regret.segments", "must be increasing inside (0, N)");
      prev = b;
    }
  }
}

Dataset gen_lasso(std::uint64_t seed, long N, int n_x, int n_y, double noise_sigma) {
  if (N < 1) throw std::invalid_argument("gen_lasso: N must be >= 1");
  if (n_x < 1 || n_y < 1) throw std::invalid_argument("gen_lasso: bad dimensions");
  auto truth_eng = substream(seed, Stream::Truth);
  auto data_eng = substream(seed, Stream::Data);
  auto noise_eng = substream(seed, Stream::Noise);
  GaussianDraw g_truth, g_data, g_noise;

  Vec x_true(n_x);
  for (int i = 0; i < n_x; ++i) x_true(i) = g_truth(truth_eng);

  Dataset out;
  out.truth = x_true;
  out.samples.reserve(static_cast<std::size_t>(N));
  for (long k = 0; k < N; ++k) {
    Sample s;
    s.k = k;
    s.C = Mat(n_y, n_x);
    for (int i = 0; i < n_y; ++i)
      for (int j = 0; j < n_x; ++j) s.C(i, j) = g_data(data_eng);
    s.y = s.C * x_true;
    for (int i = 0; i < n_y; ++i) s.y(i) += noise_sigma * g_noise(noise_eng);
    out.samples.push_back(std::move(s));
  }
  return out;
}

namespace {

double nn_target(double z1, double z2, double coef, double expdiv) {
  return (coef * z1 * z1 - std::exp(z2 / expdiv)) / (3.0 + std::abs(z1 + z2));
}

Dataset gen_nn(std::uint64_t seed, long N, double noise_sigma, bool switching) {
  if (N < 1) throw std::invalid_argument("gen_static: N must be >= 1");
  auto data_eng = substream(seed, Stream::Data);
  auto noise_eng = substream(seed, Stream::Noise);
  GaussianDraw g_noise;

  Dataset out;
  out.samples.reserve(static_cast<std::size_t>(N));
  for (long k = 0; k < N; ++k) {
    Sample s;
    s.k = k;
    s.z = Vec(2);
    s.z(0) = uniform(data_eng, -3.0, 3.0);
    s.z(1) = uniform(data_eng, -3.0, 3.0);
    double coef = 1.0, expdiv = 10.0;
    if (switching && k >= N / 3) {
      expdiv = 2.0;
      if (k >= 2 * N / 3) coef = 0.3;
    }
    s.y = Vec(1);
    s.y(0) = nn_target(s.z(0), s.z(1), coef, expdiv) + noise_sigma * g_noise(noise_eng);
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Dataset gen_static(std::uint64_t seed, long N, double noise_sigma) {
  return gen_nn(seed, N, noise_sigma, false);
}

Dataset gen_switching(std::uint64_t seed, long N, double noise_sigma) {
  N -= N % 3;
  if (N < 3) throw std::invalid_argument("gen_switching: N must be >= 3");
  return gen_nn(seed, N, noise_sigma, true);
}

RunResult run_on_dataset(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  const long N = data.size();
  if (N < 1) throw std::invalid_argument("run_on_dataset: empty dataset");
  const int n_x = cfg.model.param_count();
  const int n_y = cfg.model.n_out;
  const double weight = 1.0 / cfg.hyper.R_scale;

  const Mat Q = cfg.hyper.Q_scale * Mat::Identity(n_x, n_x);
  const Mat R = cfg.hyper.R_scale * Mat::Identity(n_y, n_y);
  const Vec x0 = cfg.model.kind == ModelKind::Mlp ? mlp_init(cfg.model, cfg.seed)
                                                  : Vec::Zero(n_x);

  FilterState fs = make_state(x0, cfg.hyper.P0_scale * Mat::Identity(n_x, n_x));
  AdmmState as = admm_init(x0, cfg.hyper.rho, cfg.hyper.n_a);
  FrozenConfig fz;
  fz.eta = cfg.hyper.eta;
  fz.rho = cfg.hyper.rho;
  fz.k_n = cfg.filter == FilterKind::OnlineAdmm ? 0
           : cfg.hyper.k_n < 0                  ? LONG_MAX
                                                : cfg.hyper.k_n;

  RunResult out;
  out.trace.keep_vectors = cfg.keep_vectors;
  out.trace.steps.reserve(static_cast<std::size_t>(N));

  std::vector<long> seg_bounds = cfg.segment_boundaries;
  if (seg_bounds.empty() && cfg.kind == ExperimentKind::SwitchingL0)
    seg_bounds = {N / 3, 2 * N / 3};
  std::vector<long> seg_ends = seg_bounds;
  seg_ends.push_back(N);
  std::vector<Vec> seg_warm;  // pre-step estimate at each segment's last step

  const auto run_start = std::chrono::steady_clock::now();
  for (long k = 0; k < N; ++k) {
    const Sample& s = data.samples[static_cast<std::size_t>(k)];
    const auto t0 = std::chrono::steady_clock::now();

    const Vec h0 = model_eval(cfg.model, fs.xhat, s);
    const Mat C = cfg.model.kind == ModelKind::Mlp ? model_jacobian(cfg.model, fs.xhat, s) : s.C;
    const Vec ylin =
        cfg.model.kind == ModelKind::Mlp ? linearized_target(s.y, h0, C, fs.xhat) : s.y;

    StepRecord rec;
    rec.f = 0.5 * weight * (s.y - h0).squaredNorm();
    rec.g_x = reg_value(cfg.reg, fs.xhat).value_or_inf();
    rec.g_nu = reg_value(cfg.reg, as.nu).value_or_inf();
    const Vec nu_pre = as.nu;
    if (cfg.keep_vectors) {
      out.trace.x.push_back(fs.xhat);
      out.trace.nu.push_back(nu_pre);
    }
    if (cfg.compute_regret && seg_warm.size() < seg_ends.size() &&
        k == seg_ends[seg_warm.size()] - 1)
      seg_warm.push_back(fs.xhat);

    switch (cfg.filter) {
      case FilterKind::PlainEkf: {
        fs = correct(fs, C, R, ylin);
        as.nu = fs.xhat;
        if (cfg.hyper.alpha_forget < 1.0) fs = forget(fs, cfg.hyper.alpha_forget);
        fs = predict(fs, Q);
        break;
      }
      case FilterKind::EkfClip: {
        // The filter itself stays plain; the clipped copy is the reported estimate.
        fs = correct(fs, C, R, ylin);
        as.nu = project_box(fs.xhat, cfg.reg);
        if (cfg.hyper.alpha_forget < 1.0) fs = forget(fs, cfg.hyper.alpha_forget);
        fs = predict(fs, Q);
        break;
      }
      case FilterKind::EkfAdmm:
      case FilterKind::EkfAdmmTv: {
        if (cfg.filter == FilterKind::EkfAdmmTv) {
          // Keep the unscaled dual rho*w continuous when the penalty moves.
          const double rho_next = rho_tv(k, N, cfg.lambda);
          if (k > 0) as.w *= as.rho / rho_next;
          as.rho = rho_next;
        }
        StepResult r = step_fast(fs, as, C, R, Q, ylin, cfg.reg, cfg.hyper.alpha_forget);
        fs = std::move(r.fs);
        as = std::move(r.as);
        break;
      }
      case FilterKind::FrozenAdmm:
      case FilterKind::OnlineAdmm: {
        StepResult r = step_frozen(fs, as, fz, C, R, Q, ylin, cfg.reg, k);
        fs = std::move(r.fs);
        as = std::move(r.as);
        break;
      }
    }

    rec.gap_sq = (fs.xhat - nu_pre).squaredNorm();
    rec.wall_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    if (cfg.reg.kind == RegKind::Box)
      out.nu_cv_max = std::max(out.nu_cv_max, box_violation_inf(as.nu, cfg.reg));
    out.trace.steps.push_back(rec);
    if (cfg.keep_vectors) out.trace.x_next.push_back(fs.xhat);
  }
  out.wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();

  out.x_final = cfg.filter == FilterKind::EkfClip ? as.nu : fs.xhat;
  out.nu_final = as.nu;
  out.perf_x = perf_indices(out.x_final, data, cfg.model, cfg.reg, weight);
  out.perf_nu = perf_indices(out.nu_final, data, cfg.model, cfg.reg, weight);

  if (cfg.compute_regret) {
    const double scale = 1.0 + batch_gradient(data, cfg.model, x0, weight).norm();
    const double tol_abs = cfg.regret_tol * scale;

    std::vector<double> comp(static_cast<std::size_t>(N));
    if (seg_bounds.empty()) {
      // Two candidate starts: the run's initial point and its final iterate
      // (cold starts alone leave the non-convex comparator far too loose).
      HindsightSolution hs = hindsight_prox_grad(data, cfg.model, cfg.reg, tol_abs,
                                                 cfg.regret_max_iter, weight, &x0);
      HindsightSolution warm = hindsight_prox_grad(data, cfg.model, cfg.reg, tol_abs,
                                                   cfg.regret_max_iter, weight, &seg_warm[0]);
      if (warm.objective < hs.objective) hs = std::move(warm);
      const double gstar = reg_value(cfg.reg, hs.x_star).value_or_inf();
      for (long k = 0; k < N; ++k)
        comp[static_cast<std::size_t>(k)] =
            0.5 * weight *
                (data.samples[static_cast<std::size_t>(k)].y -
                 model_eval(cfg.model, hs.x_star, data.samples[static_cast<std::size_t>(k)]))
                    .squaredNorm() +
            gstar;
      out.hindsight_objective = hs.objective;
      out.hindsight_iterations = hs.iterations;
      out.hindsight_tol_met = hs.tolerance_met;
    } else {
      SegmentHindsight sh = segment_hindsight(data, seg_bounds, cfg.model, cfg.reg, tol_abs,
                                              cfg.regret_max_iter, weight, &x0, &seg_warm);
      for (std::size_t i = 0; i < sh.parts.size(); ++i) {
        const long lo = sh.starts[i];
        const long hi = (i + 1 < sh.starts.size()) ? sh.starts[i + 1] : N;
        const double gstar = reg_value(cfg.reg, sh.parts[i].x_star).value_or_inf();
        for (long k = lo; k < hi; ++k)
          comp[static_cast<std::size_t>(k)] =
              0.5 * weight *
                  (data.samples[static_cast<std::size_t>(k)].y -
                   model_eval(cfg.model, sh.parts[i].x_star,
                              data.samples[static_cast<std::size_t>(k)]))
                      .squaredNorm() +
              gstar;
        out.hindsight_iterations += sh.parts[i].iterations;
      }
      out.hindsight_objective = sh.objective;
      out.hindsight_tol_met =
          std::all_of(sh.parts.begin(), sh.parts.end(),
                      [](const HindsightSolution& h) { return h.tolerance_met; });
    }

    out.curves = regret_curves(out.trace, comp, !cfg.regret_g_at_x);
    out.rf_final = out.curves.rf.back();
    out.rc_final = out.curves.rc.back();
    out.rf_per_n = out.curves.rf_per_n.back();
    out.rc_per_n = out.curves.rc_per_n.back();
    out.has_regret = true;
  }
  return out;
}

namespace {

Dataset generate(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Lasso:
      return gen_lasso(cfg.seed, cfg.N, cfg.model.n_in, cfg.model.n_out, cfg.noise_sigma);
    case ExperimentKind::StaticL1:
    case ExperimentKind::StaticBounds:
      return gen_static(cfg.seed, cfg.N, cfg.noise_sigma);
    case ExperimentKind::SwitchingL0:
      return gen_switching(cfg.seed, cfg.N, cfg.noise_sigma);
    case ExperimentKind::Custom:
      // No bespoke generator for custom runs; reuse the family matching the
      // model. Callers with their own data use run_on_dataset directly.
      return cfg.model.kind == ModelKind::LinearTV
                 ? gen_lasso(cfg.seed, cfg.N, cfg.model.n_in, cfg.model.n_out, cfg.noise_sigma)
                 : gen_static(cfg.seed, cfg.N, cfg.noise_sigma);
  }
  throw std::logic_error("unreachable");
}

void write_csv_line(std::ofstream& f, const std::vector<double>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) f << (i ? "," : "") << num(vals[i]);
  f << "\n";
}

void write_vec_csv(const std::string& path, const Vec& v) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (Index i = 0; i < v.size(); ++i) f << num(v(i), "%.17g") << "\n";
}

std::vector<double> downsampled_axis(long n, long stride) {
  std::vector<double> xs;
  for (long k = stride - 1; k < n; k += stride) xs.push_back(static_cast<double>(k + 1));
  if (xs.empty() || xs.back() != static_cast<double>(n)) xs.push_back(static_cast<double>(n));
  return xs;
}

void emit_files(const ExperimentConfig& cfg, const RunResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const std::string dir = cfg.output_dir + "/";

  experiment_to_config(cfg).write_file(dir + "config.resolved");

  {
    std::ofstream f(dir + "trace.csv");
    if (!f) throw std::runtime_error("cannot write " + dir + "trace.csv");
    f << "k,f,g_x,g_nu,gap_sq\n";
    for (std::size_t k = 0; k < res.trace.steps.size(); ++k) {
      const auto& r = res.trace.steps[k];
      f << k << ",";
      write_csv_line(f, {r.f, r.g_x, r.g_nu, r.gap_sq});
    }
  }

  if (res.has_regret) {
    std::ofstream f(dir + "regret.csv");
    if (!f) throw std::runtime_error("cannot write " + dir + "regret.csv");
    f << "n,rf,rf_per_n,rc,rc_per_n\n";
    for (std::size_t i = 0; i < res.curves.rf.size(); ++i) {
      f << (i + 1) << ",";
      write_csv_line(f, {res.curves.rf[i], res.curves.rf_per_n[i], res.curves.rc[i],
                         res.curves.rc_per_n[i]});
    }
  }

  {
    std::ofstream f(dir + "summary");
    if (!f) throw std::runtime_error("cannot write " + dir + "summary");
    f << summary_text(cfg, res);
  }

  write_vec_csv(dir + "x_final.csv", res.x_final);
  write_vec_csv(dir + "nu_final.csv", res.nu_final);

  if (cfg.emit_svg) {
    const long N = res.trace.size();
    const long stride = std::max<long>(1, N / 2000);
    const auto xs = downsampled_axis(N, stride);

    auto sampled = [&](auto&& value_at) {
      std::vector<double> ys;
      for (double xv : xs) ys.push_back(value_at(static_cast<long>(xv) - 1));
      return ys;
    };

    // Running Mse (mean online f), current-iterate Reg, and their sum.
    std::vector<double> run_mse(static_cast<std::size_t>(N));
    double acc = 0.0;
    for (long k = 0; k < N; ++k) {
      acc += res.trace.steps[static_cast<std::size_t>(k)].f;
      run_mse[static_cast<std::size_t>(k)] = acc / static_cast<double>(k + 1);
    }

    SvgChart perf;
    perf.title = "Online performance (" + to_string(cfg.filter) + ")";
    perf.x_label = "step";
    perf.y_label = "value";
    perf.log_y = true;
    perf.series.push_back(
        {"Mse", svg_palette()[0], xs, sampled([&](long k) { return run_mse[k]; })});
    perf.series.push_back({"Reg", svg_palette()[1], xs, sampled([&](long k) {
                             return res.trace.steps[static_cast<std::size_t>(k)].g_nu;
                           })});
    perf.series.push_back({"Loss", svg_palette()[2], xs, sampled([&](long k) {
                             return run_mse[k] +
                                    res.trace.steps[static_cast<std::size_t>(k)].g_nu;
                           })});
    perf.write_file(dir + "loss_mse_reg.svg");

    if (res.has_regret) {
      SvgChart reg;
      reg.title = "Sample regret";
      reg.x_label = "n";
      reg.y_label = "regret / n";
      reg.series.push_back({"R_f(n)/n", svg_palette()[0], xs, sampled([&](long k) {
                              return res.curves.rf_per_n[static_cast<std::size_t>(k)];
                            })});
      reg.series.push_back({"R_c(n)/n", svg_palette()[1], xs, sampled([&](long k) {
                              return res.curves.rc_per_n[static_cast<std::size_t>(k)];
                            })});
      reg.write_file(dir + "regret.svg");
    }
  }
}

}  // namespace

std::string summary_text(const ExperimentConfig& cfg, const RunResult& res) {
  std::ostringstream f;
  const long N = res.trace.size();
  f << "experiment = " << to_string(cfg.kind) << "\n"
    << "filter = " << to_string(cfg.filter) << "\n"
    << "N = " << N << "\n"
    << "seed = " << cfg.seed << "\n"
    << "loss_x = " << num(res.perf_x.loss) << "\n"
    << "mse_x = " << num(res.perf_x.mse) << "\n"
    << "reg_x = " << num(res.perf_x.reg) << "\n"
    << "cv_x = " << num(res.perf_x.cv) << "\n"
    << "sparsity_x = " << num(res.perf_x.sparsity) << "\n"
    << "loss_nu = " << num(res.perf_nu.loss) << "\n"
    << "mse_nu = " << num(res.perf_nu.mse) << "\n"
    << "reg_nu = " << num(res.perf_nu.reg) << "\n"
    << "cv_nu = " << num(res.perf_nu.cv) << "\n"
    << "sparsity_nu = " << num(res.perf_nu.sparsity) << "\n"
    << "nu_cv_max = " << num(res.nu_cv_max) << "\n";
  if (res.has_regret) {
    f << "regret_g_at = " << (cfg.regret_g_at_x ? "x" : "nu") << "\n"
      << "rf_final = " << num(res.rf_final) << "\n"
      << "rf_per_n = " << num(res.rf_per_n) << "\n"
      << "rc_final = " << num(res.rc_final) << "\n"
      << "rc_per_n = " << num(res.rc_per_n) << "\n"
      << "hindsight_objective = " << num(res.hindsight_objective) << "\n"
      << "hindsight_iterations = " << res.hindsight_iterations << "\n"
      << "hindsight_tol_met = " << (res.hindsight_tol_met ? "true" : "false") << "\n";
    if (cfg.reg.kind == RegKind::L0)
      f << "regret_note = comparator is an L0 stationary point; regret approximate\n";
  }
  f << "wall_s = " << num(res.wall_s) << "\n"
    << "steps_per_s = " << num(static_cast<double>(N) / std::max(res.wall_s, 1e-12)) << "\n";
  return f.str();
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  if (c.kind == ExperimentKind::SwitchingL0) c.N -= c.N % 3;
  c.validate();
  const Dataset data = generate(c);
  RunResult res = run_on_dataset(c, data);
  if (!c.output_dir.empty()) emit_files(c, res);
  return res;
}

ExperimentConfig make_preset(const std::string& name, long N, std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  if (name == "lasso") {
    c.kind = ExperimentKind::Lasso;
    c.filter = FilterKind::FrozenAdmm;
    c.N = N > 0 ? N : 2000;
    c.model = ModelSpec::linear_tv(3, 2);
    c.lambda = 0.1;
    c.reg = RegSpec::l1(c.lambda);
    c.hyper.rho = 1e4 * std::sqrt(static_cast<double>(c.N));
    c.hyper.eta = 1e-6 * std::sqrt(static_cast<double>(c.N));
    c.hyper.n_a = 1;
    c.hyper.k_n = 1000;
    c.hyper.alpha_forget = 1.0;
    c.hyper.Q_scale = 1e-6;
    c.hyper.R_scale = 1e-3;
    c.hyper.P0_scale = 1.0;
    c.noise_sigma = std::sqrt(1e-3);
    c.regret_g_at_x = false;
  } else if (name == "static-l1") {
    c.kind = ExperimentKind::StaticL1;
    c.filter = FilterKind::EkfAdmmTv;
    c.N = N > 0 ? N : 20000;
    c.model = ModelSpec::mlp(2, {8, 8}, 1);
    c.lambda = 1e-4;
    c.reg = RegSpec::l1(c.lambda);
    c.hyper.rho = 10 * c.lambda;
    c.hyper.n_a = 1;
    c.hyper.Q_scale = 1e-4;
    c.hyper.R_scale = 1.0;
    c.hyper.P0_scale = 100.0;
    c.noise_sigma = 0.045;
    c.regret_g_at_x = true;
  } else if (name == "static-bounds") {
    c.kind = ExperimentKind::StaticBounds;
    c.filter = FilterKind::EkfAdmm;
    c.N = N > 0 ? N : 20000;
    c.model = ModelSpec::mlp(2, {8, 8}, 1);
    c.lambda = 0.0;
    c.reg = RegSpec::box(-0.5, 0.5);
    c.hyper.rho = 1.0;
    c.hyper.n_a = 5;
    c.hyper.Q_scale = 1e-4;
    c.hyper.R_scale = 1.0;
    c.hyper.P0_scale = 100.0;
    c.noise_sigma = 0.045;
    c.regret_g_at_x = false;
  } else if (name == "switching-l0") {
    c.kind = ExperimentKind::SwitchingL0;
    c.filter = FilterKind::EkfAdmm;
    c.N = N > 0 ? N : 30000;
    c.N -= c.N % 3;
    c.model = ModelSpec::mlp(2, {8, 8}, 1);
    c.lambda = 1e-4;
    c.reg = RegSpec::l0(c.lambda);
    c.hyper.rho = 1e3 * c.lambda;
    c.hyper.n_a = 1;
    c.hyper.alpha_forget = 0.9;
    c.hyper.Q_scale = 1e-4;
    c.hyper.R_scale = 1.0;
    c.hyper.P0_scale = 100.0;
    c.noise_sigma = 0.045;
    c.regret_g_at_x = true;
    c.regret_max_iter = 300;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (expected lasso, static-l1, " +
                                "static-bounds, switching-l0)");
  }
  return c;
}

std::vector<std::string> preset_names() {
  return {"lasso", "static-l1", "static-bounds", "switching-l0"};
}

namespace {

std::vector<int> parse_int_list(const std::string& s, const std::string& field) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      bad_field(field, "bad integer list '" + s + "'");
    }
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment.kind", "experiment.N", "experiment.seed", "experiment.noise_sigma",
      "experiment.output_dir", "experiment.keep_vectors", "experiment.emit_svg",
      "model.kind", "model.n_in", "model.n_out", "model.hidden",
      "reg.kind", "reg.lambda", "reg.lo", "reg.hi",
      "filter.kind", "filter.rho", "filter.n_a", "filter.eta", "filter.k_n",
      "filter.alpha_forget", "filter.Q_scale", "filter.R_scale", "filter.P0_scale",
      "regret.compute", "regret.tol", "regret.max_iter", "regret.g_at", "regret.segments",
  };
  return keys;
}

}  // namespace

ExperimentConfig experiment_from_config(const Config& file) {
  for (const auto& [key, value] : file.items())
    if (!known_keys().count(key)) bad_field(key, "is not a recognized configuration key");

  const std::string kind_s = file.get_str_or("experiment.kind", "custom");
  const ExperimentKind kind = experiment_kind_from(kind_s);
  const long N = file.get_int_or("experiment.N", -1);
  const std::uint64_t seed = static_cast<std::uint64_t>(file.get_int_or("experiment.seed", 0));

  ExperimentConfig c;
  if (kind != ExperimentKind::Custom) {
    c = make_preset(kind_s, N, seed);
  } else {
    c.kind = ExperimentKind::Custom;
    c.N = N > 0 ? N : 1000;
    c.seed = seed;
  }

  if (file.has("model.kind")) {
    const std::string mk = file.get_str("model.kind");
    if (mk == "linear") {
      c.model = ModelSpec::linear_tv(static_cast<int>(file.get_int("model.n_in")),
                                     static_cast<int>(file.get_int("model.n_out")));
    } else if (mk == "mlp") {
      c.model = ModelSpec::mlp(static_cast<int>(file.get_int("model.n_in")),
                               parse_int_list(file.get_str_or("model.hidden", ""), "model.hidden"),
                               static_cast<int>(file.get_int("model.n_out")));
    } else {
      bad_field("model.kind", "unknown value '" + mk + "' (expected linear, mlp)");
    }
  } else if (kind == ExperimentKind::Custom) {
    bad_field("model.kind", "is required for custom experiments");
  }

  if (file.has("reg.kind")) {
    const std::string rk = file.get_str("reg.kind");
    const double lambda = file.get_num_or("reg.lambda", c.lambda);
    if (rk == "none") {
      c.reg = RegSpec::none();
      c.lambda = 0.0;
    } else if (rk == "l1") {
      c.reg = RegSpec::l1(lambda);
      c.lambda = lambda;
    } else if (rk == "l0") {
      c.reg = RegSpec::l0(lambda);
      c.lambda = lambda;
    } else if (rk == "box") {
      c.reg = RegSpec::box(file.get_num("reg.lo"), file.get_num("reg.hi"));
      c.lambda = 0.0;
    } else {
      bad_field("reg.kind", "unknown value '" + rk + "' (expected none, l1, l0, box)");
    }
  } else if (file.has("reg.lambda")) {
    c.lambda = file.get_num("reg.lambda");
    if (c.reg.kind == RegKind::L1) c.reg = RegSpec::l1(c.lambda);
    if (c.reg.kind == RegKind::L0) c.reg = RegSpec::l0(c.lambda);
  }

  if (file.has("filter.kind")) {
    c.filter = filter_kind_from(file.get_str("filter.kind"));
    if (c.filter == FilterKind::OnlineAdmm) {
      // online-admm defaults: constant P = 1e-2 I, unit proximal weight.
      if (!file.has("filter.P0_scale")) c.hyper.P0_scale = 1e-2;
      if (!file.has("filter.eta")) c.hyper.eta = 1.0;
    }
  }
  c.hyper.rho = file.get_num_or("filter.rho", c.hyper.rho);
  c.hyper.n_a = static_cast<int>(file.get_int_or("filter.n_a", c.hyper.n_a));
  c.hyper.eta = file.get_num_or("filter.eta", c.hyper.eta);
  c.hyper.k_n = file.get_int_or("filter.k_n", c.hyper.k_n);
  c.hyper.alpha_forget = file.get_num_or("filter.alpha_forget", c.hyper.alpha_forget);
  c.hyper.Q_scale = file.get_num_or("filter.Q_scale", c.hyper.Q_scale);
  c.hyper.R_scale = file.get_num_or("filter.R_scale", c.hyper.R_scale);
  c.hyper.P0_scale = file.get_num_or("filter.P0_scale", c.hyper.P0_scale);

  c.noise_sigma = file.get_num_or("experiment.noise_sigma", c.noise_sigma);
  c.output_dir = file.get_str_or("experiment.output_dir", c.output_dir);
  c.keep_vectors = file.get_bool_or("experiment.keep_vectors", c.keep_vectors);
  c.emit_svg = file.get_bool_or("experiment.emit_svg", c.emit_svg);

  c.compute_regret = file.get_bool_or("regret.compute", c.compute_regret);
  c.regret_tol = file.get_num_or("regret.tol", c.regret_tol);
  c.regret_max_iter = static_cast<int>(file.get_int_or("regret.max_iter", c.regret_max_iter));
  if (file.has("regret.g_at")) {
    const std::string g = file.get_str("regret.g_at");
    if (g == "x")
      c.regret_g_at_x = true;
    else if (g == "nu")
      c.regret_g_at_x = false;
    else
      bad_field("regret.g_at", "unknown value '" + g + "' (expected x, nu)");
  }
  if (file.has("regret.segments")) {
    const std::string s = file.get_str("regret.segments");
    if (s == "none") {
      c.segment_boundaries.clear();
    } else if (s != "auto") {
      c.segment_boundaries.clear();
      for (int b : parse_int_list(s, "regret.segments")) c.segment_boundaries.push_back(b);
    }
  }

  c.validate();
  return c;
}

Config experiment_to_config(const ExperimentConfig& cfg) {
  Config f;
  f.set("experiment.kind", to_string(cfg.kind));
  f.set("experiment.N", std::to_string(cfg.N));
  f.set("experiment.seed", std::to_string(cfg.seed));
  f.set("experiment.noise_sigma", num(cfg.noise_sigma, "%.17g"));
  f.set("experiment.output_dir", cfg.output_dir);
  f.set("experiment.keep_vectors", cfg.keep_vectors ? "true" : "false");
  f.set("experiment.emit_svg", cfg.emit_svg ? "true" : "false");

  f.set("model.kind", cfg.model.kind == ModelKind::Mlp ? "mlp" : "linear");
  f.set("model.n_in", std::to_string(cfg.model.n_in));
  f.set("model.n_out", std::to_string(cfg.model.n_out));
  if (cfg.model.kind == ModelKind::Mlp) {
    std::string h;
    for (std::size_t i = 0; i < cfg.model.hidden.size(); ++i)
      h += (i ? "," : "") + std::to_string(cfg.model.hidden[i]);
    f.set("model.hidden", h);
  }

  switch (cfg.reg.kind) {
    case RegKind::None: f.set("reg.kind", "none"); break;
    case RegKind::L1: f.set("reg.kind", "l1"); break;
    case RegKind::L0: f.set("reg.kind", "l0"); break;
    case RegKind::Box: f.set("reg.kind", "box"); break;
  }
  if (cfg.reg.kind == RegKind::L1 || cfg.reg.kind == RegKind::L0)
    f.set("reg.lambda", num(cfg.lambda, "%.17g"));
  if (cfg.reg.kind == RegKind::Box) {
    f.set("reg.lo", num(cfg.reg.lo(0), "%.17g"));
    f.set("reg.hi", num(cfg.reg.hi(0), "%.17g"));
  }

  f.set("filter.kind", to_string(cfg.filter));
  f.set("filter.rho", num(cfg.hyper.rho, "%.17g"));
  f.set("filter.n_a", std::to_string(cfg.hyper.n_a));
  f.set("filter.eta", num(cfg.hyper.eta, "%.17g"));
  f.set("filter.k_n", std::to_string(cfg.hyper.k_n));
  f.set("filter.alpha_forget", num(cfg.hyper.alpha_forget, "%.17g"));
  f.set("filter.Q_scale", num(cfg.hyper.Q_scale, "%.17g"));
  f.set("filter.R_scale", num(cfg.hyper.R_scale, "%.17g"));
  f.set("filter.P0_scale", num(cfg.hyper.P0_scale, "%.17g"));

  f.set("regret.compute", cfg.compute_regret ? "true" : "false");
  f.set("regret.tol", num(cfg.regret_tol, "%.17g"));
  f.set("regret.max_iter", std::to_string(cfg.regret_max_iter));
  f.set("regret.g_at", cfg.regret_g_at_x ? "x" : "nu");
  if (!cfg.segment_boundaries.empty()) {
    std::string s;
    for (std::size_t i = 0; i < cfg.segment_boundaries.size(); ++i)
      s += (i ? "," : "") + std::to_string(cfg.segment_boundaries[i]);
    f.set("regret.segments", s);
  } else {
    f.set("regret.segments", cfg.kind == ExperimentKind::SwitchingL0 ? "auto" : "none");
  }
  return f;
}

}  // namespace kfadmm
