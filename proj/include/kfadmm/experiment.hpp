#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kfadmm/config.hpp"
#include "kfadmm/ekf_admm.hpp"
#include "kfadmm/model.hpp"
#include "kfadmm/prox.hpp"
#include "kfadmm/regret.hpp"
#include "kfadmm/types.hpp"

namespace kfadmm {

enum class ExperimentKind { Lasso, StaticL1, StaticBounds, SwitchingL0, Custom };

enum class FilterKind {
  EkfAdmm,      // full EKF-ADMM step (fast path)
  EkfAdmmTv,    // same, rho_k = 10^(k/N-2) * lambda
  FrozenAdmm,   // unscaled dual, covariance frozen after step k_n
  OnlineAdmm,   // FrozenAdmm with a constant P (never updated), eta = 1
  EkfClip,      // plain EKF + projection of xhat onto the box
  PlainEkf
};

struct Hyper {
  double rho = 1.0;
  int n_a = 1;
  double eta = 0.0;
  long k_n = -1;  // -1: never freeze
  double alpha_forget = 1.0;
  double Q_scale = 1e-4;
  double R_scale = 1.0;
  double P0_scale = 100.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Custom;
  FilterKind filter = FilterKind::EkfAdmm;
  long N = 1000;
  std::uint64_t seed = 0;
  ModelSpec model;
  RegSpec reg;
  double lambda = 0.0;  // regularizer weight, kept for rho_tv and presets
  Hyper hyper;
  double noise_sigma = 0.01;
  std::string output_dir;  // empty: in-memory run, no files

  bool keep_vectors = false;
  bool emit_svg = true;

  // Regret evaluation. tol is relative to the hindsight problem's initial
  // gradient scale; segment boundaries (interior starts) default to
  // {N/3, 2N/3} for SwitchingL0 and to none otherwise. g_at_x charges the
  // regret's g term at x_k instead of nu_k.
  bool compute_regret = true;
  double regret_tol = 1e-6;
  int regret_max_iter = 500;
  bool regret_g_at_x = false;
  std::vector<long> segment_boundaries;

  void validate() const;  // throws invalid_argument naming the bad field
};

/// Seeded generators for the three experiment families. Substreams keep the
/// draws independent: truth, inputs, and noise never share a stream.
Dataset gen_lasso(std::uint64_t seed, long N, int n_x = 3, int n_y = 2,
                  double noise_sigma = 0.0316227766016838);  // sqrt(1e-3)
Dataset gen_static(std::uint64_t seed, long N, double noise_sigma = 0.01);
Dataset gen_switching(std::uint64_t seed, long N, double noise_sigma = 0.01);

struct RunResult {
  Trace trace;
  Vec x_final, nu_final;
  PerfIndices perf_x, perf_nu;
  double nu_cv_max = 0.0;  // max over steps of the box violation of nu
  double wall_s = 0.0;

  bool has_regret = false;
  double hindsight_objective = 0.0;
  int hindsight_iterations = 0;
  bool hindsight_tol_met = false;
  RegretCurves curves;
  double rf_final = 0.0, rc_final = 0.0;
  double rf_per_n = 0.0, rc_per_n = 0.0;
};

/// Stream an already-generated dataset through the configured filter once
/// (1 epoch). No files are written; run_experiment handles emission.
RunResult run_on_dataset(const ExperimentConfig& cfg, const Dataset& data);

/// Full protocol: generate, run, and (when output_dir is set) write
/// trace.csv, regret.csv, summary, config.resolved, final parameter CSVs
/// and the SVG charts into output_dir.
RunResult run_experiment(const ExperimentConfig& cfg);

/// The key = value block written to the summary file (also printed by the
/// CLI). Wall-clock fields make it non-reproducible byte-for-byte, unlike
/// trace.csv.
std::string summary_text(const ExperimentConfig& cfg, const RunResult& res);

/// Named presets: "lasso", "static-l1", "static-bounds", "switching-l0".
/// N <= 0 selects the preset's desk-scale default.
ExperimentConfig make_preset(const std::string& name, long N = -1, std::uint64_t seed = 0);
std::vector<std::string> preset_names();

/// Config-file binding. Unknown keys are rejected; missing keys fall back
/// to the preset named by experiment.kind (or to Custom defaults).
ExperimentConfig experiment_from_config(const Config& file);
Config experiment_to_config(const ExperimentConfig& cfg);

std::string to_string(ExperimentKind k);
std::string to_string(FilterKind k);
ExperimentKind experiment_kind_from(const std::string& s);
FilterKind filter_kind_from(const std::string& s);

}  // namespace kfadmm
