#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kfadmm/types.hpp"

namespace kfadmm {

enum class ModelKind { LinearTV, Mlp };

/// Parametric measurement map y = h(k, z; x).
///
/// LinearTV: h = C_k * x with a per-sample matrix C_k (n_out x n_in, where
/// n_in is the parameter dimension).
///
/// Mlp: feedforward network with tanh hidden layers and a linear output
/// layer. The parameter vector is laid out layer by layer from input to
/// output; within a layer, the weight matrix comes first in row-major order
/// (row i = incoming weights of output unit i), followed by that layer's
/// bias vector. Saved parameter CSVs follow this layout.
struct ModelSpec {
  ModelKind kind = ModelKind::LinearTV;
  int n_in = 0;
  std::vector<int> hidden;
  int n_out = 0;

  static ModelSpec linear_tv(int n_x, int n_y) {
    if (n_x < 1 || n_y < 0) throw std::invalid_argument("linear_tv: bad dimensions");
    ModelSpec s;
    s.kind = ModelKind::LinearTV;
    s.n_in = n_x;
    s.n_out = n_y;
    return s;
  }

  static ModelSpec mlp(int n_in, std::vector<int> hidden, int n_out) {
    if (n_in < 1 || n_out < 1) throw std::invalid_argument("mlp: bad dimensions");
    for (int h : hidden)
      if (h < 1) throw std::invalid_argument("mlp: layer widths must be >= 1");
    ModelSpec s;
    s.kind = ModelKind::Mlp;
    s.n_in = n_in;
    s.hidden = std::move(hidden);
    s.n_out = n_out;
    return s;
  }

  /// Number of trainable parameters (the filter's state dimension).
  int param_count() const;
};

/// One observation. Mlp models read z; LinearTV models read C.
struct Sample {
  Vec z;
  Mat C;
  Vec y;
  long k = 0;
};

/// Seeded data container shared by the oracles and the experiment drivers.
struct Dataset {
  std::vector<Sample> samples;
  std::optional<Vec> truth;

  long size() const { return static_cast<long>(samples.size()); }
};

/// Xavier-uniform weights (U(+-sqrt(6/(fan_in+fan_out))) per layer), zero
/// biases. Deterministic for a given seed.
Vec mlp_init(const ModelSpec& spec, std::uint64_t seed);

/// h(k, z; x): C_k*x for LinearTV, tanh-layer forward pass for Mlp.
Vec model_eval(const ModelSpec& spec, const Vec& params, const Sample& sample);

/// Analytic Jacobian of model_eval w.r.t. params (n_out x param_count).
/// Reverse accumulation through the layers for Mlp; C_k for LinearTV.
Mat model_jacobian(const ModelSpec& spec, const Vec& params, const Sample& sample);

/// y_nl - h(xbar) + C*xbar, the target of the linearized measurement model,
/// so that the filter innovation y - C*xhat equals y_nl - h(xhat).
Vec linearized_target(const Vec& y_nl, const Vec& h_at_xbar, const Mat& C, const Vec& xbar);

}  // namespace kfadmm
