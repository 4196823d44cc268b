#include "kfadmm/model.hpp"

#include <cmath>

#include "kfadmm/rng.hpp"

namespace kfadmm {

namespace {

// Widths of consecutive layers, input to output: n_in, hidden..., n_out.
std::vector<int> layer_widths(const ModelSpec& spec) {
  std::vector<int> w;
  w.reserve(spec.hidden.size() + 2);
  w.push_back(spec.n_in);
  for (int h : spec.hidden) w.push_back(h);
  w.push_back(spec.n_out);
  return w;
}

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

void check_mlp_dims(const ModelSpec& spec, const Vec& params, const Sample& sample) {
  if (params.size() != spec.param_count())
    throw std::invalid_argument("model: parameter vector length mismatch");
  if (sample.z.size() != spec.n_in)
    throw std::invalid_argument("model: regressor length mismatch");
}

}  // namespace

int ModelSpec::param_count() const {
  if (kind == ModelKind::LinearTV) return n_in;
  int total = 0;
  const auto widths = layer_widths(*this);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    total += widths[l] * widths[l + 1] + widths[l + 1];
  return total;
}

Vec mlp_init(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.kind != ModelKind::Mlp) throw std::invalid_argument("mlp_init: spec is not an Mlp");
  auto eng = substream(seed, Stream::Init);
  const auto widths = layer_widths(spec);
  Vec params(spec.param_count());
  Index p = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i) params(p++) = uniform(eng, -limit, limit);
    for (int i = 0; i < fan_out; ++i) params(p++) = 0.0;
  }
  return params;
}

Vec model_eval(const ModelSpec& spec, const Vec& params, const Sample& sample) {
  if (spec.kind == ModelKind::LinearTV) {
    if (sample.C.rows() != spec.n_out || sample.C.cols() != spec.n_in)
      throw std::invalid_argument("model_eval: C dimension mismatch");
    if (params.size() != spec.n_in)
      throw std::invalid_argument("model_eval: parameter length mismatch");
    return sample.C * params;
  }
  check_mlp_dims(spec, params, sample);
  check_finite(params, "model_eval");
  check_finite(sample.z, "model_eval");

  const auto widths = layer_widths(spec);
  Vec a = sample.z;
  Index p = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int m = widths[l];
    const int n = widths[l + 1];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        params.data() + p, n, m);
    p += static_cast<Index>(n) * m;
    Eigen::Map<const Vec> b(params.data() + p, n);
    p += n;
    Vec s = W * a + b;
    const bool is_output = (l + 2 == widths.size());
    a = is_output ? s : Vec(s.array().tanh());
  }
  return a;
}

Mat model_jacobian(const ModelSpec& spec, const Vec& params, const Sample& sample) {
  if (spec.kind == ModelKind::LinearTV) {
    if (sample.C.rows() != spec.n_out || sample.C.cols() != spec.n_in)
      throw std::invalid_argument("model_jacobian: C dimension mismatch");
    return sample.C;
  }
  check_mlp_dims(spec, params, sample);

  const auto widths = layer_widths(spec);
  const std::size_t n_layers = widths.size() - 1;

  // Forward pass, keeping each layer's input activation and the tanh output
  // (whose derivative is 1 - a^2).
  std::vector<Vec> acts(n_layers + 1);
  std::vector<Index> w_offsets(n_layers), b_offsets(n_layers);
  acts[0] = sample.z;
  Index p = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int m = widths[l];
    const int n = widths[l + 1];
    w_offsets[l] = p;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        params.data() + p, n, m);
    p += static_cast<Index>(n) * m;
    b_offsets[l] = p;
    Eigen::Map<const Vec> b(params.data() + p, n);
    p += n;
    Vec s = W * acts[l] + b;
    acts[l + 1] = (l + 1 == n_layers) ? s : Vec(s.array().tanh());
  }

  // Reverse accumulation: G = d(output)/d(pre-activation of layer l).
  Mat jac(spec.n_out, spec.param_count());
  Mat G = Mat::Identity(spec.n_out, spec.n_out);  // output layer is linear
  for (std::size_t li = n_layers; li-- > 0;) {
    const int m = widths[li];
    const int n = widths[li + 1];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        params.data() + w_offsets[li], n, m);
    // d/dW(i,j) = G(:,i) * a_in(j); row-major weight block, then bias block.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        jac.col(w_offsets[li] + static_cast<Index>(i) * m + j) = G.col(i) * acts[li](j);
    jac.block(0, b_offsets[li], spec.n_out, n) = G;
    if (li > 0) {
      // d(output)/d(a_li), then through the previous layer's tanh.
      G = Mat(G * W);
      for (int j = 0; j < m; ++j) G.col(j) *= (1.0 - acts[li](j) * acts[li](j));
    }
  }
  return jac;
}

Vec linearized_target(const Vec& y_nl, const Vec& h_at_xbar, const Mat& C, const Vec& xbar) {
  if (y_nl.size() != h_at_xbar.size() || C.rows() != y_nl.size() || C.cols() != xbar.size())
    throw std::invalid_argument("linearized_target: dimension mismatch");
  return y_nl - h_at_xbar + C * xbar;
}

}  // namespace kfadmm
