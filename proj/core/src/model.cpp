#include "roga/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roga/errors.hpp"

namespace roga {

std::string to_string(ModelKind kind) { return kind == ModelKind::logistic ? "logistic" : "mlp"; }

std::string to_string(Activation activation) {
  return activation == Activation::relu ? "relu" : "tanh";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "logistic") return ModelKind::logistic;
  if (name == "mlp") return ModelKind::mlp;
  throw ConfigError("unknown model kind '" + name + "' (expected logistic|mlp)");
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + name + "' (expected relu|tanh)");
}

ModelSpec ModelSpec::logistic(std::size_t input_dim) {
  return ModelSpec{ModelKind::logistic, {input_dim, 1}, Activation::tanh};
}

ModelSpec ModelSpec::mlp(std::vector<std::size_t> widths, Activation activation) {
  return ModelSpec{ModelKind::mlp, std::move(widths), activation};
}

void ModelSpec::validate() const {
  if (layer_widths.size() < 2) throw DimensionError("model needs at least input and output widths");
  if (layer_widths.back() != 1) throw DimensionError("model output width must be 1");
  for (std::size_t w : layer_widths) {
    if (w == 0) throw DimensionError("layer widths must be positive");
  }
  if (kind == ModelKind::logistic && layer_widths.size() != 2) {
    throw DimensionError("logistic model takes exactly (d, 1) widths");
  }
}

std::size_t ModelSpec::param_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l) {
    count += layer_widths[l + 1] * (layer_widths[l] + 1);
  }
  return count;
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_from_logit(double logit, int label) noexcept {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

namespace {

/// Activations of one example for every layer, reused across examples.
struct Workspace {
  // pre[l] / post[l] are the pre- and post-activation values of layer l
  // (layer 0 being the input copy in post[0]).
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  std::vector<double> delta;
  std::vector<double> delta_prev;

  explicit Workspace(const ModelSpec& spec) {
    const auto& w = spec.layer_widths;
    pre.resize(w.size());
    post.resize(w.size());
    for (std::size_t l = 0; l < w.size(); ++l) {
      pre[l].assign(w[l], 0.0);
      post[l].assign(w[l], 0.0);
    }
    const std::size_t widest = *std::max_element(w.begin(), w.end());
    delta.reserve(widest);
    delta_prev.reserve(widest);
  }
};

double activate(Activation act, double z) noexcept {
  return act == Activation::tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through pre- and post-activation values. The ReLU
// subgradient at 0 is 0.
double activate_grad(Activation act, double z, double a) noexcept {
  return act == Activation::tanh ? 1.0 - a * a : (z > 0.0 ? 1.0 : 0.0);
}

double forward(const ModelSpec& spec, std::span<const double> params, std::span<const double> x,
               Workspace& ws) {
  const auto& w = spec.layer_widths;
  std::copy(x.begin(), x.end(), ws.post[0].begin());
  std::size_t offset = 0;
  const std::size_t layers = w.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = w[l];
    const std::size_t out = w[l + 1];
    const double* weights = params.data() + offset;
    const double* biases = weights + out * in;
    const auto& prev = ws.post[l];
    const bool last = l + 1 == layers;
    for (std::size_t o = 0; o < out; ++o) {
      double z = biases[o];
      const double* row = weights + o * in;
      for (std::size_t i = 0; i < in; ++i) z += row[i] * prev[i];
      ws.pre[l + 1][o] = z;
      ws.post[l + 1][o] = last ? z : activate(spec.activation, z);
    }
    offset += out * (in + 1);
  }
  return ws.pre.back()[0];
}

}  // namespace

Network::Network(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  param_count_ = spec_.param_count();
}

void Network::check_dims(const ParamVector& params, std::size_t feature_cols) const {
  if (params.size() != param_count_) {
    throw DimensionError("expected " + std::to_string(param_count_) + " parameters, got " +
                         std::to_string(params.size()));
  }
  if (feature_cols != spec_.input_dim()) {
    throw DimensionError("expected " + std::to_string(spec_.input_dim()) +
                         " features per example, got " + std::to_string(feature_cols));
  }
}

std::vector<double> Network::logits(const ParamVector& params, const Matrix& features) const {
  check_dims(params, features.cols());
  Workspace ws(spec_);
  std::vector<double> out(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    out[r] = forward(spec_, params.span(), features.row(r), ws);
  }
  return out;
}

double Network::loss(const ParamVector& params, const DomainBatch& batch) const {
  check_dims(params, batch.features.cols());
  if (batch.features.rows() != batch.labels.size() || batch.labels.empty()) {
    throw DimensionError("batch rows and labels disagree or batch is empty");
  }
  Workspace ws(spec_);
  double total = 0.0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    total += bce_from_logit(forward(spec_, params.span(), batch.features.row(r), ws),
                            batch.labels[r]);
  }
  return total / static_cast<double>(batch.size());
}

ParamVector Network::grad(const ParamVector& params, const DomainBatch& batch) const {
  check_dims(params, batch.features.cols());
  if (batch.features.rows() != batch.labels.size() || batch.labels.empty()) {
    throw DimensionError("batch rows and labels disagree or batch is empty");
  }
  const auto& w = spec_.layer_widths;
  const std::size_t layers = w.size() - 1;

  std::vector<std::size_t> offsets(layers);
  for (std::size_t l = 0, off = 0; l < layers; ++l) {
    offsets[l] = off;
    off += w[l + 1] * (w[l] + 1);
  }

  ParamVector g(param_count_);
  Workspace ws(spec_);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (std::size_t r = 0; r < batch.size(); ++r) {
    const double z = forward(spec_, params.span(), batch.features.row(r), ws);
    ws.delta.assign(1, (sigmoid(z) - batch.labels[r]) * inv_n);

    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = w[l];
      const std::size_t out = w[l + 1];
      const double* weights = params.span().data() + offsets[l];
      double* gw = g.span().data() + offsets[l];
      double* gb = gw + out * in;
      const auto& prev = ws.post[l];

      for (std::size_t o = 0; o < out; ++o) {
        const double d = ws.delta[o];
        double* grow = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += d * prev[i];
        gb[o] += d;
      }
      if (l == 0) break;

      ws.delta_prev.assign(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = ws.delta[o];
        const double* row = weights + o * in;
        for (std::size_t i = 0; i < in; ++i) ws.delta_prev[i] += row[i] * d;
      }
      for (std::size_t i = 0; i < in; ++i) {
        ws.delta_prev[i] *= activate_grad(spec_.activation, ws.pre[l][i], ws.post[l][i]);
      }
      std::swap(ws.delta, ws.delta_prev);
    }
  }
  return g;
}

double loss(const ModelSpec& spec, const ParamVector& params, const DomainBatch& batch) {
  return Network(spec).loss(params, batch);
}

ParamVector grad(const ModelSpec& spec, const ParamVector& params, const DomainBatch& batch) {
  return Network(spec).grad(params, batch);
}

double grad_check(const DifferentiableModel& model, const ParamVector& params,
                  const DomainBatch& batch, double h) {
  if (!(h > 0.0)) throw InputError("grad_check: step must be positive");
  const ParamVector analytic = model.grad(params, batch);
  ParamVector probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = model.loss(probe, batch);
    probe[i] = orig - h;
    const double down = model.loss(probe, batch);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), kGradCheckFloor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

double grad_check(const ModelSpec& spec, const ParamVector& params, const DomainBatch& batch,
                  double h) {
  return grad_check(Network(spec), params, batch, h);
}

}  // namespace roga
