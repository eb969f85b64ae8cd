#include "roga/models.hpp"

#include <cmath>

#include "roga/errors.hpp"
#include "roga/rng.hpp"

namespace roga {

std::string to_string(InitScheme scheme) {
  return scheme == InitScheme::zeros ? "zeros" : "glorot_uniform";
}

InitScheme parse_init_scheme(const std::string& name) {
  if (name == "glorot_uniform") return InitScheme::glorot_uniform;
  if (name == "zeros") return InitScheme::zeros;
  throw ConfigError("unknown init scheme '" + name + "' (expected glorot_uniform|zeros)");
}

ParamVector init_params(const ModelSpec& spec, const InitSpec& init) {
  spec.validate();
  ParamVector params(spec.param_count());
  if (init.scheme == InitScheme::zeros) return params;

  Rng rng(init.seed);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    const std::size_t in = spec.layer_widths[l];
    const std::size_t out = spec.layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (std::size_t k = 0; k < in * out; ++k) params[offset + k] = rng.uniform(-bound, bound);
    offset += out * (in + 1);  // biases stay 0
  }
  return params;
}

std::vector<double> predict_scores(const ModelSpec& spec, const ParamVector& params,
                                   const Matrix& features) {
  std::vector<double> scores = Network(spec).logits(params, features);
  for (double& s : scores) s = sigmoid(s);
  return scores;
}

ModelSpec default_experiment_model(std::size_t input_dim) {
  return ModelSpec::mlp({input_dim, 16, 16, 1}, Activation::tanh);
}

}  // namespace roga
