#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roga/batch.hpp"
#include "roga/model.hpp"
#include "roga/param_vector.hpp"

namespace roga {

enum class InitScheme { glorot_uniform, zeros };

std::string to_string(InitScheme scheme);
InitScheme parse_init_scheme(const std::string& name);

struct InitSpec {
  InitScheme scheme = InitScheme::glorot_uniform;
  std::uint64_t seed = 0;
};

/// Weights of each layer uniform in +-sqrt(6 / (fan_in + fan_out)); biases 0.
ParamVector init_params(const ModelSpec& spec, const InitSpec& init);

/// Sigmoid of each example's logit.
std::vector<double> predict_scores(const ModelSpec& spec, const ParamVector& params,
                                   const Matrix& features);

/// The default experiment network: (d, 16, 16, 1) with tanh.
ModelSpec default_experiment_model(std::size_t input_dim);

}  // namespace roga
