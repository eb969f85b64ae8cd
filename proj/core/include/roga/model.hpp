#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "roga/batch.hpp"
#include "roga/param_vector.hpp"

namespace roga {

/// Anything with a scalar loss over a batch and its exact gradient.
///
/// Every optimizer and probe is written against this contract, so the same
/// code path drives the neural models and the closed-form test objectives
/// (quadratics, linear losses). Implementations must be pure: identical
/// inputs give bitwise identical outputs, and calls may run concurrently.
class DifferentiableModel {
 public:
  virtual ~DifferentiableModel() = default;

  virtual std::size_t param_count() const = 0;
  virtual double loss(const ParamVector& params, const DomainBatch& batch) const = 0;
  virtual ParamVector grad(const ParamVector& params, const DomainBatch& batch) const = 0;
};

enum class ModelKind { logistic, mlp };
enum class Activation { relu, tanh };

std::string to_string(ModelKind kind);
std::string to_string(Activation activation);
ModelKind parse_model_kind(const std::string& name);
Activation parse_activation(const std::string& name);

/// Fully connected binary classifier. `layer_widths` starts with the input
/// dimension and ends with 1 (the logit). A logistic model has exactly two
/// widths, (d, 1).
///
/// Parameter layout, layer by layer: the weight matrix row-major as
/// [out][in], followed by the `out` biases.
struct ModelSpec {
  ModelKind kind = ModelKind::mlp;
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::tanh;

  static ModelSpec logistic(std::size_t input_dim);
  static ModelSpec mlp(std::vector<std::size_t> widths, Activation activation = Activation::tanh);

  /// Throws DimensionError when the widths do not describe a valid model.
  void validate() const;

  std::size_t input_dim() const { return layer_widths.front(); }
  std::size_t param_count() const;
  std::size_t layer_count() const { return layer_widths.size() - 1; }

  bool operator==(const ModelSpec&) const = default;
};

/// Network evaluation with explicit layer-by-layer backpropagation.
class Network final : public DifferentiableModel {
 public:
  explicit Network(ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }

  std::size_t param_count() const override { return param_count_; }

  /// Mean binary cross-entropy computed from logits in the overflow-free
  /// form max(z,0) - z*y + log(1 + exp(-|z|)).
  double loss(const ParamVector& params, const DomainBatch& batch) const override;

  ParamVector grad(const ParamVector& params, const DomainBatch& batch) const override;

  /// One logit per feature row.
  std::vector<double> logits(const ParamVector& params, const Matrix& features) const;

 private:
  void check_dims(const ParamVector& params, std::size_t feature_cols) const;

  ModelSpec spec_;
  std::size_t param_count_;
};

/// Per-example binary cross-entropy of a logit.
double bce_from_logit(double logit, int label) noexcept;

double sigmoid(double z) noexcept;

double loss(const ModelSpec& spec, const ParamVector& params, const DomainBatch& batch);
ParamVector grad(const ModelSpec& spec, const ParamVector& params, const DomainBatch& batch);

/// Largest relative error between `grad` and a central finite difference
/// with step `h`, over all coordinates. The relative error of a coordinate
/// is |analytic - numeric| / max(|analytic|, |numeric|, kGradCheckFloor).
double grad_check(const DifferentiableModel& model, const ParamVector& params,
                  const DomainBatch& batch, double h);
double grad_check(const ModelSpec& spec, const ParamVector& params, const DomainBatch& batch,
                  double h);

inline constexpr double kGradCheckFloor = 1e-6;

}  // namespace roga
