#pragma once

#include <span>
#include <vector>

#include "roga/batch.hpp"
#include "roga/model.hpp"
#include "roga/param_vector.hpp"

namespace roga {

struct OptimizerConfig {
  double rho = 0.1;           ///< perturbation radius
  double alpha = 0.001;       ///< weight of the gradient-alignment term
  double lr = 0.005;
  double momentum = 0.0;      ///< in [0, 1)
  double hvp_step = 1e-4;     ///< base finite-difference step, scaled by 1 + |theta|
  double grad_floor = 1e-12;  ///< below this gradient norm no perturbation is applied

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  bool operator==(const OptimizerConfig&) const = default;
};

/// Which gradient the descent part of a domain update uses.
enum class DescentTerm {
  perturbed,  ///< grad at theta + eps (the robust, sharpness-aware loss)
  erm,        ///< grad at theta (alignment-only ablation)
};

struct DomainDiagnostics {
  int domain_id = 0;
  double loss = 0.0;            ///< L(theta; D)
  double perturbed_loss = 0.0;  ///< L(theta + eps; D)
  double alignment = 0.0;       ///< <grad L(theta + eps), grad L(theta)>
  double grad_norm = 0.0;       ///< |grad L(theta)|
};

/// Per-step observations, one entry per domain in ascending domain_id order.
struct StepDiagnostics {
  std::vector<int> domain_ids;
  std::vector<double> per_domain_loss;
  std::vector<double> per_domain_perturbed_loss;
  std::vector<double> per_domain_alignment;
  std::vector<double> grad_norms;
  double aggregate_grad_norm = 0.0;

  std::size_t domain_count() const noexcept { return domain_ids.size(); }
  void push(const DomainDiagnostics& d);
};

struct DomainGradient {
  ParamVector gradient;
  DomainDiagnostics diagnostics;
};

struct StepResult {
  ParamVector theta;
  ParamVector velocity;
  StepDiagnostics diagnostics;
};

/// rho * g / |g|, or the zero vector when |g| < grad_floor.
ParamVector epsilon_hat(const ParamVector& g, double rho, double grad_floor = 1e-12);

/// Mean over domains of L(theta + eps_i; D_i) with eps_i = epsilon_hat of
/// that domain's gradient. Evaluation only.
double multi_domain_perturbed_loss(const DifferentiableModel& model, const ParamVector& theta,
                                   std::span<const DomainBatch> batches, double rho,
                                   double grad_floor = 1e-12);

/// Central-difference Hessian-vector product. The probe direction is
/// normalized and the step is hvp_step * (1 + |params|), so the result is
/// |v| * (grad(p + h u) - grad(p - h u)) / (2h). A zero v gives zero.
ParamVector hvp(const DifferentiableModel& model, const ParamVector& params,
                const DomainBatch& batch, const ParamVector& v, double hvp_step);

/// Gradient in theta of L(theta + eps) - alpha * <g_p(theta), g(theta)> with
/// eps held fixed at its value for the current theta:
///
///   g_p - alpha * (H(theta + eps) g + H(theta) g_p)
///
/// Both Hessian products are central-difference HVPs. With alpha == 0 the
/// HVPs are skipped and g_p is returned as is. DescentTerm::erm swaps the
/// leading g_p for g while keeping the alignment term.
DomainGradient roga_domain_gradient(const DifferentiableModel& model, const ParamVector& theta,
                                    const DomainBatch& batch, const OptimizerConfig& cfg,
                                    DescentTerm descent = DescentTerm::perturbed);

/// One update over K domain batches: the per-domain gradients are averaged
/// in ascending domain_id order, then
///   velocity' = momentum * velocity + mean,  theta' = theta - lr * velocity'.
/// With threads > 1 the domains are evaluated concurrently; the result is
/// identical to the sequential one.
StepResult roga_step(const DifferentiableModel& model, const ParamVector& theta,
                     std::span<const DomainBatch> batches, const OptimizerConfig& cfg,
                     const ParamVector& velocity, DescentTerm descent = DescentTerm::perturbed,
                     unsigned threads = 1);

/// roga_step on a single pooled batch with alpha forced to 0.
StepResult sam_step(const DifferentiableModel& model, const ParamVector& theta,
                    const DomainBatch& pooled_batch, const OptimizerConfig& cfg,
                    const ParamVector& velocity);

/// Momentum SGD on the pooled batch loss.
StepResult sgd_step(const DifferentiableModel& model, const ParamVector& theta,
                    const DomainBatch& pooled_batch, const OptimizerConfig& cfg,
                    const ParamVector& velocity);

/// Value of the RoGA objective: mean over domains of
/// L(theta + eps_i) - alpha * <g_p, g>.
double roga_objective(const DifferentiableModel& model, const ParamVector& theta,
                      std::span<const DomainBatch> batches, const OptimizerConfig& cfg);

}  // namespace roga
