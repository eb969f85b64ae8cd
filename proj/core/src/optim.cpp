#include "roga/optim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "roga/errors.hpp"

namespace roga {
namespace {

void require_finite(double value, const char* what, int domain_id) {
  if (!std::isfinite(value)) throw NumericError(std::string("non-finite ") + what, domain_id);
}

void require_finite(const ParamVector& v, const char* what, int domain_id) {
  if (!all_finite(v)) throw NumericError(std::string("non-finite ") + what, domain_id);
}

/// Positions of `batches` sorted by ascending domain_id (stable).
std::vector<std::size_t> domain_order(std::span<const DomainBatch> batches) {
  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return batches[a].domain_id < batches[b].domain_id;
  });
  return order;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  // Rethrow the error of the lowest index so the reported failure does not
  // depend on scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

StepResult apply_update(const ParamVector& theta, const ParamVector& velocity,
                        const ParamVector& mean_grad, const OptimizerConfig& cfg,
                        StepDiagnostics diagnostics) {
  if (velocity.size() != theta.size()) {
    throw DimensionError("velocity has " + std::to_string(velocity.size()) +
                         " entries, parameters have " + std::to_string(theta.size()));
  }
  StepResult result;
  result.velocity = axpy(mean_grad, cfg.momentum, velocity);
  result.theta = axpy(theta, -cfg.lr, result.velocity);
  if (!all_finite(result.theta)) throw NumericError("non-finite parameters after update");
  diagnostics.aggregate_grad_norm = norm(mean_grad);
  result.diagnostics = std::move(diagnostics);
  return result;
}

}  // namespace

void OptimizerConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(rho) || rho < 0.0) throw ConfigError("must be finite and >= 0", "optimizer.rho");
  if (!finite(alpha) || alpha < 0.0) throw ConfigError("must be finite and >= 0", "optimizer.alpha");
  if (!finite(lr) || lr <= 0.0) throw ConfigError("must be finite and > 0", "optimizer.lr");
  if (!finite(momentum) || momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError("must be in [0, 1)", "optimizer.momentum");
  }
  if (!finite(hvp_step) || hvp_step <= 0.0) {
    throw ConfigError("must be finite and > 0", "optimizer.hvp_step");
  }
  if (!finite(grad_floor) || grad_floor <= 0.0) {
    throw ConfigError("must be finite and > 0", "optimizer.grad_floor");
  }
}

void StepDiagnostics::push(const DomainDiagnostics& d) {
  domain_ids.push_back(d.domain_id);
  per_domain_loss.push_back(d.loss);
  per_domain_perturbed_loss.push_back(d.perturbed_loss);
  per_domain_alignment.push_back(d.alignment);
  grad_norms.push_back(d.grad_norm);
}

ParamVector epsilon_hat(const ParamVector& g, double rho, double grad_floor) {
  const double n = norm(g);
  if (!(n >= grad_floor)) return ParamVector::zeros(g.size());
  return scaled(g, rho / n);
}

double multi_domain_perturbed_loss(const DifferentiableModel& model, const ParamVector& theta,
                                   std::span<const DomainBatch> batches, double rho,
                                   double grad_floor) {
  if (batches.empty()) throw InputError("multi_domain_perturbed_loss: no domain batches");
  double total = 0.0;
  for (std::size_t i : domain_order(batches)) {
    const DomainBatch& b = batches[i];
    const ParamVector eps = epsilon_hat(model.grad(theta, b), rho, grad_floor);
    total += model.loss(axpy(theta, 1.0, eps), b);
  }
  return total / static_cast<double>(batches.size());
}

ParamVector hvp(const DifferentiableModel& model, const ParamVector& params,
                const DomainBatch& batch, const ParamVector& v, double hvp_step) {
  if (!(hvp_step > 0.0)) throw InputError("hvp: step must be positive");
  if (v.size() != params.size()) {
    throw DimensionError("hvp: direction length " + std::to_string(v.size()) +
                         " does not match parameter count " + std::to_string(params.size()));
  }
  const double v_norm = norm(v);
  if (v_norm == 0.0) return ParamVector::zeros(params.size());
  const ParamVector u = scaled(v, 1.0 / v_norm);
  const double h = hvp_step * (1.0 + norm(params));
  const ParamVector up = model.grad(axpy(params, h, u), batch);
  const ParamVector down = model.grad(axpy(params, -h, u), batch);
  ParamVector out(params.size());
  const double factor = v_norm / (2.0 * h);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (up[i] - down[i]) * factor;
  return out;
}

DomainGradient roga_domain_gradient(const DifferentiableModel& model, const ParamVector& theta,
                                    const DomainBatch& batch, const OptimizerConfig& cfg,
                                    DescentTerm descent) {
  const int id = batch.domain_id;
  const ParamVector g = model.grad(theta, batch);
  require_finite(g, "gradient", id);
  const double base_loss = model.loss(theta, batch);
  require_finite(base_loss, "loss", id);

  const ParamVector eps = epsilon_hat(g, cfg.rho, cfg.grad_floor);
  const bool perturbed = norm(eps) > 0.0;
  const ParamVector theta_p = perturbed ? axpy(theta, 1.0, eps) : theta;
  const ParamVector g_p = perturbed ? model.grad(theta_p, batch) : g;
  require_finite(g_p, "perturbed gradient", id);
  const double perturbed_loss = perturbed ? model.loss(theta_p, batch) : base_loss;
  require_finite(perturbed_loss, "perturbed loss", id);

  DomainGradient out;
  out.diagnostics = DomainDiagnostics{id, base_loss, perturbed_loss, dot(g_p, g), norm(g)};
  const ParamVector& lead = descent == DescentTerm::perturbed ? g_p : g;
  if (cfg.alpha == 0.0) {
    out.gradient = lead;
    return out;
  }

  // d/dtheta <g_p(theta), g(theta)> = H(theta + eps) g + H(theta) g_p
  const ParamVector h_perturbed = hvp(model, theta_p, batch, g, cfg.hvp_step);
  const ParamVector h_base = hvp(model, theta, batch, g_p, cfg.hvp_step);
  out.gradient = ParamVector(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out.gradient[i] = lead[i] - cfg.alpha * (h_perturbed[i] + h_base[i]);
  }
  require_finite(out.gradient, "domain update", id);
  return out;
}

StepResult roga_step(const DifferentiableModel& model, const ParamVector& theta,
                     std::span<const DomainBatch> batches, const OptimizerConfig& cfg,
                     const ParamVector& velocity, DescentTerm descent, unsigned threads) {
  if (batches.empty()) throw InputError("roga_step: no domain batches");
  const std::vector<std::size_t> order = domain_order(batches);
  std::vector<DomainGradient> parts(order.size());
  parallel_for(order.size(), threads, [&](std::size_t k) {
    parts[k] = roga_domain_gradient(model, theta, batches[order[k]], cfg, descent);
  });

  ParamVector sum(theta.size());
  StepDiagnostics diagnostics;
  for (const DomainGradient& part : parts) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += part.gradient[i];
    diagnostics.push(part.diagnostics);
  }
  const double k = static_cast<double>(parts.size());
  for (double& v : sum) v /= k;
  return apply_update(theta, velocity, sum, cfg, std::move(diagnostics));
}

StepResult sam_step(const DifferentiableModel& model, const ParamVector& theta,
                    const DomainBatch& pooled_batch, const OptimizerConfig& cfg,
                    const ParamVector& velocity) {
  OptimizerConfig sam_cfg = cfg;
  sam_cfg.alpha = 0.0;
  return roga_step(model, theta, std::span<const DomainBatch>(&pooled_batch, 1), sam_cfg,
                   velocity);
}

StepResult sgd_step(const DifferentiableModel& model, const ParamVector& theta,
                    const DomainBatch& pooled_batch, const OptimizerConfig& cfg,
                    const ParamVector& velocity) {
  const int id = pooled_batch.domain_id;
  const ParamVector g = model.grad(theta, pooled_batch);
  require_finite(g, "gradient", id);
  const double base_loss = model.loss(theta, pooled_batch);
  require_finite(base_loss, "loss", id);

  StepDiagnostics diagnostics;
  diagnostics.push(DomainDiagnostics{id, base_loss, base_loss, dot(g, g), norm(g)});
  // Same arithmetic as a one-domain mean so that sam_step(rho = 0) matches.
  ParamVector mean(theta.size());
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = (0.0 + g[i]) / 1.0;
  return apply_update(theta, velocity, mean, cfg, std::move(diagnostics));
}

double roga_objective(const DifferentiableModel& model, const ParamVector& theta,
                      std::span<const DomainBatch> batches, const OptimizerConfig& cfg) {
  if (batches.empty()) throw InputError("roga_objective: no domain batches");
  double total = 0.0;
  for (std::size_t i : domain_order(batches)) {
    const DomainBatch& b = batches[i];
    const ParamVector g = model.grad(theta, b);
    const ParamVector theta_p = axpy(theta, 1.0, epsilon_hat(g, cfg.rho, cfg.grad_floor));
    total += model.loss(theta_p, b) - cfg.alpha * dot(model.grad(theta_p, b), g);
  }
  return total / static_cast<double>(batches.size());
}

}  // namespace roga
