#include "roga/probes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roga/errors.hpp"
#include "roga/optim.hpp"
#include "roga/rng.hpp"

namespace roga {
namespace {

void project_to_ball(ParamVector& eps, double rho) {
  const double n = norm(eps);
  if (n > rho) eps = scaled(eps, rho / n);
}

/// Best loss seen along normalized projected ascent from `start`. The step
/// is the full radius: on the sphere this behaves like a power iteration on
/// the local curvature, while a step of rho / iters cannot even turn the
/// iterate around the ball. Tracking the best iterate keeps overshoot harmless.
double ascend(const DifferentiableModel& model, const ParamVector& theta, const DomainBatch& data,
              ParamVector eps, double rho, std::size_t iters) {
  const double step = rho;
  double best = model.loss(axpy(theta, 1.0, eps), data);
  for (std::size_t it = 0; it < iters; ++it) {
    const ParamVector g = model.grad(axpy(theta, 1.0, eps), data);
    const double gn = norm(g);
    if (!(gn > 0.0)) break;  // stationary: ascent cannot move
    eps = axpy(eps, step / gn, g);
    project_to_ball(eps, rho);
    best = std::max(best, model.loss(axpy(theta, 1.0, eps), data));
  }
  return best;
}

}  // namespace

ParamVector random_unit_direction(std::size_t size, std::uint64_t seed) {
  if (size == 0) throw InputError("random_unit_direction: empty parameter space");
  Rng rng(seed);
  ParamVector v(size);
  double n = 0.0;
  while (n == 0.0) {
    for (double& x : v) x = rng.normal();
    n = norm(v);
  }
  return scaled(v, 1.0 / n);
}

SharpnessResult sharpness(const DifferentiableModel& model, const ParamVector& theta,
                          const DomainBatch& data, double rho, std::size_t ascent_iters,
                          std::size_t restarts, std::uint64_t seed) {
  if (!(rho > 0.0)) throw InputError("sharpness: rho must be positive");
  if (ascent_iters < 1) throw InputError("sharpness: ascent_iters must be at least 1");

  SharpnessResult result;
  result.rho = rho;
  result.ascent_iters = ascent_iters;
  result.restarts = restarts;
  result.base_loss = model.loss(theta, data);

  // Candidates in order: eps = 0, the analytic point, then restarts 0..r-1.
  // Strict comparison keeps the earliest candidate on ties.
  double best = result.base_loss;
  const ParamVector analytic = epsilon_hat(model.grad(theta, data), rho);
  best = std::max(best, ascend(model, theta, data, analytic, rho, ascent_iters));
  for (std::size_t j = 0; j < restarts; ++j) {
    const ParamVector start =
        scaled(random_unit_direction(theta.size(), mix_seed(seed, j)), rho);
    const double found = ascend(model, theta, data, start, rho, ascent_iters);
    if (found > best) best = found;
  }
  result.max_perturbed_loss = best;
  result.sharpness = best - result.base_loss;
  return result;
}

std::vector<std::vector<double>> domain_gradient_cosine(const DifferentiableModel& model,
                                                        const ParamVector& theta,
                                                        std::span<const DomainBatch> batches,
                                                        double grad_floor) {
  if (batches.size() < 2) throw InputError("domain_gradient_cosine: need at least 2 domains");
  const std::size_t k = batches.size();
  std::vector<ParamVector> grads;
  std::vector<double> norms;
  grads.reserve(k);
  for (const auto& b : batches) {
    grads.push_back(model.grad(theta, b));
    norms.push_back(norm(grads.back()));
  }
  std::vector<std::vector<double>> cos(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double value = 0.0;
      if (norms[i] >= grad_floor && norms[j] >= grad_floor) {
        value = i == j ? 1.0 : std::clamp(dot(grads[i], grads[j]) / (norms[i] * norms[j]), -1.0, 1.0);
      }
      cos[i][j] = value;
      cos[j][i] = value;
    }
  }
  return cos;
}

std::vector<SlicePoint> loss_slice_1d(const DifferentiableModel& model, const ParamVector& theta,
                                      const ParamVector& direction, double half_range,
                                      std::size_t steps, const DomainBatch& data) {
  if (steps < 3) throw InputError("loss_slice_1d: steps must be at least 3");
  if (!(half_range >= 0.0)) throw InputError("loss_slice_1d: half_range must be >= 0");
  const double n = norm(direction);
  if (n == 0.0) throw InputError("loss_slice_1d: direction is the zero vector");
  const ParamVector u = scaled(direction, 1.0 / n);

  std::vector<SlicePoint> out;
  out.reserve(steps);
  const double span = static_cast<double>(steps - 1);
  for (std::size_t k = 0; k < steps; ++k) {
    // Integer numerator makes the middle sample exactly t = 0.
    const double num = 2.0 * static_cast<double>(k) - span;
    const double t = half_range * num / span;
    out.push_back({t, model.loss(axpy(theta, t, u), data)});
  }
  return out;
}

}  // namespace roga
