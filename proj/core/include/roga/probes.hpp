#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "roga/batch.hpp"
#include "roga/model.hpp"
#include "roga/param_vector.hpp"

namespace roga {

struct SharpnessResult {
  double base_loss = 0.0;
  double max_perturbed_loss = 0.0;
  double sharpness = 0.0;  ///< max_perturbed_loss - base_loss, never negative
  double rho = 0.0;
  std::size_t ascent_iters = 0;
  std::size_t restarts = 0;
};

/// Estimates max_{|eps| <= rho} L(theta + eps) - L(theta).
///
/// Runs normalized projected gradient ascent (step rho along the
/// normalized gradient, projected back onto the rho-ball) from the analytic first-order point
/// rho * g / |g| and from `restarts` random points on the sphere. Restart j
/// draws its start from a seed derived from (seed, j) alone, so adding a
/// restart only extends the candidate set. eps = 0 is always a candidate.
SharpnessResult sharpness(const DifferentiableModel& model, const ParamVector& theta,
                          const DomainBatch& data, double rho, std::size_t ascent_iters,
                          std::size_t restarts, std::uint64_t seed);

/// Symmetric K x K matrix of cosines between per-domain gradients. Pairs
/// involving a gradient with norm below grad_floor get 0, including the
/// diagonal.
std::vector<std::vector<double>> domain_gradient_cosine(const DifferentiableModel& model,
                                                        const ParamVector& theta,
                                                        std::span<const DomainBatch> batches,
                                                        double grad_floor = 1e-12);

struct SlicePoint {
  double t = 0.0;
  double loss = 0.0;
};

/// Loss along theta + t * direction / |direction| for `steps` evenly spaced
/// t in [-half_range, half_range]. With an odd step count the middle t is
/// exactly 0.
std::vector<SlicePoint> loss_slice_1d(const DifferentiableModel& model, const ParamVector& theta,
                                      const ParamVector& direction, double half_range,
                                      std::size_t steps, const DomainBatch& data);

/// Unit vector with independent normal coordinates.
ParamVector random_unit_direction(std::size_t size, std::uint64_t seed);

}  // namespace roga
