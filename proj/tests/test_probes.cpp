#include <cmath>

#include "doctest.h"
#include "roga/errors.hpp"
#include "roga/models.hpp"
#include "roga/probes.hpp"
#include "support/oracles.hpp"

using namespace roga;
using roga::testing::dummy_batch;
using roga::testing::QuadraticModel;
using roga::testing::random_batch;
using roga::testing::random_vector;

TEST_CASE("sharpness of a quadratic at its minimum is lambda rho^2 / 2") {
  for (double lambda : {0.5, 2.0, 7.0}) {
    for (double rho : {0.01, 0.1, 1.0}) {
      const SharpnessResult r =
          sharpness(QuadraticModel({lambda}), {0.0}, dummy_batch(), rho, 10, 2, 1);
      CHECK(r.sharpness == doctest::Approx(0.5 * lambda * rho * rho).epsilon(1e-12));
      CHECK(r.base_loss == 0.0);
    }
  }
  // Anisotropic: the maximum sits on the stiffest axis.
  const SharpnessResult r =
      sharpness(QuadraticModel({1.0, 4.0}), {0.0, 0.0}, dummy_batch(), 0.1, 50, 5, 2);
  CHECK(r.sharpness == doctest::Approx(0.5 * 4.0 * 0.01).epsilon(1e-6));
}

TEST_CASE("sharpness of a linear loss is rho |c|") {
  const QuadraticModel linear({0.0, 0.0, 0.0}, {1.0, -2.0, 2.0});
  const SharpnessResult r = sharpness(linear, {0.3, 0.1, -0.4}, dummy_batch(), 0.2, 5, 3, 4);
  CHECK(std::abs(r.sharpness - 0.2 * 3.0) <= 1e-6);
}

TEST_CASE("small-radius sharpness respects the first-order bound") {
  const ModelSpec spec = ModelSpec::mlp({3, 6, 1});
  const Network net(spec);
  Rng rng(5);
  const DomainBatch b = random_batch(rng, 20, 3);
  const ParamVector theta = random_vector(rng, spec.param_count(), 0.5);
  const double rho = 1e-4;
  const SharpnessResult r = sharpness(net, theta, b, rho, 10, 3, 6);
  const double gnorm = norm(net.grad(theta, b));
  // Second-order remainder bounded generously by rho^2 times a curvature scale.
  CHECK(r.sharpness <= rho * gnorm + 10.0 * rho * rho);
  CHECK(r.sharpness >= 0.9 * rho * gnorm);
}

TEST_CASE("sharpness is never negative, grows with rho and with restarts") {
  const ModelSpec spec = ModelSpec::mlp({3, 6, 1});
  const Network net(spec);
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const DomainBatch b = random_batch(rng, 20, 3);
    const ParamVector theta = random_vector(rng, spec.param_count(), 0.5);
    double prev = 0.0;
    for (double rho : {0.01, 0.05, 0.1}) {
      const SharpnessResult r = sharpness(net, theta, b, rho, 20, 5, 9);
      CHECK(r.sharpness >= 0.0);
      CHECK(r.sharpness >= prev);
      prev = r.sharpness;
    }
    for (std::size_t restarts = 0; restarts < 4; ++restarts) {
      CHECK(sharpness(net, theta, b, 0.1, 5, restarts + 1, 3).sharpness >=
            sharpness(net, theta, b, 0.1, 5, restarts, 3).sharpness);
    }
  }
  CHECK_THROWS_AS(sharpness(net, ParamVector::zeros(spec.param_count()), dummy_batch(), 0.0, 1, 1, 1),
                  InputError);
}

TEST_CASE("domain gradient cosine") {
  const ModelSpec spec = ModelSpec::mlp({3, 4, 1});
  const Network net(spec);
  Rng rng(8);
  const ParamVector theta = random_vector(rng, spec.param_count(), 0.5);
  DomainBatch a = random_batch(rng, 12, 3, 0);
  DomainBatch copy = a;
  copy.domain_id = 1;
  const DomainBatch c = random_batch(rng, 12, 3, 2);
  std::vector<DomainBatch> batches{a, copy, c};
  const auto cos = domain_gradient_cosine(net, theta, batches);
  CHECK(cos[0][1] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(cos[i][i] == 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(cos[i][j] == cos[j][i]);
      CHECK(cos[i][j] >= -1.0);
      CHECK(cos[i][j] <= 1.0);
    }
  }
  // Duplicating a domain's examples leaves its mean gradient, and so every
  // cosine, unchanged.
  std::vector<DomainBatch> doubled{pool_batches(std::vector<DomainBatch>{a, a}), copy, c};
  const auto cos2 = domain_gradient_cosine(net, theta, doubled);
  CHECK(cos2[0][2] == doctest::Approx(cos[0][2]).epsilon(1e-12));

  // A zero-gradient domain gets zero entries, including its diagonal.
  const QuadraticModel q({1.0});
  const auto zero = domain_gradient_cosine(q, {0.0}, std::vector<DomainBatch>{dummy_batch(0), dummy_batch(1)});
  CHECK(zero[0][0] == 0.0);
  CHECK_THROWS_AS(domain_gradient_cosine(net, theta, std::span(&a, 1)), InputError);
}

TEST_CASE("loss slices") {
  const QuadraticModel q({1.0});
  const auto slice = loss_slice_1d(q, {0.0}, {2.0}, 1.0, 5, dummy_batch());
  REQUIRE(slice.size() == 5);
  CHECK(slice[2].t == 0.0);
  CHECK(slice[2].loss == 0.0);
  CHECK(slice[0].loss == slice[4].loss);
  CHECK(slice[1].loss == slice[3].loss);
  CHECK(slice[0].loss == doctest::Approx(0.5));

  const auto flat = loss_slice_1d(q, {1.0}, {1.0}, 0.0, 3, dummy_batch());
  CHECK(flat[0].loss == flat[1].loss);
  CHECK(flat[1].loss == flat[2].loss);

  const ModelSpec spec = ModelSpec::mlp({3, 4, 1});
  const Network net(spec);
  Rng rng(9);
  const DomainBatch b = random_batch(rng, 10, 3);
  const ParamVector theta = random_vector(rng, spec.param_count());
  const ParamVector dir = random_vector(rng, spec.param_count());
  const auto s = loss_slice_1d(net, theta, dir, 0.5, 11, b);
  CHECK(s[5].loss == net.loss(theta, b));
  const ParamVector u = scaled(dir, 1.0 / norm(dir));
  for (const auto& pt : s) CHECK(std::abs(pt.loss - net.loss(axpy(theta, pt.t, u), b)) <= 1e-12);

  CHECK_THROWS_AS(loss_slice_1d(q, {0.0}, {0.0}, 1.0, 5, dummy_batch()), InputError);
  CHECK_THROWS_AS(loss_slice_1d(q, {0.0}, {1.0}, 1.0, 2, dummy_batch()), InputError);
}
