#include <cmath>

#include "doctest.h"
#include "roga/errors.hpp"
#include "roga/models.hpp"
#include "support/oracles.hpp"

using namespace roga;

TEST_CASE("zeros init") {
  const ModelSpec spec = ModelSpec::mlp({4, 3, 1});
  CHECK(init_params(spec, {InitScheme::zeros, 7}) == ParamVector::zeros(spec.param_count()));
}

TEST_CASE("glorot init is deterministic, bounded and leaves biases at zero") {
  const ModelSpec spec = ModelSpec::mlp({2, 3, 1});
  const InitSpec init{InitScheme::glorot_uniform, 42};
  const ParamVector a = init_params(spec, init);
  CHECK(a == init_params(spec, init));
  // layer 1: 6 weights then 3 biases; layer 2: 3 weights then 1 bias
  const double b1 = std::sqrt(6.0 / 5.0);
  const double b2 = std::sqrt(6.0 / 4.0);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(a[i]) <= b1);
  for (std::size_t i = 6; i < 9; ++i) CHECK(a[i] == 0.0);
  for (std::size_t i = 9; i < 12; ++i) CHECK(std::abs(a[i]) <= b2);
  CHECK(a[12] == 0.0);
}

TEST_CASE("different seeds give different glorot vectors") {
  const ModelSpec spec = ModelSpec::logistic(1);
  for (std::uint64_t s = 0; s < 20; ++s) {
    CHECK(init_params(spec, {InitScheme::glorot_uniform, s}) !=
          init_params(spec, {InitScheme::glorot_uniform, s + 1}));
  }
}

TEST_CASE("predict_scores") {
  SUBCASE("zero params score 0.5") {
    const ModelSpec spec = ModelSpec::mlp({3, 4, 1});
    Rng rng(1);
    const DomainBatch b = roga::testing::random_batch(rng, 5, 3);
    for (double s : predict_scores(spec, ParamVector::zeros(spec.param_count()), b.features)) {
      CHECK(s == 0.5);
    }
  }
  SUBCASE("closed-form logistic") {
    const auto scores =
        predict_scores(ModelSpec::logistic(2), {10.0, 0.0, 0.0}, Matrix(1, 2, {1.0, 0.0}));
    CHECK(scores[0] == doctest::Approx(0.9999546021312976).epsilon(1e-15));
  }
  SUBCASE("BCE recomputed from scores equals loss") {
    const ModelSpec spec = ModelSpec::mlp({3, 6, 1});
    Rng rng(2);
    const DomainBatch b = roga::testing::random_batch(rng, 30, 3);
    const ParamVector p = init_params(spec, {InitScheme::glorot_uniform, 3});
    const auto scores = predict_scores(spec, p, b.features);
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      total -= b.labels[i] == 1 ? std::log(scores[i]) : std::log(1.0 - scores[i]);
    }
    CHECK(std::abs(total / 30.0 - loss(spec, p, b)) <= 1e-9);
  }
  CHECK_THROWS_AS(predict_scores(ModelSpec::logistic(2), {1.0, 2.0, 3.0}, Matrix(1, 3)),
                  DimensionError);
}

TEST_CASE("scores stay inside (0, 1) and are monotone in the logit") {
  const ModelSpec spec = ModelSpec::logistic(1);
  std::vector<double> xs;
  for (int i = -30; i <= 30; ++i) xs.push_back(i);
  const auto scores = predict_scores(spec, {1.0, 0.0}, Matrix(xs.size(), 1, xs));
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CHECK(scores[i] > 0.0);
    CHECK(scores[i] < 1.0);
    if (i > 0) CHECK(scores[i] > scores[i - 1]);
  }
}

TEST_CASE("default experiment model") {
  const ModelSpec spec = default_experiment_model(10);
  CHECK(spec.layer_widths == std::vector<std::size_t>{10, 16, 16, 1});
  CHECK(spec.activation == Activation::tanh);
}
