#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "roga/domains.hpp"
#include "roga/errors.hpp"

using namespace roga;

namespace {

double column_mean(const Matrix& m, std::size_t c) {
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c);
  return s / static_cast<double>(m.rows());
}

double correlation(const DomainDataset& ds, std::size_t c) {
  const double n = static_cast<double>(ds.size());
  double mx = 0, my = 0;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    mx += ds.features(r, c);
    my += ds.labels[r];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const double dx = ds.features(r, c) - mx, dy = ds.labels[r] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

void check_balanced(const DomainDataset& ds) {
  std::size_t pos = 0;
  for (int y : ds.labels) pos += static_cast<std::size_t>(y);
  const double half = static_cast<double>(ds.size()) / 2.0;
  CHECK(std::abs(static_cast<double>(pos) - half) <= 1.0);
}

}  // namespace

TEST_CASE("rotated moons without noise lie on the canonical half circles") {
  const DomainDataset ds = make_rotated_moons(0.0, 101, 0.0, 3);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const double x = ds.features(r, 0), y = ds.features(r, 1);
    if (ds.labels[r] == 0) {
      CHECK(std::abs(x * x + y * y - 1.0) <= 1e-12);
      CHECK(y >= -1e-12);
    } else {
      const double cx = x - 1.0, cy = y - 0.5;
      CHECK(std::abs(cx * cx + cy * cy - 1.0) <= 1e-12);
      CHECK(cy <= 1e-12);
    }
  }
  check_balanced(ds);
}

TEST_CASE("rotated moons: determinism and rotation") {
  CHECK(make_rotated_moons(0.3, 200, 0.1, 9).features ==
        make_rotated_moons(0.3, 200, 0.1, 9).features);
  const DomainDataset a = make_rotated_moons(0.0, 200, 0.0, 1);
  const DomainDataset b = make_rotated_moons(std::numbers::pi, 200, 0.0, 1);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(std::abs(column_mean(b.features, c) + column_mean(a.features, c)) <= 1e-9);
  }
  CHECK_THROWS_AS(make_rotated_moons(0.0, 1, 0.0, 1), InputError);
  CHECK_THROWS_AS(make_rotated_moons(0.0, 10, -1.0, 1), InputError);
}

TEST_CASE("spurious blobs") {
  SUBCASE("no spurious strength means no label correlation") {
    CHECK(std::abs(correlation(make_spurious_blobs(1.0, 0.0, 1, 2000, 2, 4), 1)) <= 0.1);
  }
  SUBCASE("sign flip negates the spurious correlation") {
    const double plus = correlation(make_spurious_blobs(1.0, 2.0, 1, 2000, 0, 5), 1);
    const double minus = correlation(make_spurious_blobs(1.0, 2.0, -1, 2000, 0, 5), 1);
    CHECK(plus > 0.5);
    CHECK(minus < -0.5);
  }
  SUBCASE("a threshold on the core feature alone is accurate") {
    // Class-conditional N(+-2, 1): the sign probe is right with probability
    // Phi(2) ~ 0.977.
    const DomainDataset ds = make_spurious_blobs(2.0, 3.0, 1, 2000, 3, 6);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      correct += (ds.features(r, 0) >= 0.0) == (ds.labels[r] == 1) ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / 2000.0 > 0.9);
  }
  SUBCASE("core class means differ by 2 core_sep") {
    const DomainDataset ds = make_spurious_blobs(1.5, 1.0, 1, 4000, 0, 7);
    double m[2] = {0, 0};
    std::size_t n[2] = {0, 0};
    for (std::size_t r = 0; r < ds.size(); ++r) {
      m[ds.labels[r]] += ds.features(r, 0);
      ++n[ds.labels[r]];
    }
    const double diff = m[1] / n[1] - m[0] / n[0];
    CHECK(std::abs(diff - 3.0) <= 0.05 * 3.0);
  }
  SUBCASE("shape and noise columns") {
    const DomainDataset ds = make_spurious_blobs(1.0, 3.0, -1, 11, 8, 8, 3);
    CHECK(ds.dim() == 10);
    CHECK(ds.size() == 11);
    CHECK(ds.domain_id == 3);
    check_balanced(ds);
  }
  CHECK_THROWS_AS(make_spurious_blobs(0.0, 1.0, 1, 10, 0, 1), InputError);
  CHECK_THROWS_AS(make_spurious_blobs(1.0, 1.0, 2, 10, 0, 1), InputError);
}

TEST_CASE("generators are pure functions of their descriptors") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DomainDataset blobs = make_spurious_blobs(1.0, 3.0, 1, 101, 4, seed, 2);
    const DomainDataset again = generate(blobs.descriptor);
    CHECK(again.features == blobs.features);
    CHECK(again.labels == blobs.labels);
    check_balanced(blobs);

    const DomainDataset moons = make_rotated_moons(0.7, 57, 0.2, seed, 1);
    CHECK(generate(moons.descriptor).features == moons.features);
    check_balanced(moons);

    GeneratorDescriptor std_desc = blobs.descriptor;
    std_desc.standardize = true;
    CHECK(generate(std_desc).features == generate(std_desc).features);
  }
}

TEST_CASE("standardization gives zero mean and unit variance") {
  GeneratorDescriptor d = make_spurious_blobs(1.0, 3.0, 1, 500, 2, 1).descriptor;
  d.standardize = true;
  const DomainDataset ds = generate(d);
  for (std::size_t c = 0; c < ds.dim(); ++c) {
    CHECK(std::abs(column_mean(ds.features, c)) <= 1e-12);
    double var = 0.0;
    for (std::size_t r = 0; r < ds.size(); ++r) var += ds.features(r, c) * ds.features(r, c);
    CHECK(var / 500.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("leave-one-out splits") {
  const auto plans = leave_one_out_splits(4);
  CHECK(plans.size() == 4);
  std::set<int> held;
  for (const auto& p : plans) {
    CHECK(p.train_domain_ids.size() == 3);
    held.insert(p.held_out_domain_id);
    for (int id : p.train_domain_ids) CHECK(id != p.held_out_domain_id);
  }
  CHECK(held == std::set<int>{0, 1, 2, 3});
  CHECK_THROWS_AS(leave_one_out_splits(2), InputError);
}

TEST_CASE("batch sampling") {
  std::vector<DomainDataset> data{make_spurious_blobs(1.0, 1.0, 1, 40, 0, 1, 0),
                                  make_spurious_blobs(1.0, 1.0, -1, 40, 0, 2, 1)};
  SUBCASE("full-size batch is a permutation of the dataset") {
    BatchSampler sampler(3);
    const auto idx = sampler.next_indices(data, 40);
    for (const auto& list : idx) {
      CHECK(std::set<std::size_t>(list.begin(), list.end()).size() == 40);
    }
    const auto batches = sample_domain_batches(data, 40, sampler);
    CHECK(batches[0].size() == 40);
    CHECK(batches[1].domain_id == 1);
  }
  SUBCASE("same seed, same batches") {
    BatchSampler a(5), b(5);
    for (int i = 0; i < 7; ++i) CHECK(sample_domain_batches(data, 8, a) == sample_domain_batches(data, 8, b));
  }
  SUBCASE("one epoch visits every index exactly once per domain") {
    BatchSampler sampler(6);
    std::vector<std::vector<int>> counts(2, std::vector<int>(40, 0));
    for (int step = 0; step < 5; ++step) {
      const auto idx = sampler.next_indices(data, 8);
      for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t i : idx[k]) ++counts[k][i];
      }
    }
    for (const auto& c : counts) {
      for (int v : c) CHECK(v == 1);
    }
  }
  SUBCASE("oversized batch is a configuration error") {
    BatchSampler sampler(1);
    CHECK_THROWS_AS(sampler.next_indices(data, 41), ConfigError);
  }
}
