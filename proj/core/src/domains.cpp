#include "roga/domains.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "roga/errors.hpp"

namespace roga {

std::string GeneratorDescriptor::family() const {
  return std::holds_alternative<RotatedMoonsParams>(params) ? "rotated_moons" : "spurious_blobs";
}

DomainBatch DomainDataset::as_batch() const { return DomainBatch{features, labels, domain_id}; }

DomainDataset make_rotated_moons(double domain_angle, std::size_t n, double noise_sd,
                                 std::uint64_t seed, int domain_id) {
  if (n < 2) throw InputError("make_rotated_moons: n must be at least 2");
  if (!(noise_sd >= 0.0)) throw InputError("make_rotated_moons: noise_sd must be >= 0");

  DomainDataset ds;
  ds.domain_id = domain_id;
  ds.descriptor = GeneratorDescriptor{RotatedMoonsParams{domain_angle, n, noise_sd, seed},
                                      domain_id, false};
  ds.features = Matrix(n, 2);
  ds.labels.resize(n);

  const std::size_t count[2] = {(n + 1) / 2, n / 2};
  std::size_t seen[2] = {0, 0};
  const double c = std::cos(domain_angle);
  const double s = std::sin(domain_angle);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const std::size_t m = count[y];
    const double t =
        m > 1 ? std::numbers::pi * static_cast<double>(seen[y]) / static_cast<double>(m - 1) : 0.0;
    ++seen[y];
    double x0, x1;
    if (y == 0) {
      x0 = std::cos(t);
      x1 = std::sin(t);
    } else {
      x0 = 1.0 - std::cos(t);
      x1 = 0.5 - std::sin(t);
    }
    double r0 = c * x0 - s * x1;
    double r1 = s * x0 + c * x1;
    if (noise_sd > 0.0) {
      r0 += noise_sd * rng.normal();
      r1 += noise_sd * rng.normal();
    }
    ds.features(i, 0) = r0;
    ds.features(i, 1) = r1;
    ds.labels[i] = y;
  }
  return ds;
}

DomainDataset make_spurious_blobs(double core_sep, double spur_strength, int spur_sign,
                                  std::size_t n, std::size_t d_noise, std::uint64_t seed,
                                  int domain_id) {
  if (!(core_sep > 0.0)) throw InputError("make_spurious_blobs: core_sep must be > 0");
  if (n < 2) throw InputError("make_spurious_blobs: n must be at least 2");
  if (spur_sign != 1 && spur_sign != -1) throw InputError("make_spurious_blobs: spur_sign must be +1 or -1");

  DomainDataset ds;
  ds.domain_id = domain_id;
  ds.descriptor = GeneratorDescriptor{
      SpuriousBlobsParams{core_sep, spur_strength, spur_sign, n, d_noise, seed}, domain_id, false};
  ds.features = Matrix(n, 2 + d_noise);
  ds.labels.resize(n);

  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const double sign = 2.0 * y - 1.0;
    ds.labels[i] = y;
    ds.features(i, 0) = core_sep * sign + rng.normal();
    ds.features(i, 1) = spur_sign * spur_strength * sign + rng.normal();
    for (std::size_t j = 0; j < d_noise; ++j) ds.features(i, 2 + j) = rng.normal();
  }
  return ds;
}

void standardize_features(Matrix& features) {
  const std::size_t rows = features.rows();
  if (rows == 0) return;
  for (std::size_t c = 0; c < features.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < rows; ++r) mean += features(r, c);
    mean /= static_cast<double>(rows);
    double var = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = features(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(rows);
    const double sd = std::sqrt(var);
    for (std::size_t r = 0; r < rows; ++r) {
      features(r, c) = sd > 0.0 ? (features(r, c) - mean) / sd : features(r, c) - mean;
    }
  }
}

DomainDataset generate(const GeneratorDescriptor& descriptor) {
  DomainDataset ds = std::visit(
      [&](const auto& p) -> DomainDataset {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, RotatedMoonsParams>) {
          return make_rotated_moons(p.angle, p.n, p.noise_sd, p.seed, descriptor.domain_id);
        } else {
          return make_spurious_blobs(p.core_sep, p.spur_strength, p.spur_sign, p.n, p.d_noise,
                                     p.seed, descriptor.domain_id);
        }
      },
      descriptor.params);
  if (descriptor.standardize) standardize_features(ds.features);
  ds.descriptor = descriptor;
  return ds;
}

std::vector<SplitPlan> leave_one_out_splits(int domain_count) {
  if (domain_count < 3) {
    throw InputError("leave_one_out_splits: need at least 3 domains, got " +
                     std::to_string(domain_count));
  }
  std::vector<SplitPlan> plans;
  plans.reserve(static_cast<std::size_t>(domain_count));
  for (int held = 0; held < domain_count; ++held) {
    SplitPlan plan;
    plan.held_out_domain_id = held;
    for (int id = 0; id < domain_count; ++id) {
      if (id != held) plan.train_domain_ids.push_back(id);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

BatchSampler::Stream& BatchSampler::stream_for(const DomainDataset& dataset) {
  for (auto& s : streams_) {
    if (s.domain_id == dataset.domain_id) return s;
  }
  Stream s{dataset.domain_id, Rng(domain_stream_seed(seed_, dataset.domain_id)), {}, 0};
  s.order.resize(dataset.size());
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  s.rng.shuffle(s.order);
  streams_.push_back(std::move(s));
  return streams_.back();
}

std::vector<std::vector<std::size_t>> BatchSampler::next_indices(
    std::span<const DomainDataset> datasets, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive", "batch_size");
  for (const auto& ds : datasets) {
    if (batch_size > ds.size()) {
      throw ConfigError("batch_size " + std::to_string(batch_size) + " exceeds size " +
                            std::to_string(ds.size()) + " of domain " +
                            std::to_string(ds.domain_id),
                        "batch_size");
    }
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(datasets.size());
  for (const auto& ds : datasets) {
    Stream& s = stream_for(ds);
    if (s.order.size() != ds.size()) {
      throw DimensionError("BatchSampler: dataset size of domain " + std::to_string(ds.domain_id) +
                           " changed between calls");
    }
    if (s.cursor + batch_size > s.order.size()) {
      std::iota(s.order.begin(), s.order.end(), std::size_t{0});
      s.rng.shuffle(s.order);
      s.cursor = 0;
    }
    out.emplace_back(s.order.begin() + static_cast<std::ptrdiff_t>(s.cursor),
                     s.order.begin() + static_cast<std::ptrdiff_t>(s.cursor + batch_size));
    s.cursor += batch_size;
  }
  return out;
}

DomainBatch gather(const DomainDataset& dataset, std::span<const std::size_t> indices) {
  const std::size_t cols = dataset.dim();
  std::vector<double> data;
  data.reserve(indices.size() * cols);
  DomainBatch batch;
  batch.domain_id = dataset.domain_id;
  batch.labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    const auto row = dataset.features.row(idx);
    data.insert(data.end(), row.begin(), row.end());
    batch.labels.push_back(dataset.labels[idx]);
  }
  batch.features = Matrix(indices.size(), cols, std::move(data));
  return batch;
}

std::vector<DomainBatch> sample_domain_batches(std::span<const DomainDataset> datasets,
                                               std::size_t batch_size, BatchSampler& sampler) {
  const auto indices = sampler.next_indices(datasets, batch_size);
  std::vector<DomainBatch> batches;
  batches.reserve(datasets.size());
  for (std::size_t k = 0; k < datasets.size(); ++k) batches.push_back(gather(datasets[k], indices[k]));
  return batches;
}

}  // namespace roga
