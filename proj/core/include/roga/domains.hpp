#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "roga/batch.hpp"
#include "roga/rng.hpp"

namespace roga {

/// Two interleaved half circles rotated about the origin.
struct RotatedMoonsParams {
  double angle = 0.0;  ///< radians
  std::size_t n = 0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const RotatedMoonsParams&) const = default;
};

/// Gaussian blobs with one label-invariant core feature and one spurious
/// feature whose sign depends on the domain.
struct SpuriousBlobsParams {
  double core_sep = 1.0;
  double spur_strength = 0.0;
  int spur_sign = 1;
  std::size_t n = 0;
  std::size_t d_noise = 0;
  std::uint64_t seed = 0;

  bool operator==(const SpuriousBlobsParams&) const = default;
};

/// Everything needed to regenerate a dataset bitwise.
struct GeneratorDescriptor {
  std::variant<RotatedMoonsParams, SpuriousBlobsParams> params;
  int domain_id = 0;
  bool standardize = false;

  std::string family() const;
  bool operator==(const GeneratorDescriptor&) const = default;
};

struct DomainDataset {
  Matrix features;
  std::vector<int> labels;
  int domain_id = 0;
  GeneratorDescriptor descriptor;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  /// The whole dataset as a single batch.
  DomainBatch as_batch() const;
};

/// Labels alternate 0, 1, 0, ... so every dataset is balanced to within one.
/// Class 0 lies on the upper unit half circle, class 1 on the shifted lower
/// one; points are evenly spaced along each arc before rotation and noise.
DomainDataset make_rotated_moons(double domain_angle, std::size_t n, double noise_sd,
                                 std::uint64_t seed, int domain_id = 0);

/// feature 0 = core_sep * (2y - 1) + N(0,1), feature 1 = spur_sign *
/// spur_strength * (2y - 1) + N(0,1), then d_noise pure N(0,1) features.
DomainDataset make_spurious_blobs(double core_sep, double spur_strength, int spur_sign,
                                  std::size_t n, std::size_t d_noise, std::uint64_t seed,
                                  int domain_id = 0);

/// Rescales every feature column to zero mean and unit variance (population
/// variance). Constant columns are only centered.
void standardize_features(Matrix& features);

/// Regenerates a dataset from its descriptor, standardizing when requested.
DomainDataset generate(const GeneratorDescriptor& descriptor);

struct SplitPlan {
  std::vector<int> train_domain_ids;  ///< ascending
  int held_out_domain_id = 0;

  bool operator==(const SplitPlan&) const = default;
};

/// One plan per domain id in [0, domain_count), each holding that id out.
/// domain_count must be at least 3.
std::vector<SplitPlan> leave_one_out_splits(int domain_count);

/// Without-replacement minibatch state, one shuffled permutation and cursor
/// per domain. Each domain owns an Rng seeded with seed ^ domain_id. When a
/// domain's remaining indices cannot fill a batch, the leftovers are dropped
/// and a fresh permutation starts the next pass.
class BatchSampler {
 public:
  explicit BatchSampler(std::uint64_t seed) : seed_(seed) {}

  /// Index lists, one per dataset, each of exactly batch_size entries.
  /// Throws ConfigError if batch_size is 0 or exceeds a dataset's size.
  std::vector<std::vector<std::size_t>> next_indices(std::span<const DomainDataset> datasets,
                                                     std::size_t batch_size);

 private:
  struct Stream {
    int domain_id;
    Rng rng;
    std::vector<std::size_t> order;
    std::size_t cursor;
  };

  Stream& stream_for(const DomainDataset& dataset);

  std::uint64_t seed_;
  std::vector<Stream> streams_;
};

/// Draws one batch per dataset through `sampler`.
std::vector<DomainBatch> sample_domain_batches(std::span<const DomainDataset> datasets,
                                               std::size_t batch_size, BatchSampler& sampler);

/// Builds a batch from selected rows of a dataset, in the given order.
DomainBatch gather(const DomainDataset& dataset, std::span<const std::size_t> indices);

}  // namespace roga
