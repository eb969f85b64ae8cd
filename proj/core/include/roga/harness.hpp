#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roga/domains.hpp"
#include "roga/metrics.hpp"
#include "roga/model.hpp"
#include "roga/models.hpp"
#include "roga/optim.hpp"

namespace roga {

enum class OptimizerKind { sgd, sam, roga };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);

/// Synthetic multi-domain dataset family. For "spurious_blobs" the domain
/// count is the length of spur_signs; for "rotated_moons" it is the length
/// of angles.
struct DatasetConfig {
  std::string family = "spurious_blobs";
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  bool standardize = true;

  double core_sep = 1.0;
  std::size_t d_noise = 8;
  std::vector<int> spur_signs{1, 1, 1, -1};
  std::vector<double> spur_strengths{3.0, 3.0, 3.0, 3.0};

  std::vector<double> angles{0.0, 0.5, 1.0, 1.5};
  double noise_sd = 0.1;

  int domain_count() const;
  std::size_t feature_dim() const;

  /// One descriptor per domain. Domain i uses the stream seed
  /// (seed + run_seed) ^ i.
  std::vector<GeneratorDescriptor> descriptors(std::uint64_t run_seed) const;
};

struct ModelConfig {
  ModelKind kind = ModelKind::mlp;
  std::vector<std::size_t> hidden{16, 16};
  Activation activation = Activation::tanh;
  InitScheme init = InitScheme::glorot_uniform;

  ModelSpec spec(std::size_t input_dim) const;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  /// Empty means leave-one-out over every domain.
  std::optional<int> held_out;
  bool all_leave_one_out = false;
  ModelConfig model;
  OptimizerKind optimizer = OptimizerKind::roga;
  OptimizerConfig optim;
  DescentTerm descent = DescentTerm::perturbed;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs";
  unsigned threads = 1;

  /// The resolved list of splits: either the single configured held-out
  /// domain or every leave-one-out plan.
  std::vector<SplitPlan> splits() const;

  /// Throws ConfigError with a key path on the first violated constraint.
  void validate() const;
};

/// Parses a config document. Missing keys take their defaults; unknown keys
/// and type mismatches raise ConfigError naming the key path.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a JSON config file. Missing or unreadable files raise
/// ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved config; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  ///< mean per-step training loss over the epoch
  double train_acc = 0.0;   ///< pooled train-domain accuracy at epoch end
  double heldout_loss = 0.0;
  MetricsReport heldout;
};

/// Per-epoch means of the step diagnostics, averaged over steps and domains.
struct DiagnosticsSummary {
  std::size_t epoch = 0;
  double loss = 0.0;
  double perturbed_loss = 0.0;
  double alignment = 0.0;
  double grad_norm = 0.0;
  double aggregate_grad_norm = 0.0;
};

struct RunArtifacts {
  ModelSpec spec;
  ParamVector final_params;
  SplitPlan split;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::vector<EpochRecord> per_epoch;
  std::vector<DiagnosticsSummary> diagnostics;
  nlohmann::json config_echo;
  double wall_time_s = 0.0;
};

/// Number of optimizer steps run_training performs.
std::size_t planned_steps(std::size_t epochs, std::size_t domain_size, std::size_t batch_size);

/// Trains one model on the split's train domains and evaluates it on the
/// held-out domain after every epoch. Each step draws one batch per train
/// domain. sgd and sam update on the pooled batch; roga uses per-domain
/// batches. Non-finite losses raise NumericError with step and domain.
RunArtifacts run_training(const ExperimentConfig& config, std::uint64_t seed,
                          const SplitPlan& split);

/// Same, on the first resolved split.
RunArtifacts run_training(const ExperimentConfig& config, std::uint64_t seed);

/// Metrics of the model on the whole dataset, accuracy at threshold 0.5.
MetricsReport evaluate(const ModelSpec& spec, const ParamVector& params,
                       const DomainDataset& dataset);

/// Writes run_summary.json, curves.csv, diagnostics.csv, model.json and
/// timing.json into output_dir (created if needed). Every file except
/// timing.json depends only on the deterministic part of the artifacts.
void emit_results(const RunArtifacts& artifacts, const std::filesystem::path& output_dir);

/// run_summary.json contents.
nlohmann::json run_summary(const RunArtifacts& artifacts);

struct AblationOptions {
  bool measure_sharpness = true;
  double sharpness_rho = 0.1;
  std::size_t sharpness_restarts = 5;
  std::size_t sharpness_iters = 20;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single run
};

MeanStd mean_std(const std::vector<double>& values);

struct AblationRun {
  std::uint64_t seed = 0;
  SplitPlan split;
  MetricsReport heldout;
  double heldout_loss = 0.0;
  double sharpness = 0.0;
  std::vector<EpochRecord> per_epoch;
  ParamVector final_params;
};

struct AblationRow {
  char variant = 'a';
  std::string name;
  ExperimentConfig config;
  std::vector<AblationRun> runs;
  MeanStd auc, acc, loss, eer, sharpness;
};

struct AblationTable {
  std::vector<AblationRow> rows;  ///< (a) base, (b) +perturbation, (c) +alignment, (d) full

  /// Index of the row with the highest mean held-out AUC (first on ties).
  std::size_t best_auc_row() const;
};

/// The four variants of the ablation grid, derived from `config`:
///   (a) sgd with rho = alpha = 0
///   (b) roga with alpha = 0
///   (c) roga with the ERM descent term and the alignment term
///   (d) roga as configured
std::vector<std::pair<char, ExperimentConfig>> ablation_variants(const ExperimentConfig& config);

AblationTable run_ablation(const ExperimentConfig& config, const AblationOptions& options = {});

/// ablation.csv and ablation.json in output_dir.
void emit_ablation(const AblationTable& table, const std::filesystem::path& output_dir);

/// Datasets for a split, in the split's domain order.
struct SplitData {
  std::vector<DomainDataset> train;
  DomainDataset held_out;
};

SplitData build_split_data(const DatasetConfig& dataset, std::uint64_t run_seed,
                           const SplitPlan& split);

}  // namespace roga
