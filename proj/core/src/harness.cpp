#include "roga/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "roga/errors.hpp"
#include "roga/io.hpp"
#include "roga/probes.hpp"

namespace roga {
namespace {

using nlohmann::json;

// Salts for the child seeds derived from a run seed.
constexpr std::uint64_t kInitSalt = 1;
constexpr std::uint64_t kSamplerSalt = 2;
constexpr std::uint64_t kSharpnessSalt = 3;

json metrics_json(const MetricsReport& m) {
  return {{"acc", m.acc}, {"auc", m.auc}, {"ap", m.ap},
          {"eer", m.eer}, {"n_pos", m.n_pos}, {"n_neg", m.n_neg}};
}

json split_json(const SplitPlan& split) {
  return {{"train_domain_ids", split.train_domain_ids},
          {"held_out_domain_id", split.held_out_domain_id}};
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", dir.string());
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  return out;
}

}  // namespace

std::size_t planned_steps(std::size_t epochs, std::size_t domain_size, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("must be at least 1", "batch_size");
  return epochs * (domain_size / batch_size);
}

SplitData build_split_data(const DatasetConfig& dataset, std::uint64_t run_seed,
                           const SplitPlan& split) {
  const auto descriptors = dataset.descriptors(run_seed);
  auto lookup = [&](int id) -> const GeneratorDescriptor& {
    if (id < 0 || static_cast<std::size_t>(id) >= descriptors.size()) {
      throw ConfigError("domain " + std::to_string(id) + " does not exist", "split");
    }
    return descriptors[static_cast<std::size_t>(id)];
  };
  SplitData data;
  for (int id : split.train_domain_ids) data.train.push_back(generate(lookup(id)));
  data.held_out = generate(lookup(split.held_out_domain_id));
  return data;
}

MetricsReport evaluate(const ModelSpec& spec, const ParamVector& params,
                       const DomainDataset& dataset) {
  const std::vector<double> scores = predict_scores(spec, params, dataset.features);
  return compute_metrics(scores, dataset.labels, 0.5);
}

RunArtifacts run_training(const ExperimentConfig& config, std::uint64_t seed,
                          const SplitPlan& split) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const SplitData data = build_split_data(config.dataset, seed, split);
  const ModelSpec spec = config.model.spec(config.dataset.feature_dim());
  const Network net(spec);

  RunArtifacts art;
  art.spec = spec;
  art.split = split;
  art.seed = seed;
  art.config_echo = config_to_json(config);

  ParamVector theta = init_params(spec, InitSpec{config.model.init, mix_seed(seed, kInitSalt)});
  ParamVector velocity(theta.size());
  BatchSampler sampler(mix_seed(seed, kSamplerSalt));

  std::size_t domain_size = data.train.front().size();
  for (const auto& ds : data.train) domain_size = std::min(domain_size, ds.size());
  const std::size_t steps_per_epoch = domain_size / config.batch_size;

  std::vector<DomainBatch> full_train;
  for (const auto& ds : data.train) full_train.push_back(ds.as_batch());
  const DomainBatch pooled_train = pool_batches(full_train);
  const DomainBatch held_out = data.held_out.as_batch();

  long step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    DiagnosticsSummary diag;
    diag.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t domain_entries = 0;

    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
      const auto batches = sample_domain_batches(data.train, config.batch_size, sampler);
      StepResult result;
      try {
        switch (config.optimizer) {
          case OptimizerKind::sgd:
            result = sgd_step(net, theta, pool_batches(batches), config.optim, velocity);
            break;
          case OptimizerKind::sam:
            result = sam_step(net, theta, pool_batches(batches), config.optim, velocity);
            break;
          case OptimizerKind::roga:
            result = roga_step(net, theta, batches, config.optim, velocity, config.descent,
                               config.threads);
            break;
        }
      } catch (const NumericError& e) {
        throw NumericError("training diverged: " + e.base_message(), e.domain_id(), step);
      }
      theta = std::move(result.theta);
      velocity = std::move(result.velocity);

      const StepDiagnostics& d = result.diagnostics;
      double step_loss = 0.0;
      for (std::size_t k = 0; k < d.domain_count(); ++k) {
        step_loss += d.per_domain_loss[k];
        diag.loss += d.per_domain_loss[k];
        diag.perturbed_loss += d.per_domain_perturbed_loss[k];
        diag.alignment += d.per_domain_alignment[k];
        diag.grad_norm += d.grad_norms[k];
      }
      domain_entries += d.domain_count();
      loss_sum += step_loss / static_cast<double>(d.domain_count());
      diag.aggregate_grad_norm += d.aggregate_grad_norm;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    if (steps_per_epoch > 0) {
      const double steps = static_cast<double>(steps_per_epoch);
      const double entries = static_cast<double>(domain_entries);
      rec.train_loss = loss_sum / steps;
      diag.loss /= entries;
      diag.perturbed_loss /= entries;
      diag.alignment /= entries;
      diag.grad_norm /= entries;
      diag.aggregate_grad_norm /= steps;
    }
    rec.train_acc = accuracy(predict_scores(spec, theta, pooled_train.features), pooled_train.labels);
    rec.heldout_loss = net.loss(theta, held_out);
    if (!std::isfinite(rec.heldout_loss)) {
      throw NumericError("non-finite held-out loss", split.held_out_domain_id, step);
    }
    rec.heldout = evaluate(spec, theta, data.held_out);
    art.per_epoch.push_back(rec);
    art.diagnostics.push_back(diag);
  }

  art.steps = static_cast<std::size_t>(step);
  art.final_params = std::move(theta);
  art.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return art;
}

RunArtifacts run_training(const ExperimentConfig& config, std::uint64_t seed) {
  return run_training(config, seed, config.splits().front());
}

json run_summary(const RunArtifacts& art) {
  json summary;
  summary["config"] = art.config_echo;
  summary["seed"] = art.seed;
  summary["split"] = split_json(art.split);
  summary["model"] = model_spec_to_json(art.spec);
  summary["steps"] = art.steps;
  summary["epochs"] = art.per_epoch.size();
  if (!art.per_epoch.empty()) {
    const EpochRecord& last = art.per_epoch.back();
    summary["final"] = {{"train_loss", last.train_loss},
                        {"train_acc", last.train_acc},
                        {"heldout_loss", last.heldout_loss},
                        {"heldout", metrics_json(last.heldout)}};
  }
  return summary;
}

void emit_results(const RunArtifacts& art, const std::filesystem::path& output_dir) {
  ensure_directory(output_dir);
  write_json_file(run_summary(art), output_dir / "run_summary.json");

  {
    const auto path = output_dir / "curves.csv";
    auto out = open_for_write(path);
    out << "epoch,train_loss,train_acc,heldout_loss,heldout_acc,heldout_auc,heldout_ap,heldout_eer\n";
    for (const auto& r : art.per_epoch) {
      out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.train_acc)
          << ',' << format_double(r.heldout_loss) << ',' << format_double(r.heldout.acc) << ','
          << format_double(r.heldout.auc) << ',' << format_double(r.heldout.ap) << ','
          << format_double(r.heldout.eer) << '\n';
    }
    if (!out) throw IoError("write failed", path.string());
  }
  {
    const auto path = output_dir / "diagnostics.csv";
    auto out = open_for_write(path);
    out << "epoch,loss,perturbed_loss,alignment,grad_norm,aggregate_grad_norm\n";
    for (const auto& d : art.diagnostics) {
      out << d.epoch << ',' << format_double(d.loss) << ',' << format_double(d.perturbed_loss)
          << ',' << format_double(d.alignment) << ',' << format_double(d.grad_norm) << ','
          << format_double(d.aggregate_grad_norm) << '\n';
    }
    if (!out) throw IoError("write failed", path.string());
  }
  save_model(art.spec, art.final_params, output_dir / "model.json");
  write_json_file({{"wall_time_s", art.wall_time_s}}, output_dir / "timing.json");
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

std::size_t AblationTable::best_auc_row() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].auc.mean > rows[best].auc.mean) best = i;
  }
  return best;
}

std::vector<std::pair<char, ExperimentConfig>> ablation_variants(const ExperimentConfig& config) {
  ExperimentConfig base = config;
  base.optimizer = OptimizerKind::sgd;
  base.optim.rho = 0.0;
  base.optim.alpha = 0.0;
  base.descent = DescentTerm::perturbed;

  ExperimentConfig perturb = config;
  perturb.optimizer = OptimizerKind::roga;
  perturb.optim.alpha = 0.0;
  perturb.descent = DescentTerm::perturbed;

  ExperimentConfig align = config;
  align.optimizer = OptimizerKind::roga;
  align.descent = DescentTerm::erm;

  ExperimentConfig full = config;
  full.optimizer = OptimizerKind::roga;
  full.descent = DescentTerm::perturbed;

  return {{'a', base}, {'b', perturb}, {'c', align}, {'d', full}};
}

AblationTable run_ablation(const ExperimentConfig& config, const AblationOptions& options) {
  config.validate();
  static const char* const kNames[] = {"base", "+perturbation", "+alignment", "full"};
  AblationTable table;
  std::size_t v = 0;
  for (auto& [variant, cfg] : ablation_variants(config)) {
    AblationRow row;
    row.variant = variant;
    row.name = kNames[v++];
    row.config = cfg;
    std::vector<double> aucs, accs, losses, eers, sharps;
    for (const SplitPlan& split : cfg.splits()) {
      for (std::uint64_t seed : cfg.seeds) {
        RunArtifacts art = run_training(cfg, seed, split);
        AblationRun run;
        run.seed = seed;
        run.split = split;
        run.heldout = art.per_epoch.back().heldout;
        run.heldout_loss = art.per_epoch.back().heldout_loss;
        if (options.measure_sharpness) {
          const SplitData data = build_split_data(cfg.dataset, seed, split);
          std::vector<DomainBatch> train;
          for (const auto& ds : data.train) train.push_back(ds.as_batch());
          run.sharpness = sharpness(Network(art.spec), art.final_params, pool_batches(train),
                                    options.sharpness_rho, options.sharpness_iters,
                                    options.sharpness_restarts, mix_seed(seed, kSharpnessSalt))
                              .sharpness;
        }
        run.per_epoch = std::move(art.per_epoch);
        run.final_params = std::move(art.final_params);
        aucs.push_back(run.heldout.auc);
        accs.push_back(run.heldout.acc);
        losses.push_back(run.heldout_loss);
        eers.push_back(run.heldout.eer);
        sharps.push_back(run.sharpness);
        row.runs.push_back(std::move(run));
      }
    }
    row.auc = mean_std(aucs);
    row.acc = mean_std(accs);
    row.loss = mean_std(losses);
    row.eer = mean_std(eers);
    row.sharpness = mean_std(sharps);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void emit_ablation(const AblationTable& table, const std::filesystem::path& output_dir) {
  ensure_directory(output_dir);
  const auto csv_path = output_dir / "ablation.csv";
  auto out = open_for_write(csv_path);
  out << "variant,name,runs,auc_mean,auc_std,acc_mean,acc_std,loss_mean,loss_std,eer_mean,"
         "eer_std,sharpness_mean,sharpness_std\n";
  json rows = json::array();
  for (const auto& row : table.rows) {
    out << row.variant << ',' << row.name << ',' << row.runs.size();
    for (const MeanStd* m : {&row.auc, &row.acc, &row.loss, &row.eer, &row.sharpness}) {
      out << ',' << format_double(m->mean) << ',' << format_double(m->std);
    }
    out << '\n';

    json runs = json::array();
    for (const auto& run : row.runs) {
      runs.push_back({{"seed", run.seed},
                      {"split", split_json(run.split)},
                      {"heldout", metrics_json(run.heldout)},
                      {"heldout_loss", run.heldout_loss},
                      {"sharpness", run.sharpness}});
    }
    auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
    rows.push_back({{"variant", std::string(1, row.variant)},
                    {"name", row.name},
                    {"config", config_to_json(row.config)},
                    {"auc", ms(row.auc)},
                    {"acc", ms(row.acc)},
                    {"loss", ms(row.loss)},
                    {"eer", ms(row.eer)},
                    {"sharpness", ms(row.sharpness)},
                    {"runs", runs}});
  }
  if (!out) throw IoError("write failed", csv_path.string());
  write_json_file({{"rows", rows},
                   {"best_auc_variant", std::string(1, table.rows[table.best_auc_row()].variant)}},
                  output_dir / "ablation.json");
}

}  // namespace roga
