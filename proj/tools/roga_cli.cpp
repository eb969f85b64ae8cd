// roga: command-line entry point.
//
//   roga gen-data --config cfg.json --out data/
//   roga train    --config cfg.json --out runs/ [--seed N] [--threads N] [--optimizer K]
//   roga ablate   --config cfg.json --out ablation/
//   roga probe    --model model.json --data d0.csv [--data d1.csv ...] --out probe/
//   roga eval     --model model.json --data d.csv [--out metrics.json]
//
// Exit codes: 0 success, 2 configuration error, 3 numeric error, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roga/errors.hpp"
#include "roga/harness.hpp"
#include "roga/io.hpp"
#include "roga/probes.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> optimizer;
};

roga::ExperimentConfig resolve_config(const CommonOptions& opts) {
  roga::ExperimentConfig cfg = roga::load_config(opts.config);
  if (opts.seed) cfg.seeds = {*opts.seed};
  if (opts.threads) cfg.threads = *opts.threads;
  if (opts.optimizer) cfg.optimizer = roga::parse_optimizer_kind(*opts.optimizer);
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool training) {
  cmd->add_option("--config", opts.config, "Experiment config (JSON)")->required();
  cmd->add_option("--out", opts.out, "Output directory (overrides output_dir)");
  cmd->add_option("--seed", opts.seed, "Run a single seed instead of the config's list");
  if (training) {
    cmd->add_option("--threads", opts.threads, "Worker threads per step (1 = fully deterministic)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--optimizer", opts.optimizer, "Override optimizer kind")
        ->check(CLI::IsMember({"sgd", "sam", "roga"}));
  }
}

std::string split_dir(const roga::SplitPlan& split) {
  return "heldout_" + std::to_string(split.held_out_domain_id);
}

int cmd_gen_data(const CommonOptions& opts) {
  const roga::ExperimentConfig cfg = resolve_config(opts);
  const std::filesystem::path out = cfg.output_dir;
  std::filesystem::create_directories(out);
  const std::uint64_t seed = cfg.seeds.front();
  nlohmann::json descriptors = nlohmann::json::array();
  for (const auto& d : cfg.dataset.descriptors(seed)) {
    const roga::DomainDataset ds = roga::generate(d);
    const auto path = out / ("domain_" + std::to_string(d.domain_id) + ".csv");
    roga::write_dataset_csv(ds, path);
    descriptors.push_back(roga::descriptor_to_json(d));
    std::cout << "wrote " << path.string() << " (" << ds.size() << " rows)\n";
  }
  roga::write_json_file({{"seed", seed}, {"domains", descriptors}}, out / "descriptors.json");
  return 0;
}

int cmd_train(const CommonOptions& opts) {
  const roga::ExperimentConfig cfg = resolve_config(opts);
  const std::filesystem::path out = cfg.output_dir;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& split : cfg.splits()) {
    std::vector<double> aucs, accs;
    for (std::uint64_t seed : cfg.seeds) {
      const roga::RunArtifacts art = roga::run_training(cfg, seed, split);
      const auto dir = out / split_dir(split) / ("seed_" + std::to_string(seed));
      roga::emit_results(art, dir);
      const auto& last = art.per_epoch.back();
      aucs.push_back(last.heldout.auc);
      accs.push_back(last.heldout.acc);
      std::printf("held-out %d seed %llu: auc %.4f acc %.4f eer %.4f (train acc %.4f)\n",
                  split.held_out_domain_id, static_cast<unsigned long long>(seed),
                  last.heldout.auc, last.heldout.acc, last.heldout.eer, last.train_acc);
    }
    const auto auc = roga::mean_std(aucs);
    const auto acc = roga::mean_std(accs);
    runs.push_back({{"held_out_domain_id", split.held_out_domain_id},
                    {"seeds", cfg.seeds},
                    {"auc", {{"mean", auc.mean}, {"std", auc.std}}},
                    {"acc", {{"mean", acc.mean}, {"std", acc.std}}}});
  }
  roga::write_json_file({{"config", roga::config_to_json(cfg)}, {"splits", runs}},
                        out / "train_summary.json");
  return 0;
}

int cmd_ablate(const CommonOptions& opts, bool sharpness) {
  const roga::ExperimentConfig cfg = resolve_config(opts);
  roga::AblationOptions options;
  options.measure_sharpness = sharpness;
  const roga::AblationTable table = roga::run_ablation(cfg, options);
  roga::emit_ablation(table, cfg.output_dir);
  std::printf("%-3s %-14s %8s %8s %8s %8s %10s\n", "", "variant", "AUC", "ACC", "Loss", "EER",
              "sharpness");
  for (const auto& row : table.rows) {
    std::printf("(%c) %-14s %8.4f %8.4f %8.4f %8.4f %10.5f\n", row.variant, row.name.c_str(),
                row.auc.mean, row.acc.mean, row.loss.mean, row.eer.mean, row.sharpness.mean);
  }
  return 0;
}

struct ProbeOptions {
  std::string model;
  std::vector<std::string> data;
  std::string out = "probe";
  std::vector<double> rhos{0.01, 0.05, 0.1};
  std::size_t restarts = 5;
  std::size_t iters = 20;
  double half_range = 1.0;
  std::size_t steps = 41;
  std::uint64_t seed = 0;
};

std::vector<roga::DomainDataset> read_all(const std::vector<std::string>& paths) {
  std::vector<roga::DomainDataset> out;
  for (const auto& p : paths) out.push_back(roga::read_dataset_csv(p));
  return out;
}

void write_slice(const std::vector<roga::SlicePoint>& slice, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw roga::IoError("cannot open for writing", path.string());
  out << "t,loss\n";
  for (const auto& p : slice) out << roga::format_double(p.t) << ',' << roga::format_double(p.loss) << '\n';
  if (!out) throw roga::IoError("write failed", path.string());
}

int cmd_probe(const ProbeOptions& opts) {
  const auto [spec, params] = roga::load_model(opts.model);
  const roga::Network net(spec);
  const auto datasets = read_all(opts.data);
  std::vector<roga::DomainBatch> batches;
  for (const auto& ds : datasets) batches.push_back(ds.as_batch());
  const roga::DomainBatch pooled = roga::pool_batches(batches);

  const std::filesystem::path out = opts.out;
  std::filesystem::create_directories(out);
  {
    const auto path = out / "sharpness.csv";
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw roga::IoError("cannot open for writing", path.string());
    csv << "rho,base_loss,max_perturbed_loss,sharpness,ascent_iters,restarts\n";
    for (double rho : opts.rhos) {
      const auto r = roga::sharpness(net, params, pooled, rho, opts.iters, opts.restarts, opts.seed);
      csv << roga::format_double(r.rho) << ',' << roga::format_double(r.base_loss) << ','
          << roga::format_double(r.max_perturbed_loss) << ',' << roga::format_double(r.sharpness)
          << ',' << r.ascent_iters << ',' << r.restarts << '\n';
      std::printf("rho %.4g: sharpness %.6g (base loss %.6g)\n", rho, r.sharpness, r.base_loss);
    }
  }

  const roga::ParamVector g = net.grad(params, pooled);
  if (roga::norm(g) > 0.0) {
    write_slice(roga::loss_slice_1d(net, params, g, opts.half_range, opts.steps, pooled),
                out / "slice_gradient.csv");
  }
  const roga::ParamVector dir = roga::random_unit_direction(params.size(), opts.seed);
  write_slice(roga::loss_slice_1d(net, params, dir, opts.half_range, opts.steps, pooled),
              out / "slice_random.csv");

  if (batches.size() >= 2) {
    const auto cos = roga::domain_gradient_cosine(net, params, batches);
    const auto path = out / "gradient_cosine.csv";
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw roga::IoError("cannot open for writing", path.string());
    for (const auto& row : cos) {
      for (std::size_t j = 0; j < row.size(); ++j) csv << (j ? "," : "") << roga::format_double(row[j]);
      csv << '\n';
    }
  }
  return 0;
}

int cmd_eval(const std::string& model, const std::vector<std::string>& data,
             const std::string& out) {
  const auto [spec, params] = roga::load_model(model);
  nlohmann::json results = nlohmann::json::array();
  for (const auto& ds : read_all(data)) {
    const roga::MetricsReport m = roga::evaluate(spec, params, ds);
    const double loss = roga::Network(spec).loss(params, ds.as_batch());
    results.push_back({{"domain_id", ds.domain_id},
                       {"loss", loss},
                       {"acc", m.acc},
                       {"auc", m.auc},
                       {"ap", m.ap},
                       {"eer", m.eer},
                       {"n_pos", m.n_pos},
                       {"n_neg", m.n_neg}});
  }
  if (out.empty()) {
    std::cout << results.dump(2) << '\n';
  } else {
    roga::write_json_file(results, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-domain robust optimization (ERM-SGD, SAM, RoGA) on synthetic benchmarks"};
  app.require_subcommand(1);

  CommonOptions gen_opts, train_opts, ablate_opts;
  auto* gen = app.add_subcommand("gen-data", "Write the configured domains as CSV plus descriptors");
  add_common(gen, gen_opts, false);

  auto* train = app.add_subcommand("train", "Train one config over all its seeds and splits");
  add_common(train, train_opts, true);

  auto* ablate = app.add_subcommand("ablate", "Run the four-variant ablation grid");
  add_common(ablate, ablate_opts, true);
  bool no_sharpness = false;
  ablate->add_flag("--no-sharpness", no_sharpness, "Skip the sharpness probe of each run");

  ProbeOptions probe_opts;
  auto* probe = app.add_subcommand("probe", "Sharpness and loss slices of saved parameters");
  probe->add_option("--model", probe_opts.model, "model.json from a training run")->required();
  probe->add_option("--data", probe_opts.data, "Dataset CSV (repeatable)")->required();
  probe->add_option("--out", probe_opts.out, "Output directory");
  probe->add_option("--rho", probe_opts.rhos, "Perturbation radii");
  probe->add_option("--restarts", probe_opts.restarts, "Random restarts");
  probe->add_option("--iters", probe_opts.iters, "Ascent iterations")->check(CLI::PositiveNumber);
  probe->add_option("--half-range", probe_opts.half_range, "Slice half range");
  probe->add_option("--steps", probe_opts.steps, "Slice sample count")->check(CLI::Range(3, 100000));
  probe->add_option("--seed", probe_opts.seed, "Seed for restarts and the random direction");

  std::string eval_model, eval_out;
  std::vector<std::string> eval_data;
  auto* eval = app.add_subcommand("eval", "Evaluate saved parameters on dataset CSVs");
  eval->add_option("--model", eval_model, "model.json from a training run")->required();
  eval->add_option("--data", eval_data, "Dataset CSV (repeatable)")->required();
  eval->add_option("--out", eval_out, "Write metrics JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen_data(gen_opts);
    if (*train) return cmd_train(train_opts);
    if (*ablate) return cmd_ablate(ablate_opts, !no_sharpness);
    if (*probe) return cmd_probe(probe_opts);
    if (*eval) return cmd_eval(eval_model, eval_data, eval_out);
  } catch (const roga::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const roga::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const roga::Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
