#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "roga/errors.hpp"
#include "roga/harness.hpp"
#include "roga/io.hpp"

using namespace roga;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("roga_test_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig small_config(OptimizerKind kind = OptimizerKind::roga) {
  json doc = {{"dataset", {{"family", "spurious_blobs"}, {"n", 100}, {"d_noise", 2}}},
              {"optimizer", {{"kind", to_string(kind)}}},
              {"model", {{"hidden", {4}}}},
              {"epochs", 2},
              {"batch_size", 50},
              {"seeds", {1}}};
  return parse_config(doc);
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const ExperimentConfig c = parse_config(json{{"dataset", {{"family", "spurious_blobs"}}},
                                               {"optimizer", {{"kind", "roga"}}}});
  CHECK(c.optim.rho == 0.1);
  CHECK(c.optim.alpha == 0.001);
  CHECK(c.optim.lr == 0.005);
  CHECK(c.dataset.n == 2000);
  CHECK(c.dataset.spur_signs == std::vector<int>{1, 1, 1, -1});
  CHECK(c.dataset.spur_strengths == std::vector<double>{3, 3, 3, 3});
  CHECK(c.dataset.core_sep == 1.0);
  CHECK(c.dataset.d_noise == 8);
  CHECK(c.model.hidden == std::vector<std::size_t>{16, 16});
  CHECK(c.model.activation == Activation::tanh);
  CHECK(c.epochs == 30);
  const auto splits = c.splits();
  REQUIRE(splits.size() == 1);
  CHECK(splits[0].held_out_domain_id == 3);
  CHECK(splits[0].train_domain_ids == std::vector<int>{0, 1, 2});
}

TEST_CASE("config validation errors name the key") {
  auto expect_key = [](const json& doc, const std::string& key) {
    try {
      parse_config(doc);
      FAIL("expected ConfigError for " << key);
    } catch (const ConfigError& e) {
      CHECK(e.key_path() == key);
    }
  };
  const json base = {{"dataset", {{"family", "spurious_blobs"}}}, {"optimizer", {{"kind", "roga"}}}};
  json doc = base;
  doc["bogus"] = 1;
  expect_key(doc, "bogus");
  doc = base;
  doc["optimizer"]["rh0"] = 0.1;
  expect_key(doc, "optimizer.rh0");
  doc = base;
  doc["dataset"]["angles"] = {0.0};  // moons-only key on the blobs family
  expect_key(doc, "dataset.angles");
  doc = base;
  doc["optimizer"]["rho"] = "big";
  expect_key(doc, "optimizer.rho");
  doc = base;
  doc["optimizer"]["kind"] = "adam";
  expect_key(doc, "optimizer.kind");
  doc = base;
  doc["epochs"] = 0;
  expect_key(doc, "epochs");
  doc = base;
  doc["seeds"] = json::array();
  expect_key(doc, "seeds");
  expect_key(json{{"optimizer", {{"kind", "sgd"}}}}, "dataset");
  expect_key(json{{"dataset", json::object()}, {"optimizer", json::object()}}, "optimizer.kind");

  doc = base;
  doc["batch_size"] = 5000;
  try {
    parse_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key_path() == "batch_size");
    const std::string msg = e.what();
    CHECK(msg.find("5000") != std::string::npos);
    CHECK(msg.find("2000") != std::string::npos);
  }
}

TEST_CASE("load_config reports missing files as configuration errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/roga.json"), ConfigError);
}

TEST_CASE("resolved config round-trips") {
  const ExperimentConfig c = small_config();
  const json once = config_to_json(c);
  CHECK(config_to_json(parse_config(once)) == once);

  json moons = {{"dataset", {{"family", "rotated_moons"}, {"angles", {0.0, 0.4, 0.8}}, {"n", 60}}},
                {"optimizer", {{"kind", "sam"}, {"momentum", 0.9}}},
                {"split", "all-leave-one-out"},
                {"batch_size", 20}};
  const json resolved = config_to_json(parse_config(moons));
  CHECK(config_to_json(parse_config(resolved)) == resolved);
  CHECK(parse_config(moons).splits().size() == 3);
}

TEST_CASE("step count is epochs * floor(domain size / batch size)") {
  CHECK(planned_steps(1, 100, 50) == 2);
  CHECK(planned_steps(3, 100, 30) == 9);
  CHECK(planned_steps(2, 7, 7) == 2);
  ExperimentConfig c = small_config();
  c.epochs = 1;
  const RunArtifacts art = run_training(c, 1);
  CHECK(art.steps == 2);
  CHECK(art.per_epoch.size() == 1);
  c.epochs = 3;
  c.batch_size = 30;
  CHECK(run_training(c, 1).steps == 9);
}

TEST_CASE("training is deterministic per seed") {
  for (auto kind : {OptimizerKind::sgd, OptimizerKind::sam, OptimizerKind::roga}) {
    const ExperimentConfig c = small_config(kind);
    const RunArtifacts a = run_training(c, 4);
    const RunArtifacts b = run_training(c, 4);
    CHECK(a.final_params == b.final_params);
    CHECK(run_summary(a) == run_summary(b));
    CHECK(a.final_params != run_training(c, 5).final_params);
  }
}

TEST_CASE("threads do not change a roga run") {
  ExperimentConfig c = small_config();
  const RunArtifacts one = run_training(c, 2);
  c.threads = 3;
  const RunArtifacts three = run_training(c, 2);
  CHECK(one.final_params == three.final_params);
}

TEST_CASE("emit_results writes deterministic files") {
  const RunArtifacts art = run_training(small_config(), 3);
  const auto d1 = scratch_dir("emit1");
  const auto d2 = scratch_dir("emit2");
  emit_results(art, d1);
  emit_results(art, d2);
  for (const char* name : {"run_summary.json", "curves.csv", "diagnostics.csv", "model.json"}) {
    CHECK(slurp(d1 / name) == slurp(d2 / name));
  }
  const json summary = read_json_file(d1 / "run_summary.json");
  CHECK(summary == run_summary(art));
  CHECK(summary["config"] == art.config_echo);

  std::ifstream curves(d1 / "curves.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(curves, line);) ++lines;
  CHECK(lines == art.per_epoch.size() + 1);

  const auto [spec, params] = load_model(d1 / "model.json");
  CHECK(spec == art.spec);
  CHECK(params == art.final_params);

  CHECK_THROWS_AS(emit_results(art, "/proc/roga_cannot_write_here"), IoError);
}

TEST_CASE("evaluate") {
  // Separable toy set: feature 0 is +-1 by label.
  DomainDataset toy;
  toy.features = Matrix(4, 1, {-1.0, 1.0, -2.0, 2.0});
  toy.labels = {0, 1, 0, 1};
  const ModelSpec spec = ModelSpec::logistic(1);
  const MetricsReport m = evaluate(spec, {5.0, 0.0}, toy);
  CHECK(m.acc == 1.0);
  CHECK(m.auc == 1.0);
  CHECK(m.ap == 1.0);
  CHECK(m.eer == 0.0);

  // Zero parameters score every example 0.5: the tie rule predicts positive,
  // so accuracy is the positive rate and the ranking carries no information.
  const DomainDataset blobs = make_spurious_blobs(1.0, 1.0, 1, 101, 2, 3);
  const ModelSpec mlp = ModelSpec::mlp({4, 3, 1});
  const MetricsReport null = evaluate(mlp, ParamVector::zeros(mlp.param_count()), blobs);
  CHECK(null.acc == doctest::Approx(50.0 / 101.0));
  CHECK(null.auc == 0.5);
  CHECK(null.n_pos + null.n_neg == 101);
  CHECK(evaluate(mlp, ParamVector::zeros(mlp.param_count()), blobs).auc == null.auc);

  DomainDataset single = toy;
  single.labels = {1, 1, 1, 1};
  CHECK_THROWS_AS(evaluate(spec, {1.0, 0.0}, single), DegenerateInputError);
}

TEST_CASE("ablation grid") {
  ExperimentConfig c = small_config();
  c.seeds = {1, 2};
  AblationOptions opts;
  opts.sharpness_restarts = 1;
  opts.sharpness_iters = 2;
  const AblationTable table = run_ablation(c, opts);
  REQUIRE(table.rows.size() == 4);
  const char expected[] = {'a', 'b', 'c', 'd'};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(table.rows[i].variant == expected[i]);
    CHECK(table.rows[i].runs.size() == 2);
    CHECK(table.rows[i].sharpness.mean >= 0.0);
  }
  CHECK(table.rows[1].config.optim.alpha == 0.0);
  CHECK(table.rows[2].config.descent == DescentTerm::erm);

  // Variant (a) is a plain sgd run with the same seed.
  ExperimentConfig sgd = c;
  sgd.optimizer = OptimizerKind::sgd;
  const RunArtifacts plain = run_training(sgd, 1);
  CHECK(plain.final_params == table.rows[0].runs[0].final_params);
  REQUIRE(plain.per_epoch.size() == table.rows[0].runs[0].per_epoch.size());
  for (std::size_t e = 0; e < plain.per_epoch.size(); ++e) {
    CHECK(plain.per_epoch[e].train_loss == table.rows[0].runs[0].per_epoch[e].train_loss);
    CHECK(plain.per_epoch[e].heldout.auc == table.rows[0].runs[0].per_epoch[e].heldout.auc);
  }

  const auto dir = scratch_dir("ablation");
  emit_ablation(table, dir);
  const json doc = read_json_file(dir / "ablation.json");
  CHECK(doc["rows"].size() == 4);
}

TEST_CASE("mean and sample standard deviation") {
  const MeanStd m = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(mean_std({7.0}).std == 0.0);
}

TEST_CASE("dataset CSV and descriptors round-trip") {
  GeneratorDescriptor d = make_spurious_blobs(1.0, 3.0, -1, 37, 3, 11, 2).descriptor;
  d.standardize = true;
  const DomainDataset ds = generate(d);
  const auto dir = scratch_dir("csv");
  std::filesystem::create_directories(dir);
  write_dataset_csv(ds, dir / "d.csv");
  const DomainDataset back = read_dataset_csv(dir / "d.csv");
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.domain_id == 2);
  CHECK(descriptor_from_json(descriptor_to_json(d)) == d);

  std::ofstream(dir / "bad.csv") << "x,y\n1,2\n";
  CHECK_THROWS_AS(read_dataset_csv(dir / "bad.csv"), IoError);
  CHECK_THROWS_AS(read_dataset_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("divergence raises a numeric error carrying the step") {
  ExperimentConfig c = small_config(OptimizerKind::sgd);
  c.optim.lr = 1e308;
  try {
    run_training(c, 1);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    REQUIRE(e.step().has_value());
    CHECK(*e.step() >= 0);
    CHECK(static_cast<std::size_t>(*e.step()) < planned_steps(c.epochs, c.dataset.n, c.batch_size));
  }
}

TEST_CASE("sgd on the default benchmark fits the train domains but not the held-out one") {
  const ExperimentConfig c = parse_config(json{{"dataset", {{"family", "spurious_blobs"}}},
                                               {"optimizer", {{"kind", "sgd"}}}});
  const RunArtifacts art = run_training(c, 0);
  const EpochRecord& last = art.per_epoch.back();
  MESSAGE("train acc " << last.train_acc << ", held-out acc " << last.heldout.acc);
  CHECK(last.train_acc >= 0.9);
  CHECK(last.heldout.acc <= last.train_acc - 0.2);
}
