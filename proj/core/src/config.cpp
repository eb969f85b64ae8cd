#include <algorithm>
#include <fstream>
#include <set>
#include <string>

#include "roga/errors.hpp"
#include "roga/harness.hpp"

namespace roga {
namespace {

using nlohmann::json;

/// Walks one JSON object, remembering which keys were read so that the
/// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError("expected an object", path_.empty() ? "<root>" : path_);
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = child(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("wrong type (got " + std::string(doc_.at(key).type_name()) + ")",
                        key_path(key));
    }
  }

  /// Non-negative integers only; json would silently wrap -1 into size_t.
  template <class T>
  void read_unsigned(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = child(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError("expected a non-negative integer", key_path(key));
    }
    out = v.get<T>();
  }

  void reject_unknown() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key", key_path(it.key()));
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    if (!e.key_path().empty()) throw;
    throw ConfigError(e.what(), path);
  }
}

DatasetConfig parse_dataset(const json& doc) {
  DatasetConfig d;
  ObjectReader r(doc, "dataset");
  r.read("family", d.family);
  if (d.family != "spurious_blobs" && d.family != "rotated_moons") {
    throw ConfigError("unknown family '" + d.family + "' (expected spurious_blobs|rotated_moons)",
                      "dataset.family");
  }
  r.read_unsigned("n", d.n);
  r.read_unsigned("seed", d.seed);
  r.read("standardize", d.standardize);
  if (d.family == "spurious_blobs") {
    r.read("core_sep", d.core_sep);
    r.read_unsigned("d_noise", d.d_noise);
    r.read("spur_signs", d.spur_signs);
    r.read("spur_strengths", d.spur_strengths);
  } else {
    r.read("angles", d.angles);
    r.read("noise_sd", d.noise_sd);
  }
  r.reject_unknown();
  return d;
}

ModelConfig parse_model(const json& doc) {
  ModelConfig m;
  ObjectReader r(doc, "model");
  std::string text;
  if (r.has("kind")) {
    r.read("kind", text);
    m.kind = with_path("model.kind", [&] { return parse_model_kind(text); });
    if (m.kind == ModelKind::logistic) m.hidden.clear();
  }
  r.read("hidden", m.hidden);
  if (r.has("activation")) {
    r.read("activation", text);
    m.activation = with_path("model.activation", [&] { return parse_activation(text); });
  }
  if (r.has("init")) {
    r.read("init", text);
    m.init = with_path("model.init", [&] { return parse_init_scheme(text); });
  }
  r.reject_unknown();
  return m;
}

void parse_optimizer(const json& doc, ExperimentConfig& c) {
  ObjectReader r(doc, "optimizer");
  if (!r.has("kind")) throw ConfigError("missing required key", "optimizer.kind");
  std::string text;
  r.read("kind", text);
  c.optimizer = with_path("optimizer.kind", [&] { return parse_optimizer_kind(text); });
  r.read("rho", c.optim.rho);
  r.read("alpha", c.optim.alpha);
  r.read("lr", c.optim.lr);
  r.read("momentum", c.optim.momentum);
  r.read("hvp_step", c.optim.hvp_step);
  r.read("grad_floor", c.optim.grad_floor);
  if (r.has("descent")) {
    r.read("descent", text);
    if (text == "perturbed") {
      c.descent = DescentTerm::perturbed;
    } else if (text == "erm") {
      c.descent = DescentTerm::erm;
    } else {
      throw ConfigError("unknown descent term '" + text + "' (expected perturbed|erm)",
                        "optimizer.descent");
    }
  }
  r.reject_unknown();
}

}  // namespace

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sam: return "sam";
    case OptimizerKind::roga: return "roga";
  }
  return "roga";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "sam") return OptimizerKind::sam;
  if (name == "roga") return OptimizerKind::roga;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd|sam|roga)");
}

int DatasetConfig::domain_count() const {
  return static_cast<int>(family == "rotated_moons" ? angles.size() : spur_signs.size());
}

std::size_t DatasetConfig::feature_dim() const {
  return family == "rotated_moons" ? 2 : 2 + d_noise;
}

std::vector<GeneratorDescriptor> DatasetConfig::descriptors(std::uint64_t run_seed) const {
  std::vector<GeneratorDescriptor> out;
  const std::uint64_t base = seed + run_seed;
  for (int i = 0; i < domain_count(); ++i) {
    GeneratorDescriptor d;
    d.domain_id = i;
    d.standardize = standardize;
    const std::uint64_t s = domain_stream_seed(base, i);
    const auto k = static_cast<std::size_t>(i);
    if (family == "rotated_moons") {
      d.params = RotatedMoonsParams{angles[k], n, noise_sd, s};
    } else {
      d.params = SpuriousBlobsParams{core_sep, spur_strengths[k], spur_signs[k], n, d_noise, s};
    }
    out.push_back(d);
  }
  return out;
}

ModelSpec ModelConfig::spec(std::size_t input_dim) const {
  if (kind == ModelKind::logistic) return ModelSpec::logistic(input_dim);
  std::vector<std::size_t> widths{input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  return ModelSpec::mlp(std::move(widths), activation);
}

std::vector<SplitPlan> ExperimentConfig::splits() const {
  const int k = dataset.domain_count();
  if (all_leave_one_out) return leave_one_out_splits(k);
  const int held = held_out.value_or(k - 1);
  SplitPlan plan;
  plan.held_out_domain_id = held;
  for (int id = 0; id < k; ++id) {
    if (id != held) plan.train_domain_ids.push_back(id);
  }
  return {plan};
}

void ExperimentConfig::validate() const {
  const int k = dataset.domain_count();
  if (dataset.n < 2) throw ConfigError("must be at least 2", "dataset.n");
  if (dataset.family == "spurious_blobs") {
    if (!(dataset.core_sep > 0.0)) throw ConfigError("must be > 0", "dataset.core_sep");
    if (dataset.spur_strengths.size() != dataset.spur_signs.size()) {
      throw ConfigError("spur_signs has " + std::to_string(dataset.spur_signs.size()) +
                            " entries but spur_strengths has " +
                            std::to_string(dataset.spur_strengths.size()),
                        "dataset.spur_strengths");
    }
    for (int s : dataset.spur_signs) {
      if (s != 1 && s != -1) throw ConfigError("entries must be +1 or -1", "dataset.spur_signs");
    }
  } else if (!(dataset.noise_sd >= 0.0)) {
    throw ConfigError("must be >= 0", "dataset.noise_sd");
  }
  if (k < 3) {
    throw ConfigError("need at least 3 domains (2 to train, 1 held out), got " + std::to_string(k),
                      "dataset");
  }
  if (held_out && (*held_out < 0 || *held_out >= k)) {
    throw ConfigError("held-out domain " + std::to_string(*held_out) + " is not in [0, " +
                          std::to_string(k) + ")",
                      "split.held_out");
  }
  if (model.kind == ModelKind::logistic && !model.hidden.empty()) {
    throw ConfigError("logistic model takes no hidden layers", "model.hidden");
  }
  for (std::size_t w : model.hidden) {
    if (w == 0) throw ConfigError("hidden widths must be positive", "model.hidden");
  }
  optim.validate();
  if (epochs < 1) throw ConfigError("must be at least 1", "epochs");
  if (batch_size < 1) throw ConfigError("must be at least 1", "batch_size");
  if (batch_size > dataset.n) {
    throw ConfigError("batch_size " + std::to_string(batch_size) + " exceeds domain size " +
                          std::to_string(dataset.n),
                      "batch_size");
  }
  if (seeds.empty()) throw ConfigError("must list at least one seed", "seeds");
  if (threads < 1) throw ConfigError("must be at least 1", "threads");
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig c;
  ObjectReader r(doc, "");
  if (!r.has("dataset")) throw ConfigError("missing required key", "dataset");
  if (!r.has("optimizer")) throw ConfigError("missing required key", "optimizer");
  c.dataset = parse_dataset(r.child("dataset"));
  parse_optimizer(r.child("optimizer"), c);
  if (r.has("model")) c.model = parse_model(r.child("model"));
  if (r.has("split")) {
    const json& split = r.child("split");
    if (split.is_string()) {
      if (split.get<std::string>() != "all-leave-one-out") {
        throw ConfigError("expected \"all-leave-one-out\" or {\"held_out\": id}", "split");
      }
      c.all_leave_one_out = true;
    } else {
      ObjectReader sr(split, "split");
      int held = 0;
      if (!sr.has("held_out")) throw ConfigError("missing required key", "split.held_out");
      sr.read("held_out", held);
      c.held_out = held;
      sr.reject_unknown();
    }
  }
  r.read_unsigned("epochs", c.epochs);
  r.read_unsigned("batch_size", c.batch_size);
  r.read("output_dir", c.output_dir);
  r.read_unsigned("threads", c.threads);
  if (r.has("seeds")) {
    const json& seeds = r.child("seeds");
    if (!seeds.is_array()) throw ConfigError("expected an array of integers", "seeds");
    c.seeds.clear();
    for (const auto& s : seeds) {
      if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) throw ConfigError("expected non-negative integers", "seeds");
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  r.reject_unknown();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  json dataset{{"family", c.dataset.family},
               {"n", c.dataset.n},
               {"seed", c.dataset.seed},
               {"standardize", c.dataset.standardize}};
  if (c.dataset.family == "spurious_blobs") {
    dataset["core_sep"] = c.dataset.core_sep;
    dataset["d_noise"] = c.dataset.d_noise;
    dataset["spur_signs"] = c.dataset.spur_signs;
    dataset["spur_strengths"] = c.dataset.spur_strengths;
  } else {
    dataset["angles"] = c.dataset.angles;
    dataset["noise_sd"] = c.dataset.noise_sd;
  }
  json split;
  if (c.all_leave_one_out) {
    split = "all-leave-one-out";
  } else {
    split = json{{"held_out", c.held_out.value_or(c.dataset.domain_count() - 1)}};
  }
  return json{
      {"dataset", dataset},
      {"split", split},
      {"model",
       {{"kind", to_string(c.model.kind)},
        {"hidden", c.model.hidden},
        {"activation", to_string(c.model.activation)},
        {"init", to_string(c.model.init)}}},
      {"optimizer",
       {{"kind", to_string(c.optimizer)},
        {"rho", c.optim.rho},
        {"alpha", c.optim.alpha},
        {"lr", c.optim.lr},
        {"momentum", c.optim.momentum},
        {"hvp_step", c.optim.hvp_step},
        {"grad_floor", c.optim.grad_floor},
        {"descent", c.descent == DescentTerm::erm ? "erm" : "perturbed"}}},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir},
      {"threads", c.threads},
  };
}

}  // namespace roga
