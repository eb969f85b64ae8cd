#include "roga/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "roga/errors.hpp"

namespace roga {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw IoError("malformed number '" + std::string(field) + "' on line " + std::to_string(line),
                  path.string());
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

void write_dataset_csv(const DomainDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  const std::size_t d = dataset.dim();
  for (std::size_t j = 0; j < d; ++j) out << 'f' << j << ',';
  out << "label,domain_id\n";
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    for (std::size_t j = 0; j < d; ++j) out << format_double(dataset.features(r, j)) << ',';
    out << dataset.labels[r] << ',' << dataset.domain_id << '\n';
  }
  if (!out) throw IoError("write failed", path.string());
}

DomainDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing CSV header", path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "domain_id") {
    throw IoError("CSV header must end with label,domain_id", path.string());
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      throw IoError("unexpected CSV column '" + std::string(header[j]) + "'", path.string());
    }
  }

  DomainDataset ds;
  std::vector<double> data;
  std::size_t line_no = 1;
  bool have_domain = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != d + 2) {
      throw IoError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(d + 2),
                    path.string());
    }
    for (std::size_t j = 0; j < d; ++j) data.push_back(parse_double(fields[j], path, line_no));
    const double label = parse_double(fields[d], path, line_no);
    if (label != 0.0 && label != 1.0) {
      throw IoError("label on line " + std::to_string(line_no) + " is not 0 or 1", path.string());
    }
    ds.labels.push_back(static_cast<int>(label));
    const int domain = static_cast<int>(parse_double(fields[d + 1], path, line_no));
    if (have_domain && domain != ds.domain_id) {
      throw IoError("mixed domain ids in one file (line " + std::to_string(line_no) + ")",
                    path.string());
    }
    ds.domain_id = domain;
    have_domain = true;
  }
  ds.features = Matrix(ds.labels.size(), d, std::move(data));
  ds.descriptor.domain_id = ds.domain_id;
  return ds;
}

nlohmann::json descriptor_to_json(const GeneratorDescriptor& descriptor) {
  nlohmann::json doc;
  doc["family"] = descriptor.family();
  doc["domain_id"] = descriptor.domain_id;
  doc["standardize"] = descriptor.standardize;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, RotatedMoonsParams>) {
          doc["angle"] = p.angle;
          doc["n"] = p.n;
          doc["noise_sd"] = p.noise_sd;
          doc["seed"] = p.seed;
        } else {
          doc["core_sep"] = p.core_sep;
          doc["spur_strength"] = p.spur_strength;
          doc["spur_sign"] = p.spur_sign;
          doc["n"] = p.n;
          doc["d_noise"] = p.d_noise;
          doc["seed"] = p.seed;
        }
      },
      descriptor.params);
  return doc;
}

GeneratorDescriptor descriptor_from_json(const nlohmann::json& doc) {
  try {
    GeneratorDescriptor d;
    d.domain_id = doc.at("domain_id").get<int>();
    d.standardize = doc.at("standardize").get<bool>();
    const auto family = doc.at("family").get<std::string>();
    if (family == "rotated_moons") {
      d.params = RotatedMoonsParams{doc.at("angle").get<double>(), doc.at("n").get<std::size_t>(),
                                    doc.at("noise_sd").get<double>(),
                                    doc.at("seed").get<std::uint64_t>()};
    } else if (family == "spurious_blobs") {
      d.params = SpuriousBlobsParams{
          doc.at("core_sep").get<double>(), doc.at("spur_strength").get<double>(),
          doc.at("spur_sign").get<int>(),   doc.at("n").get<std::size_t>(),
          doc.at("d_noise").get<std::size_t>(), doc.at("seed").get<std::uint64_t>()};
    } else {
      throw ConfigError("unknown dataset family '" + family + "'", "family");
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad generator descriptor: ") + e.what());
  }
}

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"layer_widths", spec.layer_widths},
          {"activation", to_string(spec.activation)}};
}

ModelSpec model_spec_from_json(const nlohmann::json& doc) {
  try {
    ModelSpec spec;
    spec.kind = parse_model_kind(doc.at("kind").get<std::string>());
    spec.layer_widths = doc.at("layer_widths").get<std::vector<std::size_t>>();
    spec.activation = parse_activation(doc.at("activation").get<std::string>());
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model spec: ") + e.what(), "model");
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("bad model spec: ") + e.what(), "model");
  }
}

void save_model(const ModelSpec& spec, const ParamVector& params,
                const std::filesystem::path& path) {
  write_json_file({{"model", model_spec_to_json(spec)}, {"params", params.values()}}, path);
}

std::pair<ModelSpec, ParamVector> load_model(const std::filesystem::path& path) {
  const nlohmann::json doc = read_json_file(path);
  ModelSpec spec = model_spec_from_json(doc.at("model"));
  ParamVector params;
  try {
    params = ParamVector(doc.at("params").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad params array: ") + e.what(), "params");
  }
  if (params.size() != spec.param_count()) {
    throw DimensionError("model file has " + std::to_string(params.size()) +
                         " parameters, spec needs " + std::to_string(spec.param_count()));
  }
  return {std::move(spec), std::move(params)};
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("invalid JSON (") + e.what() + ")", path.string());
  }
}

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed", path.string());
}

}  // namespace roga
