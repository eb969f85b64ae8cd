#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "roga/domains.hpp"
#include "roga/model.hpp"
#include "roga/param_vector.hpp"

namespace roga {

/// Writes header f0,...,f{d-1},label,domain_id then one row per example.
/// Numbers use 17 significant digits, so reading back is exact.
void write_dataset_csv(const DomainDataset& dataset, const std::filesystem::path& path);

/// Parses a CSV written by write_dataset_csv. All rows must share one
/// domain_id. The descriptor of the result is left default.
DomainDataset read_dataset_csv(const std::filesystem::path& path);

nlohmann::json descriptor_to_json(const GeneratorDescriptor& descriptor);
GeneratorDescriptor descriptor_from_json(const nlohmann::json& doc);

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& doc);

/// {"model": spec, "params": [...]}.
void save_model(const ModelSpec& spec, const ParamVector& params,
                const std::filesystem::path& path);
std::pair<ModelSpec, ParamVector> load_model(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Pretty-printed JSON with a trailing newline.
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

/// Shortest round-trip decimal for a double, as used in every CSV.
std::string format_double(double value);

}  // namespace roga
