#pragma once

// Config-driven experiment runner. A config is a JSON object
//   {"kind": ..., "seed": ..., "output": ..., "model": {...}, "run": {...}}
// with a fixed key set per kind (see configs/README.md). Every run writes an
// output bundle: summary.json, CSV and plot-data files, the resolved config and
// a manifest of SHA-256 hashes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace afkg::harness {

inline constexpr int kSchemaVersion = 1;

/// Static validation failed; carries every diagnostic.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> diagnostics);
  [[nodiscard]] const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::optional<std::string> output;
  nlohmann::json model;
  nlohmann::json run;
};

struct KindInfo {
  std::string name;
  std::string description;
};

std::vector<KindInfo> experiment_kinds();

/// Full static validation; never runs simulations. Empty when well formed.
std::vector<std::string> validate(const nlohmann::json& config);

/// Parses a JSON document; syntax errors become a ValidationError.
nlohmann::json load_json_file(const std::filesystem::path& path);
/// Validates and converts; throws ValidationError.
ExperimentConfig parse_config(const nlohmann::json& config);
nlohmann::json to_json(const ExperimentConfig& config);

struct OutputFile {
  std::string name;
  std::string content;
};

struct OutputBundle {
  nlohmann::json summary;
  /// Every file of the bundle in write order, manifest.json last.
  std::vector<OutputFile> files;

  [[nodiscard]] const OutputFile* find(std::string_view name) const;
};

/// Runs the experiment in memory. Throws afkg::Rejected on runtime rejection.
OutputBundle execute(const ExperimentConfig& config);

/// Writes the bundle into `dir` through a sibling staging directory, so a
/// failure leaves no partial output behind.
void write_bundle(const OutputBundle& bundle, const std::filesystem::path& dir);

/// execute + write_bundle.
OutputBundle run(const ExperimentConfig& config, const std::filesystem::path& dir);

std::string sha256_hex(std::string_view data);

/// %.17g, with "inf", "-inf" and "nan" spelled out.
std::string format_double(double v);

}  // namespace afkg::harness
