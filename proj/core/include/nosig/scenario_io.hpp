#pragma once

// JSON scenario configurations and signaling reports.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "nosig/protocol.hpp"

namespace nosig {

/// The file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON, an unknown key or a value of the wrong type. The message
/// carries the line/column or the offending key.
class ConfigParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Parses and validates a scenario. Missing keys take the ScenarioConfig
/// defaults; unknown keys are rejected.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config(const std::filesystem::path& path);

std::string config_to_text(const ScenarioConfig& cfg);

struct RunManifest {
  ScenarioConfig config;
  std::string tool_version;
  double wall_clock_seconds = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const RunManifest&) const = default;
};

std::string tool_version();

std::string report_to_text(const SignalingReport& report, const RunManifest& manifest);

struct ParsedReport {
  SignalingReport report;
  RunManifest manifest;
};

ParsedReport parse_report_text(const std::string& text);

std::string certificate_to_text(const SpacelikeCertificate& cert);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace nosig
