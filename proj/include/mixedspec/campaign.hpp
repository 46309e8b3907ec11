#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixedspec/errors.hpp"

namespace mixedspec {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed or inconsistent campaign configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("cli", "config", what) {}
};

/// Scan kinds, named as the CLI commands.
inline const std::vector<std::string> kCommands = {
    "scan-lyapunov", "spectrum",      "reduce",
    "gordon-probe",  "classify-freq", "phase-diagram"};

/// Built-in defaults for every key a campaign can read.
nlohmann::json default_config();

/// defaults <- config file <- flag overrides (RFC 7386 merge patches), then
/// validation. The returned object is the full resolved config.
nlohmann::json resolve_config(const std::string& command,
                              const nlohmann::json& file_config,
                              const nlohmann::json& overrides);

nlohmann::json load_config_file(const std::string& path);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& resolved);

/// "# mixedspec <version> modules=... config_hash=<hash> config=<json>"
std::string header_line(const nlohmann::json& resolved);

struct CampaignResult {
  std::vector<std::string> files;  // written, in order
};

/// Runs the scan named by resolved["scan"] and writes its artifacts into
/// resolved["outputs"]["dir"].
CampaignResult run_campaign(const nlohmann::json& resolved);

/// Process exit code for an exception escaping run_campaign / resolve_config.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace mixedspec
