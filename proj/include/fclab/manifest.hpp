#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fclab/csv.hpp"

namespace fclab {

inline constexpr const char* kVersion = "0.1.0";

// Provenance record emitted next to every command's outputs. The echoed
// config is sufficient to reproduce the CSVs byte for byte.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config_echo;
  std::uint64_t base_seed = 0;
  double duration_ms = 0.0;
  std::vector<std::string> method_tags;

  [[nodiscard]] std::string to_json() const {
    nlohmann::json j;
    j["artifact_version"] = kVersion;
    j["command"] = command;
    j["config_echo"] = config_echo;
    j["base_seed"] = base_seed;
    j["duration_ms"] = duration_ms;
    j["method_tags"] = method_tags;
    return j.dump(2) + "\n";
  }

  void write(const std::string& dir) const {
    write_file_atomic(std::filesystem::path(dir) / "manifest.json", to_json());
  }
};

class StopWatch {
public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace fclab
