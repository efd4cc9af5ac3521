#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace crtmap {

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string fnv1a64_hex(const std::string& content);

// Writes content and returns its content hash (fnv1a64 hex).
std::string write_file_hashed(const std::string& path, const std::string& content);

struct ManifestEntry {
  std::string path;
  std::string hash;
};

// Run manifest: config echo, artifact version, emitted files with hashes,
// wall time and seed; serialized as schema-1 JSON.
class RunManifest {
 public:
  RunManifest(std::string command, std::string config_echo, std::uint64_t seed);
  void add_file(const std::string& path, const std::string& hash);
  void set_results(const std::string& results_json);
  std::string to_json(double wall_time_s) const;

 private:
  std::string command_;
  std::string config_echo_;
  std::uint64_t seed_;
  std::vector<ManifestEntry> files_;
  std::string results_json_ = "{}";
};

std::string csv_join(const std::vector<std::string>& cells);

// Minimal static histogram rendering.
std::string histogram_svg(const std::vector<double>& values, int bins,
                          const std::string& title);

std::string json_escape(const std::string& s);

extern const char* kArtifactVersion;

}  // namespace crtmap
