#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hinembed {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kThreadsEnvVar = "HINEMBED_THREADS";

// One entry per accepted config key; this table is the single source of truth
// for config files, CLI overrides, and --help output.
struct ConfigEntry {
  const char* key;
  const char* def;
  const char* help;
};

const std::vector<ConfigEntry>& config_entries();

// Flat key=value run configuration. Unknown keys are rejected by name.
class RunConfig {
 public:
  RunConfig();  // defaults from config_entries()

  static RunConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool is_set(const std::string& key) const;  // non-empty value

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// 64-bit FNV-1a over the file bytes, as "fnv1a64:<hex>".
std::string file_digest(const std::string& path);

// Runs the configured stages (analyze, extract, train, eval) in order,
// skipping a stage when its recorded input digests and outputs are unchanged
// from the previous manifest. Writes <outdir>/manifest.json.
int run_pipeline(const RunConfig& cfg, std::ostream& log);

}  // namespace hinembed
