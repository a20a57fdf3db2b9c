#pragma once

// Run configuration: built-in defaults, a flat `key = value` file, and flag
// overrides, validated before any computation starts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

namespace fbh::cli {

/// Invalid configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double nu = 0.0;
  std::size_t n_terms = 200000;
  std::size_t quad_nodes = 512;
  double t_min = 1e-4;
  double t_max = 10.0;
  double t_ratio = 1.25;
  double series_tolerance = 1e-10;
  double decomposition_tolerance = 1e-8;
  double cancel_tolerance = 1e-10;
  double reconstruct_tolerance = 1e-6;
  std::uint64_t seed = 20240611;
  std::size_t batch_count = 100;
  int max_scale = 8;
  std::string out;  // empty: standard output

  /// Throws ConfigError naming the first offending key.
  void validate() const;
  /// key = value lines in file order.
  std::map<std::string, std::string> as_map() const;
};

/// Largest zero table a run may request.
inline constexpr std::size_t kMaxTerms = 2000000;

/// Applies one `key = value` pair; unknown keys and malformed values throw.
void set_value(RunConfig& config, const std::string& key, const std::string& value);
/// Reads `key = value` lines ('#' starts a comment) on top of `config`.
void load_config_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace fbh::cli
