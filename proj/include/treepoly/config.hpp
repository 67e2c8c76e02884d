#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treepoly::cli {

/// Flat run configuration. Text form is one `key=value` per line; `#` starts
/// a comment. Every key except `command` and `law` has a default.
struct RunConfig {
  std::string command;
  std::string law;
  int ell = 3;
  std::string beta = "1";     // scalar or grid "start:stop:step"
  int depth = 10;
  int n_min = 1;
  double theta = 0.5;
  double delta = 0.125;
  std::optional<double> eps;  // unset: r(theta_c) / 2
  std::optional<double> h;    // unset: h_a + delta
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 0;       // 0: all hardware threads
  std::string output_dir = ".";
  std::uint64_t work_budget = std::uint64_t{1} << 31;
  int split_depth = 4;
  std::string mode = "root";  // root | forward

  bool operator==(const RunConfig&) const = default;
};

/// Keys in serialization order.
const std::vector<std::string_view>& config_keys();

/// Sets one field from its text value. Throws ConfigError for unknown keys
/// and malformed values.
void set_field(RunConfig& config, std::string_view key, std::string_view value);
std::string get_field(const RunConfig& config, std::string_view key);

std::string to_text(const RunConfig& config);
RunConfig from_text(std::string_view text);
/// Applies the lines of `text` on top of `base`.
void apply_text(RunConfig& base, std::string_view text);

/// "a:b:step" expands to a, a+step, ... <= b (strictly increasing, finite);
/// a plain number expands to itself.
std::vector<double> expand_grid(std::string_view spec);

/// `key=value;key=value` over every key except threads and output_dir, which
/// never change results.
std::string describe(const RunConfig& config);

}  // namespace treepoly::cli
