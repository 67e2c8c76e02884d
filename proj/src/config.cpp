#include "treepoly/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "treepoly/conductance.hpp"
#include "treepoly/errors.hpp"
#include "treepoly/strings.hpp"

namespace treepoly::cli {

namespace {

std::uint64_t parse_unsigned(std::string_view field) {
  const auto text = trim(field);
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(field) + "'");
  }
  return value;
}

int parse_int(std::string_view field) {
  const long long v = parse_integer(field);
  if (v < -1'000'000'000LL || v > 1'000'000'000LL) {
    throw ConfigError("integer out of range: '" + std::string(field) + "'");
  }
  return static_cast<int>(v);
}

std::optional<double> parse_auto(std::string_view field) {
  if (trim(field) == "auto") return std::nullopt;
  return parse_double(field);
}

std::string format_auto(const std::optional<double>& v) {
  return v ? format_double(*v) : "auto";
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "command", "law",     "ell",      "beta",        "depth",
      "n_min",   "theta",   "delta",    "eps",         "h",
      "replicas", "seed",   "threads",  "output_dir",  "work_budget",
      "split_depth", "mode"};
  return keys;
}

void set_field(RunConfig& c, std::string_view key, std::string_view value) {
  const std::string v(trim(value));
  if (key == "command") {
    c.command = v;
  } else if (key == "law") {
    if (!v.empty()) parse_law(v);
    c.law = v;
  } else if (key == "ell") {
    c.ell = parse_int(v);
    if (c.ell < 2 || c.ell > 255) throw ConfigError("ell must be in [2, 255]");
  } else if (key == "beta") {
    expand_grid(v);
    c.beta = v;
  } else if (key == "depth") {
    c.depth = parse_int(v);
    if (c.depth < 0) throw ConfigError("depth must be >= 0");
  } else if (key == "n_min") {
    c.n_min = parse_int(v);
    if (c.n_min < 0) throw ConfigError("n_min must be >= 0");
  } else if (key == "theta") {
    c.theta = parse_double(v);
  } else if (key == "delta") {
    c.delta = parse_double(v);
    if (!(c.delta > 0.0)) throw ConfigError("delta must be > 0");
  } else if (key == "eps") {
    c.eps = parse_auto(v);
  } else if (key == "h") {
    c.h = parse_auto(v);
  } else if (key == "replicas") {
    c.replicas = parse_unsigned(v);
  } else if (key == "seed") {
    c.seed = parse_unsigned(v);
  } else if (key == "threads") {
    const auto t = parse_unsigned(v);
    if (t > 4096) throw ConfigError("threads must be <= 4096");
    c.threads = static_cast<unsigned>(t);
  } else if (key == "output_dir") {
    if (v.empty()) throw ConfigError("output_dir must not be empty");
    c.output_dir = v;
  } else if (key == "work_budget") {
    c.work_budget = parse_unsigned(v);
  } else if (key == "split_depth") {
    c.split_depth = parse_int(v);
    if (c.split_depth < 0) throw ConfigError("split_depth must be >= 0");
  } else if (key == "mode") {
    if (v != "root" && v != "forward") throw ConfigError("mode must be root or forward");
    c.mode = v;
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

std::string get_field(const RunConfig& c, std::string_view key) {
  if (key == "command") return c.command;
  if (key == "law") return c.law;
  if (key == "ell") return std::to_string(c.ell);
  if (key == "beta") return c.beta;
  if (key == "depth") return std::to_string(c.depth);
  if (key == "n_min") return std::to_string(c.n_min);
  if (key == "theta") return format_double(c.theta);
  if (key == "delta") return format_double(c.delta);
  if (key == "eps") return format_auto(c.eps);
  if (key == "h") return format_auto(c.h);
  if (key == "replicas") return std::to_string(c.replicas);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "threads") return std::to_string(c.threads);
  if (key == "output_dir") return c.output_dir;
  if (key == "work_budget") return std::to_string(c.work_budget);
  if (key == "split_depth") return std::to_string(c.split_depth);
  if (key == "mode") return c.mode;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (auto key : config_keys()) {
    out += key;
    out += '=';
    out += get_field(config, key);
    out += '\n';
  }
  return out;
}

void apply_text(RunConfig& base, std::string_view text) {
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      set_field(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig from_text(std::string_view text) {
  RunConfig config;
  apply_text(config, text);
  return config;
}

std::vector<double> expand_grid(std::string_view spec) {
  const auto parts = split(spec, ':');
  if (parts.size() == 1) {
    const double v = parse_double(parts[0]);
    if (!std::isfinite(v)) throw ConfigError("grid value must be finite");
    return {v};
  }
  if (parts.size() != 3) {
    throw ConfigError("grid spec '" + std::string(spec) + "' is not start:stop:step");
  }
  const double start = parse_double(parts[0]);
  const double stop = parse_double(parts[1]);
  const double step = parse_double(parts[2]);
  if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0) ||
      !std::isfinite(step) || stop < start) {
    throw ConfigError("grid spec '" + std::string(spec) +
                      "' needs finite start <= stop and step > 0");
  }
  const double span = (stop - start) / step;
  if (span > 1e7) throw ConfigError("grid spec '" + std::string(spec) + "' is too long");
  // Tolerate rounding so that 0:3:0.05 includes 3.
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(start + static_cast<double>(i) * step);
  }
  return out;
}

std::string describe(const RunConfig& config) {
  std::string out;
  for (auto key : config_keys()) {
    if (key == "threads" || key == "output_dir") continue;
    if (!out.empty()) out += ';';
    out += key;
    out += '=';
    out += get_field(config, key);
  }
  return out;
}

}  // namespace treepoly::cli
