#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fbh::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return x;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": not a nonnegative integer: '" + v + "'");
  }
  return x;
}

std::string show(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

void set_value(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "nu") {
    c.nu = to_double(key, v);
  } else if (key == "n_terms") {
    c.n_terms = to_unsigned(key, v);
  } else if (key == "quad_nodes") {
    c.quad_nodes = to_unsigned(key, v);
  } else if (key == "t_min") {
    c.t_min = to_double(key, v);
  } else if (key == "t_max") {
    c.t_max = to_double(key, v);
  } else if (key == "t_ratio") {
    c.t_ratio = to_double(key, v);
  } else if (key == "series_tolerance") {
    c.series_tolerance = to_double(key, v);
  } else if (key == "decomposition_tolerance") {
    c.decomposition_tolerance = to_double(key, v);
  } else if (key == "cancel_tolerance") {
    c.cancel_tolerance = to_double(key, v);
  } else if (key == "reconstruct_tolerance") {
    c.reconstruct_tolerance = to_double(key, v);
  } else if (key == "seed") {
    c.seed = to_unsigned(key, v);
  } else if (key == "batch_count") {
    c.batch_count = to_unsigned(key, v);
  } else if (key == "max_scale") {
    c.max_scale = static_cast<int>(to_unsigned(key, v));
  } else if (key == "out") {
    c.out = v;
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

void load_config_file(RunConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    set_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void RunConfig::validate() const {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
  };
  if (!(nu > -0.5)) throw ConfigError("nu must exceed -1/2");
  if (n_terms < 1 || n_terms > kMaxTerms) throw ConfigError("n_terms must lie in [1, " + std::to_string(kMaxTerms) + "]");
  if (quad_nodes < 8) throw ConfigError("quad_nodes must be at least 8");
  positive("t_min", t_min);
  if (!(t_max > t_min)) throw ConfigError("t_max must exceed t_min");
  if (!(t_ratio > 1.0)) throw ConfigError("t_ratio must exceed 1");
  positive("series_tolerance", series_tolerance);
  positive("decomposition_tolerance", decomposition_tolerance);
  positive("cancel_tolerance", cancel_tolerance);
  positive("reconstruct_tolerance", reconstruct_tolerance);
  if (batch_count < 1) throw ConfigError("batch_count must be at least 1");
  if (max_scale < 0 || max_scale > 20) throw ConfigError("max_scale must lie in [0, 20]");
}

std::map<std::string, std::string> RunConfig::as_map() const {
  return {{"nu", show(nu)},
          {"n_terms", std::to_string(n_terms)},
          {"quad_nodes", std::to_string(quad_nodes)},
          {"t_min", show(t_min)},
          {"t_max", show(t_max)},
          {"t_ratio", show(t_ratio)},
          {"series_tolerance", show(series_tolerance)},
          {"decomposition_tolerance", show(decomposition_tolerance)},
          {"cancel_tolerance", show(cancel_tolerance)},
          {"reconstruct_tolerance", show(reconstruct_tolerance)},
          {"seed", std::to_string(seed)},
          {"batch_count", std::to_string(batch_count)},
          {"max_scale", std::to_string(max_scale)},
          {"out", out}};
}

}  // namespace fbh::cli
