#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "remkit/bounds.hpp"
#include "remkit/cli.hpp"
#include "remkit/error.hpp"

namespace remkit::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("invalid value for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    out.push_back(parse_number<T>(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string version() { return REMKIT_VERSION; }

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "a") {
    cfg.a = parse_list<double>(key, value);
  } else if (key == "kappa") {
    cfg.kappa = parse_list<double>(key, value);
  } else if (key == "N") {
    cfg.N = parse_list<int>(key, value);
  } else if (key == "beta_min") {
    cfg.beta_min = parse_number<double>(key, value);
  } else if (key == "beta_max") {
    cfg.beta_max = parse_number<double>(key, value);
  } else if (key == "beta_points") {
    cfg.beta_points = parse_number<int>(key, value);
  } else if (key == "betas") {
    cfg.betas = parse_list<double>(key, value);
  } else if (key == "replicas") {
    cfg.replicas = parse_number<std::size_t>(key, value);
  } else if (key == "concentration_replicas") {
    cfg.concentration_replicas = parse_number<std::size_t>(key, value);
  } else if (key == "t") {
    cfg.t = parse_list<double>(key, value);
  } else if (key == "m") {
    cfg.m = parse_list<double>(key, value);
  } else if (key == "K") {
    cfg.K = parse_number<std::size_t>(key, value);
  } else if (key == "max_points") {
    cfg.max_points = parse_number<std::size_t>(key, value);
  } else if (key == "trials") {
    cfg.trials = parse_number<std::size_t>(key, value);
  } else if (key == "rel_tol") {
    cfg.rel_tol = parse_number<double>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_number<int>(key, value);
  } else if (key == "format") {
    if (value == "csv") {
      cfg.format = OutputFormat::kCsv;
    } else if (value == "json") {
      cfg.format = OutputFormat::kJson;
    } else {
      throw ConfigError("format must be csv or json");
    }
  } else if (key == "out") {
    cfg.out = std::string(value);
  } else if (key == "only") {
    cfg.only = std::string(value);
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str());
}

std::vector<double> ExperimentConfig::beta_grid() const {
  if (!betas.empty()) {
    auto out = betas;
    std::sort(out.begin(), out.end());
    return out;
  }
  const double hi = beta_max > 0.0 ? beta_max : 2.0 * beta_c();
  std::vector<double> out(static_cast<std::size_t>(beta_points));
  if (beta_points == 1) {
    out[0] = beta_min;
    return out;
  }
  for (int k = 0; k < beta_points; ++k) {
    out[static_cast<std::size_t>(k)] = beta_min + (hi - beta_min) * k / (beta_points - 1);
  }
  return out;
}

std::vector<GremParams> ExperimentConfig::models() const {
  std::vector<GremParams> out;
  for (int n : N) {
    try {
      out.push_back(GremParams::from_proportions(a, kappa, n));
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (N.empty()) throw ConfigError("N must list at least one size");
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (betas.empty()) {
    if (beta_points < 1) throw ConfigError("beta_points must be >= 1");
    const double hi = beta_max > 0.0 ? beta_max : 2.0 * beta_c();
    if (beta_min < 0.0 || (beta_points > 1 && !(hi > beta_min))) {
      throw ConfigError("beta grid must be strictly increasing and start at >= 0");
    }
  } else {
    auto sorted = betas;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0.0 ||
        std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("betas must be distinct and >= 0");
    }
  }
  for (double v : m) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("m values must lie in (0, 1)");
  }
  for (double v : t) {
    if (!(v >= 0.0)) throw ConfigError("t values must be >= 0");
  }
  if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be > 0");
  (void)models();
}

}  // namespace remkit::cli
