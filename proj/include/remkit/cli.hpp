#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "remkit/model.hpp"

namespace remkit::cli {

enum class OutputFormat { kCsv, kJson };

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitCapacityError = 3;
inline constexpr int kExitRuntimeError = 4;

// Experiment settings. Loaded from a flat `key = value` file and overridden
// by command-line flags. Keys match the member names; lists are comma
// separated.
struct ExperimentConfig {
  std::vector<double> a{1.0};
  std::vector<double> kappa{1.0};
  std::vector<int> N{16};
  double beta_min = 0.0;
  double beta_max = 0.0;  // 0 selects 2 beta_c
  int beta_points = 33;
  // Explicit temperature list; replaces the grid when non-empty.
  std::vector<double> betas;
  std::size_t replicas = 200;
  std::size_t concentration_replicas = 2000;
  std::vector<double> t{0.2, 0.5};
  std::vector<double> m{0.3, 0.5};
  std::size_t K = 1000;
  std::size_t max_points = 5000000;
  std::size_t trials = 10000;
  double rel_tol = 1e-6;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 keeps the environment/hardware default
  OutputFormat format = OutputFormat::kCsv;
  std::string out;
  std::string only;

  // Sorted temperature list: `betas` if given, else the uniform grid.
  std::vector<double> beta_grid() const;
  std::vector<GremParams> models() const;
  // Throws ConfigError on invalid settings.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Applies `key = value` lines to cfg. Blank lines and '#' comments are skipped.
void apply_config_text(ExperimentConfig& cfg, std::string_view text);
void apply_config_file(ExperimentConfig& cfg, const std::string& path);
// Sets one key from its textual value.
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

// Entry point shared by the executable and the tests. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace remkit::cli
