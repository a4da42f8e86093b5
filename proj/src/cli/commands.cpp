#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "remkit/bounds.hpp"
#include "remkit/cascade.hpp"
#include "remkit/cli.hpp"
#include "remkit/error.hpp"
#include "remkit/exact.hpp"
#include "remkit/parallel.hpp"
#include "remkit/rng.hpp"
#include "remkit/stats.hpp"
#include "remkit/verify.hpp"

namespace remkit::cli {

namespace {

using Cell = std::variant<double, std::int64_t, std::uint64_t, std::string, bool>;

class NonFiniteOutput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Row-oriented writer for CSV (with a version/seed comment line) or JSON
// lines. Rows are written in the order they are added.
class TableWriter {
 public:
  TableWriter(std::ostream& out, OutputFormat format, std::vector<std::string> columns,
              const std::string& command, std::uint64_t seed)
      : out_(out), format_(format), columns_(std::move(columns)) {
    if (format_ == OutputFormat::kCsv) {
      out_ << "# remkit " << version() << " command=" << command << " seed=" << seed
           << " schema=1\n";
      for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
      out_ << '\n';
    }
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_.size()) throw std::logic_error("row width mismatch");
    for (const auto& c : cells) {
      if (const auto* d = std::get_if<double>(&c); d && !std::isfinite(*d)) {
        throw NonFiniteOutput("non-finite value in output row");
      }
    }
    if (format_ == OutputFormat::kCsv) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) {
                out_ << format_double(v);
              } else if constexpr (std::is_same_v<T, bool>) {
                out_ << (v ? "true" : "false");
              } else {
                out_ << v;
              }
            },
            cells[i]);
      }
      out_ << '\n';
    } else {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        std::visit([&](const auto& v) { j[columns_[i]] = v; }, cells[i]);
      }
      out_ << j.dump() << '\n';
    }
  }

 private:
  std::ostream& out_;
  OutputFormat format_;
  std::vector<std::string> columns_;
};

void check_report_finite(const CheckReport& r) {
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs) || !std::isfinite(r.tolerance)) {
    throw NonFiniteOutput("non-finite value in check '" + r.name + "'");
  }
}

// Emits reports passing-first so a failing report is always last; returns
// true when all pass.
bool emit_reports(std::ostream& out, std::vector<CheckReport> reports) {
  for (const auto& r : reports) check_report_finite(r);
  std::stable_partition(reports.begin(), reports.end(), [](const CheckReport& r) { return r.pass; });
  bool all = true;
  for (const auto& r : reports) {
    out << r.to_json() << '\n';
    all = all && r.pass;
  }
  return all;
}

double bound_value(double beta, const GremParams& p) {
  return p.nondegenerate() ? q_grem(beta, p) : optimize(beta, p).value;
}

int cmd_pressure(const ExperimentConfig& cfg, std::ostream& out) {
  const auto grid = cfg.beta_grid();
  std::vector<double> all = grid;
  for (double b : grid) all.push_back(2.0 * b);
  TableWriter w(out, cfg.format,
                {"N", "beta", "pressure_mean", "pressure_stderr", "q_bound", "overlap_mean",
                 "overlap_stderr", "R", "seed"},
                "pressure", cfg.seed);
  for (const auto& p : cfg.models()) {
    const auto table = replica_log_partitions(p, all, cfg.replicas, cfg.seed);
    const std::size_t G = grid.size();
    for (std::size_t b = 0; b < G; ++b) {
      std::vector<double> pressure(cfg.replicas), overlap(cfg.replicas);
      for (std::size_t r = 0; r < cfg.replicas; ++r) {
        pressure[r] = pressure_from_log_partition(table.at(r, b), p.size(), grid[b]);
        overlap[r] = std::exp(table.at(r, G + b) - 2.0 * table.at(r, b));
      }
      const auto sp = summarize(pressure);
      const auto so = summarize(overlap);
      w.row({std::int64_t{p.size()}, grid[b], sp.mean, sp.stderr_mean, bound_value(grid[b], p),
             so.mean, so.stderr_mean, static_cast<std::uint64_t>(cfg.replicas), cfg.seed});
    }
  }
  return kExitOk;
}

int cmd_bound(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const GremParams p = cfg.models().front();
  const std::size_t n = static_cast<std::size_t>(p.levels());
  std::vector<std::string> cols{"beta"};
  for (std::size_t i = 0; i < n; ++i) cols.push_back("m_" + std::to_string(i + 1));
  cols.insert(cols.end(), {"bound", "decomposition"});
  for (std::size_t i = 0; i < n; ++i) cols.push_back("beta_star_" + std::to_string(i + 1));
  cols.push_back("closed_form");
  TableWriter w(out, cfg.format, cols, "bound", cfg.seed);
  const auto temps = critical_temperatures(p);
  bool warned = false;
  for (double beta : cfg.beta_grid()) {
    const auto opt = optimize(beta, p);
    if (!opt.warning.empty() && !warned) {
      err << "warning: " << opt.warning << '\n';
      warned = true;
    }
    std::vector<Cell> row{beta};
    for (std::size_t i = 0; i < n; ++i) row.emplace_back(opt.point[i]);
    row.emplace_back(opt.value);
    row.emplace_back(grem_decomposition(beta, p));
    for (double b : temps.beta_star) row.emplace_back(b);
    row.emplace_back(opt.closed_form);
    w.row(row);
  }
  return kExitOk;
}

std::vector<FDistribution> standard_marks() {
  return {FDistribution::constant(0.5), FDistribution::gaussian(0.0, 1.0),
          FDistribution::uniform(-1.0, 1.0)};
}

std::vector<InvarianceReport> run_invariance(const ExperimentConfig& cfg, double m) {
  InvarianceOptions opts;
  opts.rel_tol = cfg.rel_tol;
  opts.max_points = cfg.max_points;
  opts.tail_policy = TailPolicy::kReport;
  const auto marks = standard_marks();
  return invariance_test(m, marks, cfg.K, cfg.trials, derive_seed(cfg.seed, 77), opts);
}

int cmd_cascade(const ExperimentConfig& cfg, std::ostream& out) {
  TableWriter w(out, cfg.format,
                {"m", "distribution", "ks", "c", "threshold", "tail_clear", "max_relative_tail",
                 "mean_points", "max_points_used", "trials", "pass"},
                "cascade", cfg.seed);
  for (double m : cfg.m) {
    for (const auto& r : run_invariance(cfg, m)) {
      w.row({r.m, r.distribution, r.ks, r.c, r.threshold, r.tail_clear, r.max_relative_tail,
             r.mean_points, static_cast<std::uint64_t>(r.max_points_used),
             static_cast<std::uint64_t>(r.trials), r.pass});
    }
  }
  return kExitOk;
}

std::vector<double> betas_or(const ExperimentConfig& cfg, std::vector<double> fallback) {
  return cfg.betas.empty() ? fallback : cfg.beta_grid();
}

std::vector<CheckReport> sumrule_reports(const ExperimentConfig& cfg) {
  std::vector<CheckReport> out;
  for (int N : cfg.N) {
    for (double beta : betas_or(cfg, {0.25, 0.5, 1.0, 1.5})) {
      out.push_back(sum_rule_check(beta, N, cfg.replicas, 33, cfg.seed));
    }
  }
  return out;
}

std::vector<CheckReport> concentration_reports(const ExperimentConfig& cfg) {
  std::vector<CheckReport> out;
  for (int N : cfg.N) {
    for (double beta : betas_or(cfg, {0.5, 1.0, 2.0})) {
      for (double t : cfg.t) {
        out.push_back(concentration_check(N, beta, t, cfg.concentration_replicas, cfg.seed));
      }
    }
  }
  return out;
}

GremParams two_level_model(const ExperimentConfig& cfg) {
  const auto p = cfg.models().front();
  if (p.levels() > 1) return p;
  return GremParams::from_proportions({0.6, 0.4}, {0.5, 0.5}, 16);
}

using SuiteEntry = std::pair<std::string, std::function<std::vector<CheckReport>()>>;

std::vector<SuiteEntry> verify_suite(const ExperimentConfig& cfg) {
  std::vector<SuiteEntry> suite;
  suite.emplace_back("sum_rule", [&] { return sumrule_reports(cfg); });
  suite.emplace_back("derivative", [&] {
    std::vector<CheckReport> out;
    for (int N : cfg.N) {
      for (double beta : {0.5, 1.0}) out.push_back(derivative_check(beta, N, cfg.replicas, cfg.seed));
    }
    return out;
  });
  suite.emplace_back("concentration", [&] { return concentration_reports(cfg); });
  suite.emplace_back("overlap_decay", [&] {
    auto sizes = cfg.N;
    std::sort(sizes.begin(), sizes.end());
    return overlap_decay_check({0.0, 0.5, 1.0, 1.4}, sizes, cfg.replicas, cfg.seed);
  });
  suite.emplace_back("upper_bound", [&] {
    std::vector<CheckReport> out;
    for (const auto& p : cfg.models()) {
      if (!p.nondegenerate()) continue;
      for (double beta : cfg.beta_grid()) {
        out.push_back(upper_bound_check(p, beta, cfg.replicas, cfg.seed));
      }
    }
    return out;
  });
  suite.emplace_back("grem_lower", [&] {
    std::vector<CheckReport> out;
    const auto p = two_level_model(cfg);
    for (double beta : {0.5, 1.0, 2.0, 3.0}) {
      out.push_back(grem_lower_check(p, beta, cfg.replicas, cfg.seed));
    }
    return out;
  });
  suite.emplace_back("invariance", [&] {
    std::vector<CheckReport> out;
    for (double m : cfg.m) {
      for (const auto& r : run_invariance(cfg, m)) {
        CheckReport rep;
        rep.name = "invariance";
        rep.pass = r.pass;
        rep.lhs = r.ks;
        rep.rhs = r.threshold;
        rep.tolerance = r.threshold;
        rep.metadata = {{"m", r.m},
                        {"distribution", r.distribution},
                        {"c", r.c},
                        {"tail_clear", std::int64_t{r.tail_clear ? 1 : 0}},
                        {"max_relative_tail", r.max_relative_tail},
                        {"trials", static_cast<std::uint64_t>(r.trials)},
                        {"seed", cfg.seed}};
        out.push_back(std::move(rep));
      }
    }
    return out;
  });
  suite.emplace_back("optimizer", [&] {
    CounterRng rng(derive_seed(cfg.seed, 91));
    double worst = 0.0;
    int cases = 0;
    for (int set = 0; set < 20; ++set) {
      const double a1 = rng.uniform(0.2, 0.8);
      const double k1 = rng.uniform(0.1, 0.9);
      auto p = GremParams::from_proportions({a1, 1.0 - a1}, {k1, 1.0 - k1}, 16);
      if (!p.nondegenerate()) p = GremParams::from_proportions({1.0 - a1, a1}, {k1, 1.0 - k1}, 16);
      if (!p.nondegenerate()) continue;
      for (int k = 0; k < 10; ++k) {
        const double beta = 0.4 * (k + 1);
        worst = std::max(worst, std::abs(optimize(beta, p).value - numeric_optimize(beta, p).value));
        ++cases;
      }
    }
    CheckReport rep{"optimizer", worst <= 1e-6, worst, 0.0, 1e-6,
                    {{"cases", std::int64_t{cases}}, {"seed", cfg.seed}}};
    return std::vector<CheckReport>{rep};
  });
  suite.emplace_back("decomposition", [&] {
    const auto p = two_level_model(cfg);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double beta = 0.06 * k;
      worst = std::max(worst, std::abs(q_grem(beta, p) - grem_decomposition(beta, p)));
    }
    CheckReport rep{"decomposition", worst <= 1e-12, worst, 0.0, 1e-12, {{"points", std::int64_t{100}}}};
    return std::vector<CheckReport>{rep};
  });
  suite.emplace_back("stability", [&] {
    std::vector<CheckReport> out;
    for (int N : cfg.N) {
      const double c = stability_constant(GeneralHamiltonianSpec::rem(N));
      out.push_back({"stability", c == 1.0, c, 1.0, 0.0, {{"N", std::int64_t{N}}}});
    }
    return out;
  });
  suite.emplace_back("lipschitz", [&] {
    const double v = lipschitz_constant(2.0, 1.0, 2);
    return std::vector<CheckReport>{
        {"lipschitz", std::abs(v - 1.0) <= 1e-15, v, 1.0, 1e-15, {{"beta", 2.0}, {"c", 1.0}}}};
  });
  suite.emplace_back("sample_inequalities", [&] {
    return std::vector<CheckReport>{
        sample_inequalities_check(GremParams::rem(10), 1000, cfg.seed)};
  });
  return suite;
}

int cmd_checks(std::vector<CheckReport> reports, std::ostream& out) {
  return emit_reports(out, std::move(reports)) ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<CheckReport> reports;
  bool matched = false;
  for (auto& [name, run] : verify_suite(cfg)) {
    if (!cfg.only.empty() && cfg.only != name) continue;
    matched = true;
    auto batch = run();
    reports.insert(reports.end(), batch.begin(), batch.end());
  }
  if (!matched) {
    err << "error: --only '" << cfg.only << "' matches no check\n";
    return kExitConfigError;
  }
  return cmd_checks(std::move(reports), out);
}

// Flags that override configuration keys, as (flag, key).
const std::vector<std::pair<std::string, std::string>>& override_flags() {
  static const std::vector<std::pair<std::string, std::string>> flags = {
      {"--seed", "seed"},
      {"--threads", "threads"},
      {"--format", "format"},
      {"--out", "out"},
      {"--only", "only"},
      {"--N", "N"},
      {"--a", "a"},
      {"--kappa", "kappa"},
      {"--beta-min", "beta_min"},
      {"--beta-max", "beta_max"},
      {"--beta-points", "beta_points"},
      {"--betas", "betas"},
      {"--replicas", "replicas"},
      {"--concentration-replicas", "concentration_replicas"},
      {"--t", "t"},
      {"--m", "m"},
      {"--K", "K"},
      {"--max-points", "max_points"},
      {"--trials", "trials"},
      {"--rel-tol", "rel_tol"},
  };
  return flags;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"remkit: random energy model pressures, bounds and cascade checks"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "flat key = value configuration file");
  std::map<std::string, std::string> raw;
  for (const auto& [flag, key] : override_flags()) {
    app.add_option(flag, raw[key], "overrides configuration key '" + key + "'");
  }

  auto* pressure = app.add_subcommand("pressure", "quenched pressure and bound over a beta grid");
  auto* bound = app.add_subcommand("bound", "variational bound, optimal m and critical temperatures");
  auto* cascade = app.add_subcommand("cascade", "invariance statistics of the point-process weights");
  auto* verify = app.add_subcommand("verify", "run the verification suite (JSON lines)");
  auto* sumrule = app.add_subcommand("sumrule", "sum-rule checks (JSON lines)");
  auto* concentration = app.add_subcommand("concentration", "concentration checks (JSON lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& [flag, key] : override_flags()) {
      if (app.count(flag) > 0) set_config_value(cfg, key, raw[key]);
    }
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  if (cfg.threads > 0) set_thread_count(cfg.threads);

  std::ofstream file;
  std::ostream* sink = &out;
  if (!cfg.out.empty()) {
    file.open(cfg.out);
    if (!file) {
      err << "config error: cannot open output '" << cfg.out << "'\n";
      return kExitConfigError;
    }
    sink = &file;
  }

  try {
    if (*pressure) return cmd_pressure(cfg, *sink);
    if (*bound) return cmd_bound(cfg, *sink, err);
    if (*cascade) return cmd_cascade(cfg, *sink);
    if (*verify) return cmd_verify(cfg, *sink, err);
    if (*sumrule) return cmd_checks(sumrule_reports(cfg), *sink);
    if (*concentration) return cmd_checks(concentration_reports(cfg), *sink);
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitCapacityError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitConfigError;
}

}  // namespace remkit::cli
