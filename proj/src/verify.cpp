#include "remkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "remkit/bounds.hpp"
#include "remkit/error.hpp"
#include "remkit/exact.hpp"
#include "remkit/rng.hpp"
#include "remkit/stats.hpp"

namespace remkit {

namespace {

using Meta = std::vector<std::pair<std::string, MetaValue>>;

Meta run_meta(int N, double beta, std::size_t replicas, std::uint64_t seed) {
  return {{"N", std::int64_t{N}},
          {"beta", beta},
          {"R", static_cast<std::uint64_t>(replicas)},
          {"seed", seed}};
}

}  // namespace

std::string CheckReport::to_json() const {
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [key, value] : metadata) {
    std::visit([&](const auto& v) { meta[key] = v; }, value);
  }
  nlohmann::ordered_json j;
  j["name"] = name;
  j["pass"] = pass;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["tolerance"] = tolerance;
  j["metadata"] = std::move(meta);
  return j.dump();
}

CheckReport sum_rule_check(double beta_max, int N, std::size_t replicas, std::size_t grid_points,
                           std::uint64_t seed) {
  if (grid_points < 16) throw ParameterError("sum_rule_check: need at least 16 grid points");
  if (!(beta_max >= 0.0)) throw ParameterError("sum_rule_check: beta_max must be >= 0");
  if (replicas < 2) throw ParameterError("sum_rule_check: need at least 2 replicas");
  const GremParams p = GremParams::rem(N);
  const std::size_t G = grid_points;
  std::vector<double> betas(2 * G);
  for (std::size_t j = 0; j < G; ++j) {
    betas[j] = beta_max * static_cast<double>(j) / static_cast<double>(G - 1);
    betas[G + j] = 2.0 * betas[j];
  }
  const auto weights = simpson_weights(G, beta_max);
  const auto table = replica_log_partitions(p, betas, replicas, seed);

  const double annealed = annealed_pressure_rem(beta_max);
  std::vector<double> direct(replicas), rebuilt(replicas), diff(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    CompensatedSum integral;
    for (std::size_t j = 0; j < G; ++j) {
      const double overlap = std::exp(table.at(r, G + j) - 2.0 * table.at(r, j));
      integral.add(weights[j] * 0.5 * betas[j] * overlap);
    }
    direct[r] = pressure_from_log_partition(table.at(r, G - 1), N, beta_max);
    rebuilt[r] = annealed - integral.value();
    diff[r] = direct[r] - rebuilt[r];
  }
  const auto sd = summarize(direct);
  const auto sr = summarize(rebuilt);
  const auto sdiff = summarize(diff);

  CheckReport rep;
  rep.name = "sum_rule";
  rep.lhs = sd.mean;
  rep.rhs = sr.mean;
  rep.tolerance = std::max(2e-3, 4.0 * sdiff.stderr_mean);
  rep.pass = std::abs(rep.lhs - rep.rhs) <= rep.tolerance;
  rep.metadata = run_meta(N, beta_max, replicas, seed);
  rep.metadata.emplace_back("grid_points", static_cast<std::uint64_t>(G));
  rep.metadata.emplace_back("combined_stderr", sdiff.stderr_mean);
  return rep;
}

CheckReport derivative_check(double beta, int N, std::size_t replicas, std::uint64_t seed,
                             double h) {
  if (!(h > 0.0) || !(beta >= h)) throw ParameterError("derivative_check: need beta >= h > 0");
  if (replicas < 2) throw ParameterError("derivative_check: need at least 2 replicas");
  const GremParams p = GremParams::rem(N);
  const double betas[] = {beta - h, beta + h, beta, 2.0 * beta};
  const auto table = replica_log_partitions(p, std::span<const double>(betas), replicas, seed);
  std::vector<double> fd(replicas), identity(replicas), diff(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    fd[r] = (table.at(r, 1) - table.at(r, 0)) / (2.0 * h * N);
    const double overlap = std::exp(table.at(r, 3) - 2.0 * table.at(r, 2));
    identity[r] = 0.5 * beta * (1.0 - overlap);
    diff[r] = identity[r] - fd[r];
  }
  const auto sdiff = summarize(diff);
  CheckReport rep;
  rep.name = "derivative";
  rep.lhs = summarize(identity).mean;
  rep.rhs = summarize(fd).mean;
  rep.tolerance = std::max(1e-4, 4.0 * sdiff.stderr_mean);
  rep.pass = std::abs(rep.lhs - rep.rhs) <= rep.tolerance;
  rep.metadata = run_meta(N, beta, replicas, seed);
  rep.metadata.emplace_back("h", h);
  rep.metadata.emplace_back("combined_stderr", sdiff.stderr_mean);
  return rep;
}

double concentration_bound(int N, double t) { return 2.0 * std::exp(-0.5 * N * t * t); }

CheckReport concentration_check(int N, double beta, double t, std::size_t replicas,
                                std::uint64_t seed) {
  if (replicas < 1000) throw ParameterError("concentration_check: need at least 1000 replicas");
  if (!(t >= 0.0)) throw ParameterError("concentration_check: t must be >= 0");
  const GremParams p = GremParams::rem(N);
  const double betas[] = {beta};
  const auto table = replica_log_partitions(p, std::span<const double>(betas), replicas, seed);
  auto values = table.column(0);
  for (double& v : values) v = pressure_from_log_partition(v, N, beta);
  const double pressure = summarize(values).mean;
  std::size_t hits = 0;
  for (double v : values) {
    if (std::abs(v - pressure) >= beta * t) ++hits;
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(replicas);
  const double bound = concentration_bound(N, t);
  const double q = std::min(bound, 1.0);
  const double slack = 3.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(replicas));

  CheckReport rep;
  rep.name = "concentration";
  rep.lhs = freq;
  rep.rhs = bound;
  rep.tolerance = slack;
  rep.pass = freq <= bound + slack;
  rep.metadata = run_meta(N, beta, replicas, seed);
  rep.metadata.emplace_back("t", t);
  rep.metadata.emplace_back("hits", static_cast<std::uint64_t>(hits));
  return rep;
}

std::vector<CheckReport> overlap_decay_check(const std::vector<double>& betas,
                                             const std::vector<int>& N_list, std::size_t replicas,
                                             std::uint64_t seed, double eps0) {
  if (N_list.empty()) throw ParameterError("overlap_decay_check: empty N list");
  if (!std::is_sorted(N_list.begin(), N_list.end())) {
    throw ParameterError("overlap_decay_check: N list must be increasing");
  }
  for (double b : betas) {
    if (!(b >= 0.0 && b < beta_c())) {
      throw ParameterError("overlap_decay_check: every beta must lie in [0, beta_c)");
    }
  }
  // One enumeration pass per size covers every beta and 2 beta.
  const std::size_t nb = betas.size();
  std::vector<double> all(betas);
  for (double b : betas) all.push_back(2.0 * b);
  std::vector<std::vector<double>> rates(nb, std::vector<double>(N_list.size()));
  std::vector<std::vector<double>> errors(nb, std::vector<double>(N_list.size()));
  for (std::size_t k = 0; k < N_list.size(); ++k) {
    const int N = N_list[k];
    const auto table = replica_log_partitions(GremParams::rem(N), all, replicas, seed);
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<double> overlap(replicas);
      for (std::size_t r = 0; r < replicas; ++r) {
        overlap[r] = betas[b] == 0.0 ? std::ldexp(1.0, -N)
                                     : std::exp(table.at(r, nb + b) - 2.0 * table.at(r, b));
      }
      const auto s = summarize(overlap);
      rates[b][k] = std::log(s.mean) / N;
      errors[b][k] = s.stderr_mean / (s.mean * N);
    }
  }

  std::vector<CheckReport> out;
  for (std::size_t b = 0; b < nb; ++b) {
    const double beta = betas[b];
    const auto& rate = rates[b];
    const auto& rate_err = errors[b];
    // The decay magnitude shrinks toward its limit as N grows; growth beyond
    // three combined standard errors breaks the trend.
    bool trend_ok = true;
    for (std::size_t k = 1; k < rate.size(); ++k) {
      const double noise = 3.0 * std::hypot(rate_err[k], rate_err[k - 1]);
      if (std::abs(rate[k]) > std::abs(rate[k - 1]) + noise) trend_ok = false;
    }
    CheckReport rep;
    rep.name = "overlap_decay";
    rep.lhs = rate.back();
    rep.rhs = -eps0;
    rep.tolerance = 0.0;
    rep.pass = rate.back() <= -eps0 && trend_ok;
    rep.metadata = run_meta(N_list.back(), beta, replicas, seed);
    rep.metadata.emplace_back("trend_ok", std::int64_t{trend_ok ? 1 : 0});
    for (std::size_t k = 0; k < N_list.size(); ++k) {
      rep.metadata.emplace_back("rate_N" + std::to_string(N_list[k]), rate[k]);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

CheckReport grem_lower_check(const GremParams& p, double beta, std::size_t replicas,
                             std::uint64_t seed) {
  const auto lhs = quenched_pressure(p, beta, replicas, seed);
  double rhs = 0.0;
  double var = lhs.std_error * lhs.std_error;
  for (int i = 0; i < p.levels(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double kappa = p.kappa()[idx];
    const double scaled_beta = std::sqrt(p.a()[idx] / kappa) * beta;
    const std::uint64_t level_seed = p.levels() == 1 ? seed : derive_seed(seed, 1000 + idx);
    const auto level =
        quenched_pressure(GremParams::rem(p.blocks()[idx]), scaled_beta, replicas, level_seed);
    rhs += kappa * level.mean;
    var += kappa * kappa * level.std_error * level.std_error;
  }
  CheckReport rep;
  rep.name = "grem_lower";
  rep.lhs = lhs.mean;
  rep.rhs = rhs;
  rep.tolerance = 4.0 * std::sqrt(var);
  rep.pass = rep.lhs >= rep.rhs - rep.tolerance;
  rep.metadata = run_meta(p.size(), beta, replicas, seed);
  rep.metadata.emplace_back("levels", std::int64_t{p.levels()});
  return rep;
}

CheckReport upper_bound_check(const GremParams& p, double beta, std::size_t replicas,
                              std::uint64_t seed) {
  const auto est = quenched_pressure(p, beta, replicas, seed);
  CheckReport rep;
  rep.name = "upper_bound";
  rep.lhs = est.mean;
  rep.rhs = q_grem(beta, p);
  rep.tolerance = 4.0 * est.std_error;
  rep.pass = rep.lhs <= rep.rhs + rep.tolerance;
  rep.metadata = run_meta(p.size(), beta, replicas, seed);
  rep.metadata.emplace_back("levels", std::int64_t{p.levels()});
  return rep;
}

GeneralHamiltonianSpec::GeneralHamiltonianSpec(std::size_t lattice_size,
                                               const std::vector<double>& deltas)
    : lattice_size_(lattice_size) {
  if (lattice_size < 1) throw ParameterError("GeneralHamiltonianSpec: empty lattice");
  if (deltas.empty()) throw ParameterError("GeneralHamiltonianSpec: no couplings");
  for (double d : deltas) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw ParameterError("GeneralHamiltonianSpec: couplings must be finite and >= 0");
    }
    groups_.push_back({d * d, 1.0});
  }
}

GeneralHamiltonianSpec::GeneralHamiltonianSpec(std::size_t lattice_size, std::vector<Group> groups)
    : lattice_size_(lattice_size), groups_(std::move(groups)) {
  if (lattice_size < 1) throw ParameterError("GeneralHamiltonianSpec: empty lattice");
  if (groups_.empty()) throw ParameterError("GeneralHamiltonianSpec: no couplings");
  for (const auto& g : groups_) {
    if (!(g.delta_squared >= 0.0) || !(g.multiplicity >= 1.0)) {
      throw ParameterError("GeneralHamiltonianSpec: invalid coupling group");
    }
  }
}

GeneralHamiltonianSpec GeneralHamiltonianSpec::rem(int N) {
  if (N < 1 || N > 1000) throw ParameterError("GeneralHamiltonianSpec::rem: N out of range");
  return GeneralHamiltonianSpec(static_cast<std::size_t>(N),
                                std::vector<Group>{{std::ldexp(static_cast<double>(N), -N),
                                                    std::ldexp(1.0, N)}});
}

double stability_constant(const GeneralHamiltonianSpec& spec) {
  CompensatedSum total;
  for (const auto& g : spec.groups()) total.add(g.multiplicity * g.delta_squared);
  return total.value() / static_cast<double>(spec.lattice_size());
}

double lipschitz_constant(double beta, double c, std::size_t lattice_size) {
  if (!(beta >= 0.0) || !(c >= 0.0) || lattice_size < 1) {
    throw ParameterError("lipschitz_constant: need beta >= 0, c >= 0, |Lambda| >= 1");
  }
  return beta * std::sqrt(c / (2.0 * static_cast<double>(lattice_size)));
}

double general_concentration_bound(double t, std::size_t lattice_size, double c, double beta) {
  return 2.0 * std::exp(-t * t * static_cast<double>(lattice_size) / (2.0 * c * beta * beta));
}

std::vector<double> induction_schedule(double beta0, double a, std::size_t steps) {
  if (!(a > 0.0 && a < 0.5)) throw ParameterError("induction_schedule: need 0 < a < 1/2");
  const double bc = beta_c();
  std::vector<double> out{beta0};
  for (std::size_t k = 0; k < steps; ++k) {
    const double b = out.back();
    const double gap = 1.0 - b / bc;
    out.push_back(b + a * bc * gap * gap);
  }
  return out;
}

CheckReport sample_inequalities_check(const GremParams& p, std::size_t samples,
                                      std::uint64_t seed) {
  std::size_t violations = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    CounterRng rng(derive_seed(seed, s));
    const auto d = sample_disorder(p, rng.next_u64());
    const double beta = rng.uniform(0.0, 3.0);
    const double m = 0.1 * static_cast<double>(1 + rng.next_u64() % 9);
    if (!entropy_positivity_check(d, beta, m)) ++violations;
    if (!holder_check(d, beta, m)) ++violations;
  }
  CheckReport rep;
  rep.name = "sample_inequalities";
  rep.lhs = static_cast<double>(violations);
  rep.rhs = 0.0;
  rep.tolerance = kInequalitySlack;
  rep.pass = violations == 0;
  rep.metadata = {{"N", std::int64_t{p.size()}},
                  {"samples", static_cast<std::uint64_t>(samples)},
                  {"seed", seed}};
  return rep;
}

}  // namespace remkit
