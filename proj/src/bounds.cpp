#include "remkit/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "remkit/error.hpp"

namespace remkit {

namespace {

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be finite and >= 0");
}

double objective_raw(const std::vector<double>& m, double beta, const GremParams& p) {
  double value = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    value += p.kappa()[i] * std::numbers::ln2 / m[i] + 0.25 * beta * beta * m[i] * p.a()[i];
  }
  return value;
}

std::vector<double> project_feasible(const std::vector<double>& x, const std::vector<double>& w,
                                     double lo) {
  auto y = isotonic_regression(x, w);
  for (double& v : y) v = std::clamp(v, lo, 1.0);
  return y;
}

}  // namespace

double beta_c() { return 2.0 * std::sqrt(std::numbers::ln2); }

VariationalPoint::VariationalPoint(std::vector<double> m) : m_(std::move(m)) {
  if (!feasible(m_)) {
    throw ParameterError("VariationalPoint: need 0 < m_1 <= ... <= m_n <= 1");
  }
}

bool VariationalPoint::feasible(const std::vector<double>& m) noexcept {
  if (m.empty()) return false;
  double prev = 0.0;
  for (double v : m) {
    if (!(v > 0.0) || v > 1.0 || v < prev) return false;
    prev = v;
  }
  return true;
}

CriticalTemps critical_temperatures(const GremParams& p) {
  CriticalTemps t;
  t.beta_c = beta_c();
  t.beta_star.resize(static_cast<std::size_t>(p.levels()));
  for (std::size_t i = 0; i < t.beta_star.size(); ++i) {
    t.beta_star[i] = t.beta_c * std::sqrt(p.kappa()[i] / p.a()[i]);
  }
  return t;
}

double rem_objective(double m, double beta) {
  if (!(m > 0.0 && m <= 1.0)) throw ParameterError("rem_objective: m must be in (0, 1]");
  return 0.25 * m * beta * beta + std::numbers::ln2 / m;
}

double q_rem(double beta) {
  check_beta(beta);
  if (beta < beta_c()) return 0.25 * beta * beta + std::numbers::ln2;
  return beta * std::sqrt(std::numbers::ln2);
}

double grem_objective(const VariationalPoint& m, double beta, const GremParams& p) {
  if (m.size() != static_cast<std::size_t>(p.levels())) {
    throw ParameterError("grem_objective: m has the wrong number of levels");
  }
  return objective_raw(m.values(), beta, p);
}

std::vector<double> isotonic_regression(const std::vector<double>& y, const std::vector<double>& w) {
  if (y.size() != w.size()) throw ParameterError("isotonic_regression: size mismatch");
  struct Block {
    double value, weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double weight = prev.weight + top.weight;
      prev.value = (prev.value * prev.weight + top.value * top.weight) / weight;
      prev.weight = weight;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.value);
  return out;
}

OptimizeResult numeric_optimize(double beta, const GremParams& p, const NumericOptions& opts) {
  check_beta(beta);
  const std::size_t n = static_cast<std::size_t>(p.levels());
  const double ln2 = std::numbers::ln2;
  std::vector<double> m(n, 0.5);
  double value = objective_raw(m, beta, p);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    std::vector<double> grad(n), hess(n), target(n);
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = -p.kappa()[i] * ln2 / (m[i] * m[i]) + 0.25 * beta * beta * p.a()[i];
      hess[i] = 2.0 * p.kappa()[i] * ln2 / (m[i] * m[i] * m[i]);
      target[i] = m[i] - grad[i] / hess[i];
    }
    const auto proposal = project_feasible(target, hess, opts.lower_bound);
    double step = 1.0;
    std::vector<double> next(n);
    double next_value = value;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      for (std::size_t i = 0; i < n; ++i) next[i] = m[i] + step * (proposal[i] - m[i]);
      next_value = objective_raw(next, beta, p);
      if (next_value <= value) break;
      step *= 0.5;
    }
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(next[i] - m[i]));
    if (next_value <= value) {
      m = next;
      value = next_value;
    }
    if (moved < opts.tolerance) break;
  }
  OptimizeResult r{VariationalPoint(m), value, false, it + 1, {}};
  return r;
}

OptimizeResult optimize(double beta, const GremParams& p) {
  check_beta(beta);
  if (!p.nondegenerate()) {
    auto r = numeric_optimize(beta, p);
    r.warning =
        "kappa_i/a_i not strictly increasing: closed form disabled, numeric minimizer may not be "
        "unique";
    return r;
  }
  const auto temps = critical_temperatures(p);
  std::vector<double> m(temps.beta_star.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = beta > 0.0 ? std::min(1.0, temps.beta_star[i] / beta) : 1.0;
  }
  VariationalPoint point(std::move(m));
  const double value = grem_objective(point, beta, p);
  return {std::move(point), value, true, 0, {}};
}

double q_grem(double beta, const GremParams& p) {
  check_beta(beta);
  if (!p.nondegenerate()) throw DegenerateError("q_grem: kappa_i/a_i must be strictly increasing");
  const auto temps = critical_temperatures(p);
  double value = 0.0;
  for (std::size_t k = 0; k < temps.beta_star.size(); ++k) {
    const double bs = temps.beta_star[k];
    const double ak = p.a()[k];
    // a_k (beta_k*)^2 / 4 = kappa_k ln 2
    value += beta >= bs ? 0.5 * ak * beta * bs
                        : 0.25 * ak * beta * beta + p.kappa()[k] * std::numbers::ln2;
  }
  return value;
}

double grem_decomposition(double beta, const GremParams& p) {
  check_beta(beta);
  double value = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(p.levels()); ++i) {
    value += p.kappa()[i] * q_rem(std::sqrt(p.a()[i] / p.kappa()[i]) * beta);
  }
  return value;
}

}  // namespace remkit
