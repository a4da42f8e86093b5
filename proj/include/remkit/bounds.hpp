#pragma once

#include <string>
#include <vector>

#include "remkit/model.hpp"

namespace remkit {

// 2 sqrt(ln 2), the REM critical inverse temperature.
double beta_c();

// Ordered variational parameters 0 < m_1 <= ... <= m_n <= 1. The closed end
// m_i = 1 is admitted: the infimum over m_i < 1 is attained there as a limit.
class VariationalPoint {
 public:
  explicit VariationalPoint(std::vector<double> m);

  std::size_t size() const noexcept { return m_.size(); }
  double operator[](std::size_t i) const noexcept { return m_[i]; }
  const std::vector<double>& values() const noexcept { return m_; }

  static bool feasible(const std::vector<double>& m) noexcept;

 private:
  std::vector<double> m_;
};

struct CriticalTemps {
  double beta_c = 0.0;
  std::vector<double> beta_star;  // beta_c * sqrt(kappa_i / a_i)
};

CriticalTemps critical_temperatures(const GremParams& p);

// m beta^2 / 4 + ln 2 / m.
double rem_objective(double m, double beta);

// Piecewise REM bound: ln 2 + beta^2/4 below beta_c, beta sqrt(ln 2) above.
double q_rem(double beta);

// sum_i [kappa_i ln 2 / m_i + beta^2 m_i a_i / 4].
double grem_objective(const VariationalPoint& m, double beta, const GremParams& p);

struct OptimizeResult {
  VariationalPoint point;
  double value = 0.0;
  bool closed_form = false;
  int iterations = 0;
  std::string warning;
};

// Minimizer of grem_objective. Nondegenerate parameters use the closed form
// m_i = min(1, beta_i* / beta); degenerate ones fall back to
// numeric_optimize and set a warning, since the minimizer need not be unique.
OptimizeResult optimize(double beta, const GremParams& p);

struct NumericOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  double lower_bound = 1e-6;
};

// Projected Newton descent over {lower_bound <= m_1 <= ... <= m_n <= 1}.
// The projection is weighted isotonic regression (pool adjacent violators)
// followed by clipping to the box; steps are backtracked on the objective.
OptimizeResult numeric_optimize(double beta, const GremParams& p, const NumericOptions& opts = {});

// Weighted least-squares projection onto nondecreasing sequences.
std::vector<double> isotonic_regression(const std::vector<double>& y, const std::vector<double>& w);

// Piecewise closed form Q^(n)(beta; a, kappa). Throws DegenerateError unless
// p.nondegenerate().
double q_grem(double beta, const GremParams& p);

// sum_i kappa_i q_rem(sqrt(a_i / kappa_i) beta).
double grem_decomposition(double beta, const GremParams& p);

}  // namespace remkit
