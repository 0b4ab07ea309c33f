#pragma once

// Small derivative-free optimizers and scalar root/extremum finders.

#include <cstdint>
#include <functional>
#include <vector>

namespace transim {

struct NelderMeadOptions {
  int max_evaluations = 4000;
  double x_tolerance = 1e-9;
  double f_tolerance = 1e-13;
  double initial_step = 0.1;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {});

/// Best of nelder_mead from x0 and `restarts` points drawn uniformly in x0 +- spread (seeded).
MinimizeResult nelder_mead_restarts(const Objective& f, const std::vector<double>& x0, int restarts, double spread,
                                    std::uint64_t seed, const NelderMeadOptions& options = {});

struct ScalarExtremum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section maximization of a unimodal f on [a, b].
ScalarExtremum golden_maximize(const std::function<double(double)>& f, double a, double b, double x_tolerance,
                               int max_evaluations = 200);

/// Brent minimization on [a, b].
ScalarExtremum brent_minimize(const std::function<double(double)>& f, double a, double b, double x_tolerance,
                              int max_evaluations = 200);

/// Root of f on [a, b] by bisection; f(a) and f(b) must differ in sign (SearchError otherwise).
double bisect(const std::function<double(double)>& f, double a, double b, double x_tolerance, int max_iterations = 200);

/// Vertex abscissa of the parabola through three points (x1 < x2 < x3); falls back to x2 if degenerate.
double parabolic_vertex(double x1, double f1, double x2, double f2, double x3, double f3);

}  // namespace transim
