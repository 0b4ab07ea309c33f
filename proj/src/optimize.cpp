#include "transim/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "transim/errors.hpp"

namespace transim {

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& o) {
  const std::size_t n = x0.size();
  if (n == 0) throw ArgumentError("nelder_mead: empty parameter vector");
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += o.initial_step;
  std::vector<double> fv(n + 1);
  MinimizeResult res;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);
  res.evaluations = static_cast<int>(n + 1);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  const auto point = [&](double coef, const std::vector<double>& worst, std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (worst[j] - centroid[j]);
  };
  while (res.evaluations < o.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    double spread = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j) spread = std::max(spread, std::abs(simplex[i][j] - simplex[best][j]));
    if (spread < o.x_tolerance && std::abs(fv[worst] - fv[best]) < o.f_tolerance) {
      res.converged = true;
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

    point(-1.0, simplex[worst], trial);
    const double fr = f(trial);
    ++res.evaluations;
    if (fr < fv[best]) {
      point(-2.0, simplex[worst], trial2);
      const double fe = f(trial2);
      ++res.evaluations;
      if (fe < fr) {
        simplex[worst] = trial2;
        fv[worst] = fe;
      } else {
        simplex[worst] = trial;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = trial;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    point(outside ? -0.5 : 0.5, simplex[worst], trial2);
    const double fc = f(trial2);
    ++res.evaluations;
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = trial2;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      fv[i] = f(simplex[i]);
      ++res.evaluations;
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  res.x = simplex[static_cast<std::size_t>(it - fv.begin())];
  res.value = *it;
  return res;
}

MinimizeResult nelder_mead_restarts(const Objective& f, const std::vector<double>& x0, int restarts, double spread,
                                    std::uint64_t seed, const NelderMeadOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  MinimizeResult best = nelder_mead(f, x0, options);
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> start = x0;
    for (auto& v : start) v += u(rng);
    MinimizeResult cur = nelder_mead(f, start, options);
    cur.evaluations += best.evaluations;
    if (cur.value < best.value) {
      best = std::move(cur);
    } else {
      best.evaluations = cur.evaluations;
    }
  }
  // Polish the winner once more; restarting the simplex escapes premature collapse.
  MinimizeResult polish = nelder_mead(f, best.x, {options.max_evaluations, options.x_tolerance, options.f_tolerance,
                                                  options.initial_step * 0.1});
  polish.evaluations += best.evaluations;
  return polish.value <= best.value ? polish : best;
}

ScalarExtremum golden_maximize(const std::function<double(double)>& f, double a, double b, double tol, int max_eval) {
  if (!(b > a)) throw ArgumentError("golden_maximize: empty interval");
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  int evals = 2;
  while (b - a > tol && evals < max_eval) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc > fd ? ScalarExtremum{c, fc, evals} : ScalarExtremum{d, fd, evals};
}

ScalarExtremum brent_minimize(const std::function<double(double)>& f, double a, double b, double tol, int max_eval) {
  if (!(b > a)) throw ArgumentError("brent_minimize: empty interval");
  const double cgold = 0.3819660112501051;
  double x = a + cgold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int evals = 1;
  while (evals < max_eval) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * 0.5 + 1e-15 * std::abs(x), tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
        e = d;
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x < m ? b : a) - x;
      d = cgold * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    ++evals;
    if (fu <= fx) {
      (u < x ? b : a) = x;
      v = w, fv = fw, w = x, fw = fx, x = u, fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w, fv = fw, w = u, fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u, fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

double bisect(const std::function<double(double)>& f, double a, double b, double tol, int max_iter) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream os;
    os << "no sign change on [" << a << ", " << b << "]: f = " << fa << ", " << fb;
    throw SearchError(os.str());
  }
  for (int i = 0; i < max_iter && std::abs(b - a) > tol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  // Linear interpolation inside the final bracket.
  return fa == fb ? 0.5 * (a + b) : a - fa * (b - a) / (f(b) - fa);
}

double parabolic_vertex(double x1, double f1, double x2, double f2, double x3, double f3) {
  const double num = (x2 - x1) * (x2 - x1) * (f2 - f3) - (x2 - x3) * (x2 - x3) * (f2 - f1);
  const double den = (x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1);
  if (den == 0.0) return x2;
  const double x = x2 - 0.5 * num / den;
  return std::clamp(x, std::min(x1, x3), std::max(x1, x3));
}

}  // namespace transim
