#include "pdoprior/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace pdoprior {

void OptimizerConfig::validate() const {
  if (memory < 1) throw std::invalid_argument("OptimizerConfig: memory must be at least 1");
  if (max_iterations < 0) throw std::invalid_argument("OptimizerConfig: max_iterations must be non-negative");
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("OptimizerConfig: gradient_tolerance must be positive");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < curvature && curvature < 1.0)) {
    throw std::invalid_argument("OptimizerConfig: need 0 < sufficient_decrease < curvature < 1");
  }
  if (max_line_search < 1) throw std::invalid_argument("OptimizerConfig: max_line_search must be positive");
}

std::string to_string(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::Converged: return "converged";
    case OptimizerStatus::MaxIterations: return "max_iterations";
    case OptimizerStatus::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

namespace {

constexpr double kFlatTolerance = 1e-12;

struct Trial {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
  VectorXd x;
  VectorXd g;
};

class LineSearch {
public:
  LineSearch(const Objective& f, const OptimizerConfig& cfg, const VectorXd& x0, double f0, const VectorXd& dir,
             double d0, int& evals)
      : f_(f), cfg_(cfg), x0_(x0), f0_(f0), dir_(dir), d0_(d0), evals_(evals) {}

  // Strong-Wolfe search; on success `out` holds the accepted point.
  bool run(double a_init, Trial& out) {
    Trial prev{0.0, f0_, d0_, x0_, {}};
    double a = a_init;
    for (int i = 0; i < cfg_.max_line_search; ++i) {
      Trial cur = eval(a);
      if (!std::isfinite(cur.f)) {
        a = 0.5 * (prev.a + a);
        continue;
      }
      if (flat(cur)) {
        if (curvature_ok(cur)) {
          out = std::move(cur);
          return true;
        }
        if (cur.d > 0.0) return zoom(prev, cur, out);
        prev = std::move(cur);
        a *= 2.0;
        continue;
      }
      if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur, out);
      if (curvature_ok(cur)) {
        out = std::move(cur);
        return true;
      }
      if (cur.d >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      a *= 2.0;
    }
    return false;
  }

private:
  Trial eval(double a) {
    Trial t;
    t.a = a;
    t.x = x0_ + a * dir_;
    t.f = f_(t.x, t.g);
    ++evals_;
    t.d = std::isfinite(t.f) ? t.g.dot(dir_) : std::numeric_limits<double>::quiet_NaN();
    return t;
  }

  bool curvature_ok(const Trial& t) const { return std::abs(t.d) <= -cfg_.curvature * d0_; }

  // Objective change below rounding: only the directional derivative is informative
  // (approximate Wolfe conditions of Hager and Zhang).
  bool flat(const Trial& t) const {
    return std::isfinite(t.f) && std::abs(t.f - f0_) <= kFlatTolerance * std::max(1.0, std::abs(f0_));
  }

  // Sufficient decrease; falls back to plain non-increase once the Armijo margin is below rounding.
  bool armijo(const Trial& t) const {
    const double margin = cfg_.sufficient_decrease * t.a * d0_;
    const double noise = 1e-14 * std::max(1.0, std::abs(f0_));
    if (-margin < noise) return t.f <= f0_;
    return t.f <= f0_ + margin;
  }

  bool zoom(Trial lo, Trial hi, Trial& out) {
    for (int i = 0; i < cfg_.max_line_search; ++i) {
      double a = cubic_min(lo, hi);
      const double left = std::min(lo.a, hi.a), right = std::max(lo.a, hi.a);
      const double width = right - left;
      if (!std::isfinite(a) || a <= left + 0.1 * width || a >= right - 0.1 * width) a = 0.5 * (lo.a + hi.a);
      if (width <= 1e-16 * std::max(1.0, right)) break;
      Trial cur = eval(a);
      if (flat(cur)) {
        if (curvature_ok(cur)) {
          out = std::move(cur);
          return true;
        }
        if (cur.d > 0.0) hi = std::move(cur);
        else lo = std::move(cur);
        continue;
      }
      if (!std::isfinite(cur.f) || !armijo(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (curvature_ok(cur)) {
          out = std::move(cur);
          return true;
        }
        if (cur.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    // Accept the best decreasing point found, without the curvature condition.
    if (lo.a > 0.0 && lo.f < f0_) {
      out = std::move(lo);
      return true;
    }
    return false;
  }

  static double cubic_min(const Trial& p, const Trial& q) {
    const double d1 = p.d + q.d - 3.0 * (p.f - q.f) / (p.a - q.a);
    const double disc = d1 * d1 - p.d * q.d;
    if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double sgn = q.a > p.a ? 1.0 : -1.0;
    const double d2 = sgn * std::sqrt(disc);
    return q.a - (q.a - p.a) * (q.d + d2 - d1) / (q.d - p.d + 2.0 * d2);
  }

  const Objective& f_;
  const OptimizerConfig& cfg_;
  const VectorXd& x0_;
  double f0_;
  const VectorXd& dir_;
  double d0_;
  int& evals_;
};

}  // namespace

OptimizerResult minimize_lbfgs(const Objective& f, const VectorXd& x0, const OptimizerConfig& config) {
  config.validate();
  OptimizerResult res;
  res.x = x0;
  VectorXd g;
  res.value = f(res.x, g);
  res.evaluations = 1;
  if (!std::isfinite(res.value)) throw std::domain_error("minimize_lbfgs: objective is not finite at the initial point");
  res.gradient_norm = res.initial_gradient_norm = g.norm();
  res.history.push_back(res.value);
  if (res.gradient_norm <= config.gradient_tolerance) {
    res.status = OptimizerStatus::Converged;
    return res;
  }

  std::deque<VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> alpha(static_cast<std::size_t>(config.memory));

  for (int it = 0; it < config.max_iterations; ++it) {
    VectorXd d = -g;
    const std::size_t m = s_hist.size();
    for (std::size_t k = m; k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(d);
      d -= alpha[k] * y_hist[k];
    }
    if (m > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += (alpha[k] - beta) * s_hist[k];
    }
    double d0 = g.dot(d);
    if (!(d0 < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      d0 = -g.squaredNorm();
    }
    const double a_init = m == 0 ? std::min(1.0, 1.0 / std::sqrt(-d0)) : 1.0;

    Trial next;
    LineSearch ls(f, config, res.x, res.value, d, d0, res.evaluations);
    if (!ls.run(a_init, next)) {
      res.status = OptimizerStatus::LineSearchFailed;
      res.iterations = it;
      return res;
    }
    VectorXd s = next.x - res.x;
    VectorXd y = next.g - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == config.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    res.x = std::move(next.x);
    res.value = next.f;
    g = std::move(next.g);
    res.gradient_norm = g.norm();
    res.history.push_back(res.value);
    res.iterations = it + 1;
    if (res.gradient_norm <= config.gradient_tolerance) {
      res.status = OptimizerStatus::Converged;
      return res;
    }
  }
  res.status = OptimizerStatus::MaxIterations;
  return res;
}

OptimizerResult map_lbfgs(const LogDensity& post, const OptimizerConfig& config, const VectorXd& init) {
  if (init.size() != post.dimension()) throw std::invalid_argument("map_lbfgs: initial point has the wrong length");
  const Objective neg = [&post](const VectorXd& x, VectorXd& grad) {
    try {
      const double v = post.log_density_gradient(x, grad);
      grad = -grad;
      return -v;
    } catch (const std::domain_error&) {
      grad = VectorXd::Zero(x.size());
      return std::numeric_limits<double>::infinity();
    }
  };
  return minimize_lbfgs(neg, init, config);
}

}  // namespace pdoprior
