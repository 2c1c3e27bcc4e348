#ifndef PDOPRIOR_LBFGS_HPP
#define PDOPRIOR_LBFGS_HPP

#include <functional>
#include <string>
#include <vector>

#include "pdoprior/posterior.hpp"

namespace pdoprior {

struct OptimizerConfig {
  int memory = 10;
  int max_iterations = 1000;
  double gradient_tolerance = 1e-8;  // on ||grad||_2
  double sufficient_decrease = 1e-4;
  double curvature = 0.9;
  int max_line_search = 40;

  void validate() const;
};

enum class OptimizerStatus { Converged, MaxIterations, LineSearchFailed };

std::string to_string(OptimizerStatus status);

struct OptimizerResult {
  VectorXd x;
  double value = 0.0;           // objective at x
  double gradient_norm = 0.0;
  double initial_gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  OptimizerStatus status = OptimizerStatus::MaxIterations;
  std::vector<double> history;  // objective after every accepted step, starting at the initial point
};

/// Objective returning f(x) and writing its gradient.
using Objective = std::function<double(const VectorXd& x, VectorXd& grad)>;

/// L-BFGS with two-loop recursion and a strong-Wolfe line search; minimizes f.
OptimizerResult minimize_lbfgs(const Objective& f, const VectorXd& x0, const OptimizerConfig& config = {});

/// MAP estimate: minimizes the negative log-density.
OptimizerResult map_lbfgs(const LogDensity& post, const OptimizerConfig& config, const VectorXd& init);

}  // namespace pdoprior

#endif  // PDOPRIOR_LBFGS_HPP
