#ifndef PDOPRIOR_NUTS_HPP
#define PDOPRIOR_NUTS_HPP

#include <optional>
#include <vector>

#include "pdoprior/posterior.hpp"
#include "pdoprior/rng.hpp"

namespace pdoprior {

struct NutsConfig {
  int warmup = 200;
  int draws = 2000;
  double target_accept = 0.8;
  int max_depth = 10;
  double max_energy_error = 1000.0;
  // dual averaging
  double gamma = 0.05;
  double t0 = 10.0;
  double kappa = 0.75;
  std::optional<double> initial_step_size;

  void validate() const;
};

struct PosteriorChain {
  MatrixXd samples;  // draw x parameter
  int warmup = 0;
  int draws = 0;
  VectorXd log_density;
  VectorXd accept_stat;
  std::vector<int> tree_depth;
  std::vector<int> leapfrog_steps;
  std::vector<bool> divergent;
  double step_size = 0.0;
  int divergences = 0;
  VectorXd ess;
  std::vector<bool> ess_constant;

  double mean_accept_stat() const;
  double min_ess() const;
};

/// Dual-averaging step-size adaptation.
class DualAveraging {
public:
  DualAveraging(double initial_step, double target, double gamma, double t0, double kappa);
  void update(double accept_stat);
  double step() const noexcept { return step_; }
  double final_step() const noexcept;

private:
  double mu_;
  double target_;
  double gamma_;
  double t0_;
  double kappa_;
  double h_bar_ = 0.0;
  double log_step_bar_ = 0.0;
  double step_;
  int count_ = 0;
};

/**
 * Multinomial NUTS with identity mass, generalized U-turn criterion and
 * dual-averaging step size over the whole warmup. Throws if the initial point
 * has a non-finite log-density.
 */
PosteriorChain nuts_sample(const LogDensity& target, const NutsConfig& config, const RngSeed& seed,
                           const VectorXd& init);
PosteriorChain nuts_sample(const LogDensity& target, int warmup, int draws, const RngSeed& seed);

/// Step-size heuristic: doubles or halves until the one-step acceptance crosses 1/2.
double find_reasonable_step_size(const LogDensity& target, const VectorXd& x, Engine& engine);

}  // namespace pdoprior

#endif  // PDOPRIOR_NUTS_HPP
