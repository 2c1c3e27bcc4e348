#ifndef PDOPRIOR_DIAGNOSTICS_HPP
#define PDOPRIOR_DIAGNOSTICS_HPP

#include <functional>
#include <utility>

#include "pdoprior/nuts.hpp"

namespace pdoprior {

struct EssResult {
  double value = 0.0;
  bool constant = false;  // chain has zero variance; value is 0
};

/// N / (1 + 2 sum rho_k) with Geyer's initial positive sequence, clamped to [0, N].
EssResult ess(const VectorXd& chain);

/// Per-column ESS of a draw x parameter matrix.
std::pair<VectorXd, std::vector<bool>> ess_columns(const MatrixXd& samples);

/// Shortest window of floor(mass N) + 1 sorted draws; ties go to the lowest start. mass = 1 gives [min, max].
std::pair<double, double> hpd_interval(const VectorXd& samples, double mass = 0.95);

struct PosteriorSummary {
  VectorXd mean;
  VectorXd variance;  // population variance over draws
  VectorXd hpd_lower;
  VectorXd hpd_upper;
  VectorXd mean_pushforward;  // push-forward of the mean parameter vector
  VectorXd map;               // push-forward of the MAP parameters, empty when not supplied
};

using PushForward = std::function<VectorXd(const VectorXd&)>;

PosteriorSummary posterior_summary(const MatrixXd& samples, const PushForward& push_forward, double mass = 0.95,
                                   const VectorXd* map_parameters = nullptr);

}  // namespace pdoprior

#endif  // PDOPRIOR_DIAGNOSTICS_HPP
