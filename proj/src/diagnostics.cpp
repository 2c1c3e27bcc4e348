#include "pdoprior/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pdoprior {

EssResult ess(const VectorXd& chain) {
  const Index n = chain.size();
  if (n < 10) throw std::invalid_argument("ess: need at least 10 draws");
  const VectorXd c = chain.array() - chain.mean();
  const double gamma0 = c.squaredNorm() / static_cast<double>(n);
  if (!(gamma0 > 0.0)) return {0.0, true};

  auto rho = [&](Index lag) {
    if (lag >= n) return 0.0;
    const double g = c.head(n - lag).dot(c.tail(n - lag)) / static_cast<double>(n);
    return g / gamma0;
  };
  // Geyer initial positive sequence over pairs (rho_{2k}, rho_{2k+1}).
  double tau = -1.0;
  for (Index k = 0; 2 * k < n; ++k) {
    const double pair = rho(2 * k) + rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  const double value = static_cast<double>(n) / std::max(tau, 1e-300);
  return {std::min(value, static_cast<double>(n)), false};
}

std::pair<VectorXd, std::vector<bool>> ess_columns(const MatrixXd& samples) {
  VectorXd out(samples.cols());
  std::vector<bool> flags(static_cast<std::size_t>(samples.cols()));
  for (Index j = 0; j < samples.cols(); ++j) {
    const EssResult r = ess(samples.col(j));
    out[j] = r.value;
    flags[static_cast<std::size_t>(j)] = r.constant;
  }
  return {out, flags};
}

std::pair<double, double> hpd_interval(const VectorXd& samples, double mass) {
  if (!(mass > 0.0 && mass <= 1.0)) throw std::invalid_argument("hpd_interval: mass must lie in (0, 1]");
  const Index n = samples.size();
  if (n < 1) throw std::invalid_argument("hpd_interval: no draws");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const auto span = std::min<Index>(static_cast<Index>(std::floor(mass * static_cast<double>(n))), n - 1);
  Index best = 0;
  double width = x[static_cast<std::size_t>(span)] - x[0];
  for (Index i = 1; i + span < n; ++i) {
    const double w = x[static_cast<std::size_t>(i + span)] - x[static_cast<std::size_t>(i)];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {x[static_cast<std::size_t>(best)], x[static_cast<std::size_t>(best + span)]};
}

PosteriorSummary posterior_summary(const MatrixXd& samples, const PushForward& push_forward, double mass,
                                   const VectorXd* map_parameters) {
  if (samples.rows() < 1) throw std::invalid_argument("posterior_summary: empty chain");
  const Index draws = samples.rows();
  const VectorXd first = push_forward(samples.row(0).transpose());
  MatrixXd fields(draws, first.size());
  fields.row(0) = first.transpose();
  for (Index d = 1; d < draws; ++d) fields.row(d) = push_forward(samples.row(d).transpose()).transpose();

  PosteriorSummary s;
  s.mean = fields.colwise().mean().transpose();
  s.variance = (fields.rowwise() - s.mean.transpose()).array().square().colwise().mean().matrix().transpose();
  s.hpd_lower.resize(first.size());
  s.hpd_upper.resize(first.size());
  for (Index j = 0; j < first.size(); ++j) {
    const auto [lo, hi] = hpd_interval(fields.col(j), mass);
    s.hpd_lower[j] = lo;
    s.hpd_upper[j] = hi;
  }
  s.mean_pushforward = push_forward(samples.colwise().mean().transpose());
  if (map_parameters != nullptr) s.map = push_forward(*map_parameters);
  return s;
}

}  // namespace pdoprior
