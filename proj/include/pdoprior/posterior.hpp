#ifndef PDOPRIOR_POSTERIOR_HPP
#define PDOPRIOR_POSTERIOR_HPP

#include <memory>
#include <optional>

#include "pdoprior/prior_map.hpp"
#include "pdoprior/radon.hpp"

namespace pdoprior {

/// Differentiable log-density on R^n.
class LogDensity {
public:
  virtual ~LogDensity() = default;
  virtual Index dimension() const = 0;
  virtual double log_density(const VectorXd& s) const = 0;
  /// Returns log_density(s) and writes its gradient.
  virtual double log_density_gradient(const VectorXd& s, VectorXd& grad) const = 0;
};

/**
 * log p(s | y) = -||y - G(L(F(s)))||^2 / (2 sigma_noise^2) - ||s||^2 / 2,
 * with F the prior map, L an optional level-set transform and G a sparse
 * linear observation operator.
 */
class WhitenedPosterior : public LogDensity {
public:
  WhitenedPosterior(std::shared_ptr<const PriorMap> prior, SparseMatrix observation, VectorXd data, double sigma_noise,
                    std::optional<LevelSetSpec> level_set = std::nullopt);

  Index dimension() const override { return prior_->parameter_count(); }
  double log_density(const VectorXd& s) const override;
  double log_density_gradient(const VectorXd& s, VectorXd& grad) const override;

  /// Field pushed forward through the prior map and level-set transform.
  VectorXd field(const VectorXd& s) const;
  double misfit(const VectorXd& s) const;

  const PriorMap& prior() const noexcept { return *prior_; }
  std::shared_ptr<const PriorMap> prior_ptr() const noexcept { return prior_; }
  const SparseMatrix& observation() const noexcept { return g_; }
  const VectorXd& data() const noexcept { return y_; }
  double sigma_noise() const noexcept { return sigma_; }
  const std::optional<LevelSetSpec>& level_set() const noexcept { return level_set_; }

private:
  std::shared_ptr<const PriorMap> prior_;
  SparseMatrix g_;
  VectorXd y_;
  double sigma_;
  std::optional<LevelSetSpec> level_set_;
};

double log_posterior(const WhitenedPosterior& post, const VectorXd& s);
VectorXd gradient(const WhitenedPosterior& post, const VectorXd& s);

/**
 * Closed form for a linear prior map without level set:
 * log p = -s^T H s / 2 + b^T s - y^T y / (2 sigma^2),
 * H = I + (G A)^T (G A) / sigma^2, b = (G A)^T y / sigma^2.
 */
class LinearGaussianPosterior {
public:
  explicit LinearGaussianPosterior(const WhitenedPosterior& post);

  const MatrixXd& precision() const noexcept { return h_; }
  const VectorXd& linear_term() const noexcept { return b_; }
  const VectorXd& mode() const noexcept { return mode_; }
  MatrixXd covariance() const;
  double log_density(const VectorXd& s) const;
  VectorXd gradient(const VectorXd& s) const { return b_ - h_ * s; }

private:
  MatrixXd h_;
  VectorXd b_;
  VectorXd mode_;
  double c_ = 0.0;
};

/// N(0, I) in n dimensions.
class StandardNormalDensity : public LogDensity {
public:
  explicit StandardNormalDensity(Index n) : n_(n) {}
  Index dimension() const override { return n_; }
  double log_density(const VectorXd& s) const override { return -0.5 * s.squaredNorm(); }
  double log_density_gradient(const VectorXd& s, VectorXd& grad) const override {
    grad = -s;
    return -0.5 * s.squaredNorm();
  }

private:
  Index n_;
};

/// N(mean, cov) with a dense covariance.
class GaussianDensity : public LogDensity {
public:
  GaussianDensity(VectorXd mean, const MatrixXd& covariance);
  Index dimension() const override { return mean_.size(); }
  double log_density(const VectorXd& s) const override;
  double log_density_gradient(const VectorXd& s, VectorXd& grad) const override;

private:
  VectorXd mean_;
  MatrixXd precision_;
};

}  // namespace pdoprior

#endif  // PDOPRIOR_POSTERIOR_HPP
