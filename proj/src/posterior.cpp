#include "pdoprior/posterior.hpp"

#include <cmath>
#include <stdexcept>

namespace pdoprior {

WhitenedPosterior::WhitenedPosterior(std::shared_ptr<const PriorMap> prior, SparseMatrix observation, VectorXd data,
                                     double sigma_noise, std::optional<LevelSetSpec> level_set)
    : prior_(std::move(prior)), g_(std::move(observation)), y_(std::move(data)), sigma_(sigma_noise),
      level_set_(level_set) {
  if (!prior_) throw std::invalid_argument("WhitenedPosterior: missing prior map");
  if (g_.cols() != prior_->field_size()) throw std::invalid_argument("WhitenedPosterior: observation columns do not match field size");
  if (g_.rows() != y_.size()) throw std::invalid_argument("WhitenedPosterior: data length does not match observation rows");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw std::invalid_argument("WhitenedPosterior: sigma_noise must be positive");
  if (level_set_ && !(level_set_->sharpness > 0.0)) throw std::invalid_argument("WhitenedPosterior: level-set sharpness must be positive");
}

VectorXd WhitenedPosterior::field(const VectorXd& s) const {
  VectorXd xi = prior_->apply(s);
  if (level_set_) {
    for (Index i = 0; i < xi.size(); ++i) xi[i] = level_set_value(xi[i], level_set_->sharpness);
  }
  return xi;
}

double WhitenedPosterior::misfit(const VectorXd& s) const {
  const VectorXd r = y_ - g_ * field(s);
  return 0.5 * r.squaredNorm() / (sigma_ * sigma_);
}

double WhitenedPosterior::log_density(const VectorXd& s) const {
  if (s.size() != dimension()) throw std::invalid_argument("log_density: parameter vector has the wrong length");
  const double v = -misfit(s) - 0.5 * s.squaredNorm();
  if (!std::isfinite(v)) throw std::domain_error("log_density: non-finite forward output");
  return v;
}

double WhitenedPosterior::log_density_gradient(const VectorXd& s, VectorXd& grad) const {
  if (s.size() != dimension()) throw std::invalid_argument("log_density_gradient: parameter vector has the wrong length");
  const VectorXd xi = prior_->apply(s);
  VectorXd z = xi;
  VectorXd dz;
  if (level_set_) {
    dz.resize(xi.size());
    for (Index i = 0; i < xi.size(); ++i) {
      z[i] = level_set_value(xi[i], level_set_->sharpness);
      dz[i] = level_set_derivative(xi[i], level_set_->sharpness);
    }
  }
  const VectorXd r = y_ - g_ * z;
  const double inv_var = 1.0 / (sigma_ * sigma_);
  VectorXd cot = (g_.transpose() * r) * inv_var;
  if (level_set_) cot = cot.cwiseProduct(dz);
  grad = prior_->pullback(s, cot) - s;
  const double v = -0.5 * r.squaredNorm() * inv_var - 0.5 * s.squaredNorm();
  if (!std::isfinite(v)) throw std::domain_error("log_density_gradient: non-finite forward output");
  return v;
}

double log_posterior(const WhitenedPosterior& post, const VectorXd& s) { return post.log_density(s); }

VectorXd gradient(const WhitenedPosterior& post, const VectorXd& s) {
  VectorXd g;
  post.log_density_gradient(s, g);
  return g;
}

LinearGaussianPosterior::LinearGaussianPosterior(const WhitenedPosterior& post) {
  const auto* lin = dynamic_cast<const LinearPriorMap*>(&post.prior());
  if (lin == nullptr || post.level_set()) {
    throw std::invalid_argument("LinearGaussianPosterior: needs a linear prior map without level set");
  }
  const MatrixXd ga = post.observation() * lin->matrix();
  const double inv_var = 1.0 / (post.sigma_noise() * post.sigma_noise());
  h_ = MatrixXd::Identity(ga.cols(), ga.cols());
  h_.noalias() += ga.transpose() * ga * inv_var;
  b_ = ga.transpose() * post.data() * inv_var;
  mode_ = h_.llt().solve(b_);
  c_ = -0.5 * post.data().squaredNorm() * inv_var;
}

MatrixXd LinearGaussianPosterior::covariance() const {
  return h_.llt().solve(MatrixXd::Identity(h_.rows(), h_.cols()));
}

double LinearGaussianPosterior::log_density(const VectorXd& s) const {
  return -0.5 * s.dot(h_ * s) + b_.dot(s) + c_;
}

GaussianDensity::GaussianDensity(VectorXd mean, const MatrixXd& covariance) : mean_(std::move(mean)) {
  if (covariance.rows() != mean_.size() || covariance.cols() != mean_.size()) {
    throw std::invalid_argument("GaussianDensity: covariance shape does not match mean");
  }
  Eigen::LLT<MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("GaussianDensity: covariance is not positive definite");
  precision_ = llt.solve(MatrixXd::Identity(mean_.size(), mean_.size()));
}

double GaussianDensity::log_density(const VectorXd& s) const {
  const VectorXd d = s - mean_;
  return -0.5 * d.dot(precision_ * d);
}

double GaussianDensity::log_density_gradient(const VectorXd& s, VectorXd& grad) const {
  const VectorXd d = s - mean_;
  grad = -(precision_ * d);
  return 0.5 * d.dot(grad);
}

}  // namespace pdoprior
