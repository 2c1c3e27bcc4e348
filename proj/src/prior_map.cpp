#include "pdoprior/prior_map.hpp"

#include <cmath>
#include <stdexcept>

namespace pdoprior {

LinearPriorMap::LinearPriorMap(MatrixXd a) : a_(std::make_shared<const MatrixXd>(std::move(a))) {}

HierarchicalPriorMap::HierarchicalPriorMap(HierarchicalSpec spec, bool normalize)
    : spec_(std::move(spec)), normalize_(normalize) {
  if (spec_.grid.dim() != 2 || spec_.band.dim() != 2) throw std::invalid_argument("HierarchicalPriorMap: needs 2D");
  if (!(spec_.a1 > 0.0) || !(spec_.a2 > 0.0)) throw std::invalid_argument("HierarchicalPriorMap: a1 and a2 must be positive");
  basis_ = std::make_shared<const MatrixXd>(real_basis_matrix(spec_.band, spec_.grid));
  h_ = hyper_weights(spec_);
  eta2_.resize(spec_.band.size());
  for (Index j = 0; j < spec_.band.size(); ++j) eta2_[j] = spec_.band.squared_norm(j);
}

VectorXd HierarchicalPriorMap::sigma_field(const VectorXd& s1) const {
  if (s1.size() != block_size()) throw std::invalid_argument("HierarchicalPriorMap: s1 has the wrong length");
  return *basis_ * h_.cwiseProduct(s1);
}

MatrixXd HierarchicalPriorMap::kernel(const VectorXd& lambda) const {
  const Index n = lambda.size();
  MatrixXd t(n, block_size());
  for (Index p = 0; p < block_size(); ++p) t.col(p) = (lambda.array() + eta2_[p]).inverse().matrix();
  return t;
}

VectorXd HierarchicalPriorMap::normalization(const VectorXd& sigma) const {
  VectorXd lambda = ((spec_.a3 + sigma.array()) * std::log(10.0)).exp().matrix();
  if (!normalize_) return VectorXd::Ones(sigma.size());
  return kernel(lambda).rowwise().norm();
}

HierarchicalPriorMap::Evaluation HierarchicalPriorMap::evaluate(const VectorXd& s) const {
  if (s.size() != parameter_count()) throw std::invalid_argument("HierarchicalPriorMap: parameter vector has the wrong length");
  Evaluation ev;
  ev.sigma = sigma_field(s.head(block_size()));
  ev.lambda = ((spec_.a3 + ev.sigma.array()) * std::log(10.0)).exp().matrix();
  // one pass over the columns: c^2 = sum_p t^2 and g = sum_p t B s2
  const Index n = ev.lambda.size();
  Eigen::ArrayXd c2 = Eigen::ArrayXd::Zero(n), g = Eigen::ArrayXd::Zero(n);
  const VectorXd s2 = s.tail(block_size());
  for (Index p = 0; p < block_size(); ++p) {
    const Eigen::ArrayXd t = (ev.lambda.array() + eta2_[p]).inverse();
    c2 += t.square();
    g += t * basis_->col(p).array() * s2[p];
  }
  ev.c = normalize_ ? VectorXd(c2.sqrt().matrix()) : VectorXd::Ones(n);
  ev.xi = (g / ev.c.array()).matrix();
  return ev;
}

VectorXd HierarchicalPriorMap::pullback(const VectorXd& s, const VectorXd& v) const {
  if (s.size() != parameter_count()) throw std::invalid_argument("HierarchicalPriorMap: parameter vector has the wrong length");
  if (v.size() != field_size()) throw std::invalid_argument("HierarchicalPriorMap: cotangent has the wrong length");
  const Index p = block_size();
  const VectorXd sigma = sigma_field(s.head(p));
  const VectorXd lambda = ((spec_.a3 + sigma.array()) * std::log(10.0)).exp().matrix();
  const MatrixXd t = kernel(lambda);
  const MatrixXd tb = (t.array() * basis_->array()).matrix();
  const VectorXd s2 = s.tail(p);
  const VectorXd g = tb * s2;
  // sum_p t^2 B s2
  const VectorXd g2 = (t.array() * tb.array()).matrix() * s2;

  VectorXd dxi_dlambda;
  VectorXd c;
  if (normalize_) {
    c = t.rowwise().norm();
    const VectorXd t3 = t.array().cube().rowwise().sum().matrix();
    dxi_dlambda = (-g2.array() / c.array() + g.array() * t3.array() / c.array().cube()).matrix();
  } else {
    c = VectorXd::Ones(sigma.size());
    dxi_dlambda = -g2;
  }
  const VectorXd u = v.cwiseProduct(dxi_dlambda).cwiseProduct(lambda) * std::log(10.0);

  VectorXd out(parameter_count());
  out.head(p) = h_.cwiseProduct(basis_->transpose() * u);
  out.tail(p) = tb.transpose() * v.cwiseQuotient(c);
  return out;
}

LinearPriorMap HierarchicalPriorMap::with_fixed_sigma(const VectorXd& s1) const {
  const VectorXd sigma = sigma_field(s1);
  const VectorXd lambda = ((spec_.a3 + sigma.array()) * std::log(10.0)).exp().matrix();
  const MatrixXd t = kernel(lambda);
  const VectorXd c = normalize_ ? VectorXd(t.rowwise().norm()) : VectorXd::Ones(sigma.size());
  MatrixXd a = (t.array() * basis_->array()).matrix();
  a = c.cwiseInverse().asDiagonal() * a;
  return LinearPriorMap(std::move(a));
}

}  // namespace pdoprior
