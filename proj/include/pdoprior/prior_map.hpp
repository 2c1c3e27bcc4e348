#ifndef PDOPRIOR_PRIOR_MAP_HPP
#define PDOPRIOR_PRIOR_MAP_HPP

#include <memory>

#include "pdoprior/prior.hpp"

namespace pdoprior {

/// Map from whitened coordinates s to a field on the grid, with its vector-Jacobian product.
class PriorMap {
public:
  virtual ~PriorMap() = default;
  virtual Index parameter_count() const = 0;
  virtual Index field_size() const = 0;
  virtual VectorXd apply(const VectorXd& s) const = 0;
  /// J(s)^T v.
  virtual VectorXd pullback(const VectorXd& s, const VectorXd& v) const = 0;
  virtual bool is_linear() const noexcept { return false; }
};

/// xi = A s.
class LinearPriorMap final : public PriorMap {
public:
  explicit LinearPriorMap(MatrixXd a);

  Index parameter_count() const override { return a_->cols(); }
  Index field_size() const override { return a_->rows(); }
  VectorXd apply(const VectorXd& s) const override { return *a_ * s; }
  VectorXd pullback(const VectorXd&, const VectorXd& v) const override { return a_->transpose() * v; }
  bool is_linear() const noexcept override { return true; }

  const MatrixXd& matrix() const noexcept { return *a_; }

private:
  std::shared_ptr<const MatrixXd> a_;
};

/**
 * Hierarchical map [s1; s2] -> xi: sigma = B (h o s1), lambda = 10^{a3 + sigma},
 * t_ip = 1 / (lambda_i + |eta_p|^2), xi_i = sum_p t_ip B_ip s2_p / c_i with
 * c_i^2 = sum_p t_ip^2 (or c = 1 without normalization).
 */
class HierarchicalPriorMap final : public PriorMap {
public:
  struct Evaluation {
    VectorXd sigma;
    VectorXd lambda;
    VectorXd c;
    VectorXd xi;
  };

  explicit HierarchicalPriorMap(HierarchicalSpec spec, bool normalize = true);

  Index parameter_count() const override { return 2 * block_size(); }
  Index field_size() const override { return basis_->rows(); }
  Index block_size() const noexcept { return basis_->cols(); }
  VectorXd apply(const VectorXd& s) const override { return evaluate(s).xi; }
  VectorXd pullback(const VectorXd& s, const VectorXd& v) const override;

  Evaluation evaluate(const VectorXd& s) const;
  VectorXd sigma_field(const VectorXd& s1) const;
  /// c(x) for a given sigma field.
  VectorXd normalization(const VectorXd& sigma) const;
  /// The linear map s2 -> xi with sigma held at sigma(s1).
  LinearPriorMap with_fixed_sigma(const VectorXd& s1) const;

  const HierarchicalSpec& spec() const noexcept { return spec_; }
  const MatrixXd& basis() const noexcept { return *basis_; }
  const VectorXd& weights() const noexcept { return h_; }
  bool normalized() const noexcept { return normalize_; }

private:
  MatrixXd kernel(const VectorXd& lambda) const;  // t_ip

  HierarchicalSpec spec_;
  bool normalize_;
  std::shared_ptr<const MatrixXd> basis_;
  VectorXd h_;
  VectorXd eta2_;
};

}  // namespace pdoprior

#endif  // PDOPRIOR_PRIOR_MAP_HPP
