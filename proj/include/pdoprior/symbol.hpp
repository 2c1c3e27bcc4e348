#ifndef PDOPRIOR_SYMBOL_HPP
#define PDOPRIOR_SYMBOL_HPP

#include <functional>
#include <optional>
#include <vector>

#include "pdoprior/torus.hpp"

namespace pdoprior {

/// Truncated Taylor series sum_m c[m] t^m of a function of one variable at a point.
class Jet {
public:
  Jet() = default;
  explicit Jet(std::vector<double> coeffs) : c_(std::move(coeffs)) {}
  static Jet constant(double value, int order);
  /// x0 + t
  static Jet variable(double x0, int order);

  int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
  double operator[](int m) const { return c_[static_cast<std::size_t>(m)]; }
  const std::vector<double>& coefficients() const noexcept { return c_; }
  /// m-th derivative at the expansion point: m! c[m].
  double derivative(int m) const;

  Jet operator+(const Jet& o) const;
  Jet operator-(const Jet& o) const;
  Jet operator*(const Jet& o) const;
  Jet operator*(double s) const;
  Jet operator+(double s) const;

  friend Jet exp(const Jet& a);
  /// a^r for a[0] > 0.
  friend Jet pow(const Jet& a, double r);

private:
  std::vector<double> c_;
};

Jet exp(const Jet& a);
Jet pow(const Jet& a, double r);

/// Point -> Taylor jet in x_0 of the requested order (1D closed forms only).
using JetFunction = std::function<Jet(double x, int order)>;

/**
 * Positive smooth field on a grid: node values plus, where available, a
 * closed-form Taylor jet used for exact spatial derivatives. Without a jet the
 * field is represented by its trigonometric interpolant on the grid.
 */
class SmoothField {
public:
  SmoothField() = default;
  SmoothField(SpatialGrid grid, VectorXd values, JetFunction jet = nullptr);

  static SmoothField constant(const SpatialGrid& grid, double value);
  /// base + amplitude exp(-(x - center)^2 / width), 1D.
  static SmoothField gaussian_bump_1d(const SpatialGrid& grid, double base, double amplitude, double center,
                                      double width);

  const SpatialGrid& grid() const noexcept { return grid_; }
  const VectorXd& values() const noexcept { return values_; }
  bool has_jet() const noexcept { return static_cast<bool>(jet_); }
  const JetFunction& jet() const noexcept { return jet_; }
  bool is_constant() const noexcept { return constant_; }

  /// Value at an arbitrary point; the interpolant is used when there is no jet.
  double evaluate(const Point& x) const;

  /// Largest relative magnitude of the highest resolved Fourier mode of the node values.
  double top_mode_fraction() const;

private:
  SpatialGrid grid_;
  VectorXd values_;
  JetFunction jet_;
  bool constant_ = false;
};

/// The length-scale field sigma(x) of the symbol.
using LengthScaleField = SmoothField;

/// p(x, eta) = prefactor(x) (sigma(x) + |eta|^2)^(alpha/2).
struct SymbolSpec {
  double alpha = 2.0;
  LengthScaleField sigma;
  SmoothField prefactor;  // constant 1 when left empty

  SymbolSpec() = default;
  SymbolSpec(double alpha_, LengthScaleField sigma_);
  SymbolSpec(double alpha_, LengthScaleField sigma_, SmoothField prefactor_);

  const SpatialGrid& grid() const noexcept { return sigma.grid(); }
  void validate() const;
};

double symbol_value(double alpha, double sigma, double prefactor, double eta_squared);
double eval_symbol(const SymbolSpec& spec, const Point& x, const MultiIndex& eta);
/// Symbol at grid node i.
double eval_symbol(const SymbolSpec& spec, Index node, const MultiIndex& eta);

/// Throws EllipticityError unless p(x_i, eta) > 0 on the whole grid and band.
void check_ellipticity(const SymbolSpec& spec, const FrequencyBand& band);

struct SymbolDerivativeTensor {
  MultiIndex gamma{0, 0};
  SpectralTensor tensor;  // [P]_{i,j} = D_x^{(gamma)} p(x_i, eta_j)
};

/// All multi-indices gamma with |gamma| = order in `dim` dimensions, axis-0 component descending.
std::vector<MultiIndex> multi_indices_of_order(int dim, int order);
double multi_factorial(const MultiIndex& gamma);

/**
 * P^gamma for every |gamma| <= max_gamma. Closed-form jets give exact
 * derivatives; otherwise D_x^{(gamma)} is applied spectrally per frequency
 * column, which requires sigma and the prefactor to be band-limited on the grid.
 */
std::vector<SymbolDerivativeTensor> build_derivative_tensors(const SymbolSpec& spec, const FrequencyBand& band,
                                                             int max_gamma);

/// Order-gamma forward difference in the frequency index; the band loses gamma_k nodes at the top of axis k.
SpectralTensor finite_difference(const SpectralTensor& tensor, const MultiIndex& gamma);

struct ParametrixOptions {
  int stability_cap = 6;
  double blowup_factor = 1e12;
};

struct ParametrixTensor {
  int truncation_order = 0;
  SpatialGrid grid;
  FrequencyBand band;
  std::vector<SpectralTensor> summands;  // Q^0 .. Q^N on `band`
  SpectralTensor partial_sum;            // q^(N)

  /// Partial sum over the first k + 1 summands.
  SpectralTensor partial_sum_to(int k) const;
};

ParametrixTensor parametrix_expand(const SymbolSpec& spec, const FrequencyBand& band, int truncation_order,
                                   const ParametrixOptions& options = {});

/// sqrt(dx^d sum |Q^k_ij|^2) for every summand.
std::vector<double> term_norms(const ParametrixTensor& par);

/// Relative size of the anti-Hermitian part of q^(N) over the band (zero for an exactly real symbol).
double reality_defect(const ParametrixTensor& par);

/**
 * sup_{x,eta} (|eta|^alpha |q(x,eta)|)^2 * sum_{k>=M} A_d(k) k^{-2 alpha} for q = 1/p,
 * where A_d(k) counts lattice points with k < |eta| <= k+1.
 */
double truncation_error_bound(const SymbolSpec& spec, int M);

/// The supremum factor of the bound alone.
double truncation_sup_factor(const SymbolSpec& spec);

/// sum_{k>=M} A_d(k) k^{-2 alpha}.
double lattice_tail_sum(int dim, double alpha, int M);

/// sup_x sum_{|eta|>M} |q^0(x, eta)|^2, summed directly.
double empirical_tail_variance(const SymbolSpec& spec, int M);

}  // namespace pdoprior

#endif  // PDOPRIOR_SYMBOL_HPP
