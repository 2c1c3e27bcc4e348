#include "pdoprior/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "pdoprior/errors.hpp"

namespace pdoprior {

// ---------------------------------------------------------------- Jet

Jet Jet::constant(double value, int order) {
  std::vector<double> c(static_cast<std::size_t>(order + 1), 0.0);
  c[0] = value;
  return Jet(std::move(c));
}

Jet Jet::variable(double x0, int order) {
  Jet j = constant(x0, order);
  if (order >= 1) j.c_[1] = 1.0;
  return j;
}

double Jet::derivative(int m) const {
  double f = 1.0;
  for (int k = 2; k <= m; ++k) f *= k;
  return f * c_[static_cast<std::size_t>(m)];
}

Jet Jet::operator+(const Jet& o) const {
  const std::size_t n = std::min(c_.size(), o.c_.size());
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = c_[k] + o.c_[k];
  return Jet(std::move(r));
}

Jet Jet::operator-(const Jet& o) const { return *this + o * -1.0; }

Jet Jet::operator*(const Jet& o) const {
  const std::size_t n = std::min(c_.size(), o.c_.size());
  std::vector<double> r(n, 0.0);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k <= m; ++k) r[m] += c_[k] * o.c_[m - k];
  return Jet(std::move(r));
}

Jet Jet::operator*(double s) const {
  std::vector<double> r = c_;
  for (double& v : r) v *= s;
  return Jet(std::move(r));
}

Jet Jet::operator+(double s) const {
  std::vector<double> r = c_;
  r[0] += s;
  return Jet(std::move(r));
}

Jet exp(const Jet& a) {
  const std::size_t n = a.c_.size();
  std::vector<double> e(n, 0.0);
  e[0] = std::exp(a.c_[0]);
  for (std::size_t m = 1; m < n; ++m) {
    double s = 0.0;
    for (std::size_t k = 1; k <= m; ++k) s += static_cast<double>(k) * a.c_[k] * e[m - k];
    e[m] = s / static_cast<double>(m);
  }
  return Jet(std::move(e));
}

Jet pow(const Jet& a, double r) {
  if (!(a.c_[0] > 0.0)) throw std::domain_error("Jet pow: base must be positive");
  const std::size_t n = a.c_.size();
  std::vector<double> b(n, 0.0);
  b[0] = std::pow(a.c_[0], r);
  for (std::size_t m = 1; m < n; ++m) {
    double s = 0.0;
    for (std::size_t k = 1; k <= m; ++k) {
      s += (r * static_cast<double>(k) - static_cast<double>(m - k)) * a.c_[k] * b[m - k];
    }
    b[m] = s / (static_cast<double>(m) * a.c_[0]);
  }
  return Jet(std::move(b));
}

// ---------------------------------------------------------------- SmoothField

SmoothField::SmoothField(SpatialGrid grid, VectorXd values, JetFunction jet)
    : grid_(grid), values_(std::move(values)), jet_(std::move(jet)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("SmoothField: value count does not match grid");
  if (!values_.allFinite()) throw std::invalid_argument("SmoothField: non-finite values");
  constant_ = values_.size() > 0 && (values_.array() == values_[0]).all();
}

SmoothField SmoothField::constant(const SpatialGrid& grid, double value) {
  JetFunction jet;
  if (grid.dim() == 1) jet = [value](double, int order) { return Jet::constant(value, order); };
  return SmoothField(grid, VectorXd::Constant(grid.size(), value), jet);
}

SmoothField SmoothField::gaussian_bump_1d(const SpatialGrid& grid, double base, double amplitude, double center,
                                          double width) {
  if (grid.dim() != 1) throw std::invalid_argument("gaussian_bump_1d: needs a 1D grid");
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump_1d: width must be positive");
  JetFunction jet = [=](double x, int order) {
    const Jet u = Jet::variable(x - center, order);
    return exp(u * u * (-1.0 / width)) * amplitude + base;
  };
  VectorXd v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) v[i] = jet(grid.node(i)[0], 0)[0];
  return SmoothField(grid, v, jet);
}

double SmoothField::evaluate(const Point& x) const {
  if (jet_) return jet_(x[0], 0)[0];
  if (constant_) return values_[0];
  const FrequencyBand band = FrequencyBand::natural(grid_);
  const VectorXcd c = forward_dft(values_.cast<Complex>(), band, grid_);
  return evaluate_fourier_series(c, band, x).real();
}

double SmoothField::top_mode_fraction() const {
  if (constant_) return 0.0;
  const FrequencyBand band = FrequencyBand::natural(grid_);
  const VectorXcd c = forward_dft(values_.cast<Complex>(), band, grid_);
  const int edge = static_cast<int>((grid_.points_per_axis() - 1) / 2);
  double top = 0.0;
  for (Index j = 0; j < band.size(); ++j) {
    const MultiIndex eta = band.frequency(j);
    if (std::abs(eta[0]) >= edge || (grid_.dim() == 2 && std::abs(eta[1]) >= edge)) top = std::max(top, std::abs(c[j]));
  }
  const double all = c.cwiseAbs().maxCoeff();
  return all > 0.0 ? top / all : 0.0;
}

// ---------------------------------------------------------------- SymbolSpec

SymbolSpec::SymbolSpec(double alpha_, LengthScaleField sigma_)
    : alpha(alpha_), sigma(std::move(sigma_)), prefactor(SmoothField::constant(sigma.grid(), 1.0)) {
  validate();
}

SymbolSpec::SymbolSpec(double alpha_, LengthScaleField sigma_, SmoothField prefactor_)
    : alpha(alpha_), sigma(std::move(sigma_)), prefactor(std::move(prefactor_)) {
  validate();
}

void SymbolSpec::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("SymbolSpec: alpha must be positive");
  if (!(prefactor.grid() == sigma.grid())) throw std::invalid_argument("SymbolSpec: prefactor and sigma grids differ");
  if (prefactor.values().size() > 0 && !(prefactor.values().minCoeff() > 0.0)) {
    throw std::invalid_argument("SymbolSpec: prefactor must be strictly positive");
  }
}

double symbol_value(double alpha, double sigma, double prefactor, double eta_squared) {
  return prefactor * std::pow(sigma + eta_squared, 0.5 * alpha);
}

double eval_symbol(const SymbolSpec& spec, const Point& x, const MultiIndex& eta) {
  const double e2 = static_cast<double>(eta[0]) * eta[0] + static_cast<double>(eta[1]) * eta[1];
  return symbol_value(spec.alpha, spec.sigma.evaluate(x), spec.prefactor.evaluate(x), e2);
}

double eval_symbol(const SymbolSpec& spec, Index node, const MultiIndex& eta) {
  const double e2 = static_cast<double>(eta[0]) * eta[0] + static_cast<double>(eta[1]) * eta[1];
  return symbol_value(spec.alpha, spec.sigma.values()[node], spec.prefactor.values()[node], e2);
}

void check_ellipticity(const SymbolSpec& spec, const FrequencyBand& band) {
  double min_e2 = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < band.size(); ++j) min_e2 = std::min(min_e2, band.squared_norm(j));
  const double min_shift = spec.sigma.values().minCoeff() + min_e2;
  if (!(min_shift > 0.0) || !(spec.prefactor.values().minCoeff() > 0.0)) {
    throw EllipticityError("symbol is not elliptic: min(sigma + |eta|^2) = " + std::to_string(min_shift));
  }
}

// ---------------------------------------------------------------- derivative tensors

std::vector<MultiIndex> multi_indices_of_order(int dim, int order) {
  std::vector<MultiIndex> out;
  if (dim == 1) {
    out.push_back({order, 0});
    return out;
  }
  for (int a = order; a >= 0; --a) out.push_back({a, order - a});
  return out;
}

double multi_factorial(const MultiIndex& gamma) {
  double f = 1.0;
  for (int g : gamma)
    for (int k = 2; k <= g; ++k) f *= k;
  return f;
}

namespace {

constexpr double kSpectralBandLimitTolerance = 1e-6;

MatrixXcd symbol_columns(const SymbolSpec& spec, const FrequencyBand& band) {
  const SpatialGrid& grid = spec.grid();
  MatrixXcd p(grid.size(), band.size());
  for (Index j = 0; j < band.size(); ++j) {
    const double e2 = band.squared_norm(j);
    for (Index i = 0; i < grid.size(); ++i) {
      p(i, j) = symbol_value(spec.alpha, spec.sigma.values()[i], spec.prefactor.values()[i], e2);
    }
  }
  return p;
}

// Coefficients of prod_{j<g} (z - j) in ascending powers of z.
std::vector<double> falling_polynomial(int g) {
  std::vector<double> c{1.0};
  for (int j = 0; j < g; ++j) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t m = 0; m < c.size(); ++m) {
      next[m + 1] += c[m];
      next[m] -= static_cast<double>(j) * c[m];
    }
    c = std::move(next);
  }
  return c;
}

std::vector<SymbolDerivativeTensor> jet_derivatives(const SymbolSpec& spec, const FrequencyBand& band, int max_gamma) {
  const SpatialGrid& grid = spec.grid();
  std::vector<std::vector<double>> poly(static_cast<std::size_t>(max_gamma + 1));
  for (int g = 0; g <= max_gamma; ++g) poly[static_cast<std::size_t>(g)] = falling_polynomial(g);
  // (2 pi i)^{-m} m!
  std::vector<Complex> scale(static_cast<std::size_t>(max_gamma + 1));
  for (int m = 0; m <= max_gamma; ++m) {
    double f = 1.0;
    for (int k = 2; k <= m; ++k) f *= k;
    scale[static_cast<std::size_t>(m)] = f * std::pow(Complex(0.0, kTwoPi), -m);
  }

  std::vector<SymbolDerivativeTensor> out;
  for (int g = 0; g <= max_gamma; ++g) out.push_back({{g, 0}, {band, MatrixXcd(grid.size(), band.size())}});

  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i)[0];
    const Jet s = spec.sigma.jet()(x, max_gamma);
    const Jet c = spec.prefactor.jet()(x, max_gamma);
    for (Index j = 0; j < band.size(); ++j) {
      const Jet p = c * pow(s + band.squared_norm(j), 0.5 * spec.alpha);
      out[0].tensor.values(i, j) = p[0];
      for (int g = 1; g <= max_gamma; ++g) {
        const auto& pc = poly[static_cast<std::size_t>(g)];
        Complex v{0.0, 0.0};
        for (int m = 1; m <= g; ++m) v += pc[static_cast<std::size_t>(m)] * scale[static_cast<std::size_t>(m)] * p[m];
        out[static_cast<std::size_t>(g)].tensor.values(i, j) = v;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<SymbolDerivativeTensor> build_derivative_tensors(const SymbolSpec& spec, const FrequencyBand& band,
                                                             int max_gamma) {
  spec.validate();
  if (max_gamma < 0 || max_gamma > 8) throw std::invalid_argument("build_derivative_tensors: max_gamma must be in [0, 8]");
  if (band.dim() != spec.grid().dim()) throw std::invalid_argument("build_derivative_tensors: grid and band dimensions differ");

  const bool analytic = spec.grid().dim() == 1 && spec.sigma.has_jet() && spec.prefactor.has_jet();
  if (analytic) return jet_derivatives(spec, band, max_gamma);

  if (max_gamma >= 1) {
    for (const SmoothField* f : {&spec.sigma, &spec.prefactor}) {
      const double frac = f->top_mode_fraction();
      if (frac > kSpectralBandLimitTolerance) {
        throw std::domain_error("build_derivative_tensors: field is not band-limited on its grid (top-mode fraction " +
                                std::to_string(frac) + ")");
      }
    }
  }

  std::vector<SymbolDerivativeTensor> out;
  const MatrixXcd p0 = symbol_columns(spec, band);
  for (int order = 0; order <= max_gamma; ++order) {
    for (const MultiIndex& g : multi_indices_of_order(band.dim(), order)) {
      out.push_back({g, {band, order == 0 ? p0 : spectral_derivative_columns(p0, spec.grid(), g)}});
    }
  }
  return out;
}

// ---------------------------------------------------------------- finite differences

SpectralTensor finite_difference(const SpectralTensor& tensor, const MultiIndex& gamma) {
  if (gamma[0] < 0 || gamma[1] < 0) throw std::invalid_argument("finite_difference: negative order");
  if (tensor.band.dim() == 1 && gamma[1] != 0) throw std::invalid_argument("finite_difference: 2D order on a 1D band");
  for (int a = 0; a < tensor.band.dim(); ++a) {
    if (tensor.band.extent(a) < gamma[a] + 1) throw std::invalid_argument("finite_difference: insufficient overhead nodes");
  }
  SpectralTensor cur = tensor;
  for (int a = 0; a < tensor.band.dim(); ++a) {
    for (int step = 0; step < gamma[a]; ++step) {
      MultiIndex unit{0, 0};
      unit[a] = 1;
      const FrequencyBand nb = cur.band.shrunk(unit);
      SpectralTensor next{nb, MatrixXcd(cur.rows(), nb.size())};
      for (Index j = 0; j < nb.size(); ++j) {
        MultiIndex eta = nb.frequency(j);
        const Index here = cur.band.position(eta);
        eta[a] += 1;
        next.values.col(j) = cur.values.col(cur.band.position(eta)) - cur.values.col(here);
      }
      cur = std::move(next);
    }
  }
  return cur;
}

// ---------------------------------------------------------------- parametrix

SpectralTensor ParametrixTensor::partial_sum_to(int k) const {
  if (k < 0 || k > truncation_order) throw std::out_of_range("partial_sum_to: order out of range");
  SpectralTensor s = summands[0];
  for (int m = 1; m <= k; ++m) s.values += summands[static_cast<std::size_t>(m)].values;
  return s;
}

ParametrixTensor parametrix_expand(const SymbolSpec& spec, const FrequencyBand& band, int truncation_order,
                                   const ParametrixOptions& options) {
  const int n_max = truncation_order;
  if (n_max < 0) throw std::invalid_argument("parametrix_expand: truncation order must be non-negative");
  if (n_max > options.stability_cap) {
    throw std::invalid_argument("parametrix_expand: truncation order " + std::to_string(n_max) +
                                " exceeds the stability cap " + std::to_string(options.stability_cap));
  }
  const FrequencyBand wide = band.widened(n_max);
  check_ellipticity(spec, wide);

  std::map<MultiIndex, SpectralTensor> p;
  for (auto& d : build_derivative_tensors(spec, wide, n_max)) p.emplace(d.gamma, std::move(d.tensor));

  std::vector<SpectralTensor> q;
  q.push_back({wide, p.at({0, 0}).values.cwiseInverse()});
  const double q0_max = q[0].values.cwiseAbs().maxCoeff();

  for (int n = 1; n <= n_max; ++n) {
    const FrequencyBand target = band.widened(n_max - n);
    MatrixXcd acc = MatrixXcd::Zero(spec.grid().size(), target.size());
    for (int k = 0; k < n; ++k) {
      for (const MultiIndex& g : multi_indices_of_order(band.dim(), n - k)) {
        const SpectralTensor dq = restrict_to(finite_difference(q[static_cast<std::size_t>(k)], g), target);
        const SpectralTensor pg = restrict_to(p.at(g), target);
        acc += (dq.values.array() * pg.values.array()).matrix() / multi_factorial(g);
      }
    }
    const SpectralTensor q0 = restrict_to(q[0], target);
    SpectralTensor qn{target, -(q0.values.array() * acc.array()).matrix()};
    if (!qn.values.allFinite() || qn.values.cwiseAbs().maxCoeff() > options.blowup_factor * q0_max) {
      throw InstabilityError("parametrix_expand: term " + std::to_string(n) + " blew up");
    }
    q.push_back(std::move(qn));
  }

  ParametrixTensor out;
  out.truncation_order = n_max;
  out.grid = spec.grid();
  out.band = band;
  for (const auto& t : q) out.summands.push_back(restrict_to(t, band));
  out.partial_sum = out.partial_sum_to(n_max);
  return out;
}

std::vector<double> term_norms(const ParametrixTensor& par) {
  const double weight = 1.0 / static_cast<double>(par.grid.size());
  std::vector<double> out;
  for (const auto& t : par.summands) out.push_back(std::sqrt(weight * t.values.squaredNorm()));
  return out;
}

double reality_defect(const ParametrixTensor& par) {
  const MatrixXcd& q = par.partial_sum.values;
  double num = 0.0;
  double den = 0.0;
  for (Index j = 0; j < par.band.size(); ++j) {
    const Index p = par.band.partner(j);
    if (p < 0) continue;
    num += (q.col(j) - q.col(p).conjugate()).squaredNorm();
    den += q.col(j).squaredNorm();
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

// ---------------------------------------------------------------- truncation bounds

double truncation_sup_factor(const SymbolSpec& spec) {
  double sup = 0.0;
  const VectorXd& s = spec.sigma.values();
  const VectorXd& c = spec.prefactor.values();
  for (Index i = 0; i < s.size(); ++i) {
    double f = 1.0;
    if (s[i] < 0.0) {
      if (!(1.0 + s[i] > 0.0)) throw EllipticityError("truncation_sup_factor: symbol vanishes at |eta| = 1");
      f = std::pow(1.0 / (1.0 + s[i]), spec.alpha);
    }
    sup = std::max(sup, f / (c[i] * c[i]));
  }
  return sup;
}

namespace {

// Lattice points of Z^2 with k < |eta| <= k + 1.
double annulus_count_2d(long long k) {
  const long long lo = k * k;
  const long long hi = (k + 1) * (k + 1);
  long long count = 0;
  for (long long a = -(k + 1); a <= k + 1; ++a) {
    const long long a2 = a * a;
    // b^2 in (lo - a2, hi - a2]
    const long long bmax = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(hi - a2)) + 1e-9));
    long long bhi = bmax;
    while (a2 + bhi * bhi > hi) --bhi;
    while (a2 + (bhi + 1) * (bhi + 1) <= hi) ++bhi;
    long long inner = -1;
    if (lo - a2 >= 0) {
      inner = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(lo - a2))));
      while (inner >= 0 && a2 + inner * inner > lo) --inner;
      while (a2 + (inner + 1) * (inner + 1) <= lo) ++inner;
    }
    // |b| in (inner, bhi]
    const long long outer_count = 2 * bhi + 1;
    const long long inner_count = inner >= 0 ? 2 * inner + 1 : 0;
    count += outer_count - inner_count;
  }
  return static_cast<double>(count);
}

}  // namespace

double lattice_tail_sum(int dim, double alpha, int M) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("lattice_tail_sum: dimension must be 1 or 2");
  if (!(2.0 * alpha > dim)) throw std::domain_error("lattice_tail_sum: the series diverges for alpha <= d/2");
  if (M < 1) throw std::invalid_argument("lattice_tail_sum: M must be at least 1");
  const long long cutoff = static_cast<long long>(M) + 2048;
  const double r = 2.0 * alpha;
  double sum = 0.0;
  for (long long k = M; k < cutoff; ++k) {
    const double a = dim == 1 ? 2.0 : annulus_count_2d(k);
    sum += a * std::pow(static_cast<double>(k), -r);
  }
  const double kc = static_cast<double>(cutoff);
  if (dim == 1) {
    sum += 2.0 * std::pow(kc, -r) + 2.0 * std::pow(kc, 1.0 - r) / (r - 1.0);
  } else {
    const double c = 3.14159265358979323846 * (1.0 + std::sqrt(2.0));
    sum += c * (2.0 * kc + 1.0) * std::pow(kc, -r) +
           c * (2.0 * std::pow(kc, 2.0 - r) / (r - 2.0) + std::pow(kc, 1.0 - r) / (r - 1.0));
  }
  return sum;
}

double truncation_error_bound(const SymbolSpec& spec, int M) {
  return truncation_sup_factor(spec) * lattice_tail_sum(spec.grid().dim(), spec.alpha, M);
}

double empirical_tail_variance(const SymbolSpec& spec, int M) {
  if (M < 0) throw std::invalid_argument("empirical_tail_variance: M must be non-negative");
  const int dim = spec.grid().dim();
  if (!(2.0 * spec.alpha > dim)) throw std::domain_error("empirical_tail_variance: tail diverges for alpha <= d/2");
  const VectorXd& s = spec.sigma.values();
  const VectorXd& c = spec.prefactor.values();
  const double a = spec.alpha;
  double sup = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    double sum = 0.0;
    const double c2 = c[i] * c[i];
    if (dim == 1) {
      const long long cutoff = static_cast<long long>(M) + 20000;
      for (long long k = M + 1; k <= cutoff; ++k) sum += 2.0 / (c2 * std::pow(s[i] + static_cast<double>(k * k), a));
      const double kc = static_cast<double>(cutoff) + 0.5;
      sum += 2.0 / c2 * std::pow(kc, 1.0 - 2.0 * a) / (2.0 * a - 1.0);
    } else {
      const long long radius = 4LL * M + 64;
      for (long long e0 = -radius; e0 <= radius; ++e0)
        for (long long e1 = -radius; e1 <= radius; ++e1) {
          const long long n2 = e0 * e0 + e1 * e1;
          if (n2 <= static_cast<long long>(M) * M || n2 > radius * radius) continue;
          sum += 1.0 / (c2 * std::pow(s[i] + static_cast<double>(n2), a));
        }
      const double rc = static_cast<double>(radius);
      sum += 3.14159265358979323846 * std::pow(s[i] + rc * rc, 1.0 - a) / ((a - 1.0) * c2);
    }
    sup = std::max(sup, sum);
  }
  return sup;
}

}  // namespace pdoprior
