#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pdoprior/diagnostics.hpp"
#include "pdoprior/lbfgs.hpp"
#include "pdoprior/nuts.hpp"
#include "pdoprior/posterior.hpp"
#include "pdoprior/radon.hpp"

using namespace pdoprior;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const LinearPriorMap> denoise_prior() {
  const SpatialGrid g(1, 65);
  const SymbolSpec spec(2.0, SmoothField::gaussian_bump_1d(g, 0.05, 2.0, 0.5, 0.5));
  const ParametrixTensor par = parametrix_expand(spec, FrequencyBand::half_open_1d(32), 2);
  return std::make_shared<LinearPriorMap>(prior_map_matrix(par.partial_sum, g));
}

std::vector<Index> all_nodes(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

WhitenedPosterior denoise_posterior(double rel, std::uint64_t seed) {
  const auto prior = denoise_prior();
  const VectorXd truth = prior->apply(standard_normal_vector(prior->parameter_count(), {seed, 0}));
  NoiseModel nm{rel};
  const VectorXd y = add_noise(truth, nm, {seed, 1});
  return WhitenedPosterior(prior, selection_matrix(all_nodes(65), 65), y, nm.sigma_noise);
}

// Relative central-difference check on random coordinates.
void check_gradient(const LogDensity& target, const VectorXd& s, int coords, std::uint64_t seed) {
  VectorXd g;
  target.log_density_gradient(s, g);
  std::mt19937_64 rng(seed);
  const double h = 1e-5;
  for (int t = 0; t < coords; ++t) {
    const Index k = static_cast<Index>(rng() % static_cast<std::uint64_t>(s.size()));
    VectorXd sp = s, sm = s;
    sp[k] += h;
    sm[k] -= h;
    const double fd = (target.log_density(sp) - target.log_density(sm)) / (2.0 * h);
    CHECK(std::abs(fd - g[k]) < 1e-5 * std::max(1.0, std::abs(g[k])));
  }
}

}  // namespace

TEST_CASE("log-posterior identities") {
  const auto prior = denoise_prior();
  const SparseMatrix id = selection_matrix(all_nodes(65), 65);
  const WhitenedPosterior zero(prior, id, VectorXd::Zero(65), 0.1);
  CHECK(log_posterior(zero, VectorXd::Zero(64)) == 0.0);

  const VectorXd s = standard_normal_vector(64, {2, 0});
  const VectorXd y = standard_normal_vector(65, {2, 1});
  const WhitenedPosterior a(prior, id, y, 0.1);
  const WhitenedPosterior b(prior, id, y, 0.2);
  CHECK(b.misfit(s) == doctest::Approx(a.misfit(s) / 4.0).epsilon(1e-14));
  CHECK(log_posterior(a, s) == doctest::Approx(-a.misfit(s) - 0.5 * s.squaredNorm()).epsilon(1e-14));

  // exact quadratic: compare with the closed form
  const LinearGaussianPosterior lg(a);
  for (std::uint64_t k = 0; k < 3; ++k) {
    const VectorXd t = standard_normal_vector(64, {3, k});
    CHECK(std::abs(log_posterior(a, t) - lg.log_density(t)) < 1e-10 * std::abs(lg.log_density(t)));
    CHECK((gradient(a, t) - lg.gradient(t)).cwiseAbs().maxCoeff() < 1e-10 * lg.gradient(t).cwiseAbs().maxCoeff());
  }
  CHECK(gradient(a, lg.mode()).norm() < 1e-8);
  CHECK_THROWS_AS(log_posterior(a, VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("gradients agree with finite differences") {
  std::mt19937_64 rng(1);

  SUBCASE("linear denoising") {
    const WhitenedPosterior p = denoise_posterior(0.05, 4);
    check_gradient(p, standard_normal_vector(64, {9, 0}), 20, 1);
  }

  SUBCASE("level set over a Radon operator") {
    const SpatialGrid g(2, 16);
    const FrequencyBand b = FrequencyBand::symmetric(2, 4);
    const auto spec = make_hierarchical_spec(g, b);
    const HierarchicalPriorMap h(spec);
    const auto lin = std::make_shared<LinearPriorMap>(h.with_fixed_sigma(VectorXd::Zero(b.size())));
    const SparseMatrix r = radon_matrix(RadonGeometry::equispaced(8, kPi / 4, 16, 16), g);
    const VectorXd y = standard_normal_vector(r.rows(), {10, 0});
    const WhitenedPosterior p(lin, r, y, 0.5, LevelSetSpec{10.0});
    check_gradient(p, 0.3 * standard_normal_vector(b.size(), {10, 1}), 20, 2);
  }

  SUBCASE("hierarchical map over a Radon operator") {
    const SpatialGrid g(2, 16);
    const FrequencyBand b = FrequencyBand::symmetric(2, 4);
    const auto map = std::make_shared<HierarchicalPriorMap>(make_hierarchical_spec(g, b));
    const SparseMatrix r = radon_matrix(RadonGeometry::equispaced(8, kPi / 4, 16, 16), g);
    const VectorXd y = standard_normal_vector(r.rows(), {11, 0});
    const WhitenedPosterior p(map, r, y, 0.5, LevelSetSpec{10.0});
    check_gradient(p, 0.5 * standard_normal_vector(2 * b.size(), {11, 1}), 20, 3);
    const WhitenedPosterior plain(map, r, y, 0.5);
    check_gradient(plain, 0.5 * standard_normal_vector(2 * b.size(), {11, 2}), 20, 4);
  }
}

TEST_CASE("L-BFGS") {
  SUBCASE("conjugate Gaussian mode") {
    for (double rel : {0.05, 0.1}) {
      const WhitenedPosterior p = denoise_posterior(rel, 5);
      const LinearGaussianPosterior lg(p);
      OptimizerConfig cfg;
      cfg.max_iterations = 200;
      const OptimizerResult r = map_lbfgs(p, cfg, VectorXd::Zero(64));
      CHECK(r.status == OptimizerStatus::Converged);
      CHECK(r.iterations <= 200);
      CHECK((r.x - lg.mode()).cwiseAbs().maxCoeff() < 1e-6);
      for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1] + 1e-12 * std::abs(r.history[k - 1]));

      const OptimizerResult again = map_lbfgs(p, cfg, lg.mode());
      CHECK(again.iterations == 0);
      CHECK(again.status == OptimizerStatus::Converged);
    }
    // 1% noise is ill-conditioned (precision eigenvalues span about 4e3) and needs more iterations
    const WhitenedPosterior p = denoise_posterior(0.01, 5);
    const OptimizerResult r = map_lbfgs(p, {}, VectorXd::Zero(64));
    CHECK(r.status == OptimizerStatus::Converged);
    CHECK((r.x - LinearGaussianPosterior(p).mode()).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("Rosenbrock") {
    const Objective f = [](const VectorXd& x, VectorXd& g) {
      const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
      g.resize(2);
      g[0] = -2.0 * a - 400.0 * x[0] * b;
      g[1] = 200.0 * b;
      return a * a + 100.0 * b * b;
    };
    const OptimizerResult r = minimize_lbfgs(f, VectorXd::Constant(2, -1.2));
    CHECK(r.status == OptimizerStatus::Converged);
    CHECK(std::abs(r.x[0] - 1.0) < 1e-6);
    CHECK(std::abs(r.x[1] - 1.0) < 1e-6);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
  }

  SUBCASE("configuration checks") {
    OptimizerConfig c;
    c.memory = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.curvature = 1e-5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(to_string(OptimizerStatus::LineSearchFailed) == "line_search_failed");
  }
}

TEST_CASE("NUTS on a standard normal") {
  const StandardNormalDensity target(10);
  NutsConfig cfg;
  cfg.warmup = 200;
  cfg.draws = 4000;
  const PosteriorChain c = nuts_sample(target, cfg, {31, 0}, VectorXd::Zero(10));
  CHECK(c.samples.rows() == 4000);
  CHECK(c.samples.cols() == 10);
  CHECK(c.divergences == 0);
  CHECK(std::abs(c.mean_accept_stat() - 0.8) < 0.1);
  for (Index k = 0; k < 10; ++k) {
    const VectorXd col = c.samples.col(k);
    const double m = col.mean();
    const double v = (col.array() - m).square().mean();
    CHECK(std::abs(m) < 3.0 / std::sqrt(c.ess[k]));
    CHECK(v > 0.9);
    CHECK(v < 1.1);
    CHECK(c.ess[k] > 0.0);
    CHECK(c.ess[k] <= 4000.0);
  }
  // deterministic for a fixed seed
  const PosteriorChain d = nuts_sample(target, cfg, {31, 0}, VectorXd::Zero(10));
  CHECK(c.samples == d.samples);
}

TEST_CASE("NUTS on a correlated 2D Gaussian") {
  MatrixXd cov(2, 2);
  cov << 2.0, 0.9, 0.9, 1.0;
  VectorXd mean(2);
  mean << 1.0, -2.0;
  const GaussianDensity target(mean, cov);
  NutsConfig cfg;
  cfg.warmup = 500;
  cfg.draws = 10000;
  const PosteriorChain c = nuts_sample(target, cfg, {32, 0}, VectorXd::Zero(2));
  const MatrixXd centred = c.samples.rowwise() - c.samples.colwise().mean();
  const MatrixXd emp = centred.transpose() * centred / static_cast<double>(c.samples.rows());
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(std::abs(emp(i, j) / cov(i, j) - 1.0) < 0.05);
}

TEST_CASE("NUTS configuration and dual averaging") {
  NutsConfig c;
  c.target_accept = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.warmup = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  DualAveraging da(1.0, 0.8, 0.05, 10.0, 0.75);
  for (int k = 0; k < 50; ++k) da.update(1.0);
  CHECK(da.step() > 1.0);
  DualAveraging lo(1.0, 0.8, 0.05, 10.0, 0.75);
  for (int k = 0; k < 50; ++k) lo.update(0.0);
  CHECK(lo.step() < 1.0);
  CHECK(lo.final_step() > 0.0);

  // non-finite start
  struct Bad : LogDensity {
    Index dimension() const override { return 1; }
    double log_density(const VectorXd&) const override { return std::nan(""); }
    double log_density_gradient(const VectorXd&, VectorXd& g) const override {
      g = VectorXd::Zero(1);
      return std::nan("");
    }
  } bad;
  CHECK_THROWS_AS(nuts_sample(bad, 10, 10, {1, 0}), std::domain_error);
}

TEST_CASE("effective sample size") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  VectorXd iid(4000);
  for (Index i = 0; i < iid.size(); ++i) iid[i] = nd(rng);
  const EssResult e = ess(iid);
  CHECK(e.value >= 0.8 * 4000);
  CHECK(e.value <= 1.2 * 4000);
  CHECK_FALSE(e.constant);

  const Index n = 40000;
  VectorXd ar(n);
  ar[0] = nd(rng);
  for (Index i = 1; i < n; ++i) ar[i] = 0.9 * ar[i - 1] + std::sqrt(1.0 - 0.81) * nd(rng);
  const double expected = n * 0.1 / 1.9;
  CHECK(std::abs(ess(ar).value / expected - 1.0) < 0.3);

  const EssResult flat = ess(VectorXd::Constant(50, 3.0));
  CHECK(flat.value == 0.0);
  CHECK(flat.constant);
  CHECK_THROWS_AS(ess(VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("HPD interval") {
  const VectorXd ordered = VectorXd::LinSpaced(100, 1.0, 100.0);
  auto [lo, hi] = hpd_interval(ordered, 0.95);
  CHECK(lo == 1.0);
  CHECK(hi == 96.0);

  std::mt19937_64 rng(19);
  std::normal_distribution<double> nd;
  VectorXd z(10000);
  for (Index i = 0; i < z.size(); ++i) z[i] = nd(rng);
  auto [zl, zh] = hpd_interval(z, 0.95);
  const double inside = static_cast<double>((z.array() >= zl && z.array() <= zh).count()) / 10000.0;
  CHECK(std::abs(inside - 0.95) < 0.01);

  auto [ml, mh] = hpd_interval(z, 1.0);
  CHECK(ml == z.minCoeff());
  CHECK(mh == z.maxCoeff());
  CHECK_THROWS_AS(hpd_interval(z, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(hpd_interval(z, 1.5), std::invalid_argument);

  // exhaustive minimality on a skewed sample
  std::gamma_distribution<double> gd(2.0, 1.0);
  VectorXd s(300);
  for (Index i = 0; i < s.size(); ++i) s[i] = gd(rng);
  for (double mass : {0.5, 0.8, 0.95}) {
    auto [a, b] = hpd_interval(s, mass);
    std::vector<double> v(s.data(), s.data() + s.size());
    std::sort(v.begin(), v.end());
    const std::size_t span = static_cast<std::size_t>(std::floor(mass * 300.0));
    for (std::size_t i = 0; i + span < v.size(); ++i) CHECK(v[i + span] - v[i] >= b - a);
    CHECK(static_cast<Index>((s.array() >= a && s.array() <= b).count()) >= static_cast<Index>(span) + 1);
  }
}

TEST_CASE("HPD interval of normal draws is nearly symmetric" * doctest::may_fail()) {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> nd;
  VectorXd z(10000);
  for (Index i = 0; i < z.size(); ++i) z[i] = nd(rng);
  auto [lo, hi] = hpd_interval(z, 0.95);
  MESSAGE("lo + hi = " << lo + hi);
  CHECK(std::abs(lo + hi) < 0.1);
}

TEST_CASE("posterior summary") {
  SUBCASE("single draw") {
    MatrixXd one(1, 3);
    one << 1.0, -2.0, 0.5;
    const PosteriorSummary s = posterior_summary(one, [](const VectorXd& x) { return x; });
    CHECK(s.mean == VectorXd(one.row(0).transpose()));
    CHECK(s.variance.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.map.size() == 0);
  }

  SUBCASE("linear push-forward commutes with the mean") {
    const MatrixXd a = MatrixXd::Random(5, 3);
    MatrixXd draws(200, 3);
    for (Index i = 0; i < 200; ++i) draws.row(i) = standard_normal_vector(3, {40, static_cast<std::uint64_t>(i)}).transpose();
    const VectorXd map = VectorXd::Ones(3);
    const PosteriorSummary s = posterior_summary(draws, [&](const VectorXd& x) { return VectorXd(a * x); }, 0.95, &map);
    CHECK((s.mean - s.mean_pushforward).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.map - a * map).cwiseAbs().maxCoeff() < 1e-15);
    for (Index k = 0; k < 5; ++k) {
      CHECK(s.hpd_lower[k] <= s.hpd_upper[k]);
      CHECK(s.variance[k] > 0.0);
    }
  }

  SUBCASE("sigmoid push-forward of a bimodal chain") {
    // three quarters of the draws near +1, one quarter near -1
    MatrixXd draws(400, 1);
    for (Index i = 0; i < 400; ++i) draws(i, 0) = (i % 4 == 0 ? -1.0 : 1.0) + 0.01 * static_cast<double>(i % 7);
    auto sig = [](const VectorXd& x) {
      VectorXd y(x.size());
      for (Index k = 0; k < x.size(); ++k) y[k] = 1.0 / (1.0 + std::exp(-10.0 * x[k]));
      return y;
    };
    const PosteriorSummary s = posterior_summary(draws, sig);
    double mean_of_push = 0.0;
    for (Index i = 0; i < 400; ++i) mean_of_push += sig(draws.row(i).transpose())[0] / 400.0;
    CHECK(std::abs(s.mean[0] - mean_of_push) < 1e-14);
    CHECK(std::abs(s.mean_pushforward[0] - sig(draws.colwise().mean().transpose())[0]) < 1e-14);
    CHECK(std::abs(s.mean[0] - s.mean_pushforward[0]) > 0.0);
  }
}
