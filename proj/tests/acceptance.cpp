#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include "pdoprior/experiments.hpp"
#include "pdoprior/prior.hpp"
#include "pdoprior/prior_map.hpp"

using namespace pdoprior;
namespace fs = std::filesystem;

namespace {

class Stopwatch {
public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s [%02d] %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  CHECK_MESSAGE(pass, name);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <typename... T>
std::string fmtn(const char* f, T... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

const SpatialGrid kGrid65(1, 65);
const FrequencyBand kBand32 = FrequencyBand::half_open_1d(32);

SymbolSpec bump(double alpha) { return SymbolSpec(alpha, SmoothField::gaussian_bump_1d(kGrid65, 0.05, 2.0, 0.5, 0.5)); }

double correlation(const VectorXd& a, const VectorXd& b) {
  const VectorXd x = a.array() - a.mean();
  const VectorXd y = b.array() - b.mean();
  return x.dot(y) / (x.norm() * y.norm());
}

const DenoiseResult& denoise_at(double rel) {
  static std::map<double, DenoiseResult> cache;
  auto it = cache.find(rel);
  if (it == cache.end()) {
    DenoiseConfig cfg;
    cfg.noise_rel = rel;
    cfg.seed = 1;
    it = cache.emplace(rel, run_denoise(cfg)).first;
  }
  return it->second;
}

double mean_hpd_width(const DenoiseResult& r) {
  return (r.summary->hpd_upper - r.summary->hpd_lower).mean();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Mismatching or missing files between two output directories.
int compare_dirs(const fs::path& a, const fs::path& b, int& files) {
  int bad = 0;
  files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    const fs::path other = b / e.path().filename();
    if (!fs::exists(other) || read_file(e.path()) != read_file(other)) ++bad;
  }
  int count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  return bad + std::abs(count_b - files);
}

}  // namespace

TEST_CASE("A01 homogeneous limit") {
  Stopwatch sw;
  const SymbolSpec spec(2.0, SmoothField::constant(kGrid65, 1.0));
  const WhiteNoiseSpectrum noise = sample_white_noise(kBand32, {101, 0});
  VectorXcd coeffs(kBand32.size());
  for (Index j = 0; j < kBand32.size(); ++j) coeffs[j] = noise.coeffs[j] / (1.0 + kBand32.squared_norm(j));
  VectorXd oracle(kGrid65.size());
  for (Index i = 0; i < kGrid65.size(); ++i) oracle[i] = evaluate_fourier_series(coeffs, kBand32, kGrid65.node(i)).real();

  double worst = 0.0;
  for (int n = 0; n <= 5; ++n) {
    const FieldSample xi = sample_prior_1d(spec, n, noise);
    worst = std::max(worst, (xi.values - oracle).norm() / oracle.norm());
  }
  const double t = sw.seconds();
  report(1, "homogeneous limit", worst < 1e-12 && t < 1.0, fmtn("max rel err over N=0..5 %.3e (< 1e-12), %.2fs (< 1s)", worst, t));
}

TEST_CASE("A02 parametrix decay") {
  Stopwatch sw;
  const ParametrixTensor par = parametrix_expand(bump(2.0), kBand32, 3);
  const std::vector<double> q = term_norms(par);
  bool ok = true;
  for (std::size_t k = 1; k < q.size(); ++k) ok = ok && q[k] < q[k - 1];
  const double ratio = q[1] / q[0];
  const double t = sw.seconds();
  report(2, "parametrix decay", ok && ratio < 0.2 && t < 5.0,
         fmtn("||Q^k|| = %.4g %.4g %.4g %.4g, Q1/Q0 = %.4f (< 0.2), %.2fs", q[0], q[1], q[2], q[3], ratio, t));
}

TEST_CASE("A03 truncation rate") {
  Stopwatch sw;
  const SymbolSpec spec = bump(2.0);
  const std::vector<int> ms{8, 16, 32, 64};
  VectorXd lx(4), ly(4);
  for (int i = 0; i < 4; ++i) {
    lx[i] = std::log(static_cast<double>(ms[static_cast<std::size_t>(i)]));
    ly[i] = std::log(empirical_tail_variance(spec, ms[static_cast<std::size_t>(i)]));
  }
  const VectorXd cx = lx.array() - lx.mean();
  const double slope = cx.dot(VectorXd(ly.array() - ly.mean())) / cx.squaredNorm();
  const double t = sw.seconds();
  report(3, "truncation rate", std::abs(slope + 3.0) <= 0.2 && t < 5.0,
         fmtn("log-log slope %.4f vs d-2alpha = -3 (tol 0.2), %.2fs", slope, t));
}

TEST_CASE("A04 white-noise law") {
  Stopwatch sw;
  const Index nb = kBand32.size();
  auto at = [&](int eta) { return kBand32.position({eta, 0}); };
  std::vector<VectorXcd> f(5, VectorXcd::Zero(nb));
  f[0][at(0)] = 1.0;
  f[1][at(3)] = f[1][at(-3)] = 0.5;  // cos(2 pi 3x)
  f[2][at(5)] = Complex(0, -0.5);  // sin(2 pi 5x)
  f[2][at(-5)] = Complex(0, 0.5);
  f[3][at(1)] = Complex(0.3, 0.7);
  f[3][at(-1)] = Complex(0.3, -0.7);
  f[3][at(12)] = Complex(-1.1, 0.2);
  f[3][at(-12)] = Complex(-1.1, -0.2);
  f[3][at(0)] = 0.4;
  for (int eta = 1; eta <= 31; ++eta) {
    const Complex c(std::cos(0.7 * eta) / eta, std::sin(1.3 * eta) / eta);
    f[4][at(eta)] = c;
    f[4][at(-eta)] = std::conj(c);
  }

  const int n = 100000;
  std::vector<double> m2(5, 0.0), m4(5, 0.0), m1(5, 0.0);
  bool hermitian = true;
  for (int d = 0; d < n; ++d) {
    const WhiteNoiseSpectrum w = sample_white_noise(kBand32, substream({404, 0}, static_cast<std::uint64_t>(d)));
    for (Index j = 0; j < nb; ++j) {
      const Index p = kBand32.partner(j);
      if (p < 0 || p == j) hermitian = hermitian && w.coeffs[j].imag() == 0.0;
      else hermitian = hermitian && w.coeffs[p] == std::conj(w.coeffs[j]);
    }
    for (int k = 0; k < 5; ++k) {
      const double x = pair_with_test_function(w, f[static_cast<std::size_t>(k)]);
      m1[static_cast<std::size_t>(k)] += x;
      m2[static_cast<std::size_t>(k)] += x * x;
      m4[static_cast<std::size_t>(k)] += x * x * x * x;
    }
  }
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < 5; ++k) {
    const double mean = m1[k] / n;
    const double e2 = m2[k] / n;
    const double var = (e2 - mean * mean) * n / (n - 1.0);
    const double se = std::sqrt((m4[k] / n - e2 * e2) / n);
    const double target = f[k].squaredNorm();
    const double z = (var - target) / se;
    ok = ok && std::abs(z) <= 3.0;
    detail += fmtn("f%zu z=%+.2f ", k + 1, z);
  }
  const double t = sw.seconds();
  report(4, "white-noise law", ok && hermitian && t < 10.0,
         detail + fmtn("(|z| <= 3), hermitian %s, %.2fs", hermitian ? "exact" : "broken", t));
}

TEST_CASE("A05 FD comparison") {
  Stopwatch sw;
  const WhiteNoiseSpectrum noise = sample_white_noise(kBand32, {505, 0});
  const FieldSample psi = white_noise_field(noise, kGrid65);
  double corr[2], hf_pm[2], hf_fd[2];
  const double alphas[2] = {1.5, 2.0};
  for (int a = 0; a < 2; ++a) {
    const SymbolSpec spec = bump(alphas[a]);
    const FieldSample pm = sample_prior_1d(spec, 2, noise);
    const FieldSample fd = fd_reference_1d(spec, psi);
    corr[a] = correlation(pm.values, fd.values);
    hf_pm[a] = high_frequency_energy_fraction(pm, 16.0);
    hf_fd[a] = high_frequency_energy_fraction(fd, 16.0);
  }
  const double t = sw.seconds();
  const bool ok = corr[0] > 0.9 && corr[1] > 0.9 && hf_pm[1] < hf_pm[0] && hf_fd[1] < hf_fd[0] && t < 10.0;
  report(5, "FD comparison", ok,
         fmtn("corr %.4f / %.4f (> 0.9); HF parametrix %.3e -> %.3e, FD %.3e -> %.3e; %.2fs", corr[0], corr[1],
              hf_pm[0], hf_pm[1], hf_fd[0], hf_fd[1], t));
}

TEST_CASE("A06 conjugate denoising") {
  Stopwatch sw;
  const DenoiseResult& r = denoise_at(0.01);
  const double map_err = (r.map.x - r.exact_mode).cwiseAbs().maxCoeff();
  const MatrixXd& s = r.chain->samples;
  const VectorXd mean = s.colwise().mean().transpose();
  int within = 0;
  double worst_z = 0.0;
  for (Index j = 0; j < mean.size(); ++j) {
    const double se = r.exact_stddev[j] / std::sqrt(r.chain->ess[j]);
    const double z = std::abs(mean[j] - r.exact_mode[j]) / se;
    worst_z = std::max(worst_z, z);
    within += z <= 3.0;
  }
  int covered = 0;
  for (Index i = 0; i < r.truth.size(); ++i) {
    covered += r.truth[i] >= r.summary->hpd_lower[i] && r.truth[i] <= r.summary->hpd_upper[i];
  }
  const double coverage = static_cast<double>(covered) / static_cast<double>(r.truth.size());
  const double t = sw.seconds();
  const bool ok = map_err < 1e-6 && within == mean.size() && coverage >= 0.9 && t < 120.0;
  report(6, "conjugate denoising", ok,
         fmtn("MAP err %.2e (< 1e-6); NUTS mean within 3 SE at %d/%d coords (max z %.2f); HPD coverage %.3f (>= 0.9); %.1fs",
              map_err, within, static_cast<int>(mean.size()), worst_z, coverage, t));
}

TEST_CASE("A07 noise monotonicity") {
  Stopwatch sw;
  const double w10 = mean_hpd_width(denoise_at(0.10));
  const double w5 = mean_hpd_width(denoise_at(0.05));
  const double w1 = mean_hpd_width(denoise_at(0.01));
  const double t = sw.seconds();
  report(7, "noise monotonicity", w10 > w5 && w5 > w1 && t < 300.0,
         fmtn("mean HPD width 10%% %.4f > 5%% %.4f > 1%% %.4f; %.1fs", w10, w5, w1, t));
}

TEST_CASE("A08 hierarchical normalization") {
  Stopwatch sw;
  const SpatialGrid grid(2, 32);
  const FrequencyBand band = FrequencyBand::symmetric(2, 16);
  const HierarchicalSpec spec = make_hierarchical_spec(grid, band);
  const HierarchicalPriorMap norm(spec, true);
  const Index nb = norm.block_size();
  const int n = 10000;

  VectorXd sum = VectorXd::Zero(grid.size()), sum2 = VectorXd::Zero(grid.size());
  for (int d = 0; d < n; ++d) {
    const VectorXd s = standard_normal_vector(2 * nb, substream({808, 0}, static_cast<std::uint64_t>(d)));
    const VectorXd xi = norm.apply(s);
    sum += xi;
    sum2 += xi.cwiseProduct(xi);
  }
  const VectorXd mean = sum / n;
  const VectorXd var = (sum2 / n - mean.cwiseProduct(mean)) * (n / (n - 1.0));
  const double vmin = var.minCoeff(), vmax = var.maxCoeff();

  // c = 1: one sigma field, local amplitude in its lowest and highest quartiles
  const HierarchicalPriorMap raw(spec, false);
  const VectorXd s1 = standard_normal_vector(nb, {808, 1});
  const VectorXd sigma = raw.sigma_field(s1);
  const LinearPriorMap fixed = raw.with_fixed_sigma(s1);
  VectorXd r2 = VectorXd::Zero(grid.size());
  for (int d = 0; d < n; ++d) {
    const VectorXd xi = fixed.apply(standard_normal_vector(nb, substream({808, 2}, static_cast<std::uint64_t>(d))));
    r2 += xi.cwiseProduct(xi);
  }
  const VectorXd sd = (r2 / n).cwiseSqrt();
  std::vector<double> sorted(sigma.data(), sigma.data() + sigma.size());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = sorted[sorted.size() / 4], q3 = sorted[3 * sorted.size() / 4];
  double lo = 0.0, hi = 0.0;
  int nlo = 0, nhi = 0;
  for (Index i = 0; i < grid.size(); ++i) {
    if (sigma[i] <= q1) lo += sd[i], ++nlo;
    if (sigma[i] >= q3) hi += sd[i], ++nhi;
  }
  const double ratio = (lo / nlo) / (hi / nhi);
  const double t = sw.seconds();
  report(8, "hierarchical normalization", vmin >= 0.9 && vmax <= 1.1 && ratio >= 5.0 && t < 120.0,
         fmtn("pointwise variance in [%.4f, %.4f] (within [0.9, 1.1]); unnormalized SD ratio low/high sigma %.2f (>= 5); %.1fs",
              vmin, vmax, ratio, t));
}

TEST_CASE("A09 Radon oracle") {
  Stopwatch sw;
  const SpatialGrid grid(2, 64);
  double chord_err = 0.0;
  for (const double max_angle : {kTwoPi / 8.0, kTwoPi / 2.0}) {
    const RadonGeometry geo = RadonGeometry::equispaced(50, max_angle, 64, 64);
    const Sinogram s = radon_forward(FieldSample{grid, VectorXd::Ones(grid.size())}, geo);
    for (Index a = 0; a < s.values.rows(); ++a) {
      for (Index k = 0; k < s.values.cols(); ++k) {
        const double off = geo.offsets[static_cast<std::size_t>(k)];
        chord_err = std::max(chord_err, std::abs(s.values(a, k) - 2.0 * std::sqrt(1.0 - off * off)));
      }
    }
  }
  const RadonGeometry geo = RadonGeometry::equispaced(50, kTwoPi / 8.0, 64, 64);
  const FieldSample f{grid, standard_normal_vector(grid.size(), {909, 0})};
  const Sinogram g = Sinogram::from_flat(geo, standard_normal_vector(geo.rows(), {909, 1}));
  const double lhs = radon_forward(f, geo).flattened().dot(g.flattened());
  const double rhs = f.values.dot(radon_adjoint(g, grid).values);
  const double adj = std::abs(lhs - rhs) / std::abs(lhs);
  const double t = sw.seconds();
  report(9, "Radon oracle", chord_err < 1e-8 && adj < 1e-6 && t < 5.0,
         fmtn("constant-field chord max err %.2e (< 1e-8); adjoint rel defect %.2e (< 1e-6); %.2fs", chord_err, adj, t));
}

TEST_CASE("A10 limited-angle CT") {
  Stopwatch sw;
  int ratio_ok = 0, enriched = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CtConfig cfg;
    cfg.seed = seed;
    cfg.map_only = true;
    const CtResult r = run_ct(cfg);
    const double ratio = r.map_error / r.fbp_error;
    ratio_ok += ratio <= 0.5;
    enriched += r.inclusion.enriched();
    detail += fmtn("[seed %d: MAP %.3f FBP %.3f ratio %.3f; top-quartile share %.2f vs area %.2f] ", static_cast<int>(seed),
                   r.map_error, r.fbp_error, ratio, r.inclusion.top_quartile_share, r.inclusion.small_region_fraction);
  }
  const double t = sw.seconds();
  report(10, "limited-angle CT", ratio_ok == 5 && enriched >= 4 && t < 1800.0,
         detail + fmtn("error ratio <= 0.5 in %d/5; sigma enriched in %d/5 (>= 70%%); %.0fs", ratio_ok, enriched, t));
}

TEST_CASE("A11 NUTS on CT") {
  Stopwatch sw;
  CtConfig cfg;
  cfg.seed = 1;
  const CtResult r = run_ct(cfg);
  const double min_ess = r.chain->min_ess();
  const double div = static_cast<double>(r.chain->divergences) / r.chain->draws;
  const double t = sw.seconds();
  report(11, "NUTS on CT", min_ess >= 1000.0 && div < 0.01 && t < 3600.0,
         fmtn("%d params, min ESS %.0f (>= 1000); divergences %d/%d (< 1%%); step %.3g; %.0fs",
              static_cast<int>(r.chain->samples.cols()), min_ess, r.chain->divergences, r.chain->draws,
              r.chain->step_size, t));
}

TEST_CASE("A12 determinism") {
  Stopwatch sw;
  const fs::path root = fs::temp_directory_path() / "pdoprior_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"sample-prior", "sample-prior"},
      {"parametrix-report", "parametrix-report"},
      {"compare-fd", "compare-fd"},
      {"denoise", "denoise --noise-rel 0.05 --warmup 100 --draws 300"},
      {"hierarchical-sample", "hierarchical-sample --grid 32 --half-band 16"},
      {"ct", "ct --grid 32 --half-band 8 --angles 20 --detectors 32 --quad-order 32 --warmup 50 --draws 100"},
  };
  int failures = 0;
  std::string detail;
  for (const auto& [name, args] : runs) {
    int status[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (name + "_" + std::to_string(rep));
      const std::string cmd = std::string(PDOPRIOR_CLI) + " --seed 7 --out " + out.string() + " " + args + " > /dev/null";
      status[rep] = std::system(cmd.c_str());
    }
    int files = 0;
    const int bad = status[0] == 0 && status[1] == 0 ? compare_dirs(root / (name + "_0"), root / (name + "_1"), files) : 1;
    failures += bad;
    detail += fmtn("%s %s (%d files); ", name.c_str(), bad == 0 ? "identical" : "DIFFERS", files);
  }
  fs::remove_all(root);
  report(12, "determinism", failures == 0, detail + fmt("%.0fs", sw.seconds()));
}
