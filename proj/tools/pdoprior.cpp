#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdoprior/diagnostics.hpp"
#include "pdoprior/errors.hpp"
#include "pdoprior/experiments.hpp"
#include "pdoprior/io.hpp"
#include "pdoprior/prior.hpp"
#include "pdoprior/prior_map.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pdoprior;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitInstability = 3;

struct Global {
  std::string out = "out";
  std::uint64_t seed = 1;
  int threads = 1;
};

struct Bump {
  Index nx = 65;
  int half_band = 32;
  double alpha = 2.0;
  double base = 0.05;
  double amplitude = 2.0;
  double center = 0.5;
  double width = 0.5;

  BumpSetup setup() const { return BumpSetup{nx, half_band, alpha, base, amplitude, center, width}; }
};

void add_bump_options(CLI::App* cmd, Bump& b) {
  cmd->add_option("--nx", b.nx, "grid points")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--half-band", b.half_band, "frequencies -K..K-1")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", b.alpha, "symbol order")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-base", b.base, "sigma(x) offset")->capture_default_str();
  cmd->add_option("--sigma-amplitude", b.amplitude, "sigma(x) bump height")->capture_default_str();
  cmd->add_option("--sigma-center", b.center, "sigma(x) bump centre")->capture_default_str();
  cmd->add_option("--sigma-width", b.width, "sigma(x) bump width")->capture_default_str()->check(CLI::PositiveNumber);
}

json bump_json(const Bump& b) {
  return {{"nx", b.nx},       {"half_band", b.half_band}, {"alpha", b.alpha},  {"sigma_base", b.base},
          {"sigma_amplitude", b.amplitude}, {"sigma_center", b.center}, {"sigma_width", b.width}};
}

json nuts_json(const NutsConfig& n) {
  return {{"warmup", n.warmup}, {"draws", n.draws}, {"target_accept", n.target_accept}, {"max_depth", n.max_depth}};
}

json chain_json(const PosteriorChain& c) {
  return {{"step_size", c.step_size},
          {"divergences", c.divergences},
          {"mean_accept_stat", c.mean_accept_stat()},
          {"min_ess", c.min_ess()},
          {"mean_ess", c.ess.mean()}};
}

json optimizer_json(const OptimizerResult& r) {
  return {{"status", to_string(r.status)},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"value", r.value},
          {"gradient_norm", r.gradient_norm},
          {"initial_gradient_norm", r.initial_gradient_norm}};
}

VectorXd column_of(const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size())); }

VectorXd index_column(Index n) { return VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)); }

/// Rank-3 tensor [count, m, m] from fields on an m x m grid.
void write_field_stack(const fs::path& path, const std::vector<VectorXd>& fields, Index m) {
  std::vector<double> flat;
  for (const VectorXd& f : fields) flat.insert(flat.end(), f.data(), f.data() + f.size());
  write_tensor(path, {fields.size(), static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(m)}, flat,
               TensorFile::DType::Float64);
}

void write_chain_csv(const fs::path& path, const PosteriorChain& c) {
  VectorXd depth(c.draws), steps(c.draws), div(c.draws);
  for (int i = 0; i < c.draws; ++i) {
    depth[i] = c.tree_depth[static_cast<std::size_t>(i)];
    steps[i] = c.leapfrog_steps[static_cast<std::size_t>(i)];
    div[i] = c.divergent[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  }
  write_table_csv(path, {"draw", "log_density", "accept_stat", "tree_depth", "leapfrog_steps", "divergent"},
                  {index_column(c.draws), c.log_density, c.accept_stat, depth, steps, div});
}

std::string option_value(const CLI::Option* opt) {
  if (opt->get_expected_max() == 0) return opt->count() > 0 && opt->as<bool>() ? "true" : "false";
  std::vector<std::string> vals = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
  if (vals.empty()) {
    const std::string d = opt->get_default_str();
    return d;
  }
  if (opt->get_items_expected_max() <= 1) return vals.front();
  std::string joined = "[";
  for (std::size_t i = 0; i < vals.size(); ++i) joined += (i ? "," : "") + vals[i];
  return joined + "]";
}

void append_options(std::ostream& os, const CLI::App& app) {
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (opt->get_lnames().empty() || name == "help" || name == "config" || name == "out") continue;
    os << name << '=' << option_value(opt) << '\n';
  }
}

/// Resolved options of the global app and the selected subcommand, reloadable with --config.
std::string resolved_config(const CLI::App& app, const CLI::App& cmd) {
  std::ostringstream os;
  append_options(os, app);
  os << '[' << cmd.get_name() << "]\n";
  append_options(os, cmd);
  return os.str();
}

class Run {
public:
  Run(const Global& g, const CLI::App& app, const CLI::App& cmd) : dir_(g.out), command_(cmd.get_name()) {
    fs::create_directories(dir_);
    std::ofstream(dir_ / "config.ini") << resolved_config(app, cmd);
    meta_["command"] = command_;
    meta_["seed"] = g.seed;
    meta_["threads"] = g.threads;
    meta_["rng"] = kRngAlgorithm;
  }

  fs::path file(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }
  json& meta() { return meta_; }

  void finish() {
    std::sort(files_.begin(), files_.end());
    meta_["files"] = files_;
    write_json(dir_ / "metadata.json", meta_);
  }

private:
  fs::path dir_;
  std::string command_;
  json meta_;
  std::vector<std::string> files_;
};

// ---------------------------------------------------------------- subcommands

struct SamplePriorOpts {
  Bump bump;
  int order = 3;
};

void run_sample_prior(Run& run, const Global& g, const SamplePriorOpts& o) {
  const BumpSetup setup = o.bump.setup();
  const SymbolSpec spec = setup.symbol();
  const FrequencyBand band = setup.band();
  const ParametrixTensor par = parametrix_expand(spec, band, o.order);
  for (std::size_t k = 0; k < par.summands.size(); ++k) {
    write_tensor(run.file("term_" + std::to_string(k) + ".ipt"), par.summands[k].values);
  }
  write_tensor(run.file("partial_sum.ipt"), par.partial_sum.values);
  const std::vector<double> norms = term_norms(par);
  write_table_csv(run.file("term_norms.csv"), {"k", "norm"}, {index_column(static_cast<Index>(norms.size())), column_of(norms)});

  const WhiteNoiseSpectrum noise = sample_white_noise(band, {g.seed, 0});
  const SynthesisResult xi = synthesize(par.partial_sum, setup.grid(), noise);
  write_tensor(run.file("sample.ipt"), xi.field.values);
  write_field_csv(run.file("sample.csv"), setup.grid(), {"sigma", "xi"}, {spec.sigma.values(), xi.field.values});

  run.meta()["parameters"] = bump_json(o.bump);
  run.meta()["parameters"]["trunc_order"] = o.order;
  run.meta()["band"] = band_to_json(band);
  run.meta()["grid"] = grid_to_json(setup.grid());
  run.meta()["term_norms"] = norms;
  run.meta()["reality_defect"] = reality_defect(par);
  run.meta()["imaginary_residue"] = xi.imaginary_residue;
}

struct ReportOpts {
  Bump bump;
  int order = 3;
  std::vector<int> tails{8, 16, 32, 64};
};

void run_parametrix_report(Run& run, const ReportOpts& o) {
  const BumpSetup setup = o.bump.setup();
  const SymbolSpec spec = setup.symbol();
  const ParametrixTensor par = parametrix_expand(spec, setup.band(), o.order);
  for (std::size_t k = 0; k < par.summands.size(); ++k) {
    write_tensor(run.file("abs_term_" + std::to_string(k) + ".ipt"), MatrixXd(par.summands[k].values.cwiseAbs()));
  }
  const std::vector<double> norms = term_norms(par);
  VectorXd ratio(static_cast<Index>(norms.size()));
  for (std::size_t k = 0; k < norms.size(); ++k) ratio[static_cast<Index>(k)] = norms[k] / norms[0];
  write_table_csv(run.file("term_norms.csv"), {"k", "norm", "ratio_to_q0"},
                  {index_column(static_cast<Index>(norms.size())), column_of(norms), ratio});

  const Index nt = static_cast<Index>(o.tails.size());
  VectorXd m(nt), emp(nt), bound(nt);
  for (Index i = 0; i < nt; ++i) {
    const int mi = o.tails[static_cast<std::size_t>(i)];
    m[i] = mi;
    emp[i] = empirical_tail_variance(spec, mi);
    bound[i] = truncation_error_bound(spec, mi);
  }
  write_table_csv(run.file("truncation_tail.csv"), {"M", "empirical_tail", "bound"}, {m, emp, bound});

  run.meta()["parameters"] = bump_json(o.bump);
  run.meta()["parameters"]["trunc_order"] = o.order;
  run.meta()["band"] = band_to_json(setup.band());
  run.meta()["term_norms"] = norms;
}

struct CompareOpts {
  Bump bump;
  std::vector<double> alphas{1.5, 2.0};
  int order = 2;
  double cutoff = 16.0;
};

double correlation(const VectorXd& a, const VectorXd& b) {
  const VectorXd x = a.array() - a.mean();
  const VectorXd y = b.array() - b.mean();
  return x.dot(y) / (x.norm() * y.norm());
}

void run_compare_fd(Run& run, const Global& g, const CompareOpts& o) {
  const BumpSetup base = o.bump.setup();
  const WhiteNoiseSpectrum noise = sample_white_noise(base.band(), {g.seed, 0});
  const FieldSample psi = white_noise_field(noise, base.grid());
  const Index na = static_cast<Index>(o.alphas.size());
  VectorXd alpha(na), corr(na), hf_pm(na), hf_fd(na);
  json per_alpha = json::array();
  for (Index a = 0; a < na; ++a) {
    BumpSetup s = base;
    s.alpha = o.alphas[static_cast<std::size_t>(a)];
    const SymbolSpec spec = s.symbol();
    const ParametrixTensor par = parametrix_expand(spec, s.band(), o.order);
    std::vector<std::string> names;
    std::vector<VectorXd> cols;
    for (int k = 0; k <= o.order; ++k) {
      names.push_back("parametrix_N" + std::to_string(k));
      cols.push_back(synthesize(par.partial_sum_to(k), s.grid(), noise).field.values);
    }
    const FieldSample fd = fd_reference_1d(spec, psi);
    names.push_back("fd");
    cols.push_back(fd.values);
    std::ostringstream tag;
    tag << "alpha_" << format_double(s.alpha);
    write_field_csv(run.file("fields_" + tag.str() + ".csv"), s.grid(), names, cols);

    alpha[a] = s.alpha;
    corr[a] = correlation(cols[static_cast<std::size_t>(o.order)], fd.values);
    hf_pm[a] = high_frequency_energy_fraction(FieldSample{s.grid(), cols[static_cast<std::size_t>(o.order)]}, o.cutoff);
    hf_fd[a] = high_frequency_energy_fraction(fd, o.cutoff);
    per_alpha.push_back({{"alpha", s.alpha}, {"correlation", corr[a]}, {"hf_parametrix", hf_pm[a]}, {"hf_fd", hf_fd[a]}});
  }
  write_table_csv(run.file("comparison.csv"), {"alpha", "correlation", "hf_fraction_parametrix", "hf_fraction_fd"},
                  {alpha, corr, hf_pm, hf_fd});
  write_field_csv(run.file("noise.csv"), base.grid(), {"psi"}, {psi.values});
  run.meta()["parameters"] = bump_json(o.bump);
  run.meta()["parameters"]["alphas"] = o.alphas;
  run.meta()["parameters"]["trunc_order"] = o.order;
  run.meta()["parameters"]["hf_cutoff"] = o.cutoff;
  run.meta()["results"] = per_alpha;
}

struct DenoiseOpts {
  Bump bump;
  DenoiseConfig cfg;
};

void run_denoise_cmd(Run& run, const Global& g, DenoiseOpts o) {
  o.cfg.setup = o.bump.setup();
  o.cfg.seed = g.seed;
  const DenoiseResult r = run_denoise(o.cfg);
  const Index n = r.grid.size();
  const VectorXd map_field = r.prior->apply(r.map.x);
  std::vector<std::string> names{"truth", "y", "map", "exact_mode"};
  std::vector<VectorXd> cols{r.truth, r.y, map_field, r.prior->apply(r.exact_mode)};
  if (r.summary) {
    for (const auto& [name, col] : std::vector<std::pair<std::string, VectorXd>>{{"mean", r.summary->mean},
                                                                                 {"variance", r.summary->variance},
                                                                                 {"hpd_lo", r.summary->hpd_lower},
                                                                                 {"hpd_hi", r.summary->hpd_upper}}) {
      names.push_back(name);
      cols.push_back(col);
    }
  }
  write_field_csv(run.file("summary.csv"), r.grid, names, cols);

  // coefficients in whitened coordinates
  const Index p = r.band.size();
  VectorXd eta(p);
  for (Index j = 0; j < p; ++j) eta[j] = r.band.frequency(j)[0];
  std::vector<std::string> cn{"index", "eta", "s_true", "map", "exact_mode", "exact_sd"};
  std::vector<VectorXd> cc{index_column(p), eta, r.s_true, r.map.x, r.exact_mode, r.exact_stddev};
  if (r.chain) {
    const auto summary_s = posterior_summary(r.chain->samples, [](const VectorXd& s) { return s; });
    cn.insert(cn.end(), {"mean", "hpd_lo", "hpd_hi", "ess"});
    cc.insert(cc.end(), {summary_s.mean, summary_s.hpd_lower, summary_s.hpd_upper, r.chain->ess});
    write_tensor(run.file("samples.ipt"), r.chain->samples);
    write_chain_csv(run.file("chain.csv"), *r.chain);
    run.meta()["chain"] = chain_json(*r.chain);
    double width = 0.0;
    int covered = 0;
    for (Index i = 0; i < n; ++i) {
      width += r.summary->hpd_upper[i] - r.summary->hpd_lower[i];
      covered += r.truth[i] >= r.summary->hpd_lower[i] && r.truth[i] <= r.summary->hpd_upper[i];
    }
    run.meta()["mean_hpd_width"] = width / static_cast<double>(n);
    run.meta()["hpd_coverage"] = static_cast<double>(covered) / static_cast<double>(n);
  }
  write_table_csv(run.file("coefficients.csv"), cn, cc);
  write_tensor(run.file("prior_map.ipt"), r.prior->matrix());

  run.meta()["parameters"] = bump_json(o.bump);
  run.meta()["parameters"]["trunc_order"] = o.cfg.truncation_order;
  run.meta()["parameters"]["noise_rel"] = o.cfg.noise_rel;
  run.meta()["parameters"]["map_only"] = o.cfg.map_only;
  run.meta()["nuts"] = nuts_json(o.cfg.nuts);
  run.meta()["sigma_noise"] = r.sigma_noise;
  run.meta()["map"] = optimizer_json(r.map);
  run.meta()["map_mode_error"] = (r.map.x - r.exact_mode).cwiseAbs().maxCoeff();
}

struct HierOpts {
  Index grid = 64;
  int half_band = 32;
  double a2 = 6.25;
  double a3 = 2.5;
  double sharpness = 10.0;
  int sigma_draws = 3;
  int samples = 3;
};

void run_hierarchical(Run& run, const Global& g, const HierOpts& o) {
  const SpatialGrid grid(2, o.grid);
  const FrequencyBand band = FrequencyBand::symmetric(2, o.half_band);
  const HierarchicalSpec spec = make_hierarchical_spec(grid, band, o.a2, o.a3);
  const HierarchicalPriorMap normalized(spec, true);
  const LevelSetSpec level{o.sharpness};
  const Index nb = normalized.block_size();
  const RngSeed base{g.seed, 0};

  std::vector<VectorXd> sigmas, lengths, norms, xi_n, xi_r, lv;
  for (int a = 0; a < o.sigma_draws; ++a) {
    const RngSeed sa = substream(base, static_cast<std::uint64_t>(a));
    const VectorXd s1 = standard_normal_vector(nb, substream(sa, 0));
    const VectorXd sigma = normalized.sigma_field(s1);
    sigmas.push_back(sigma);
    lengths.push_back((o.a3 + sigma.array()).unaryExpr([](double e) { return std::pow(10.0, e); }).matrix());
    norms.push_back(normalized.normalization(sigma));
    const LinearPriorMap fixed = normalized.with_fixed_sigma(s1);
    for (int b = 0; b < o.samples; ++b) {
      const VectorXd s2 = standard_normal_vector(nb, substream(sa, 1 + static_cast<std::uint64_t>(b)));
      const VectorXd xi = fixed.apply(s2);
      xi_n.push_back(xi);
      xi_r.push_back(xi.cwiseProduct(norms.back()));
      lv.push_back(level_set_transform(FieldSample{grid, xi}, level).values);
    }
  }
  write_field_stack(run.file("sigma.ipt"), sigmas, o.grid);
  write_field_stack(run.file("inverse_length.ipt"), lengths, o.grid);
  write_field_stack(run.file("normalization.ipt"), norms, o.grid);
  write_field_stack(run.file("xi_normalized.ipt"), xi_n, o.grid);
  write_field_stack(run.file("xi_unnormalized.ipt"), xi_r, o.grid);
  write_field_stack(run.file("level_set.ipt"), lv, o.grid);
  write_field_csv(run.file("sigma.csv"), grid, {"sigma", "inverse_length", "normalization"},
                  {sigmas.front(), lengths.front(), norms.front()});

  run.meta()["parameters"] = {{"grid", o.grid},  {"half_band", o.half_band}, {"a2", o.a2},
                              {"a3", o.a3},      {"sharpness", o.sharpness}, {"sigma_draws", o.sigma_draws},
                              {"samples", o.samples}};
  run.meta()["a1"] = spec.a1;
  run.meta()["band"] = band_to_json(band);
  run.meta()["layout"] = "[sigma_draw * samples + sample, x0, x1]";
}

void run_ct_cmd(Run& run, const Global& g, CtConfig cfg) {
  cfg.seed = g.seed;
  const CtResult r = run_ct(cfg);
  const Index m = cfg.grid_points;
  write_tensor(run.file("phantom.ipt"), r.phantom.field.values);
  const Sinogram clean = Sinogram::from_flat(r.geometry, r.y_clean);
  const Sinogram noisy = Sinogram::from_flat(r.geometry, r.y);
  write_tensor(run.file("sinogram_clean.ipt"), clean.values);
  write_tensor(run.file("sinogram.ipt"), noisy.values);
  {
    const Index rows = r.geometry.rows();
    VectorXd th(rows), s(rows);
    const Index nd = static_cast<Index>(r.geometry.offsets.size());
    for (Index i = 0; i < rows; ++i) {
      th[i] = r.geometry.angles[static_cast<std::size_t>(i / nd)];
      s[i] = r.geometry.offsets[static_cast<std::size_t>(i % nd)];
    }
    write_table_csv(run.file("sinogram.csv"), {"theta", "s", "y_clean", "y"}, {th, s, r.y_clean, r.y});
  }
  write_tensor(run.file("fbp.ipt"), r.fbp.values);
  write_tensor(run.file("map_image.ipt"), r.image_map);
  write_tensor(run.file("map_sigma.ipt"), r.sigma_map);
  write_tensor(run.file("map_xi.ipt"), r.xi_map);
  write_tensor(run.file("map_parameters.ipt"), r.map.x);

  std::vector<std::string> names{"phantom", "fbp", "map", "sigma_map", "xi_map"};
  std::vector<VectorXd> cols{r.phantom.field.values, r.fbp.values, r.image_map, r.sigma_map, r.xi_map};
  if (r.summary) {
    names.insert(names.end(), {"mean", "variance", "hpd_lo", "hpd_hi"});
    cols.insert(cols.end(), {r.summary->mean, r.summary->variance, r.summary->hpd_lower, r.summary->hpd_upper});
    write_chain_csv(run.file("chain.csv"), *r.chain);
    write_table_csv(run.file("ess.csv"), {"index", "ess"}, {index_column(r.chain->ess.size()), r.chain->ess});
    // a few pushed-forward posterior draws
    const auto fixed = std::make_shared<LinearPriorMap>(
        HierarchicalPriorMap(make_hierarchical_spec(r.grid, r.band, cfg.a2, cfg.a3)).with_fixed_sigma(r.map.x.head(r.map.x.size() / 2)));
    const LevelSetSpec level{cfg.sharpness};
    std::vector<VectorXd> draws;
    const int stride = std::max(1, r.chain->draws / 4);
    for (int d = stride - 1; d < r.chain->draws; d += stride) {
      draws.push_back(level_set_transform(FieldSample{r.grid, fixed->apply(r.chain->samples.row(d).transpose())}, level).values);
    }
    write_field_stack(run.file("posterior_draws.ipt"), draws, m);
    run.meta()["chain"] = chain_json(*r.chain);
    run.meta()["divergence_fraction"] = static_cast<double>(r.chain->divergences) / r.chain->draws;
  }
  write_field_csv(run.file("fields.csv"), r.grid, names, cols);

  json disks = json::array();
  for (const Disk& d : r.phantom.disks) disks.push_back({{"u", d.u}, {"v", d.v}, {"radius", d.radius}});
  run.meta()["phantom_disks"] = disks;
  run.meta()["parameters"] = {{"grid", cfg.grid_points}, {"half_band", cfg.half_band}, {"angles", cfg.angles},
                              {"max_angle", cfg.max_angle}, {"detectors", cfg.detectors}, {"quad_order", cfg.quad_order},
                              {"noise_rel", cfg.noise_rel}, {"a2", cfg.a2},           {"a3", cfg.a3},
                              {"sharpness", cfg.sharpness}, {"min_radius", cfg.phantom.min_radius},
                              {"max_radius", cfg.phantom.max_radius}, {"max_attempts", cfg.phantom.max_attempts},
                              {"map_only", cfg.map_only}};
  run.meta()["nuts"] = nuts_json(cfg.nuts);
  run.meta()["sigma_noise"] = r.sigma_noise;
  run.meta()["map"] = optimizer_json(r.map);
  run.meta()["fbp_error"] = r.fbp_error;
  run.meta()["map_error"] = r.map_error;
  run.meta()["inclusion"] = {{"median_radius", r.inclusion.median_radius},
                             {"small_region_fraction", r.inclusion.small_region_fraction},
                             {"top_quartile_share", r.inclusion.top_quartile_share}};
}

void add_nuts_options(CLI::App* cmd, NutsConfig& n) {
  cmd->add_option("--warmup", n.warmup, "NUTS warmup iterations")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--draws", n.draws, "NUTS draws kept")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--target-accept", n.target_accept)->capture_default_str()->check(CLI::Range(0.05, 0.99));
  cmd->add_option("--max-depth", n.max_depth)->capture_default_str()->check(CLI::Range(1, 20));
}

void add_lbfgs_options(CLI::App* cmd, OptimizerConfig& c) {
  cmd->add_option("--lbfgs-memory", c.memory)->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--lbfgs-iterations", c.max_iterations)->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--lbfgs-tolerance", c.gradient_tolerance)->capture_default_str()->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inhomogeneous Whittle-Matern priors on the torus: sampling and Bayesian inversion"};
  app.set_config("--config", "", "INI file with option values");
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "base random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (computations are single-threaded)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  SamplePriorOpts sp;
  auto* c_sp = app.add_subcommand("sample-prior", "parametrix terms and a 1D prior draw");
  add_bump_options(c_sp, sp.bump);
  c_sp->add_option("--trunc-order", sp.order, "truncation order N")->capture_default_str()->check(CLI::NonNegativeNumber);

  ReportOpts rp;
  auto* c_rp = app.add_subcommand("parametrix-report", "term magnitudes, norms and truncation tails");
  add_bump_options(c_rp, rp.bump);
  c_rp->add_option("--trunc-order", rp.order)->capture_default_str()->check(CLI::NonNegativeNumber);
  c_rp->add_option("--tails", rp.tails, "frequency cut-offs M")->capture_default_str();

  CompareOpts cf;
  auto* c_cf = app.add_subcommand("compare-fd", "parametrix against the finite-difference reference");
  add_bump_options(c_cf, cf.bump);
  c_cf->add_option("--alphas", cf.alphas)->capture_default_str();
  c_cf->add_option("--trunc-order", cf.order)->capture_default_str()->check(CLI::NonNegativeNumber);
  c_cf->add_option("--hf-cutoff", cf.cutoff)->capture_default_str();

  DenoiseOpts dn;
  auto* c_dn = app.add_subcommand("denoise", "1D denoising: MAP, NUTS and HPD summaries");
  add_bump_options(c_dn, dn.bump);
  c_dn->add_option("--trunc-order", dn.cfg.truncation_order)->capture_default_str()->check(CLI::NonNegativeNumber);
  c_dn->add_option("--noise-rel", dn.cfg.noise_rel)->capture_default_str()->check(CLI::PositiveNumber);
  c_dn->add_flag("--map-only", dn.cfg.map_only, "skip NUTS");
  add_nuts_options(c_dn, dn.cfg.nuts);
  add_lbfgs_options(c_dn, dn.cfg.lbfgs);

  HierOpts hs;
  auto* c_hs = app.add_subcommand("hierarchical-sample", "2D hierarchical prior draws");
  c_hs->add_option("--grid", hs.grid)->capture_default_str()->check(CLI::Range(2, 512));
  c_hs->add_option("--half-band", hs.half_band)->capture_default_str()->check(CLI::NonNegativeNumber);
  c_hs->add_option("--a2", hs.a2)->capture_default_str()->check(CLI::PositiveNumber);
  c_hs->add_option("--a3", hs.a3)->capture_default_str();
  c_hs->add_option("--sharpness", hs.sharpness)->capture_default_str()->check(CLI::PositiveNumber);
  c_hs->add_option("--sigma-draws", hs.sigma_draws)->capture_default_str()->check(CLI::PositiveNumber);
  c_hs->add_option("--samples", hs.samples, "draws per sigma field")->capture_default_str()->check(CLI::PositiveNumber);

  CtConfig ct;
  auto* c_ct = app.add_subcommand("ct", "limited-angle CT with the hierarchical level-set prior");
  c_ct->add_option("--grid", ct.grid_points)->capture_default_str()->check(CLI::Range(4, 512));
  c_ct->add_option("--half-band", ct.half_band)->capture_default_str()->check(CLI::NonNegativeNumber);
  c_ct->add_option("--angles", ct.angles)->capture_default_str()->check(CLI::Range(1, 100000));
  c_ct->add_option("--max-angle", ct.max_angle, "radians")->default_str(format_double(ct.max_angle))->check(CLI::PositiveNumber);
  c_ct->add_option("--detectors", ct.detectors)->capture_default_str()->check(CLI::PositiveNumber);
  c_ct->add_option("--quad-order", ct.quad_order)->capture_default_str()->check(CLI::Range(2, 100000));
  c_ct->add_option("--noise-rel", ct.noise_rel)->capture_default_str()->check(CLI::PositiveNumber);
  c_ct->add_option("--a2", ct.a2)->capture_default_str()->check(CLI::PositiveNumber);
  c_ct->add_option("--a3", ct.a3)->capture_default_str();
  c_ct->add_option("--sharpness", ct.sharpness)->capture_default_str()->check(CLI::PositiveNumber);
  c_ct->add_option("--min-radius", ct.phantom.min_radius)->capture_default_str()->check(CLI::PositiveNumber);
  c_ct->add_option("--max-radius", ct.phantom.max_radius)->capture_default_str()->check(CLI::PositiveNumber);
  c_ct->add_option("--max-attempts", ct.phantom.max_attempts)->capture_default_str()->check(CLI::NonNegativeNumber);
  c_ct->add_flag("--map-only", ct.map_only, "skip NUTS");
  add_nuts_options(c_ct, ct.nuts);
  add_lbfgs_options(c_ct, ct.lbfgs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    Run run(g, app, *cmd);
    if (cmd == c_sp) run_sample_prior(run, g, sp);
    else if (cmd == c_rp) run_parametrix_report(run, rp);
    else if (cmd == c_cf) run_compare_fd(run, g, cf);
    else if (cmd == c_dn) run_denoise_cmd(run, g, dn);
    else if (cmd == c_hs) run_hierarchical(run, g, hs);
    else run_ct_cmd(run, g, ct);
    run.finish();
  } catch (const InstabilityError& e) {
    std::cerr << "numerical instability: " << e.what() << '\n';
    return kExitInstability;
  } catch (const EllipticityError& e) {
    std::cerr << "symbol not elliptic: " << e.what() << '\n';
    return kExitInstability;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
