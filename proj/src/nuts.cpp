#include "pdoprior/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdoprior/diagnostics.hpp"

namespace pdoprior {

void NutsConfig::validate() const {
  if (warmup < 1) throw std::invalid_argument("NutsConfig: warmup must be at least 1");
  if (draws < 1) throw std::invalid_argument("NutsConfig: draws must be at least 1");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw std::invalid_argument("NutsConfig: target_accept must be in (0, 1)");
  if (max_depth < 1 || max_depth > 20) throw std::invalid_argument("NutsConfig: max_depth must be in [1, 20]");
  if (!(max_energy_error > 0.0)) throw std::invalid_argument("NutsConfig: max_energy_error must be positive");
  if (initial_step_size && !(*initial_step_size > 0.0)) throw std::invalid_argument("NutsConfig: step size must be positive");
}

double PosteriorChain::mean_accept_stat() const { return accept_stat.size() ? accept_stat.mean() : 0.0; }
double PosteriorChain::min_ess() const { return ess.size() ? ess.minCoeff() : 0.0; }

DualAveraging::DualAveraging(double initial_step, double target, double gamma, double t0, double kappa)
    : mu_(std::log(10.0 * initial_step)), target_(target), gamma_(gamma), t0_(t0), kappa_(kappa), step_(initial_step) {}

void DualAveraging::update(double accept_stat) {
  ++count_;
  const double a = std::min(1.0, accept_stat);
  const double n = static_cast<double>(count_);
  const double eta = 1.0 / (n + t0_);
  h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - a);
  const double x = mu_ - h_bar_ * std::sqrt(n) / gamma_;
  const double w = std::pow(n, -kappa_);
  log_step_bar_ = (1.0 - w) * log_step_bar_ + w * x;
  step_ = std::exp(x);
}

double DualAveraging::final_step() const noexcept { return count_ > 0 ? std::exp(log_step_bar_) : step_; }

namespace {

struct PhasePoint {
  VectorXd q;
  VectorXd p;
  VectorXd g;  // gradient of the log-density
  double logp = 0.0;
};

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

bool criterion(const VectorXd& p_sharp_minus, const VectorXd& p_sharp_plus, const VectorXd& rho) {
  return p_sharp_plus.dot(rho) > 0.0 && p_sharp_minus.dot(rho) > 0.0;
}

class Sampler {
public:
  Sampler(const LogDensity& target, const NutsConfig& config, Engine& engine)
      : target_(target), cfg_(config), engine_(engine) {}

  double hamiltonian(const PhasePoint& z) const { return -z.logp + 0.5 * z.p.squaredNorm(); }

  void evaluate(PhasePoint& z) const {
    try {
      z.logp = target_.log_density_gradient(z.q, z.g);
      if (!z.g.allFinite()) z.logp = -std::numeric_limits<double>::infinity();
    } catch (const std::domain_error&) {
      z.logp = -std::numeric_limits<double>::infinity();
    }
    if (std::isnan(z.logp)) z.logp = -std::numeric_limits<double>::infinity();
  }

  void leapfrog(PhasePoint& z, double eps) const {
    z.p += 0.5 * eps * z.g;
    z.q += eps * z.p;
    evaluate(z);
    if (std::isfinite(z.logp)) z.p += 0.5 * eps * z.g;
  }

  double uniform() { return unif_(engine_); }

  struct Result {
    PhasePoint sample;
    double accept_stat = 0.0;
    int depth = 0;
    int n_leapfrog = 0;
    bool divergent = false;
  };

  Result transition(const PhasePoint& start, double eps) {
    eps_ = eps;
    divergent_ = false;
    z_ = start;
    for (Index k = 0; k < z_.p.size(); ++k) z_.p[k] = normal_(engine_);

    PhasePoint z_fwd = z_, z_bwd = z_, z_sample = z_, z_propose = z_;
    VectorXd p_fwd_fwd = z_.p, p_sharp_fwd_fwd = z_.p;
    VectorXd p_fwd_bwd = z_.p, p_sharp_fwd_bwd = z_.p;
    VectorXd p_bwd_fwd = z_.p, p_sharp_bwd_fwd = z_.p;
    VectorXd p_bwd_bwd = z_.p, p_sharp_bwd_bwd = z_.p;
    VectorXd rho = z_.p;
    double log_sum_weight = 0.0;
    const double h0 = hamiltonian(z_);
    int n_leapfrog = 0;
    double sum_metro = 0.0;
    int depth = 0;

    while (depth < cfg_.max_depth) {
      VectorXd rho_fwd = VectorXd::Zero(rho.size());
      VectorXd rho_bwd = VectorXd::Zero(rho.size());
      bool valid = false;
      double lsw_subtree = -std::numeric_limits<double>::infinity();
      if (uniform() > 0.5) {
        z_ = z_fwd;
        rho_bwd = rho;
        p_bwd_fwd = p_fwd_bwd;
        p_sharp_bwd_fwd = p_sharp_fwd_bwd;
        valid = build_tree(depth, z_propose, p_sharp_fwd_bwd, p_sharp_fwd_fwd, rho_fwd, p_fwd_bwd, p_fwd_fwd, h0, 1.0,
                           n_leapfrog, lsw_subtree, sum_metro);
        z_fwd = z_;
      } else {
        z_ = z_bwd;
        rho_fwd = rho;
        p_fwd_bwd = p_bwd_fwd;
        p_sharp_fwd_bwd = p_sharp_bwd_fwd;
        valid = build_tree(depth, z_propose, p_sharp_bwd_fwd, p_sharp_bwd_bwd, rho_bwd, p_bwd_fwd, p_bwd_bwd, h0, -1.0,
                           n_leapfrog, lsw_subtree, sum_metro);
        z_bwd = z_;
      }
      if (!valid) break;
      ++depth;
      if (lsw_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (uniform() < std::exp(lsw_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);

      rho = rho_bwd + rho_fwd;
      bool persist = criterion(p_sharp_bwd_bwd, p_sharp_fwd_fwd, rho);
      VectorXd rho_ext = rho_bwd + p_fwd_bwd;
      persist = persist && criterion(p_sharp_bwd_bwd, p_sharp_fwd_bwd, rho_ext);
      rho_ext = rho_fwd + p_bwd_fwd;
      persist = persist && criterion(p_sharp_bwd_fwd, p_sharp_fwd_fwd, rho_ext);
      if (!persist) break;
    }
    Result r;
    r.sample = z_sample;
    r.accept_stat = n_leapfrog > 0 ? sum_metro / n_leapfrog : 0.0;
    r.depth = depth;
    r.n_leapfrog = n_leapfrog;
    r.divergent = divergent_;
    return r;
  }

private:
  bool build_tree(int depth, PhasePoint& z_propose, VectorXd& p_sharp_beg, VectorXd& p_sharp_end, VectorXd& rho,
                  VectorXd& p_beg, VectorXd& p_end, double h0, double sign, int& n_leapfrog, double& log_sum_weight,
                  double& sum_metro) {
    if (depth == 0) {
      leapfrog(z_, sign * eps_);
      ++n_leapfrog;
      double h = hamiltonian(z_);
      if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
      if (h - h0 > cfg_.max_energy_error) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      z_propose = z_;
      p_sharp_beg = z_.p;
      p_sharp_end = p_sharp_beg;
      rho += z_.p;
      p_beg = z_.p;
      p_end = p_beg;
      return !divergent_;
    }
    const Index n = z_.p.size();
    double lsw_init = -std::numeric_limits<double>::infinity();
    VectorXd p_init_end(n), p_sharp_init_end(n);
    VectorXd rho_init = VectorXd::Zero(n);
    if (!build_tree(depth - 1, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end, h0, sign,
                    n_leapfrog, lsw_init, sum_metro)) {
      return false;
    }
    PhasePoint z_propose_final = z_;
    double lsw_final = -std::numeric_limits<double>::infinity();
    VectorXd p_final_beg(n), p_sharp_final_beg(n);
    VectorXd rho_final = VectorXd::Zero(n);
    if (!build_tree(depth - 1, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg, p_end, h0, sign,
                    n_leapfrog, lsw_final, sum_metro)) {
      return false;
    }
    const double lsw_subtree = log_sum_exp(lsw_init, lsw_final);
    log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);
    if (lsw_final > lsw_subtree) {
      z_propose = z_propose_final;
    } else if (uniform() < std::exp(lsw_final - lsw_subtree)) {
      z_propose = z_propose_final;
    }
    const VectorXd rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    bool persist = criterion(p_sharp_beg, p_sharp_end, rho_subtree);
    VectorXd rho_ext = rho_init + p_final_beg;
    persist = persist && criterion(p_sharp_beg, p_sharp_final_beg, rho_ext);
    rho_ext = rho_final + p_init_end;
    persist = persist && criterion(p_sharp_init_end, p_sharp_end, rho_ext);
    return persist;
  }

  const LogDensity& target_;
  const NutsConfig& cfg_;
  Engine& engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
  PhasePoint z_;
  double eps_ = 1.0;
  bool divergent_ = false;
};

}  // namespace

double find_reasonable_step_size(const LogDensity& target, const VectorXd& x, Engine& engine) {
  NutsConfig cfg;
  Sampler s(target, cfg, engine);
  PhasePoint z0;
  z0.q = x;
  s.evaluate(z0);
  if (!std::isfinite(z0.logp)) throw std::domain_error("find_reasonable_step_size: non-finite log-density at start");
  std::normal_distribution<double> normal(0.0, 1.0);
  z0.p.resize(x.size());
  for (Index k = 0; k < x.size(); ++k) z0.p[k] = normal(engine);
  const double h0 = s.hamiltonian(z0);

  auto log_ratio = [&](double eps) {
    PhasePoint z = z0;
    s.leapfrog(z, eps);
    const double h = s.hamiltonian(z);
    return std::isfinite(h) ? h0 - h : -std::numeric_limits<double>::infinity();
  };
  double eps = 1.0;
  const double first = log_ratio(eps);
  const double dir = first > std::log(0.5) ? 1.0 : -1.0;
  for (int k = 0; k < 100; ++k) {
    const double lr = log_ratio(eps);
    if (dir > 0.0 ? !(lr > std::log(0.5)) : lr > std::log(0.5)) break;
    eps = dir > 0.0 ? 2.0 * eps : 0.5 * eps;
  }
  return eps;
}

PosteriorChain nuts_sample(const LogDensity& target, const NutsConfig& config, const RngSeed& seed,
                           const VectorXd& init) {
  config.validate();
  if (init.size() != target.dimension()) throw std::invalid_argument("nuts_sample: initial point has the wrong length");
  Engine engine = make_engine(seed);
  Sampler sampler(target, config, engine);

  PhasePoint z;
  z.q = init;
  sampler.evaluate(z);
  if (!std::isfinite(z.logp)) throw std::domain_error("nuts_sample: non-finite log-density at the initial point");
  z.p = VectorXd::Zero(init.size());

  const double eps0 = config.initial_step_size ? *config.initial_step_size : find_reasonable_step_size(target, init, engine);
  DualAveraging da(eps0, config.target_accept, config.gamma, config.t0, config.kappa);

  for (int it = 0; it < config.warmup; ++it) {
    const auto r = sampler.transition(z, da.step());
    z = r.sample;
    da.update(r.accept_stat);
  }
  const double eps = da.final_step();

  PosteriorChain chain;
  chain.warmup = config.warmup;
  chain.draws = config.draws;
  chain.step_size = eps;
  chain.samples.resize(config.draws, init.size());
  chain.log_density.resize(config.draws);
  chain.accept_stat.resize(config.draws);
  for (int it = 0; it < config.draws; ++it) {
    const auto r = sampler.transition(z, eps);
    z = r.sample;
    chain.samples.row(it) = z.q.transpose();
    chain.log_density[it] = z.logp;
    chain.accept_stat[it] = r.accept_stat;
    chain.tree_depth.push_back(r.depth);
    chain.leapfrog_steps.push_back(r.n_leapfrog);
    chain.divergent.push_back(r.divergent);
    if (r.divergent) ++chain.divergences;
  }
  auto [e, flags] = ess_columns(chain.samples);
  chain.ess = std::move(e);
  chain.ess_constant = std::move(flags);
  return chain;
}

PosteriorChain nuts_sample(const LogDensity& target, int warmup, int draws, const RngSeed& seed) {
  NutsConfig cfg;
  cfg.warmup = warmup;
  cfg.draws = draws;
  return nuts_sample(target, cfg, seed, VectorXd::Zero(target.dimension()));
}

}  // namespace pdoprior
