#ifndef MSFAVAR_SV_HPP
#define MSFAVAR_SV_HPP

#include "msfavar/core.hpp"
#include "msfavar/random.hpp"

#include <array>

namespace msfavar::sv {

// 10-component normal mixture approximating log chi^2_1 (Omori et al. 2007).
inline constexpr int kMixComponents = 10;
extern const std::array<double, kMixComponents> kMixProb;
extern const std::array<double, kMixComponents> kMixMean;
extern const std::array<double, kMixComponents> kMixVar;
inline constexpr double kLogOffset = 1e-7;

struct SvPrior {
  double rho_variance = 10.0;
  double mu_variance = 10.0;
  double phi_beta_a = 25.0;  // prior on (phi + 1) / 2
  double phi_beta_b = 5.0;
  double sigma_shape = 0.5;  // Gamma prior on sigma2_v, shape/rate
  double sigma_rate = 0.5;

  static SvPrior from(const PriorConfig& p);
};

/// Prior mean of phi implied by the Beta prior.
double prior_mean_phi(const SvPrior& prior);

struct SvParams {
  arma::vec rho;
  double mu = 0.0;
  double phi = 0.0;
  double sigma2_v = 0.0;
  arma::vec logvar_path;  // effective sample: periods r..T-1 of the input
};

struct SvDraws {
  arma::mat rho;        // n_draws x r
  arma::vec mu, phi, sigma2_v;
  arma::vec mean_variance_path;  // posterior mean of exp(v)
  double phi_acceptance = 0.0;
  double sigma_acceptance = 0.0;
};

struct SvResult {
  SvParams posterior_mean;
  SvDraws draws;
};

/// Gibbs sampler for y_t = sum_m rho_m y_{t-m} + exp(v_t / 2) eps_t with
/// v_t - mu = phi (v_{t-1} - mu) + eta_t.
SvResult estimate_ar_sv(const arma::vec& series, int r, const SvPrior& prior, int n_draws, int n_burn, Rng& rng);

/// Mixture indicators given log-squared residuals and the log-variance path.
arma::uvec sample_mixture_indicators(const arma::vec& log_sq, const arma::vec& logvar, Rng& rng);

/// Joint draw of the log-variance path given indicators (Kalman forward filter,
/// backward sampler). The initial state has the stationary distribution.
arma::vec sample_logvar_path(const arma::vec& log_sq, const arma::uvec& indicators, double mu, double phi,
                             double sigma2_v, Rng& rng);

struct ProxyOptions {
  int ar_order = 5;
  int n_draws = 2000;
  int n_burn = 1000;
  SvPrior prior;
};

/// Standardize, estimate AR(r)-SV, backfill the first r entries of the posterior
/// mean log-variance and standardize the result.
arma::vec volatility_proxy(const arma::vec& series, const ProxyOptions& options, Rng& rng);

/// Model-free alternative: trailing standard deviation over `window` periods,
/// backfilled and standardized.
arma::vec rolling_sd_proxy(const arma::vec& series, int window = 8);

}  // namespace msfavar::sv

#endif
