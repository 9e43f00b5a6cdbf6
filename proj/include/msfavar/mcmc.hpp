#ifndef MSFAVAR_MCMC_HPP
#define MSFAVAR_MCMC_HPP

#include "msfavar/core.hpp"
#include "msfavar/factor.hpp"
#include "msfavar/random.hpp"
#include "msfavar/regime.hpp"

#include <optional>
#include <string>
#include <vector>

namespace msfavar::mcmc {

struct ArVariances {
  arma::vec variances;
  std::vector<bool> fallback;  // sample variance used instead of the AR fit
  std::vector<std::string> warnings;
};

/// Residual variance of a univariate OLS AR(lag) fit with intercept, per column.
ArVariances ols_ar_variances(const arma::mat& x, int lag);

/// Omega_r^{-1} | Psi ~ W(Psi, psi); Psi^{-1} ~ W(S, s), all in the shape/scale
/// convention of Rng::wishart (mean = shape * scale).
struct WishartHyper {
  double psi_scalar = 0.0;
  double s_scalar = 0.0;
  arma::mat s_matrix;
  arma::vec sigma_hat;
};

/// S = 100 (s / psi) diag(sigma_hat).
WishartHyper make_wishart_hyper(const arma::vec& sigma_hat, double psi, double s);

struct PoolingPrior {
  double mean_variance = 10.0;  // prior variance of each beta_0 element
  double xi_shape = 3.0;
  double xi_rate = 0.3;
  std::optional<double> fixed_xi;

  static PoolingPrior from(const ModelSpec& spec);
};

struct PoolingState {
  arma::vec beta_pool_mean;
  arma::vec xi;
};

/// Regression arrays for x_t' = z_t' B + e_t' on the effective sample.
struct VarData {
  arma::mat z;  // n x (KP+1): [1, x_{t-1}', ..., x_{t-P}']
  arma::mat y;  // n x K
};

VarData build_var_data(const arma::mat& x, int p_lags);

struct CoeffPosterior {
  arma::vec mean;
  arma::mat precision_chol;  // upper U with U'U = precision
};

/// Gaussian conditional of beta = vec(B) given Omega^{-1} and the pooling prior.
CoeffPosterior var_coeff_posterior(const arma::mat& z, const arma::mat& y, const arma::mat& omega_inv,
                                   const PoolingState& pool);

/// One draw per regime. A regime with fewer than K*P + 2 periods is drawn from
/// N(beta_0, Xi).
std::vector<arma::vec> sample_regime_var_coeffs(const VarData& data, const arma::ivec& states, int n_regimes,
                                                const std::vector<arma::mat>& omega_inv, const PoolingState& pool,
                                                Rng& rng);

PoolingState sample_pooling(const std::vector<arma::vec>& betas, const PoolingState& current,
                            const PoolingPrior& prior, Rng& rng);

struct CovarianceDraw {
  std::vector<arma::mat> omega;
  std::vector<arma::mat> omega_inv;
};

/// Omega_r^{-1} | . ~ W((Psi^{-1} + E_r'E_r / 2)^{-1}, psi + T_r / 2).
CovarianceDraw sample_regime_covariances(const std::vector<arma::mat>& residuals, const arma::mat& psi_matrix,
                                         const WishartHyper& hyper, Rng& rng);

/// Psi^{-1} | . ~ W((S^{-1} + sum_r Omega_r^{-1})^{-1}, s + n_regimes * psi); returns Psi.
arma::mat sample_psi(const std::vector<arma::mat>& omega_inv, const WishartHyper& hyper, Rng& rng);

/// n x n_regimes matrix of log N(y_t; B_r' z_t, Omega_r).
arma::mat regime_log_likelihoods(const VarData& data, const std::vector<arma::vec>& betas,
                                 const std::vector<arma::mat>& omegas);

struct GibbsInput {
  arma::mat x;                  // T x K, identification order
  arma::vec rate;               // T, probit covariate source (standardized rate)
  std::vector<Quarter> dates;   // T
  arma::mat external;           // optional T x S panel for regime loadings
  arma::mat factors;            // T x q, required with `external`
};

struct GibbsOutput {
  std::vector<PosteriorDraw> draws;
  WishartHyper hyper;
  ArVariances sigma_hat;
  std::vector<Quarter> dates;       // effective sample
  arma::vec covariate;              // probit covariate per effective period
  arma::mat mean_filtered_prob;     // n x 2
  arma::vec mean_state;             // posterior P(S_t = 1)
  arma::mat mean_stay_prob;         // n x 2: p00, p11
  int label_swaps = 0;
  int degenerate_probit_sweeps = 0;
};

/// Failure inside a sweep; carries the sweep index and the last complete state.
class SweepError : public Error {
 public:
  SweepError(int sweep, PosteriorDraw last_good, const std::string& cause)
      : Error("sweep_failure", "sweep " + std::to_string(sweep) + ": " + cause),
        sweep_(sweep), last_good_(std::move(last_good)) {}
  int sweep() const noexcept { return sweep_; }
  const PosteriorDraw& last_good() const noexcept { return last_good_; }

 private:
  int sweep_;
  PosteriorDraw last_good_;
};

GibbsOutput run_gibbs(const GibbsInput& input, const ModelSpec& spec, Rng& rng);

}  // namespace msfavar::mcmc

#endif
