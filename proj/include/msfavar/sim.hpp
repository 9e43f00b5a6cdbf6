#ifndef MSFAVAR_SIM_HPP
#define MSFAVAR_SIM_HPP

#include "msfavar/config.hpp"
#include "msfavar/core.hpp"
#include "msfavar/random.hpp"
#include "msfavar/regime.hpp"

#include <string>
#include <vector>

namespace msfavar::sim {

/// Stationary AR(1) around a mean that shifts once, at mid-sample.
struct RateProcess {
  double ar = 0.9;
  double sd = 0.2;
  double mean_first = 1.0;
  double mean_second = -1.0;
};

struct DgpSpec {
  int n_vars = 3;
  int p_lags = 1;
  int n_periods = 300;
  int burn_in = 100;
  std::vector<arma::vec> beta;   // one per regime, equation-major vec(B)
  std::vector<arma::mat> omega;  // one per regime
  regime::ProbitParams probit;
  RateProcess rate;
  std::uint64_t seed = 1;

  int n_regimes() const { return static_cast<int>(beta.size()); }
};

/// Scalar description of a simple DGP as read from a [dgp] section.
struct DgpParams {
  int n_vars = 3;
  int p_lags = 1;
  int n_periods = 300;
  int n_regimes = 2;
  double own_lag = 0.5;
  double cross_lag = 0.1;
  double intercept = 0.0;
  double intercept_shift = 3.0;  // regime-1 intercept shift, in error sd units
  double error_sd = 1.0;
  double error_corr = 0.2;
  arma::vec probit_c0{-1.0, 1.0};
  double probit_gamma = 3.0;
  RateProcess rate;
  int replications = 20;
  std::uint64_t seed = 1;

  static DgpParams from_config(const Config& config);
};

/// Builds and validates the DGP (SPD covariances, not explosive in every regime).
DgpSpec make_dgp(const DgpParams& params);
void validate_dgp(const DgpSpec& dgp);

struct SimulatedVar {
  arma::mat x;        // T x K
  arma::vec rate;     // T
  arma::ivec states;  // T
};

SimulatedVar simulate_msvar(const DgpSpec& dgp, Rng& rng);

struct SvTruth {
  arma::vec rho{0.5};
  double mu = -1.0;
  double phi = 0.9;
  double sigma_v = 0.3;
};

struct SimulatedSv {
  arma::vec series;
  arma::vec logvar;
};

SimulatedSv simulate_ar_sv(const SvTruth& truth, int n_periods, Rng& rng);

struct ReplicationResult {
  int replication = 0;
  bool ok = false;
  std::string error;
  double coverage = 0.0;        // share of coefficients inside the 90% interval
  double rmse = 0.0;            // posterior-mean coefficient RMSE
  double state_accuracy = 1.0;  // posterior-mode path vs truth
  double gamma_mean = 0.0;
  double gamma_positive = 0.0;  // posterior P(gamma > 0)
  int covered = 0;
  int n_coefficients = 0;
};

struct RecoveryReport {
  std::vector<ReplicationResult> replications;
  double coverage = 0.0;  // pooled over coefficient-replication pairs
  double mean_rmse = 0.0;
  double mean_state_accuracy = 0.0;
  int failures = 0;
};

/// Simulates `n_replications` data sets (seed dgp.seed + r) and re-estimates
/// each. Estimation failures are recorded, not rethrown.
RecoveryReport recovery_report(const DgpSpec& dgp, const ModelSpec& spec, int n_replications, int n_jobs = 1);

void write_recovery_csv(const std::string& path, const RecoveryReport& report);
std::string recovery_summary_json(const RecoveryReport& report);

/// Synthetic global panel: `n_countries` x {equity, credit, deposits} growth
/// rates driven by one common factor.
TimeSeriesPanel simulate_external_panel(int n_countries, Quarter first, int n_periods, std::uint64_t seed,
                                        arma::vec* factor_out = nullptr);

/// Raw country panel in levels with the columns expected by the bundled
/// country config.
TimeSeriesPanel simulate_raw_country(const std::string& code, Quarter first, int n_periods, const arma::vec& factor,
                                     std::uint64_t seed);

}  // namespace msfavar::sim

#endif
