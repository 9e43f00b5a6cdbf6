#ifndef MSFAVAR_CORE_HPP
#define MSFAVAR_CORE_HPP

#include <armadillo>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msfavar {

// ---------------------------------------------------------------------------
// Errors. Every failure surfaced by the library derives from Error and carries
// a short machine-readable kind tag which the CLI prints on failure.

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define MSFAVAR_ERROR_TYPE(Name, tag)                                         \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& message) : Error(tag, message) {}        \
  };

MSFAVAR_ERROR_TYPE(ValidationError, "validation")
MSFAVAR_ERROR_TYPE(DomainError, "domain")
MSFAVAR_ERROR_TYPE(InsufficientDataError, "insufficient_data")
MSFAVAR_ERROR_TYPE(DegenerateSeriesError, "degenerate_series")
MSFAVAR_ERROR_TYPE(UnsupportedGapError, "unsupported_gap")
MSFAVAR_ERROR_TYPE(RankError, "rank")
MSFAVAR_ERROR_TYPE(ContractError, "contract")
MSFAVAR_ERROR_TYPE(NumericalError, "numerical")
MSFAVAR_ERROR_TYPE(DegenerateLikelihoodError, "degenerate_likelihood")
MSFAVAR_ERROR_TYPE(InsufficientRegimeDataError, "insufficient_regime_data")
MSFAVAR_ERROR_TYPE(IoError, "io")

#undef MSFAVAR_ERROR_TYPE

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("parse", "line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Rethrows `e` as the same error type with `prefix` prepended to its message.
[[noreturn]] void rethrow_with_prefix(const Error& e, const std::string& prefix);

// ---------------------------------------------------------------------------
// Calendar

struct Quarter {
  int year = 2000;
  int quarter = 1;  // 1..4

  static Quarter parse(const std::string& text);  // "YYYYQn"
  static Quarter from_index(int index);

  int index() const { return year * 4 + (quarter - 1); }
  Quarter next() const { return from_index(index() + 1); }
  std::string to_string() const;

  friend bool operator==(const Quarter& a, const Quarter& b) { return a.index() == b.index(); }
  friend auto operator<=>(const Quarter& a, const Quarter& b) { return a.index() <=> b.index(); }
};

std::vector<Quarter> quarter_range(Quarter first, std::size_t count);

// ---------------------------------------------------------------------------
// Data

/// Named, date-indexed quarterly panel. Rows are periods, columns series.
/// Missing cells are NaN while a panel is being ingested; validate() with
/// allow_missing = false enforces a complete panel.
struct TimeSeriesPanel {
  std::vector<std::string> series_names;
  std::vector<Quarter> dates;
  arma::mat values;
  std::string country_code;

  std::size_t n_periods() const { return dates.size(); }
  std::size_t n_series() const { return series_names.size(); }

  std::size_t column_index(const std::string& name) const;
  bool has_series(const std::string& name) const;
  arma::vec column(const std::string& name) const;

  /// Sub-panel with the listed columns in the listed order.
  TimeSeriesPanel select(const std::vector<std::string>& names) const;
  /// Rows [first, first + count).
  TimeSeriesPanel slice_rows(std::size_t first, std::size_t count) const;

  void validate(bool allow_missing = false) const;
};

// ---------------------------------------------------------------------------
// Configuration

enum class RegimeMode { linear, endogenous_markov, deterministic_break };

std::string to_string(RegimeMode mode);
RegimeMode parse_regime_mode(const std::string& text);

struct PriorConfig {
  double pooling_mean_variance = 10.0;
  double xi_shape = 3.0;
  double xi_rate = 0.3;
  std::optional<double> wishart_psi_override;
  std::optional<double> wishart_s_override;
  double wishart_psi = 0.0;  // filled by new_model_spec
  double wishart_s = 0.0;    // filled by new_model_spec
  double loading_prior_variance = 1.0;
  double meas_error_ig_shape = 2.0;
  double meas_error_ig_scale = 1.0;
  double sv_mu_variance = 10.0;
  double sv_sigma_shape = 0.5;
  double sv_sigma_rate = 0.5;
  double sv_phi_beta_a = 25.0;
  double sv_phi_beta_b = 5.0;
  double sv_rho_variance = 10.0;
  double probit_coef_variance = 10.0;
};

/// Raw, unvalidated model settings as read from a config file.
struct ModelSpecInput {
  int p_lags = 1;
  int q_factors = 1;
  std::vector<std::string> endogenous;
  std::vector<std::string> ordering;  // empty: factors first, then endogenous
  RegimeMode regime_mode = RegimeMode::linear;
  Quarter break_date{2009, 1};
  int sv_ar_order = 5;
  int sv_draws = 2000;
  int sv_burn = 1000;
  int horizon = 20;
  int n_draws = 10000;
  int n_burn = 5000;
  PriorConfig prior;
  std::string rate_variable = "stir";
  std::string shock_variable = "mppi";
  int high_rate_regime = 0;
  std::optional<double> fixed_xi;
  std::uint64_t seed = 1;
};

struct ModelSpec {
  int p_lags = 1;
  int q_factors = 1;
  int m_endog = 0;
  int n_vars = 0;  // K = m + q
  std::vector<std::string> endogenous;
  std::vector<std::string> factor_names;
  std::vector<std::string> ordering;
  RegimeMode regime_mode = RegimeMode::linear;
  Quarter break_date{2009, 1};
  int sv_ar_order = 5;
  int sv_draws = 2000;
  int sv_burn = 1000;
  int horizon = 20;
  int n_draws = 10000;
  int n_burn = 5000;
  PriorConfig prior;
  std::string rate_variable = "stir";
  std::string shock_variable = "mppi";
  int high_rate_regime = 0;
  std::optional<double> fixed_xi;
  std::uint64_t seed = 1;

  int n_regimes() const { return regime_mode == RegimeMode::linear ? 1 : 2; }
  /// Regressors per equation: intercept plus K*P lags.
  int n_regressors() const { return n_vars * p_lags + 1; }
  /// k = K(KP+1).
  int n_coefficients() const { return n_vars * n_regressors(); }
  std::size_t ordering_index(const std::string& name) const;
};

/// Validates counts and ordering, derives K and the Wishart shape defaults.
ModelSpec new_model_spec(const ModelSpecInput& input);

/// psi = 2.5 + (K-1)/2
double default_wishart_psi(int n_vars);
/// s = 0.5 + (K-1)/2
double default_wishart_s(int n_vars);

// ---------------------------------------------------------------------------
// Posterior state

/// One Gibbs sweep's full parameter state. Regime-indexed members have one
/// entry per regime (one in linear mode, two otherwise).
///
/// Coefficient vectors are equation-major: for equation i the block
/// [intercept, lag-1 coefficients on variables 1..K, ..., lag-P coefficients]
/// occupies entries [i*(KP+1), (i+1)*(KP+1)). Equivalently beta = vec(B) for
/// the (KP+1) x K matrix B in x_t' = z_t' B + e_t'.
struct PosteriorDraw {
  std::vector<arma::vec> beta;
  arma::vec beta_pool_mean;
  arma::vec xi;
  std::vector<arma::mat> omega;
  arma::mat psi_matrix;
  std::vector<arma::mat> loadings;  // S x q each; empty when no external panel
  arma::vec meas_error_vars;
  arma::ivec states;       // effective sample (T - P periods)
  arma::vec probit_intercepts{0.0, 0.0};
  double probit_slope = 0.0;

  int n_regimes() const { return static_cast<int>(beta.size()); }
};

/// Throws NumericalError/ContractError when a draw breaks its type invariants.
void validate_draw(const PosteriorDraw& draw);

/// Reshape a coefficient vector into the (KP+1) x K matrix B.
arma::mat coefficient_matrix(const arma::vec& beta, int n_vars);

}  // namespace msfavar

#endif
