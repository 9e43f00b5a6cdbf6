#include "msfavar/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace msfavar {

void rethrow_with_prefix(const Error& e, const std::string& prefix) {
  const std::string msg = prefix + e.what();
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) throw ParseError(pe->line(), msg);
#define MSFAVAR_RETHROW(Name) \
  if (dynamic_cast<const Name*>(&e)) throw Name(msg);
  MSFAVAR_RETHROW(ValidationError)
  MSFAVAR_RETHROW(DomainError)
  MSFAVAR_RETHROW(InsufficientDataError)
  MSFAVAR_RETHROW(DegenerateSeriesError)
  MSFAVAR_RETHROW(UnsupportedGapError)
  MSFAVAR_RETHROW(RankError)
  MSFAVAR_RETHROW(ContractError)
  MSFAVAR_RETHROW(NumericalError)
  MSFAVAR_RETHROW(DegenerateLikelihoodError)
  MSFAVAR_RETHROW(InsufficientRegimeDataError)
  MSFAVAR_RETHROW(IoError)
#undef MSFAVAR_RETHROW
  throw Error(e.kind(), msg);
}

Quarter Quarter::parse(const std::string& text) {
  auto pos = text.find_first_of("Qq");
  if (pos == std::string::npos || pos == 0 || pos + 2 != text.size()) {
    throw ValidationError("invalid quarter '" + text + "', expected YYYYQn");
  }
  Quarter q;
  try {
    std::size_t used = 0;
    q.year = std::stoi(text.substr(0, pos), &used);
    if (used != pos) throw std::invalid_argument("year");
  } catch (const std::exception&) {
    throw ValidationError("invalid quarter '" + text + "', expected YYYYQn");
  }
  char c = text[pos + 1];
  if (c < '1' || c > '4') throw ValidationError("invalid quarter '" + text + "', expected YYYYQn");
  q.quarter = c - '0';
  return q;
}

Quarter Quarter::from_index(int index) {
  int year = index >= 0 ? index / 4 : -((-index + 3) / 4);
  return Quarter{year, index - year * 4 + 1};
}

std::string Quarter::to_string() const {
  return std::to_string(year) + "Q" + std::to_string(quarter);
}

std::vector<Quarter> quarter_range(Quarter first, std::size_t count) {
  std::vector<Quarter> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(Quarter::from_index(first.index() + static_cast<int>(i)));
  return out;
}

// ---------------------------------------------------------------------------

std::size_t TimeSeriesPanel::column_index(const std::string& name) const {
  auto it = std::find(series_names.begin(), series_names.end(), name);
  if (it == series_names.end()) throw ValidationError("missing series '" + name + "'");
  return static_cast<std::size_t>(it - series_names.begin());
}

bool TimeSeriesPanel::has_series(const std::string& name) const {
  return std::find(series_names.begin(), series_names.end(), name) != series_names.end();
}

arma::vec TimeSeriesPanel::column(const std::string& name) const {
  return values.col(column_index(name));
}

TimeSeriesPanel TimeSeriesPanel::select(const std::vector<std::string>& names) const {
  TimeSeriesPanel out;
  out.series_names = names;
  out.dates = dates;
  out.country_code = country_code;
  out.values.set_size(values.n_rows, names.size());
  for (std::size_t j = 0; j < names.size(); ++j) out.values.col(j) = values.col(column_index(names[j]));
  return out;
}

TimeSeriesPanel TimeSeriesPanel::slice_rows(std::size_t first, std::size_t count) const {
  if (first + count > dates.size()) throw ValidationError("row slice out of range");
  TimeSeriesPanel out;
  out.series_names = series_names;
  out.country_code = country_code;
  out.dates.assign(dates.begin() + first, dates.begin() + first + count);
  out.values = count == 0 ? arma::mat(0, values.n_cols) : arma::mat(values.rows(first, first + count - 1));
  return out;
}

void TimeSeriesPanel::validate(bool allow_missing) const {
  if (values.n_rows != dates.size()) {
    throw ValidationError("panel has " + std::to_string(values.n_rows) + " rows but " +
                          std::to_string(dates.size()) + " dates");
  }
  if (values.n_cols != series_names.size()) throw ValidationError("panel column count does not match names");
  for (std::size_t t = 1; t < dates.size(); ++t) {
    if (dates[t].index() != dates[t - 1].index() + 1) {
      throw ValidationError("dates not consecutive quarters at " + dates[t].to_string());
    }
  }
  std::set<std::string> seen;
  for (const auto& n : series_names) {
    if (!seen.insert(n).second) throw ValidationError("duplicate series '" + n + "'");
  }
  if (!allow_missing) {
    for (arma::uword j = 0; j < values.n_cols; ++j) {
      for (arma::uword t = 0; t < values.n_rows; ++t) {
        if (!std::isfinite(values(t, j))) {
          throw ValidationError("undefined value in '" + series_names[j] + "' at " + dates[t].to_string());
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------

std::string to_string(RegimeMode mode) {
  switch (mode) {
    case RegimeMode::linear: return "linear";
    case RegimeMode::endogenous_markov: return "markov";
    case RegimeMode::deterministic_break: return "break";
  }
  return "linear";
}

RegimeMode parse_regime_mode(const std::string& text) {
  if (text == "linear") return RegimeMode::linear;
  if (text == "markov" || text == "endogenous_markov") return RegimeMode::endogenous_markov;
  if (text == "break" || text == "deterministic_break") return RegimeMode::deterministic_break;
  throw ValidationError("unknown regime mode '" + text + "' (expected linear|markov|break)");
}

double default_wishart_psi(int n_vars) { return 2.5 + (n_vars - 1) / 2.0; }
double default_wishart_s(int n_vars) { return 0.5 + (n_vars - 1) / 2.0; }

std::size_t ModelSpec::ordering_index(const std::string& name) const {
  auto it = std::find(ordering.begin(), ordering.end(), name);
  if (it == ordering.end()) throw ValidationError("variable '" + name + "' not in ordering");
  return static_cast<std::size_t>(it - ordering.begin());
}

namespace {

void require_positive(int value, const char* name) {
  if (value <= 0) throw ValidationError(std::string(name) + " must be positive");
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ValidationError(std::string(name) + " must be positive");
}

std::string join(const std::vector<std::string>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) os << (i ? ", " : "") << items[i];
  return os.str();
}

}  // namespace

ModelSpec new_model_spec(const ModelSpecInput& in) {
  require_positive(in.p_lags, "p_lags");
  require_positive(in.q_factors, "q_factors");
  require_positive(in.sv_ar_order, "sv_ar_order");
  require_positive(in.sv_draws, "sv_draws");
  require_positive(in.sv_burn, "sv_burn");
  require_positive(in.horizon, "horizon");
  require_positive(in.n_draws, "n_draws");
  require_positive(in.n_burn, "n_burn");
  if (in.endogenous.empty()) throw ValidationError("endogenous variable list is empty");

  const PriorConfig& p = in.prior;
  require_positive(p.pooling_mean_variance, "pooling_mean_variance");
  require_positive(p.xi_shape, "xi_shape");
  require_positive(p.xi_rate, "xi_rate");
  require_positive(p.loading_prior_variance, "loading_prior_variance");
  require_positive(p.meas_error_ig_shape, "meas_error_ig_shape");
  require_positive(p.meas_error_ig_scale, "meas_error_ig_scale");
  require_positive(p.sv_mu_variance, "sv_mu_variance");
  require_positive(p.sv_sigma_shape, "sv_sigma_shape");
  require_positive(p.sv_sigma_rate, "sv_sigma_rate");
  require_positive(p.sv_phi_beta_a, "sv_phi_beta_a");
  require_positive(p.sv_phi_beta_b, "sv_phi_beta_b");
  require_positive(p.sv_rho_variance, "sv_rho_variance");
  require_positive(p.probit_coef_variance, "probit_coef_variance");
  if (in.high_rate_regime != 0 && in.high_rate_regime != 1) throw ValidationError("high_rate_regime must be 0 or 1");
  if (in.fixed_xi) require_positive(*in.fixed_xi, "fixed_xi");

  ModelSpec spec;
  spec.p_lags = in.p_lags;
  spec.q_factors = in.q_factors;
  spec.m_endog = static_cast<int>(in.endogenous.size());
  spec.n_vars = spec.m_endog + spec.q_factors;
  spec.endogenous = in.endogenous;
  if (spec.q_factors == 1) {
    spec.factor_names = {"global_factor"};
  } else {
    for (int j = 1; j <= spec.q_factors; ++j) spec.factor_names.push_back("global_factor" + std::to_string(j));
  }

  std::vector<std::string> expected = spec.factor_names;
  expected.insert(expected.end(), in.endogenous.begin(), in.endogenous.end());
  {
    std::set<std::string> uniq(expected.begin(), expected.end());
    if (uniq.size() != expected.size()) throw ValidationError("duplicate variable names");
  }

  if (in.ordering.empty()) {
    spec.ordering = expected;
  } else {
    std::set<std::string> want(expected.begin(), expected.end());
    std::set<std::string> got(in.ordering.begin(), in.ordering.end());
    std::vector<std::string> missing, extra;
    for (const auto& n : want)
      if (!got.count(n)) missing.push_back(n);
    for (const auto& n : got)
      if (!want.count(n)) extra.push_back(n);
    if (!missing.empty() || !extra.empty() || got.size() != in.ordering.size()) {
      std::string msg = "ordering inconsistent with variables";
      if (!missing.empty()) msg += "; missing: " + join(missing);
      if (!extra.empty()) msg += "; extra: " + join(extra);
      if (got.size() != in.ordering.size()) msg += "; duplicate entries";
      throw ValidationError(msg);
    }
    for (int j = 0; j < spec.q_factors; ++j) {
      if (std::find(spec.factor_names.begin(), spec.factor_names.end(), in.ordering[j]) == spec.factor_names.end()) {
        throw ValidationError("ordering must start with the factor block; found '" + in.ordering[j] + "' at position " +
                              std::to_string(j));
      }
    }
    spec.ordering = in.ordering;
  }

  spec.regime_mode = in.regime_mode;
  spec.break_date = in.break_date;
  spec.sv_ar_order = in.sv_ar_order;
  spec.sv_draws = in.sv_draws;
  spec.sv_burn = in.sv_burn;
  spec.horizon = in.horizon;
  spec.n_draws = in.n_draws;
  spec.n_burn = in.n_burn;
  spec.prior = in.prior;
  spec.prior.wishart_psi = p.wishart_psi_override.value_or(default_wishart_psi(spec.n_vars));
  spec.prior.wishart_s = p.wishart_s_override.value_or(default_wishart_s(spec.n_vars));
  // Shape-scale Wishart needs shape > (K-1)/2.
  const double min_shape = (spec.n_vars - 1) / 2.0;
  if (spec.prior.wishart_psi <= min_shape || spec.prior.wishart_s <= min_shape) {
    throw ValidationError("Wishart shapes must exceed (K-1)/2");
  }
  spec.rate_variable = in.rate_variable;
  spec.shock_variable = in.shock_variable;
  spec.high_rate_regime = in.high_rate_regime;
  spec.fixed_xi = in.fixed_xi;
  spec.seed = in.seed;
  if (spec.regime_mode != RegimeMode::linear &&
      std::find(spec.ordering.begin(), spec.ordering.end(), spec.rate_variable) == spec.ordering.end()) {
    throw ValidationError("rate_variable '" + spec.rate_variable + "' is not a model variable");
  }
  return spec;
}

// ---------------------------------------------------------------------------

void validate_draw(const PosteriorDraw& draw) {
  if (draw.beta.empty() || draw.beta.size() != draw.omega.size()) {
    throw ContractError("draw has inconsistent regime count");
  }
  for (std::size_t r = 0; r < draw.omega.size(); ++r) {
    const arma::mat& om = draw.omega[r];
    if (!om.is_finite()) throw NumericalError("omega for regime " + std::to_string(r) + " is not finite");
    if (arma::norm(om - om.t(), "inf") > 1e-8 * std::max(1.0, arma::norm(om, "inf"))) {
      throw NumericalError("omega for regime " + std::to_string(r) + " is not symmetric");
    }
    arma::mat l;
    if (!arma::chol(l, arma::symmatu(om))) {
      throw NumericalError("omega for regime " + std::to_string(r) + " is not positive definite");
    }
    if (!draw.beta[r].is_finite()) throw NumericalError("coefficients not finite");
  }
  if (arma::any(draw.xi <= 0.0)) throw NumericalError("xi entries must be positive");
  for (arma::uword t = 0; t < draw.states.n_elem; ++t) {
    if (draw.states(t) != 0 && draw.states(t) != 1) throw ContractError("state outside {0,1}");
  }
  for (const auto& lam : draw.loadings) {
    if (lam.is_empty()) continue;
    const arma::uword q = lam.n_cols;
    if (!arma::approx_equal(arma::mat(lam.rows(0, q - 1)), arma::eye(q, q), "absdiff", 0.0)) {
      throw ContractError("top loading block is not the identity");
    }
  }
}

arma::mat coefficient_matrix(const arma::vec& beta, int n_vars) {
  const arma::uword regs = beta.n_elem / static_cast<arma::uword>(n_vars);
  return arma::reshape(beta, regs, static_cast<arma::uword>(n_vars));
}

}  // namespace msfavar
