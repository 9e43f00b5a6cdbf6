#include "msfavar/mcmc.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace msfavar::mcmc {

ArVariances ols_ar_variances(const arma::mat& x, int lag) {
  if (lag < 0) throw ValidationError("lag order must be non-negative");
  const int t_len = static_cast<int>(x.n_rows);
  if (t_len <= lag + 2) throw InsufficientDataError("need more than lag + 2 observations for AR variances");
  ArVariances out;
  out.variances.set_size(x.n_cols);
  out.fallback.assign(x.n_cols, false);
  const arma::uword n = static_cast<arma::uword>(t_len - lag);
  for (arma::uword j = 0; j < x.n_cols; ++j) {
    const arma::vec col = x.col(j);
    const double sample_var = arma::var(col);
    if (!(sample_var > 0.0)) throw DegenerateSeriesError("column " + std::to_string(j) + " has zero variance");
    arma::mat d(n, lag + 1, arma::fill::ones);
    for (int l = 1; l <= lag; ++l) d.col(l) = col.subvec(lag - l, t_len - 1 - l);
    const arma::vec y = col.subvec(lag, t_len - 1);
    arma::mat dtd = d.t() * d;
    bool ok = arma::rcond(dtd) > 1e-12;
    double v = 0.0;
    if (ok) {
      arma::vec b = arma::solve(dtd, d.t() * y, arma::solve_opts::likely_sympd);
      arma::vec e = y - d * b;
      v = arma::dot(e, e) / static_cast<double>(n - lag - 1);
      ok = v > 1e-10 * sample_var;
    }
    if (!ok) {
      v = sample_var;
      out.fallback[j] = true;
      out.warnings.push_back("column " + std::to_string(j) + ": singular AR fit, using sample variance");
    }
    out.variances(j) = v;
  }
  return out;
}

WishartHyper make_wishart_hyper(const arma::vec& sigma_hat, double psi, double s) {
  WishartHyper h;
  h.psi_scalar = psi;
  h.s_scalar = s;
  h.sigma_hat = sigma_hat;
  h.s_matrix = arma::diagmat(100.0 * (s / psi) * sigma_hat);
  return h;
}

PoolingPrior PoolingPrior::from(const ModelSpec& spec) {
  PoolingPrior p;
  p.mean_variance = spec.prior.pooling_mean_variance;
  p.xi_shape = spec.prior.xi_shape;
  p.xi_rate = spec.prior.xi_rate;
  p.fixed_xi = spec.fixed_xi;
  return p;
}

VarData build_var_data(const arma::mat& x, int p_lags) {
  const arma::uword t_len = x.n_rows, k = x.n_cols;
  const arma::uword p = static_cast<arma::uword>(p_lags);
  if (t_len <= p) throw InsufficientDataError("sample shorter than the lag order");
  const arma::uword n = t_len - p;
  VarData d;
  d.y = x.rows(p, t_len - 1);
  d.z.set_size(n, k * p + 1);
  d.z.col(0).ones();
  for (arma::uword l = 1; l <= p; ++l) d.z.cols(1 + (l - 1) * k, l * k) = x.rows(p - l, t_len - 1 - l);
  return d;
}

CoeffPosterior var_coeff_posterior(const arma::mat& z, const arma::mat& y, const arma::mat& omega_inv,
                                   const PoolingState& pool) {
  arma::mat prec = arma::kron(omega_inv, z.t() * z);
  prec.diag() += 1.0 / pool.xi;
  arma::vec rhs = pool.beta_pool_mean / pool.xi + arma::vectorise(z.t() * y * omega_inv);
  CoeffPosterior out;
  if (!arma::chol(out.precision_chol, arma::symmatu(prec))) {
    throw NumericalError("coefficient posterior precision not positive definite (rcond " +
                         std::to_string(arma::rcond(prec)) + ")");
  }
  out.mean = arma::solve(arma::trimatu(out.precision_chol), arma::solve(arma::trimatl(out.precision_chol.t()), rhs));
  return out;
}

std::vector<arma::vec> sample_regime_var_coeffs(const VarData& data, const arma::ivec& states, int n_regimes,
                                                const std::vector<arma::mat>& omega_inv, const PoolingState& pool,
                                                Rng& rng) {
  const arma::uword k = data.y.n_cols;
  const arma::uword min_rows = (data.z.n_cols - 1) + 2;  // K*P + 2
  (void)k;
  std::vector<arma::vec> out(n_regimes);
  for (int r = 0; r < n_regimes; ++r) {
    arma::uvec idx = arma::find(states == r);
    if (idx.n_elem < min_rows) {
      out[r] = pool.beta_pool_mean + arma::sqrt(pool.xi) % rng.normal_vec(pool.xi.n_elem);
      continue;
    }
    CoeffPosterior post = var_coeff_posterior(data.z.rows(idx), data.y.rows(idx), omega_inv[r], pool);
    out[r] = rng.mvnormal_precision(post.mean, post.precision_chol);
  }
  return out;
}

PoolingState sample_pooling(const std::vector<arma::vec>& betas, const PoolingState& current,
                            const PoolingPrior& prior, Rng& rng) {
  const arma::uword k = betas.front().n_elem;
  const double n_reg = static_cast<double>(betas.size());
  PoolingState out;
  out.xi = current.xi;
  if (prior.fixed_xi) out.xi.fill(*prior.fixed_xi);
  arma::vec sum(k, arma::fill::zeros);
  for (const auto& b : betas) sum += b;
  out.beta_pool_mean.set_size(k);
  for (arma::uword j = 0; j < k; ++j) {
    const double prec = 1.0 / prior.mean_variance + n_reg / out.xi(j);
    const double mean = (sum(j) / out.xi(j)) / prec;
    out.beta_pool_mean(j) = mean + rng.normal() / std::sqrt(prec);
  }
  if (!prior.fixed_xi) {
    for (arma::uword j = 0; j < k; ++j) {
      double ss = 0.0;
      for (const auto& b : betas) ss += (b(j) - out.beta_pool_mean(j)) * (b(j) - out.beta_pool_mean(j));
      out.xi(j) = rng.inverse_gamma(prior.xi_shape + 0.5 * n_reg, prior.xi_rate + 0.5 * ss);
    }
  }
  return out;
}

CovarianceDraw sample_regime_covariances(const std::vector<arma::mat>& residuals, const arma::mat& psi_matrix,
                                         const WishartHyper& hyper, Rng& rng) {
  const arma::uword k = psi_matrix.n_rows;
  arma::mat psi_inv;
  if (!arma::inv_sympd(psi_inv, psi_matrix)) throw NumericalError("Psi is not positive definite");
  CovarianceDraw out;
  for (const auto& e : residuals) {
    arma::mat scale_inv = psi_inv;
    if (e.n_rows > 0) scale_inv += 0.5 * e.t() * e;
    arma::mat scale;
    if (!arma::inv_sympd(scale, arma::symmatu(scale_inv))) throw NumericalError("Wishart scale not invertible");
    arma::mat prec = rng.wishart(scale, hyper.psi_scalar + 0.5 * static_cast<double>(e.n_rows));
    arma::mat cov;
    if (!arma::inv_sympd(cov, prec)) throw NumericalError("precision draw not positive definite");
    out.omega.push_back(arma::symmatu(cov));
    out.omega_inv.push_back(prec);
  }
  (void)k;
  return out;
}

arma::mat sample_psi(const std::vector<arma::mat>& omega_inv, const WishartHyper& hyper, Rng& rng) {
  arma::mat acc;
  if (!arma::inv_sympd(acc, hyper.s_matrix)) throw NumericalError("S is not positive definite");
  for (const auto& p : omega_inv) acc += p;
  arma::mat scale;
  if (!arma::inv_sympd(scale, arma::symmatu(acc))) throw NumericalError("Psi conditional scale not invertible");
  arma::mat psi_inv =
      rng.wishart(scale, hyper.s_scalar + static_cast<double>(omega_inv.size()) * hyper.psi_scalar);
  arma::mat psi;
  if (!arma::inv_sympd(psi, psi_inv)) throw NumericalError("Psi draw not positive definite");
  return arma::symmatu(psi);
}

arma::mat regime_log_likelihoods(const VarData& data, const std::vector<arma::vec>& betas,
                                 const std::vector<arma::mat>& omegas) {
  const arma::uword n = data.y.n_rows, k = data.y.n_cols;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  arma::mat out(n, betas.size());
  for (std::size_t r = 0; r < betas.size(); ++r) {
    arma::mat b = coefficient_matrix(betas[r], static_cast<int>(k));
    arma::mat e = data.y - data.z * b;
    arma::mat l;
    if (!arma::chol(l, omegas[r], "lower")) throw NumericalError("Omega not positive definite");
    const double logdet = 2.0 * arma::accu(arma::log(l.diag()));
    arma::mat w = arma::solve(arma::trimatl(l), e.t());
    arma::rowvec q = arma::sum(w % w, 0);
    out.col(r) = (-0.5 * (static_cast<double>(k) * log2pi + logdet) - 0.5 * q).t();
  }
  return out;
}

namespace {

arma::mat ridge_fit(const arma::mat& z, const arma::mat& y) {
  arma::mat a = z.t() * z;
  a.diag() += 1e-4;
  return arma::solve(a, z.t() * y, arma::solve_opts::likely_sympd);
}

}  // namespace

GibbsOutput run_gibbs(const GibbsInput& input, const ModelSpec& spec, Rng& rng) {
  const int k = spec.n_vars, p = spec.p_lags, n_reg = spec.n_regimes();
  const arma::uword t_len = input.x.n_rows;
  if (input.x.n_cols != static_cast<arma::uword>(k)) {
    throw ValidationError("x has " + std::to_string(input.x.n_cols) + " columns, spec expects " + std::to_string(k));
  }
  if (!input.x.is_finite()) throw ValidationError("x contains undefined values");
  if (spec.regime_mode != RegimeMode::linear && input.rate.n_elem != t_len) {
    throw ValidationError("interest-rate series length does not match x");
  }
  if (spec.regime_mode == RegimeMode::deterministic_break && input.dates.size() != t_len) {
    throw ValidationError("dates required for the deterministic break");
  }
  const bool with_loadings = input.external.n_elem > 0;
  if (with_loadings && (input.external.n_rows != t_len || input.factors.n_rows != t_len)) {
    throw ValidationError("external panel and factors must match x in length");
  }

  const VarData data = build_var_data(input.x, p);
  const arma::uword n = data.y.n_rows;
  if (n < static_cast<arma::uword>(k * p + 2)) throw InsufficientDataError("effective sample too short for the VAR");

  GibbsOutput out;
  out.sigma_hat = ols_ar_variances(input.x, p);
  out.hyper = make_wishart_hyper(out.sigma_hat.variances, spec.prior.wishart_psi, spec.prior.wishart_s);
  if (!input.dates.empty()) out.dates.assign(input.dates.begin() + p, input.dates.end());
  arma::vec label_rate(n, arma::fill::zeros);
  out.covariate.zeros(n);
  if (input.rate.n_elem == t_len) {
    label_rate = input.rate.subvec(p, t_len - 1);
    // The transition into period t is driven by the previous period's rate.
    for (arma::uword t = 0; t < n; ++t) out.covariate(t) = input.rate(p + t == 0 ? 0 : p + t - 1);
  }
  const PoolingPrior pool_prior = PoolingPrior::from(spec);
  const regime::ProbitPrior probit_prior{spec.prior.probit_coef_variance, spec.prior.probit_coef_variance};
  const factor::LoadingPrior loading_prior{spec.prior.loading_prior_variance, spec.prior.meas_error_ig_shape,
                                           spec.prior.meas_error_ig_scale};

  // Initial state.
  arma::ivec states(n, arma::fill::zeros);
  if (spec.regime_mode == RegimeMode::deterministic_break) {
    states = regime::deterministic_states(out.dates, spec.break_date).states;
  } else if (spec.regime_mode == RegimeMode::endogenous_markov) {
    const double med = arma::median(label_rate);
    const int high = spec.high_rate_regime;
    for (arma::uword t = 0; t < n; ++t) states(t) = label_rate(t) > med ? high : 1 - high;
  }
  const arma::mat b_full = ridge_fit(data.z, data.y);
  arma::mat e_full = data.y - data.z * b_full;
  arma::mat omega_ols = e_full.t() * e_full / static_cast<double>(n);
  omega_ols.diag() += 1e-8;

  PosteriorDraw cur;
  cur.beta.resize(n_reg);
  cur.omega.assign(n_reg, omega_ols);
  std::vector<arma::mat> omega_inv(n_reg, arma::inv_sympd(arma::symmatu(omega_ols)));
  for (int r = 0; r < n_reg; ++r) {
    arma::uvec idx = arma::find(states == r);
    cur.beta[r] = arma::vectorise(idx.n_elem >= data.z.n_cols + 2 ? ridge_fit(data.z.rows(idx), data.y.rows(idx))
                                                                  : b_full);
  }
  PoolingState pool;
  pool.beta_pool_mean = cur.beta[0];
  pool.xi.set_size(cur.beta[0].n_elem);
  pool.xi.fill(spec.fixed_xi ? *spec.fixed_xi : spec.prior.xi_rate / (spec.prior.xi_shape - 1.0));
  cur.psi_matrix = omega_inv[0] / out.hyper.psi_scalar;
  cur.states = states;
  regime::ProbitParams probit;
  if (with_loadings) {
    cur.meas_error_vars = arma::ones(input.external.n_cols);
    std::vector<arma::mat> lo;
    factor::sample_regime_loadings(input.external.rows(p, t_len - 1), input.factors.rows(p, t_len - 1), states,
                                   n_reg, loading_prior, lo, cur.meas_error_vars, rng);
    cur.loadings = lo;
  }
  cur.beta_pool_mean = pool.beta_pool_mean;
  cur.xi = pool.xi;

  out.mean_filtered_prob.zeros(n, 2);
  out.mean_state.zeros(n);
  out.mean_stay_prob.zeros(n, 2);
  out.draws.reserve(spec.n_draws);
  const arma::mat ext_eff = with_loadings ? arma::mat(input.external.rows(p, t_len - 1)) : arma::mat();
  const arma::mat fac_eff = with_loadings ? arma::mat(input.factors.rows(p, t_len - 1)) : arma::mat();

  const int total = spec.n_burn + spec.n_draws;
  for (int it = 0; it < total; ++it) {
    PosteriorDraw next = cur;
    arma::mat filtered(n, 2, arma::fill::zeros);
    try {
      // (1)-(3) states and probit.
      if (spec.regime_mode == RegimeMode::endogenous_markov) {
        arma::mat loglik = regime_log_likelihoods(data, next.beta, next.omega);
        arma::cube trans = regime::transition_path(probit, out.covariate);
        arma::vec init = regime::invariant_distribution(trans.slice(0));
        regime::FilterResult filt = regime::hamilton_filter_log(loglik, trans, init);
        filtered = filt.filtered_prob;
        states = regime::sample_states_ffbs(filtered, trans, rng);
        regime::ProbitUpdate upd = regime::update_probit(states, out.covariate, probit, probit_prior, rng);
        probit = upd.params;
        if (upd.degenerate) ++out.degenerate_probit_sweeps;
      } else {
        for (arma::uword t = 0; t < n; ++t) filtered(t, states(t)) = 1.0;
      }
      next.states = states;

      // (4)-(5) coefficients and pooling.
      next.beta = sample_regime_var_coeffs(data, states, n_reg, omega_inv, pool, rng);
      pool = sample_pooling(next.beta, pool, pool_prior, rng);
      next.beta_pool_mean = pool.beta_pool_mean;
      next.xi = pool.xi;

      // (6)-(7) covariances and Psi.
      std::vector<arma::mat> resid(n_reg);
      for (int r = 0; r < n_reg; ++r) {
        arma::uvec idx = arma::find(states == r);
        if (idx.is_empty()) {
          resid[r].set_size(0, k);
        } else {
          resid[r] = data.y.rows(idx) - data.z.rows(idx) * coefficient_matrix(next.beta[r], k);
        }
      }
      CovarianceDraw cov = sample_regime_covariances(resid, next.psi_matrix, out.hyper, rng);
      next.omega = cov.omega;
      omega_inv = cov.omega_inv;
      next.psi_matrix = sample_psi(omega_inv, out.hyper, rng);

      if (with_loadings) {
        std::vector<arma::mat> lo = next.loadings;
        factor::sample_regime_loadings(ext_eff, fac_eff, states, n_reg, loading_prior, lo, next.meas_error_vars, rng);
        next.loadings = lo;
      }
      next.probit_intercepts = probit.c0;
      next.probit_slope = probit.gamma;

      // (8) label identification.
      if (spec.regime_mode == RegimeMode::endogenous_markov) {
        arma::vec means = regime::regime_mean_rates(states, label_rate);
        const int h = spec.high_rate_regime;
        if (std::isfinite(means(0)) && std::isfinite(means(1)) && means(h) < means(1 - h)) {
          regime::swap_regime_labels(next);
          std::swap(omega_inv[0], omega_inv[1]);
          filtered = arma::fliplr(filtered);
          states = next.states;
          probit.c0 = next.probit_intercepts;
          probit.gamma = next.probit_slope;
          ++out.label_swaps;
        }
      }
      validate_draw(next);
    } catch (const SweepError&) {
      throw;
    } catch (const Error& e) {
      throw SweepError(it, cur, e.what());
    }
    cur = std::move(next);

    if (it >= spec.n_burn) {
      out.draws.push_back(cur);
      out.mean_filtered_prob += filtered;
      out.mean_state += arma::conv_to<arma::vec>::from(cur.states);
      if (spec.regime_mode == RegimeMode::endogenous_markov) {
        arma::cube trans = regime::transition_path(probit, out.covariate);
        for (arma::uword t = 0; t < n; ++t) {
          out.mean_stay_prob(t, 0) += trans(0, 0, t);
          out.mean_stay_prob(t, 1) += trans(1, 1, t);
        }
      } else {
        out.mean_stay_prob += 1.0;
      }
    }
  }
  const double nd = static_cast<double>(spec.n_draws);
  out.mean_filtered_prob /= nd;
  out.mean_state /= nd;
  out.mean_stay_prob /= nd;
  return out;
}

}  // namespace msfavar::mcmc
