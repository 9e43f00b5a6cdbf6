#include "msfavar/sv.hpp"

#include "msfavar/transform.hpp"

#include <cmath>
#include <numbers>

namespace msfavar::sv {

const std::array<double, kMixComponents> kMixProb = {0.00609, 0.04775, 0.13057, 0.20674, 0.22715,
                                                     0.18842, 0.12047, 0.05591, 0.01575, 0.00115};
const std::array<double, kMixComponents> kMixMean = {1.92677,  1.34744,  0.73504,  0.02266,  -0.85173,
                                                     -1.97278, -3.46788, -5.55246, -8.68384, -14.65};
const std::array<double, kMixComponents> kMixVar = {0.11265, 0.17788, 0.26768, 0.40611, 0.62699,
                                                    0.98583, 1.57469, 2.54498, 4.16591, 7.33342};

SvPrior SvPrior::from(const PriorConfig& p) {
  SvPrior out;
  out.rho_variance = p.sv_rho_variance;
  out.mu_variance = p.sv_mu_variance;
  out.phi_beta_a = p.sv_phi_beta_a;
  out.phi_beta_b = p.sv_phi_beta_b;
  out.sigma_shape = p.sv_sigma_shape;
  out.sigma_rate = p.sv_sigma_rate;
  return out;
}

double prior_mean_phi(const SvPrior& prior) {
  return 2.0 * prior.phi_beta_a / (prior.phi_beta_a + prior.phi_beta_b) - 1.0;
}

arma::uvec sample_mixture_indicators(const arma::vec& log_sq, const arma::vec& logvar, Rng& rng) {
  const arma::uword n = log_sq.n_elem;
  arma::uvec out(n);
  std::array<double, kMixComponents> w{};
  for (arma::uword t = 0; t < n; ++t) {
    const double d = log_sq(t) - logvar(t);
    double max_lw = -1e300;
    for (int j = 0; j < kMixComponents; ++j) {
      const double z = d - kMixMean[j];
      w[j] = std::log(kMixProb[j]) - 0.5 * std::log(kMixVar[j]) - 0.5 * z * z / kMixVar[j];
      max_lw = std::max(max_lw, w[j]);
    }
    for (int j = 0; j < kMixComponents; ++j) w[j] = std::exp(w[j] - max_lw);
    out(t) = rng.categorical(w.data(), kMixComponents);
  }
  return out;
}

arma::vec sample_logvar_path(const arma::vec& log_sq, const arma::uvec& indicators, double mu, double phi,
                             double sigma2_v, Rng& rng) {
  const arma::uword n = log_sq.n_elem;
  arma::vec m(n), p(n);
  double pred_m = mu;
  double pred_p = sigma2_v / (1.0 - phi * phi);
  for (arma::uword t = 0; t < n; ++t) {
    const int j = static_cast<int>(indicators(t));
    const double obs = log_sq(t) - kMixMean[j];
    const double f = pred_p + kMixVar[j];
    const double k = pred_p / f;
    m(t) = pred_m + k * (obs - pred_m);
    p(t) = pred_p * (1.0 - k);
    pred_m = mu + phi * (m(t) - mu);
    pred_p = phi * phi * p(t) + sigma2_v;
  }
  arma::vec v(n);
  v(n - 1) = m(n - 1) + std::sqrt(p(n - 1)) * rng.normal();
  for (arma::uword t = n - 1; t-- > 0;) {
    const double denom = phi * phi * p(t) + sigma2_v;
    const double g = phi * p(t) / denom;
    const double mean = m(t) + g * (v(t + 1) - mu - phi * (m(t) - mu));
    const double var = p(t) - g * phi * p(t);
    v(t) = mean + std::sqrt(std::max(var, 0.0)) * rng.normal();
  }
  return v;
}

namespace {

double log_phi_target(double phi, double v0, double mu, double sigma2, const SvPrior& prior) {
  // Beta prior on (phi + 1) / 2 and the stationary density of the first state.
  const double x = 0.5 * (phi + 1.0);
  const double one_m = 1.0 - phi * phi;
  return (prior.phi_beta_a - 1.0) * std::log(x) + (prior.phi_beta_b - 1.0) * std::log(1.0 - x) +
         0.5 * std::log(one_m) - 0.5 * one_m * (v0 - mu) * (v0 - mu) / sigma2;
}

}  // namespace

SvResult estimate_ar_sv(const arma::vec& series, int r, const SvPrior& prior, int n_draws, int n_burn, Rng& rng) {
  const int t_len = static_cast<int>(series.n_elem);
  if (r <= 0) throw ValidationError("AR order must be positive");
  if (r >= t_len) throw InsufficientDataError("AR order " + std::to_string(r) + " not below series length");
  if (t_len < r + 20) {
    throw InsufficientDataError("series of length " + std::to_string(t_len) + " too short for AR(" +
                                std::to_string(r) + ")-SV; need " + std::to_string(r + 20));
  }
  if (!series.is_finite()) throw ValidationError("series contains undefined values");
  if (n_draws <= 0 || n_burn < 0) throw ValidationError("invalid draw counts");

  const arma::uword n = static_cast<arma::uword>(t_len - r);
  arma::vec y = series.subvec(r, t_len - 1);
  arma::mat x(n, r);
  for (int m = 0; m < r; ++m) x.col(m) = series.subvec(r - 1 - m, t_len - 2 - m);

  // Start from OLS with a constant log-variance.
  arma::vec rho = arma::solve(x.t() * x + arma::eye(r, r) / prior.rho_variance, x.t() * y);
  arma::vec resid = y - x * rho;
  double mu = std::log(std::max(arma::mean(resid % resid), 1e-4));
  double phi = 0.8;
  double sigma2 = 0.1;
  arma::vec v(n, arma::fill::value(mu));

  SvResult out;
  SvDraws& d = out.draws;
  d.rho.set_size(n_draws, r);
  d.mu.set_size(n_draws);
  d.phi.set_size(n_draws);
  d.sigma2_v.set_size(n_draws);
  d.mean_variance_path.zeros(n);
  arma::vec v_sum(n, arma::fill::zeros);
  long phi_accept = 0, sigma_accept = 0;

  const int total = n_burn + n_draws;
  for (int it = 0; it < total; ++it) {
    // (i) AR coefficients: weighted regression.
    arma::vec w = arma::exp(-v);
    arma::mat xw = x.each_col() % w;
    arma::mat prec = x.t() * xw + arma::eye(r, r) / prior.rho_variance;
    arma::mat u;
    if (!arma::chol(u, arma::symmatu(prec))) throw NumericalError("AR coefficient precision not positive definite");
    arma::vec mean = arma::solve(arma::trimatu(u), arma::solve(arma::trimatl(u.t()), xw.t() * y));
    rho = rng.mvnormal_precision(mean, u);
    resid = y - x * rho;

    // (ii) log-volatility path via the auxiliary mixture.
    arma::vec log_sq = arma::log(resid % resid + kLogOffset);
    arma::uvec ind = sample_mixture_indicators(log_sq, v, rng);
    v = sample_logvar_path(log_sq, ind, mu, phi, sigma2, rng);
    if (arma::abs(v).max() > 50.0) {
      throw NumericalError("stochastic volatility path diverged (|v| > 50); re-standardize the series");
    }

    // (iii) mu | v, phi, sigma2.
    {
      const double one_m = 1.0 - phi;
      double prec_mu = (1.0 - phi * phi) / sigma2 + static_cast<double>(n - 1) * one_m * one_m / sigma2 +
                       1.0 / prior.mu_variance;
      double acc = (1.0 - phi * phi) * v(0) / sigma2;
      for (arma::uword t = 1; t < n; ++t) acc += one_m * (v(t) - phi * v(t - 1)) / sigma2;
      mu = acc / prec_mu + rng.normal() / std::sqrt(prec_mu);
    }

    // phi: truncated-normal proposal from the AR(1) regression part, MH on the rest.
    {
      arma::vec a = v - mu;
      double sxx = 0.0, sxy = 0.0;
      for (arma::uword t = 1; t < n; ++t) {
        sxx += a(t - 1) * a(t - 1);
        sxy += a(t - 1) * a(t);
      }
      const double phi_hat = sxy / sxx;
      const double sd = std::sqrt(sigma2 / sxx);
      const double cand = rng.truncated_normal(phi_hat, sd, -1.0 + 1e-10, 1.0 - 1e-10);
      const double log_ratio =
          log_phi_target(cand, v(0), mu, sigma2, prior) - log_phi_target(phi, v(0), mu, sigma2, prior);
      if (std::log(rng.uniform()) < log_ratio) {
        phi = cand;
        ++phi_accept;
      }
    }

    // sigma2 | v: independence proposal matching the likelihood kernel, accepted on the prior ratio.
    {
      double ss = (1.0 - phi * phi) * (v(0) - mu) * (v(0) - mu);
      for (arma::uword t = 1; t < n; ++t) {
        const double e = v(t) - mu - phi * (v(t - 1) - mu);
        ss += e * e;
      }
      const double cand = rng.inverse_gamma(0.5 * static_cast<double>(n) - 1.0, 0.5 * ss);
      auto log_prior = [&](double s2) { return (prior.sigma_shape - 1.0) * std::log(s2) - prior.sigma_rate * s2; };
      if (std::log(rng.uniform()) < log_prior(cand) - log_prior(sigma2)) {
        sigma2 = cand;
        ++sigma_accept;
      }
    }

    if (it >= n_burn) {
      const int k = it - n_burn;
      d.rho.row(k) = rho.t();
      d.mu(k) = mu;
      d.phi(k) = phi;
      d.sigma2_v(k) = sigma2;
      v_sum += v;
      d.mean_variance_path += arma::exp(v);
    }
  }

  const double nd = static_cast<double>(n_draws);
  d.mean_variance_path /= nd;
  d.phi_acceptance = static_cast<double>(phi_accept) / total;
  d.sigma_acceptance = static_cast<double>(sigma_accept) / total;
  out.posterior_mean.rho = arma::mean(d.rho, 0).t();
  out.posterior_mean.mu = arma::mean(d.mu);
  out.posterior_mean.phi = arma::mean(d.phi);
  out.posterior_mean.sigma2_v = arma::mean(d.sigma2_v);
  out.posterior_mean.logvar_path = v_sum / nd;
  return out;
}

arma::vec volatility_proxy(const arma::vec& series, const ProxyOptions& options, Rng& rng) {
  const transform::Standardized z = transform::standardize(series);
  SvResult fit = estimate_ar_sv(z.values, options.ar_order, options.prior, options.n_draws, options.n_burn, rng);
  arma::vec path(series.n_elem);
  const arma::uword r = static_cast<arma::uword>(options.ar_order);
  path.head(r).fill(fit.posterior_mean.logvar_path(0));
  path.tail(series.n_elem - r) = fit.posterior_mean.logvar_path;
  return transform::standardize(path).values;
}

arma::vec rolling_sd_proxy(const arma::vec& series, int window) {
  if (window < 2) throw ValidationError("rolling window must be at least 2");
  const arma::uword n = series.n_elem;
  const arma::uword w = static_cast<arma::uword>(window);
  if (n < w + 1) throw InsufficientDataError("series shorter than the rolling window");
  arma::vec out(n);
  for (arma::uword t = w - 1; t < n; ++t) out(t) = arma::stddev(series.subvec(t + 1 - w, t));
  out.head(w - 1).fill(out(w - 1));
  return transform::standardize(out).values;
}

}  // namespace msfavar::sv
