#include "msfavar/irf.hpp"

#include <algorithm>
#include <cmath>

namespace msfavar::irf {

arma::mat structural_impact(const arma::mat& omega) {
  if (omega.n_rows != omega.n_cols) throw ValidationError("Omega must be square");
  arma::mat l;
  if (!omega.is_symmetric(1e-10 * std::max(1.0, arma::abs(omega).max())) || !arma::chol(l, omega, "lower")) {
    throw NumericalError("Omega is not symmetric positive definite; Cholesky factorization failed");
  }
  return arma::trimatl(l);
}

arma::mat companion_matrix(const arma::vec& beta, int n_vars, int p_lags) {
  const arma::uword k = static_cast<arma::uword>(n_vars), p = static_cast<arma::uword>(p_lags);
  arma::mat b = coefficient_matrix(beta, n_vars);
  if (b.n_rows != k * p + 1) throw ValidationError("coefficient vector does not match K and P");
  arma::mat c(k * p, k * p, arma::fill::zeros);
  for (arma::uword l = 0; l < p; ++l) c.submat(0, l * k, k - 1, (l + 1) * k - 1) = b.rows(1 + l * k, (l + 1) * k).t();
  if (p > 1) c.submat(k, 0, k * p - 1, k * (p - 1) - 1) = arma::eye(k * (p - 1), k * (p - 1));
  return c;
}

double spectral_radius(const arma::mat& companion) {
  arma::cx_vec ev = arma::eig_gen(companion);
  return arma::abs(ev).max();
}

arma::cube compute_irf(const arma::vec& beta, const arma::mat& impact, int n_vars, int p_lags, int horizon) {
  const arma::uword k = static_cast<arma::uword>(n_vars);
  arma::mat c = companion_matrix(beta, n_vars, p_lags);
  arma::cube out(k, k, horizon + 1);
  // State block J' * impact, propagated by the companion matrix.
  arma::mat state(c.n_rows, k, arma::fill::zeros);
  state.rows(0, k - 1) = impact;
  for (int h = 0; h <= horizon; ++h) {
    out.slice(h) = state.rows(0, k - 1);
    if (h < horizon) state = c * state;
  }
  return out;
}

double sorted_quantile(const double* sorted, std::size_t n, double prob) {
  if (n == 0) throw ValidationError("quantile of an empty sample");
  const double h = (static_cast<double>(n) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

IrfResult summarize_irf(const std::vector<PosteriorDraw>& draws, const ModelSpec& spec, std::vector<int> shocks,
                        std::size_t min_draws) {
  if (draws.empty()) throw ValidationError("no posterior draws to summarize");
  if (draws.size() < min_draws) {
    throw ValidationError("need at least " + std::to_string(min_draws) + " draws, got " + std::to_string(draws.size()));
  }
  const int k = spec.n_vars, p = spec.p_lags, hz = spec.horizon;
  const int n_reg = draws.front().n_regimes();
  if (n_reg <= 0) throw ValidationError("draws carry no regimes");
  if (shocks.empty())
    for (int j = 0; j < k; ++j) shocks.push_back(j);
  for (int j : shocks)
    if (j < 0 || j >= k) throw ValidationError("shock index out of range");

  IrfResult res;
  res.n_regimes = n_reg;
  res.n_vars = k;
  res.horizon = hz;
  res.n_draws = draws.size();
  res.shocks = shocks;
  res.bands.assign(n_reg, std::vector<IrfBand>(shocks.size()));
  res.explosive_draws.assign(n_reg, 0);

  const std::size_t nd = draws.size();
  const std::size_t ns = shocks.size();
  const std::size_t cell = static_cast<std::size_t>(k) * (hz + 1);
  std::vector<double> buf(ns * cell * nd);  // [shock][variable, horizon][draw]
  for (int r = 0; r < n_reg; ++r) {
    for (std::size_t d = 0; d < nd; ++d) {
      const PosteriorDraw& dr = draws[d];
      if (dr.n_regimes() != n_reg) throw ValidationError("draws disagree on the number of regimes");
      if (dr.beta[r].n_elem != static_cast<arma::uword>(spec.n_coefficients()) ||
          dr.omega[r].n_rows != static_cast<arma::uword>(k)) {
        throw ValidationError("draw dimensions do not match the model spec");
      }
      if (spectral_radius(companion_matrix(dr.beta[r], k, p)) > 1.0) ++res.explosive_draws[r];
      arma::cube resp = compute_irf(dr.beta[r], structural_impact(dr.omega[r]), k, p, hz);
      for (std::size_t s = 0; s < ns; ++s)
        for (int h = 0; h <= hz; ++h)
          for (int i = 0; i < k; ++i) buf[(s * cell + h * k + i) * nd + d] = resp(i, shocks[s], h);
    }
    for (std::size_t s = 0; s < ns; ++s) {
      IrfBand& band = res.bands[r][s];
      band.p16.set_size(k, hz + 1);
      band.p50.set_size(k, hz + 1);
      band.p84.set_size(k, hz + 1);
      band.mean.set_size(k, hz + 1);
      band.significant_any.zeros(k, 1);
      for (int h = 0; h <= hz; ++h) {
        for (int i = 0; i < k; ++i) {
          double* v = &buf[(s * cell + h * k + i) * nd];
          double sum = 0.0;
          for (std::size_t d = 0; d < nd; ++d) sum += v[d];
          std::sort(v, v + nd);
          band.mean(i, h) = sum / static_cast<double>(nd);
          band.p16(i, h) = sorted_quantile(v, nd, 0.16);
          band.p50(i, h) = sorted_quantile(v, nd, 0.50);
          band.p84(i, h) = sorted_quantile(v, nd, 0.84);
          if (band.p16(i, h) > 0.0 || band.p84(i, h) < 0.0) band.significant_any(i, 0) = 1;
        }
      }
    }
  }
  return res;
}

PeakSummary peak_response(const arma::rowvec& median, const arma::rowvec& low, const arma::rowvec& high) {
  if (median.n_elem == 0 || low.n_elem != median.n_elem || high.n_elem != median.n_elem) {
    throw ValidationError("peak extraction needs equally long, non-empty paths");
  }
  PeakSummary out;
  double best = -1.0;
  for (arma::uword h = 0; h < median.n_elem; ++h) {
    const double a = std::abs(median(h));
    if (a > best) {
      best = a;
      out.quarter = static_cast<int>(h);
    }
  }
  out.value = median(out.quarter);
  out.sign = out.value < 0.0 ? PeakSign::negative : PeakSign::positive;
  out.significant = low(out.quarter) > 0.0 || high(out.quarter) < 0.0;
  return out;
}

}  // namespace msfavar::irf
