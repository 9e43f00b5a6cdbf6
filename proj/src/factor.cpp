#include "msfavar/factor.hpp"

#include <cmath>

namespace msfavar::factor {

FactorSet extract_principal_components(const arma::mat& panel, int q) {
  const arma::uword t_len = panel.n_rows, s_len = panel.n_cols;
  if (q <= 0) throw ValidationError("q must be positive");
  if (static_cast<arma::uword>(q) > std::min(t_len, s_len)) {
    throw RankError("q = " + std::to_string(q) + " exceeds min(T, S)");
  }
  if (!panel.is_finite()) throw ContractError("panel contains undefined values");
  for (arma::uword j = 0; j < s_len; ++j) {
    const double sd = arma::stddev(panel.col(j));
    const double mu = arma::mean(panel.col(j));
    if (std::abs(sd - 1.0) > 1e-6 || std::abs(mu) > 1e-6) {
      throw ContractError("panel column " + std::to_string(j) + " is not standardized (mean " + std::to_string(mu) +
                          ", sd " + std::to_string(sd) + ")");
    }
  }

  const double denom = static_cast<double>(t_len) - 1.0;
  arma::vec eigval;
  arma::mat eigvec;
  FactorSet out;
  out.factors.set_size(t_len, q);
  out.loadings.set_size(s_len, q);
  out.explained_variance_share.set_size(q);

  double trace = 0.0;
  if (s_len <= t_len) {
    arma::mat cov = panel.t() * panel / denom;
    if (!arma::eig_sym(eigval, eigvec, cov)) throw NumericalError("eigendecomposition failed");
    trace = arma::trace(cov);
  } else {
    arma::mat gram = panel * panel.t() / denom;
    if (!arma::eig_sym(eigval, eigvec, gram)) throw NumericalError("eigendecomposition failed");
    trace = arma::trace(gram);
  }
  // eig_sym returns ascending order.
  const arma::uword n_eig = eigval.n_elem;
  const double tol = 1e-10 * std::max(1.0, eigval(n_eig - 1));
  for (int j = 0; j < q; ++j) {
    const double lambda = eigval(n_eig - 1 - j);
    if (!(lambda > tol)) throw RankError("q = " + std::to_string(q) + " exceeds the panel rank");
    arma::vec v = eigvec.col(n_eig - 1 - j);
    arma::vec f;
    arma::vec load;
    if (s_len <= t_len) {
      f = panel * v / std::sqrt(lambda);
      load = v * std::sqrt(lambda);
    } else {
      f = v * std::sqrt(denom);
      load = panel.t() * f / denom;
    }
    out.factors.col(j) = f;
    out.loadings.col(j) = load;
    out.explained_variance_share(j) = lambda / trace;
  }

  const arma::vec xbar = arma::mean(panel, 1);
  for (int j = 0; j < q; ++j) {
    double c = arma::dot(out.factors.col(j), xbar - arma::mean(xbar));
    double flip = 0.0;
    if (std::abs(c) > 1e-10 * std::sqrt(static_cast<double>(t_len))) {
      flip = c < 0.0 ? -1.0 : 1.0;
    } else {
      for (arma::uword i = 0; i < s_len && flip == 0.0; ++i) {
        if (std::abs(out.loadings(i, j)) > 1e-12) flip = out.loadings(i, j) < 0.0 ? -1.0 : 1.0;
      }
      if (flip == 0.0) flip = 1.0;
    }
    out.factors.col(j) *= flip;
    out.loadings.col(j) *= flip;
  }
  return out;
}

namespace {

void check_inputs(const arma::mat& external, const arma::mat& factors, const arma::ivec& states) {
  if (external.n_rows != factors.n_rows || external.n_rows != states.n_elem) {
    throw ValidationError("external panel, factors and states must share the time dimension");
  }
  if (external.n_cols < factors.n_cols) throw ValidationError("need at least q external series");
}

arma::uvec regime_rows(const arma::ivec& states, int r) { return arma::find(states == r); }

}  // namespace

RegimeLoadings regime_loadings(const arma::mat& external, const arma::mat& factors, const arma::ivec& states,
                               const LoadingPrior& prior) {
  check_inputs(external, factors, states);
  const arma::uword s_len = external.n_cols, q = factors.n_cols;
  RegimeLoadings out;
  arma::uvec rows[2] = {regime_rows(states, 0), regime_rows(states, 1)};
  for (int r = 0; r < 2; ++r) {
    const arma::uword n = rows[r].n_elem;
    if (n == 0) {
      out.prior_only[r] = true;
    } else if (n < q + 2) {
      throw InsufficientRegimeDataError("regime " + std::to_string(r) + " has " + std::to_string(n) +
                                        " periods; need at least " + std::to_string(q + 2));
    }
    out.loadings[r].zeros(s_len, q);
    out.loadings[r].rows(0, q - 1) = arma::eye(q, q);
  }

  out.meas_error_vars.set_size(s_len);
  const double n_total = static_cast<double>(rows[0].n_elem + rows[1].n_elem);
  for (arma::uword j = 0; j < s_len; ++j) {
    double sigma2 = std::max(arma::var(external.col(j)), 1e-8);
    for (int iter = 0; iter < 200; ++iter) {
      double ssr = 0.0;
      for (int r = 0; r < 2; ++r) {
        if (rows[r].n_elem == 0) continue;
        const arma::mat f = factors.rows(rows[r]);
        const arma::vec z = external.col(j).eval().elem(rows[r]);
        arma::rowvec lam;
        if (j < q) {
          lam = out.loadings[r].row(j);
        } else {
          arma::mat prec = f.t() * f / sigma2 + arma::eye(q, q) / prior.loading_variance;
          lam = arma::solve(prec, f.t() * z / sigma2, arma::solve_opts::likely_sympd).t();
          out.loadings[r].row(j) = lam;
        }
        arma::vec e = z - f * lam.t();
        ssr += arma::dot(e, e);
      }
      // Inverse-gamma mode given the current loadings.
      double next = (prior.ig_scale + 0.5 * ssr) / (prior.ig_shape + 0.5 * n_total + 1.0);
      bool done = std::abs(next - sigma2) <= 1e-12 * std::max(1.0, sigma2);
      sigma2 = next;
      if (done || j < q) break;
    }
    out.meas_error_vars(j) = sigma2;
  }
  return out;
}

void sample_regime_loadings(const arma::mat& external, const arma::mat& factors, const arma::ivec& states,
                            int n_regimes, const LoadingPrior& prior, std::vector<arma::mat>& loadings,
                            arma::vec& meas_error_vars, Rng& rng) {
  check_inputs(external, factors, states);
  const arma::uword s_len = external.n_cols, q = factors.n_cols;
  loadings.resize(n_regimes);
  if (meas_error_vars.n_elem != s_len) meas_error_vars = arma::ones(s_len);
  std::vector<arma::uvec> rows(n_regimes);
  for (int r = 0; r < n_regimes; ++r) {
    rows[r] = regime_rows(states, r);
    if (loadings[r].n_rows != s_len || loadings[r].n_cols != q) loadings[r].zeros(s_len, q);
    loadings[r].rows(0, q - 1) = arma::eye(q, q);
  }
  for (arma::uword j = 0; j < s_len; ++j) {
    const double sigma2 = meas_error_vars(j);
    double ssr = 0.0;
    double n = 0.0;
    for (int r = 0; r < n_regimes; ++r) {
      if (j >= q) {
        arma::mat prec = arma::eye(q, q) / prior.loading_variance;
        arma::vec rhs(q, arma::fill::zeros);
        if (rows[r].n_elem > 0) {
          const arma::mat f = factors.rows(rows[r]);
          const arma::vec z = external.col(j).eval().elem(rows[r]);
          prec += f.t() * f / sigma2;
          rhs = f.t() * z / sigma2;
        }
        arma::mat u;
        if (!arma::chol(u, arma::symmatu(prec))) throw NumericalError("loading posterior precision not SPD");
        arma::vec mean = arma::solve(arma::trimatu(u), arma::solve(arma::trimatl(u.t()), rhs));
        loadings[r].row(j) = rng.mvnormal_precision(mean, u).t();
      }
      if (rows[r].n_elem > 0) {
        const arma::mat f = factors.rows(rows[r]);
        arma::vec e = external.col(j).eval().elem(rows[r]) - f * loadings[r].row(j).t();
        ssr += arma::dot(e, e);
        n += static_cast<double>(rows[r].n_elem);
      }
    }
    meas_error_vars(j) = rng.inverse_gamma(prior.ig_shape + 0.5 * n, prior.ig_scale + 0.5 * ssr);
  }
}

}  // namespace msfavar::factor
