#include "msfavar/regime.hpp"

#include <cmath>
#include <limits>

namespace msfavar::regime {

arma::mat transition_matrix(const ProbitParams& probit, double interest_rate) {
  arma::mat p(2, 2);
  for (int k = 0; k < 2; ++k) {
    const double x = probit.c0(k) + probit.gamma * interest_rate;
    p(k, 1) = normal_cdf(x);
    p(k, 0) = normal_cdf(-x);
  }
  return p;
}

arma::cube transition_path(const ProbitParams& probit, const arma::vec& covariate) {
  arma::cube out(2, 2, covariate.n_elem);
  for (arma::uword t = 0; t < covariate.n_elem; ++t) out.slice(t) = transition_matrix(probit, covariate(t));
  return out;
}

arma::vec invariant_distribution(const arma::mat& p) {
  const double p01 = p(0, 1), p10 = p(1, 0);
  const double denom = p01 + p10;
  if (!(denom > 1e-300)) return {0.5, 0.5};
  return {p10 / denom, p01 / denom};
}

namespace {

void check_shapes(arma::uword n, const arma::cube& transitions) {
  if (transitions.n_slices != n || transitions.n_rows != 2 || transitions.n_cols != 2) {
    throw ValidationError("transition cube must be 2 x 2 x T");
  }
}

}  // namespace

FilterResult hamilton_filter(const arma::mat& likelihoods, const arma::cube& transitions,
                             const arma::vec& initial_prob) {
  const arma::uword n = likelihoods.n_rows;
  check_shapes(n, transitions);
  if (std::abs(arma::accu(initial_prob) - 1.0) > 1e-10) throw ValidationError("initial probabilities must sum to 1");
  FilterResult out;
  out.filtered_prob.set_size(n, 2);
  arma::rowvec pred = initial_prob.t();
  for (arma::uword t = 0; t < n; ++t) {
    if (t > 0) pred = out.filtered_prob.row(t - 1) * transitions.slice(t);
    arma::rowvec joint = pred % likelihoods.row(t);
    const double norm = arma::accu(joint);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DegenerateLikelihoodError("likelihood row " + std::to_string(t) + " has no mass");
    }
    out.filtered_prob.row(t) = joint / norm;
    out.log_likelihood += std::log(norm);
  }
  return out;
}

FilterResult hamilton_filter_log(const arma::mat& log_likelihoods, const arma::cube& transitions,
                                 const arma::vec& initial_prob) {
  const arma::uword n = log_likelihoods.n_rows;
  arma::mat lik(n, 2);
  double shift = 0.0;
  for (arma::uword t = 0; t < n; ++t) {
    const double m = log_likelihoods.row(t).max();
    if (!std::isfinite(m)) throw DegenerateLikelihoodError("likelihood row " + std::to_string(t) + " has no mass");
    lik.row(t) = arma::exp(log_likelihoods.row(t) - m);
    shift += m;
  }
  FilterResult out = hamilton_filter(lik, transitions, initial_prob);
  out.log_likelihood += shift;
  return out;
}

arma::ivec sample_states_ffbs(const arma::mat& filtered_prob, const arma::cube& transitions, Rng& rng) {
  const arma::uword n = filtered_prob.n_rows;
  check_shapes(n, transitions);
  arma::ivec s(n);
  s(n - 1) = rng.uniform() < filtered_prob(n - 1, 1) ? 1 : 0;
  for (arma::uword t = n - 1; t-- > 0;) {
    const int next = static_cast<int>(s(t + 1));
    const double w0 = filtered_prob(t, 0) * transitions(0, next, t + 1);
    const double w1 = filtered_prob(t, 1) * transitions(1, next, t + 1);
    const double total = w0 + w1;
    const double p1 = total > 0.0 ? w1 / total : filtered_prob(t, 1);
    s(t) = rng.uniform() < p1 ? 1 : 0;
  }
  return s;
}

ProbitUpdate update_probit(const arma::ivec& states, const arma::vec& covariate, const ProbitParams& current,
                           const ProbitPrior& prior, Rng& rng) {
  const arma::uword n = states.n_elem;
  if (covariate.n_elem != n) throw ValidationError("states and covariate lengths differ");
  if (n < 2) throw InsufficientDataError("probit update needs at least two periods");
  if (!(prior.intercept_variance >= 0.0) || !(prior.slope_variance >= 0.0) ||
      !std::isfinite(prior.intercept_variance) || !std::isfinite(prior.slope_variance)) {
    throw ValidationError("probit prior variances must be finite and non-negative");
  }
  ProbitUpdate out;
  out.degenerate = arma::all(states == 0) || arma::all(states == 1);

  arma::mat xtx(3, 3, arma::fill::zeros);
  arma::vec xty(3, arma::fill::zeros);
  for (arma::uword t = 1; t < n; ++t) {
    const int prev = static_cast<int>(states(t - 1));
    const double mean = current.c0(prev) + current.gamma * covariate(t);
    const double z = states(t) == 1 ? mean + rng.truncated_normal_above(-mean)
                                    : mean - rng.truncated_normal_above(mean);
    arma::vec row(3, arma::fill::zeros);
    row(prev) = 1.0;
    row(2) = covariate(t);
    xtx += row * row.t();
    xty += row * z;
  }

  // A zero prior variance pins that coefficient at zero.
  const double var[3] = {prior.intercept_variance, prior.intercept_variance, prior.slope_variance};
  arma::uvec free_idx;
  {
    std::vector<arma::uword> idx;
    for (arma::uword j = 0; j < 3; ++j)
      if (var[j] > 0.0) idx.push_back(j);
    free_idx = arma::uvec(idx);
  }
  arma::vec coef(3, arma::fill::zeros);
  if (free_idx.n_elem > 0) {
    arma::mat prec = xtx.submat(free_idx, free_idx);
    for (arma::uword a = 0; a < free_idx.n_elem; ++a) prec(a, a) += 1.0 / var[free_idx(a)];
    arma::mat u;
    if (!arma::chol(u, arma::symmatu(prec))) throw NumericalError("probit posterior precision not positive definite");
    arma::vec rhs = xty.elem(free_idx);
    arma::vec mean = arma::solve(arma::trimatu(u), arma::solve(arma::trimatl(u.t()), rhs));
    coef.elem(free_idx) = rng.mvnormal_precision(mean, u);
  }
  out.params.c0 = {coef(0), coef(1)};
  out.params.gamma = coef(2);
  return out;
}

RegimePath deterministic_states(const std::vector<Quarter>& dates, Quarter break_date) {
  if (dates.empty()) throw ValidationError("empty date vector");
  if (break_date < dates.front() || break_date > dates.back()) {
    throw ValidationError("break date " + break_date.to_string() + " outside sample " + dates.front().to_string() +
                          "-" + dates.back().to_string());
  }
  const arma::uword n = dates.size();
  RegimePath path;
  path.states.set_size(n);
  path.filtered_prob.zeros(n, 2);
  path.transition_matrices.zeros(2, 2, n);
  for (arma::uword t = 0; t < n; ++t) {
    const int s = dates[t] < break_date ? 0 : 1;
    path.states(t) = s;
    path.filtered_prob(t, s) = 1.0;
    arma::mat p(2, 2, arma::fill::zeros);
    // Stay put, except for the single switch into the break period.
    if (t > 0 && s == 1 && path.states(t - 1) == 0) {
      p(0, 1) = 1.0;
    } else {
      p(0, 0) = 1.0;
    }
    p(1, 1) = 1.0;
    path.transition_matrices.slice(t) = p;
  }
  return path;
}

arma::vec regime_mean_rates(const arma::ivec& states, const arma::vec& rates) {
  arma::vec out(2);
  for (int r = 0; r < 2; ++r) {
    arma::uvec idx = arma::find(states == r);
    out(r) = idx.is_empty() ? std::numeric_limits<double>::quiet_NaN() : arma::mean(rates.elem(idx));
  }
  return out;
}

void swap_regime_labels(PosteriorDraw& draw) {
  if (draw.n_regimes() != 2) return;
  std::swap(draw.beta[0], draw.beta[1]);
  std::swap(draw.omega[0], draw.omega[1]);
  if (draw.loadings.size() == 2) std::swap(draw.loadings[0], draw.loadings[1]);
  draw.states = 1 - draw.states;
  const double c0 = draw.probit_intercepts(0), c1 = draw.probit_intercepts(1);
  draw.probit_intercepts = {-c1, -c0};
  draw.probit_slope = -draw.probit_slope;
}

}  // namespace msfavar::regime
