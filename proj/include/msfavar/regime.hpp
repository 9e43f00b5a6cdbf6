#ifndef MSFAVAR_REGIME_HPP
#define MSFAVAR_REGIME_HPP

#include "msfavar/core.hpp"
#include "msfavar/random.hpp"

namespace msfavar::regime {

/// p_{k,1} = Phi(c0[k] + gamma * i).
struct ProbitParams {
  arma::vec c0{0.0, 0.0};
  double gamma = 0.0;
};

struct ProbitPrior {
  double intercept_variance = 10.0;
  double slope_variance = 10.0;
};

/// Slice t of the transition cube governs the move from period t-1 into t.
/// Slice 0 only seeds the initial distribution.
struct RegimePath {
  arma::ivec states;
  arma::mat filtered_prob;       // T x 2
  arma::cube transition_matrices;  // 2 x 2 x T
};

arma::mat transition_matrix(const ProbitParams& probit, double interest_rate);

/// One matrix per period from the covariate path (covariate[t] is the rate
/// that drives the transition into t).
arma::cube transition_path(const ProbitParams& probit, const arma::vec& covariate);

/// Stationary distribution of a 2x2 transition matrix; (0.5, 0.5) if degenerate.
arma::vec invariant_distribution(const arma::mat& transition);

struct FilterResult {
  arma::mat filtered_prob;
  double log_likelihood = 0.0;
};

FilterResult hamilton_filter(const arma::mat& likelihoods, const arma::cube& transitions,
                             const arma::vec& initial_prob);

/// Same recursion on log densities; each row is shifted by its maximum before
/// exponentiation and the shift is added back to the log-likelihood.
FilterResult hamilton_filter_log(const arma::mat& log_likelihoods, const arma::cube& transitions,
                                 const arma::vec& initial_prob);

arma::ivec sample_states_ffbs(const arma::mat& filtered_prob, const arma::cube& transitions, Rng& rng);

struct ProbitUpdate {
  ProbitParams params;
  bool degenerate = false;  // one of the states never visited
};

/// Albert-Chib data augmentation. `covariate[t]` drives the transition from
/// states[t-1] into states[t], t >= 1.
ProbitUpdate update_probit(const arma::ivec& states, const arma::vec& covariate, const ProbitParams& current,
                           const ProbitPrior& prior, Rng& rng);

/// 0 before the break, 1 from it on.
RegimePath deterministic_states(const std::vector<Quarter>& dates, Quarter break_date);

/// Mean covariate over the periods assigned to each regime (NaN if empty).
arma::vec regime_mean_rates(const arma::ivec& states, const arma::vec& rates);

/// Relabel regimes 0 <-> 1 in a draw: coefficients, covariances and loadings
/// swap, states flip, and the probit becomes c0' = (-c0[1], -c0[0]), gamma' = -gamma.
void swap_regime_labels(PosteriorDraw& draw);

}  // namespace msfavar::regime

#endif
