#ifndef MSFAVAR_FACTOR_HPP
#define MSFAVAR_FACTOR_HPP

#include "msfavar/core.hpp"
#include "msfavar/random.hpp"

namespace msfavar::factor {

struct FactorSet {
  arma::mat factors;                   // T x q, unit sample variance
  arma::mat loadings;                  // S x q, panel ~ factors * loadings'
  arma::vec explained_variance_share;  // leading eigenvalues / trace
};

/// First q principal components of a column-standardized T x S panel.
/// Each factor is scaled to unit variance and signed to correlate positively
/// with the cross-sectional mean series (first non-zero loading positive when
/// that correlation vanishes).
FactorSet extract_principal_components(const arma::mat& panel, int q);

struct RegimeLoadings {
  arma::mat loadings[2];     // S x q, top q x q block identity
  arma::vec meas_error_vars; // S, shared across regimes
  bool prior_only[2] = {false, false};
};

struct LoadingPrior {
  double loading_variance = 1.0;
  double ig_shape = 2.0;
  double ig_scale = 1.0;
};

/// Joint posterior mode of regime-specific loadings and the measurement error
/// variances given factors and a state path. A regime without periods keeps the
/// prior mean (zero) and is flagged; a regime with 1..q+1 periods is rejected.
RegimeLoadings regime_loadings(const arma::mat& external, const arma::mat& factors, const arma::ivec& states,
                               const LoadingPrior& prior);

/// One conditional Gibbs update of loadings and measurement error variances.
void sample_regime_loadings(const arma::mat& external, const arma::mat& factors, const arma::ivec& states,
                            int n_regimes, const LoadingPrior& prior, std::vector<arma::mat>& loadings,
                            arma::vec& meas_error_vars, Rng& rng);

}  // namespace msfavar::factor

#endif
