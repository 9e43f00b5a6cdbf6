#ifndef MSFAVAR_IRF_HPP
#define MSFAVAR_IRF_HPP

#include "msfavar/core.hpp"

#include <vector>

namespace msfavar::irf {

/// Lower Cholesky factor of Omega; column j is the impact of structural shock j.
arma::mat structural_impact(const arma::mat& omega);

/// KP x KP companion matrix of the lag coefficients (intercepts dropped).
arma::mat companion_matrix(const arma::vec& beta, int n_vars, int p_lags);

double spectral_radius(const arma::mat& companion);

/// out(i, j, h): response of variable i at horizon h to shock j.
arma::cube compute_irf(const arma::vec& beta, const arma::mat& impact, int n_vars, int p_lags, int horizon);

/// Type-7 (linear interpolation) quantile of an ascending-sorted sample.
double sorted_quantile(const double* sorted, std::size_t n, double prob);

struct IrfBand {
  arma::mat p16, p50, p84, mean;  // K variables x (horizon + 1)
  arma::umat significant_any;     // K x 1: band excludes zero at some horizon
};

struct IrfResult {
  int n_regimes = 0;
  int n_vars = 0;
  int horizon = 0;
  std::size_t n_draws = 0;
  std::vector<int> shocks;                  // shock indices summarized
  std::vector<std::vector<IrfBand>> bands;  // [regime][position in shocks]
  std::vector<int> explosive_draws;         // per regime, companion radius > 1
};

/// Pointwise 16/50/84 percentiles across draws for each regime and shock.
/// An empty `shocks` list means every shock.
IrfResult summarize_irf(const std::vector<PosteriorDraw>& draws, const ModelSpec& spec, std::vector<int> shocks = {},
                        std::size_t min_draws = 500);

enum class PeakSign { negative, positive };

struct PeakSummary {
  double value = 0.0;
  int quarter = 0;
  PeakSign sign = PeakSign::positive;
  bool significant = false;
};

/// Peak at the horizon maximizing |median| (earliest on ties); significant iff
/// the band at that horizon excludes zero.
PeakSummary peak_response(const arma::rowvec& median, const arma::rowvec& low, const arma::rowvec& high);

}  // namespace msfavar::irf

#endif
