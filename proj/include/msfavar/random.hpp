#ifndef MSFAVAR_RANDOM_HPP
#define MSFAVAR_RANDOM_HPP

#include <armadillo>

#include <cstdint>
#include <random>

namespace msfavar {

/// Seeded random stream. One stream is owned by exactly one estimation task;
/// identical seeds give identical sequences on a given platform/toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  double uniform();  // open interval (0, 1)
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Gamma with shape/scale parameterization (mean = shape * scale).
  double gamma(double shape, double scale);
  double inverse_gamma(double shape, double scale) { return 1.0 / gamma(shape, 1.0 / scale); }
  double beta(double a, double b);
  double chi_squared(double df) { return gamma(0.5 * df, 2.0); }
  /// z ~ N(0,1) conditioned on z > lower.
  double truncated_normal_above(double lower);
  /// N(mean, sd^2) restricted to (lo, hi), by inversion on the tail side.
  double truncated_normal(double mean, double sd, double lo, double hi);
  /// Index drawn from unnormalized non-negative weights.
  std::size_t categorical(const double* weights, std::size_t n);

  arma::vec normal_vec(arma::uword n);

  /// Draw from N(mean, P^{-1}) given the upper Cholesky factor U of P (P = U'U).
  arma::vec mvnormal_precision(const arma::vec& mean, const arma::mat& upper_chol_precision);
  /// Draw from N(mean, Sigma) given the lower Cholesky factor L of Sigma.
  arma::vec mvnormal_cov_chol(const arma::vec& mean, const arma::mat& lower_chol_cov);

  /// Wishart with shape c and scale V, mean c*V; density
  /// |X|^{c-(K+1)/2} exp(-tr(V^{-1} X)). For K = 1 this is Gamma(c, V).
  arma::mat wishart(const arma::mat& scale, double shape);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Standard normal cdf and log-density.
double normal_cdf(double x);
double normal_log_pdf(double x, double mean, double sd);

}  // namespace msfavar

#endif
