#include "msfavar/random.hpp"

#include "msfavar/core.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace msfavar {

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  for (;;) {
    double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("gamma parameters must be positive");
  std::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

double Rng::beta(double a, double b) {
  double x = gamma(a, 1.0);
  double y = gamma(b, 1.0);
  return x / (x + y);
}

double Rng::truncated_normal_above(double lower) {
  if (lower <= 0.45) {
    // Plain rejection accepts with probability >= 0.33.
    for (;;) {
      double z = normal();
      if (z > lower) return z;
    }
  }
  // Exponential proposal with optimal rate (Robert 1995).
  const double alpha = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    double z = lower - std::log(uniform()) / alpha;
    double rho = std::exp(-0.5 * (z - alpha) * (z - alpha));
    if (uniform() <= rho) return z;
  }
}

double Rng::truncated_normal(double mean, double sd, double lo, double hi) {
  if (!(sd > 0.0) || !(hi > lo)) throw DomainError("invalid truncated normal");
  double a = (lo - mean) / sd;
  double b = (hi - mean) / sd;
  // Work in the upper tail so that the cdf differences keep precision.
  bool mirrored = false;
  if (a + b < 0.0) {
    std::swap(a, b);
    a = -a;
    b = -b;
    mirrored = true;
  }
  auto upper = [](double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); };
  const double qa = upper(a), qb = upper(b);
  double z;
  if (!(qa > 0.0)) {
    z = a;
  } else {
    const double q = qb + uniform() * (qa - qb);
    z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
    z = std::clamp(z, a, b);
  }
  if (mirrored) z = -z;
  return mean + sd * z;
}

std::size_t Rng::categorical(const double* weights, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += weights[i];
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("categorical weights degenerate");
  double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += weights[i];
    if (u <= acc) return i;
  }
  return n - 1;
}

arma::vec Rng::normal_vec(arma::uword n) {
  arma::vec z(n);
  for (arma::uword i = 0; i < n; ++i) z(i) = normal();
  return z;
}

arma::vec Rng::mvnormal_precision(const arma::vec& mean, const arma::mat& upper_chol_precision) {
  arma::vec z = normal_vec(mean.n_elem);
  return mean + arma::solve(arma::trimatu(upper_chol_precision), z);
}

arma::vec Rng::mvnormal_cov_chol(const arma::vec& mean, const arma::mat& lower_chol_cov) {
  return mean + lower_chol_cov * normal_vec(mean.n_elem);
}

arma::mat Rng::wishart(const arma::mat& scale, double shape) {
  const arma::uword k = scale.n_rows;
  const double df = 2.0 * shape;
  if (df <= static_cast<double>(k) - 1.0) throw DomainError("Wishart shape must exceed (K-1)/2");
  // Standard Wishart(df, scale/2) via the Bartlett decomposition.
  arma::mat l;
  if (!arma::chol(l, arma::symmatu(arma::mat(0.5 * scale)), "lower")) {
    throw NumericalError("Wishart scale is not positive definite");
  }
  arma::mat a(k, k, arma::fill::zeros);
  for (arma::uword i = 0; i < k; ++i) {
    a(i, i) = std::sqrt(chi_squared(df - static_cast<double>(i)));
    for (arma::uword j = 0; j < i; ++j) a(i, j) = normal();
  }
  arma::mat la = l * a;
  arma::mat x = la * la.t();
  return arma::symmatu(x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace msfavar
