#include "msfavar/regime.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace msfavar;
using namespace msfavar::regime;

namespace {

struct Enumeration {
  arma::mat filtered;                 // T x 2
  double log_likelihood = 0.0;
  std::vector<double> path_prob;      // smoothing distribution, path code bit t = state t
};

// Brute force over all 2^T state paths.
Enumeration enumerate_paths(const arma::mat& lik, const arma::cube& trans, const arma::vec& init) {
  const arma::uword n = lik.n_rows;
  const std::size_t n_paths = std::size_t{1} << n;
  std::vector<double> weight(n_paths);
  Enumeration out;
  out.filtered.zeros(n, 2);
  for (arma::uword t = 0; t < n; ++t) {
    // Filtered marginal at t uses data up to t only: sum over paths truncated at t.
    const std::size_t m = std::size_t{1} << (t + 1);
    double z = 0.0, p1 = 0.0;
    for (std::size_t code = 0; code < m; ++code) {
      double w = init((code >> 0) & 1) * lik(0, (code >> 0) & 1);
      for (arma::uword u = 1; u <= t; ++u) w *= trans((code >> (u - 1)) & 1, (code >> u) & 1, u) * lik(u, (code >> u) & 1);
      z += w;
      if ((code >> t) & 1) p1 += w;
    }
    out.filtered(t, 1) = p1 / z;
    out.filtered(t, 0) = 1.0 - p1 / z;
    if (t == n - 1) out.log_likelihood = std::log(z);
  }
  double z = 0.0;
  for (std::size_t code = 0; code < n_paths; ++code) {
    double w = init(code & 1) * lik(0, code & 1);
    for (arma::uword u = 1; u < n; ++u) w *= trans((code >> (u - 1)) & 1, (code >> u) & 1, u) * lik(u, (code >> u) & 1);
    weight[code] = w;
    z += w;
  }
  for (auto& w : weight) w /= z;
  out.path_prob = weight;
  return out;
}

struct Fixture {
  arma::mat lik;
  arma::cube trans;
  arma::vec init;
};

Fixture random_fixture(arma::uword n, std::uint64_t seed) {
  Rng rng(seed);
  Fixture f;
  f.lik.set_size(n, 2);
  for (auto& v : f.lik) v = 0.05 + rng.uniform();
  ProbitParams p;
  p.c0 = {rng.normal(), rng.normal()};
  p.gamma = rng.normal();
  f.trans = transition_path(p, rng.normal_vec(n));
  f.init = invariant_distribution(f.trans.slice(0));
  return f;
}

std::size_t path_code(const arma::ivec& s) {
  std::size_t code = 0;
  for (arma::uword t = 0; t < s.n_elem; ++t) code |= static_cast<std::size_t>(s(t)) << t;
  return code;
}

}  // namespace

TEST_SUITE("regime") {

TEST_CASE("transition matrix examples") {
  ProbitParams p;
  arma::mat a = transition_matrix(p, 3.7);
  CHECK(a(0, 0) == 0.5);
  CHECK(a(1, 1) == 0.5);
  p.gamma = 1.0;
  arma::mat b = transition_matrix(p, 1.6448536269514722);
  CHECK(b(0, 1) == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(b(1, 1) == doctest::Approx(0.95).epsilon(1e-12));
  p.gamma = -10.0;
  arma::mat c = transition_matrix(p, 3.0);
  CHECK(c(0, 1) < 1e-6);
  CHECK(c(1, 1) < 1e-6);
}

TEST_CASE("transition rows are probability vectors for any parameters") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    ProbitParams p;
    p.c0 = 5.0 * rng.normal_vec(2);
    p.gamma = 5.0 * rng.normal();
    arma::mat m = transition_matrix(p, 3.0 * rng.normal());
    REQUIRE(arma::all(arma::vectorise(m) >= 0.0));
    REQUIRE(arma::all(arma::vectorise(m) <= 1.0));
    REQUIRE(std::abs(m(0, 0) + m(0, 1) - 1.0) < 1e-10);
    REQUIRE(std::abs(m(1, 0) + m(1, 1) - 1.0) < 1e-10);
  }
}

TEST_CASE("invariant distribution") {
  arma::mat p{{0.9, 0.1}, {0.3, 0.7}};
  arma::vec pi = invariant_distribution(p);
  arma::rowvec back = pi.t() * p;
  CHECK(back(0) == doctest::Approx(pi(0)).epsilon(1e-14));
  CHECK(pi(0) == doctest::Approx(0.75));
  CHECK(invariant_distribution(arma::eye(2, 2))(0) == 0.5);
}

TEST_CASE("absorbing start and symmetric filter cases") {
  Rng rng(2);
  arma::mat lik(8, 2);
  for (auto& v : lik) v = rng.uniform();
  arma::cube eye(2, 2, 8);
  eye.each_slice() = arma::eye(2, 2);
  FilterResult a = hamilton_filter(lik, eye, arma::vec{1.0, 0.0});
  CHECK(arma::all(a.filtered_prob.col(0) == 1.0));
  arma::ivec s = sample_states_ffbs(a.filtered_prob, eye, rng);
  CHECK(arma::all(s == 0));

  arma::cube half(2, 2, 8, arma::fill::value(0.5));
  FilterResult b = hamilton_filter(arma::ones(8, 2), half, arma::vec{0.5, 0.5});
  CHECK(arma::all(arma::vectorise(b.filtered_prob) == 0.5));
}

TEST_CASE("filter matches path enumeration") {
  for (arma::uword n = 1; n <= 6; ++n) {
    Fixture f = random_fixture(n, 100 + n);
    FilterResult r = hamilton_filter(f.lik, f.trans, f.init);
    Enumeration e = enumerate_paths(f.lik, f.trans, f.init);
    CHECK(arma::max(arma::max(arma::abs(r.filtered_prob - e.filtered))) < 1e-12);
    CHECK(std::abs(r.log_likelihood - e.log_likelihood) < 1e-12);
    CHECK(arma::max(arma::abs(arma::sum(r.filtered_prob, 1) - 1.0)) < 1e-10);
  }
}

TEST_CASE("log filter is shift invariant") {
  Fixture f = random_fixture(6, 7);
  FilterResult base = hamilton_filter(f.lik, f.trans, f.init);
  arma::mat scaled = f.lik;
  scaled.row(3) *= 17.0;
  FilterResult s = hamilton_filter(scaled, f.trans, f.init);
  CHECK(s.log_likelihood == doctest::Approx(base.log_likelihood + std::log(17.0)).epsilon(1e-12));
  CHECK(arma::max(arma::max(arma::abs(s.filtered_prob - base.filtered_prob))) < 1e-12);

  arma::mat loglik = arma::log(f.lik) - 800.0;
  FilterResult l = hamilton_filter_log(loglik, f.trans, f.init);
  CHECK(l.log_likelihood == doctest::Approx(base.log_likelihood - 6 * 800.0).epsilon(1e-12));
  CHECK(arma::max(arma::max(arma::abs(l.filtered_prob - base.filtered_prob))) < 1e-12);
}

TEST_CASE("degenerate likelihood row") {
  arma::mat lik{{1.0, 1.0}, {0.0, 0.0}};
  arma::cube t(2, 2, 2, arma::fill::value(0.5));
  CHECK_THROWS_AS(hamilton_filter(lik, t, arma::vec{0.5, 0.5}), DegenerateLikelihoodError);
}

TEST_CASE("FFBS paths match the enumerated joint posterior") {
  for (arma::uword n : {3u, 5u, 6u}) {
    Fixture f = random_fixture(n, 200 + n);
    FilterResult r = hamilton_filter(f.lik, f.trans, f.init);
    Enumeration e = enumerate_paths(f.lik, f.trans, f.init);
    Rng rng(300 + n);
    std::vector<double> freq(e.path_prob.size(), 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) freq[path_code(sample_states_ffbs(r.filtered_prob, f.trans, rng))] += 1.0;
    double tv = 0.0;
    for (std::size_t c = 0; c < freq.size(); ++c) tv += std::abs(freq[c] / draws - e.path_prob[c]);
    CHECK(0.5 * tv < 0.01);
  }
}

TEST_CASE("FFBS is deterministic under a seed") {
  Fixture f = random_fixture(6, 9);
  FilterResult r = hamilton_filter(f.lik, f.trans, f.init);
  Rng a(5), b(5);
  for (int i = 0; i < 50; ++i) CHECK(arma::all(sample_states_ffbs(r.filtered_prob, f.trans, a) ==
                                              sample_states_ffbs(r.filtered_prob, f.trans, b)));
}

TEST_CASE("unvisited state leaves its intercept at the prior") {
  Rng rng(10);
  arma::ivec states(60, arma::fill::zeros);
  arma::vec rate = rng.normal_vec(60);
  ProbitPrior prior;
  ProbitParams cur;
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    ProbitUpdate u = update_probit(states, rate, cur, prior, rng);
    REQUIRE(u.degenerate);
    cur = u.params;
    sum += cur.c0(1);
    sq += cur.c0(1) * cur.c0(1);
  }
  double m = sum / n;
  CHECK(std::abs(m) < 0.1);
  CHECK(sq / n - m * m == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("probit slope is recovered from simulated transitions") {
  Rng rng(11);
  const arma::uword n = 400;
  ProbitParams truth;
  truth.c0 = {-1.0, -1.0};
  truth.gamma = 2.0;
  arma::vec rate(n);
  arma::ivec s(n);
  s(0) = 0;
  rate(0) = -2.0 + 4.0 * rng.uniform();
  for (arma::uword t = 1; t < n; ++t) {
    rate(t) = -2.0 + 4.0 * rng.uniform();
    s(t) = rng.uniform() < transition_matrix(truth, rate(t))(s(t - 1), 1) ? 1 : 0;
  }
  ProbitParams cur;
  ProbitPrior prior;
  double sum = 0.0;
  int positive = 0;
  const int burn = 500, draws = 4000;
  for (int i = 0; i < burn + draws; ++i) {
    cur = update_probit(s, rate, cur, prior, rng).params;
    if (i >= burn) {
      sum += cur.gamma;
      positive += cur.gamma > 0.0;
    }
  }
  CHECK(std::abs(sum / draws - 2.0) < 0.5);
  CHECK(static_cast<double>(positive) / draws > 0.99);
}

TEST_CASE("dogmatic slope prior pins gamma at zero") {
  Rng rng(12);
  arma::ivec s(50);
  for (arma::uword t = 0; t < 50; ++t) s(t) = (t / 7) % 2;
  arma::vec rate = rng.normal_vec(50);
  ProbitPrior prior;
  prior.slope_variance = 0.0;
  ProbitParams cur;
  for (int i = 0; i < 100; ++i) {
    cur = update_probit(s, rate, cur, prior, rng).params;
    REQUIRE(cur.gamma == 0.0);
  }
  prior.slope_variance = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(update_probit(s, rate, cur, prior, rng), ValidationError);
}

TEST_CASE("deterministic break allocation") {
  auto dates = quarter_range(Quarter{2000, 1}, 76);
  RegimePath p = deterministic_states(dates, Quarter{2009, 1});
  CHECK(arma::accu(p.states == 0) == 36);
  CHECK(arma::accu(p.states == 1) == 40);
  CHECK(p.states(35) == 0);
  CHECK(p.states(36) == 1);
  CHECK(arma::all(arma::sum(p.filtered_prob, 1) == 1.0));
  for (arma::uword t = 0; t < 76; ++t) {
    arma::mat m = p.transition_matrices.slice(t);
    CHECK(arma::all(arma::sum(m, 1) == 1.0));
  }
  CHECK(arma::all(deterministic_states(dates, Quarter{2000, 1}).states == 1));
  CHECK_THROWS_AS(deterministic_states(dates, Quarter{2019, 1}), ValidationError);
}

TEST_CASE("label swap preserves the transition law") {
  PosteriorDraw d;
  d.beta = {arma::vec{1.0}, arma::vec{2.0}};
  d.omega = {arma::eye(1, 1), 2.0 * arma::eye(1, 1)};
  d.states = arma::ivec{0, 0, 1};
  d.probit_intercepts = {-0.4, 0.9};
  d.probit_slope = 1.3;
  ProbitParams before{d.probit_intercepts, d.probit_slope};
  swap_regime_labels(d);
  ProbitParams after{d.probit_intercepts, d.probit_slope};
  CHECK(d.beta[0](0) == 2.0);
  CHECK(arma::all(d.states == arma::ivec{1, 1, 0}));
  for (double rate : {-1.0, 0.0, 2.5}) {
    arma::mat a = transition_matrix(before, rate);
    arma::mat b = transition_matrix(after, rate);
    // P(new j | new k) = P(old 1-j | old 1-k).
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) CHECK(b(k, j) == doctest::Approx(a(1 - k, 1 - j)).epsilon(1e-14));
  }
  arma::vec means = regime_mean_rates(arma::ivec{0, 1, 1}, arma::vec{3.0, 1.0, 2.0});
  CHECK(means(0) == 3.0);
  CHECK(means(1) == 1.5);
}

}  // TEST_SUITE
