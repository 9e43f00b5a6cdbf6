#include "msfavar/config.hpp"
#include "msfavar/core.hpp"
#include "msfavar/digest.hpp"
#include "msfavar/draw_store.hpp"
#include "msfavar/panel_io.hpp"
#include "msfavar/random.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace msfavar;

TEST_SUITE("core") {

TEST_CASE("model spec derives K and Wishart shapes") {
  ModelSpecInput in;
  for (int j = 0; j < 12; ++j) in.endogenous.push_back("v" + std::to_string(j));
  in.q_factors = 1;
  ModelSpec s = new_model_spec(in);
  CHECK(s.n_vars == 13);
  CHECK(s.prior.wishart_psi == 8.5);
  CHECK(s.prior.wishart_s == 6.5);
  CHECK(s.n_coefficients() == 13 * 14);

  ModelSpecInput small;
  small.endogenous = {"a"};
  ModelSpec t = new_model_spec(small);
  CHECK(t.n_vars == 2);
  CHECK(t.prior.wishart_psi == 3.0);
  CHECK(t.prior.wishart_s == 1.0);
}

TEST_CASE("explicit Wishart overrides win") {
  ModelSpecInput in;
  in.endogenous = {"a", "b"};
  in.prior.wishart_psi_override = 7.0;
  ModelSpec s = new_model_spec(in);
  CHECK(s.prior.wishart_psi == 7.0);
  CHECK(s.prior.wishart_s == default_wishart_s(3));
}

TEST_CASE("ordering must be a permutation with factors first") {
  ModelSpecInput in;
  in.endogenous = {"a", "b", "c"};
  in.ordering = {"global_factor", "a", "b"};
  try {
    new_model_spec(in);
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("c") != std::string::npos);
  }
  in.ordering = {"a", "global_factor", "b", "c"};
  CHECK_THROWS_AS(new_model_spec(in), ValidationError);
  in.ordering = {"global_factor", "c", "b", "a"};
  ModelSpec s = new_model_spec(in);
  CHECK(s.ordering_index("a") == 3);
  CHECK(s.ordering_index("global_factor") == 0);
}

TEST_CASE("non-positive counts are rejected") {
  ModelSpecInput in;
  in.endogenous = {"a"};
  in.p_lags = 0;
  CHECK_THROWS_AS(new_model_spec(in), ValidationError);
  in.p_lags = 1;
  in.n_draws = -1;
  CHECK_THROWS_AS(new_model_spec(in), ValidationError);
}

TEST_CASE("quarters parse, print and step") {
  Quarter q = Quarter::parse("2008Q4");
  CHECK(q.year == 2008);
  CHECK(q.quarter == 4);
  CHECK(q.next().to_string() == "2009Q1");
  CHECK(Quarter::from_index(q.index()) == q);
  CHECK_THROWS_AS(Quarter::parse("2008Q5"), ValidationError);
  CHECK_THROWS_AS(Quarter::parse("2008-1"), ValidationError);
  auto r = quarter_range(Quarter{2000, 1}, 76);
  CHECK(r.back().to_string() == "2018Q4");
}

TEST_CASE("panel validation catches gaps and missing values") {
  TimeSeriesPanel p;
  p.series_names = {"a", "b"};
  p.dates = quarter_range(Quarter{2000, 1}, 3);
  p.values = arma::mat{{1, 2}, {3, 4}, {5, 6}};
  CHECK_NOTHROW(p.validate());
  p.values(1, 1) = arma::datum::nan;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_NOTHROW(p.validate(true));
  p.values(1, 1) = 4;
  p.dates[2] = Quarter{2001, 1};
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("seeded streams are reproducible") {
  Rng a(42), b(42), c(1), d(2);
  bool differ = false;
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.normal() == b.normal());
    CHECK(a.gamma(2.0, 1.5) == b.gamma(2.0, 1.5));
    if (c.uniform() != d.uniform()) differ = true;
  }
  CHECK(differ);
}

TEST_CASE("truncated normal respects bounds and matches its mean") {
  Rng rng(7);
  const double mean = 0.3, sd = 0.5, lo = 0.8, hi = 2.0;
  double total = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = rng.truncated_normal(mean, sd, lo, hi);
    REQUIRE(x >= lo);
    REQUIRE(x <= hi);
    total += x;
  }
  auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  double a = (lo - mean) / sd, b = (hi - mean) / sd;
  double expected = mean + sd * (pdf(a) - pdf(b)) / (normal_cdf(b) - normal_cdf(a));
  CHECK(total / n == doctest::Approx(expected).epsilon(0.005));
  for (int i = 0; i < 1000; ++i) {
    double x = rng.truncated_normal(0.0, 1.0, -1.0, -0.2);
    REQUIRE(x >= -1.0);
    REQUIRE(x <= -0.2);
  }
}

TEST_CASE("Wishart mean is shape times scale") {
  Rng rng(11);
  arma::mat v{{2.0, 0.5, 0.0}, {0.5, 1.0, 0.3}, {0.0, 0.3, 1.5}};
  const double shape = 4.0;
  arma::mat acc(3, 3, arma::fill::zeros);
  const int n = 50000;
  for (int i = 0; i < n; ++i) acc += rng.wishart(v, shape);
  acc /= n;
  arma::mat expected = shape * v;
  for (arma::uword i = 0; i < 3; ++i)
    for (arma::uword j = 0; j < 3; ++j) CHECK(std::abs(acc(i, j) - expected(i, j)) < 0.02 * (std::abs(expected(i, i)) + 1.0));
}

TEST_CASE("scalar Wishart is a Gamma draw") {
  Rng rng(12);
  arma::mat v(1, 1, arma::fill::value(0.7));
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = rng.wishart(v, 3.0)(0, 0);
    sum += x;
    sq += x * x;
  }
  double m = sum / n;
  CHECK(m == doctest::Approx(2.1).epsilon(0.01));
  CHECK(sq / n - m * m == doctest::Approx(3.0 * 0.49).epsilon(0.03));
}

TEST_CASE("config parser keeps order, flags unknown keys and round-trips specs") {
  Config c = parse_config_text("[model]\np_lags = 2\nregime_mode = markov\n[variables]\nendogenous = a, b ,c\n"
                               "[series]\nz = level:z\na = level:a\n");
  CHECK(c.get("model", "p_lags") == "2");
  CHECK(c.section("series")->front().first == "z");
  CHECK_NOTHROW(check_config_keys(c));
  c.set("model", "n_drawz", "5");
  try {
    check_config_keys(c);
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()) == "unknown config key 'model.n_drawz'");
  }

  ModelSpecInput in = model_input_from_config(parse_config_text("[model]\np_lags = 2\nregime_mode = markov\n"
                                                                "rate_variable = b\nfixed_xi = 0.125\n"
                                                                "[variables]\nendogenous = a, b, c\n"
                                                                "[prior]\nxi_rate = 0.1\n"));
  ModelSpec s = new_model_spec(in);
  CHECK(s.p_lags == 2);
  CHECK(s.regime_mode == RegimeMode::endogenous_markov);
  CHECK(s.prior.xi_rate == 0.1);
  std::string text = model_spec_to_config_text(s);
  ModelSpec back = new_model_spec(model_input_from_config(parse_config_text(text)));
  CHECK(model_spec_to_config_text(back) == text);
  CHECK(model_spec_hash(back) == model_spec_hash(s));
  CHECK(back.fixed_xi.value() == 0.125);
}

TEST_CASE("numbers reject trailing junk") {
  CHECK(parse_double(" 1.5 ", "x") == 1.5);
  CHECK_THROWS_AS(parse_double("1.5x", "x"), ValidationError);
  CHECK_THROWS_AS(parse_int("2.5", "x"), ValidationError);
  double v = 0.1 + 0.2;
  CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("panel csv round-trips exactly") {
  TimeSeriesPanel p;
  p.series_names = {"a", "b"};
  p.dates = quarter_range(Quarter{1999, 3}, 4);
  p.values = arma::mat{{0.1, 1.0 / 3.0}, {-2.5e-9, arma::datum::nan}, {1e300, 7}, {0, -0.0}};
  std::stringstream ss;
  write_panel_csv(ss, p);
  TimeSeriesPanel q = read_panel_csv(ss);
  CHECK(q.series_names == p.series_names);
  CHECK(q.dates == p.dates);
  for (arma::uword i = 0; i < 4; ++i)
    for (arma::uword j = 0; j < 2; ++j) {
      if (std::isnan(p.values(i, j)))
        CHECK(std::isnan(q.values(i, j)));
      else
        CHECK(q.values(i, j) == p.values(i, j));
    }
}

TEST_CASE("panel csv errors carry line numbers") {
  std::istringstream empty("");
  try {
    read_panel_csv(empty);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 0);
  }
  std::istringstream ragged("date,a,b\n2000Q1,1,2\n2000Q2,1\n");
  try {
    read_panel_csv(ragged);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream bad_num("date,a\n2000Q1,abc\n");
  CHECK_THROWS_AS(read_panel_csv(bad_num), ParseError);
}

TEST_CASE("sha256 matches known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("draw validation enforces invariants") {
  PosteriorDraw d;
  d.beta = {arma::vec(6, arma::fill::zeros)};
  d.beta_pool_mean = arma::vec(6, arma::fill::zeros);
  d.xi = arma::vec(6, arma::fill::ones);
  d.omega = {arma::eye(2, 2)};
  d.psi_matrix = arma::eye(2, 2);
  d.states = arma::ivec(5, arma::fill::zeros);
  CHECK_NOTHROW(validate_draw(d));
  d.omega[0](0, 1) = 2.0;
  d.omega[0](1, 0) = 2.0;
  CHECK_THROWS_AS(validate_draw(d), NumericalError);
  d.omega[0] = arma::eye(2, 2);
  d.xi(3) = 0.0;
  CHECK_THROWS_AS(validate_draw(d), NumericalError);
  d.xi(3) = 1.0;
  d.states(2) = 2;
  CHECK_THROWS_AS(validate_draw(d), ContractError);
  d.states(2) = 1;
  d.loadings = {arma::mat(arma::vec{1.0, 0.5})};
  CHECK_NOTHROW(validate_draw(d));
  d.loadings[0](0, 0) = 0.9;
  CHECK_THROWS_AS(validate_draw(d), ContractError);
}

TEST_CASE("coefficient vector is equation-major") {
  // K=2, P=1: equation 0 block [c0, a00, a01], equation 1 block [c1, a10, a11].
  arma::vec beta{1, 2, 3, 4, 5, 6};
  arma::mat b = coefficient_matrix(beta, 2);
  CHECK(b.n_rows == 3);
  CHECK(b(0, 0) == 1);
  CHECK(b(2, 0) == 3);
  CHECK(b(0, 1) == 4);
  CHECK(b(1, 1) == 5);
}

TEST_CASE("draw store round-trips every field exactly") {
  Rng rng(3);
  ModelSpec spec = testutil::small_spec(2, 1, RegimeMode::endogenous_markov);
  std::vector<PosteriorDraw> draws(3);
  for (auto& d : draws) {
    for (int r = 0; r < 2; ++r) {
      d.beta.push_back(rng.normal_vec(spec.n_coefficients()));
      d.omega.push_back(testutil::random_spd(3, rng));
      arma::mat l(4, 1);
      l(0, 0) = 1.0;
      l.rows(1, 3) = rng.normal_vec(3);
      d.loadings.push_back(l);
    }
    d.beta_pool_mean = rng.normal_vec(spec.n_coefficients());
    d.xi = arma::exp(rng.normal_vec(spec.n_coefficients()));
    d.psi_matrix = testutil::random_spd(3, rng);
    d.meas_error_vars = arma::exp(rng.normal_vec(4));
    d.states = arma::ivec{0, 1, 1, 0, 1};
    d.probit_intercepts = rng.normal_vec(2);
    d.probit_slope = rng.normal();
  }
  auto dir = testutil::temp_dir("store");
  DrawStore store{make_store_meta(spec, draws, "2000Q2"), draws};
  write_draw_store(dir.string(), store);
  DrawStore back = read_draw_store(dir.string());
  CHECK(back.meta.spec_hash == model_spec_hash(spec));
  CHECK(back.meta.first_date == "2000Q2");
  REQUIRE(back.draws.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto &a = draws[i], &b = back.draws[i];
    for (int r = 0; r < 2; ++r) {
      CHECK(arma::all(a.beta[r] == b.beta[r]));
      CHECK(arma::all(arma::vectorise(a.omega[r] == b.omega[r])));
      CHECK(arma::all(arma::vectorise(a.loadings[r] == b.loadings[r])));
    }
    CHECK(arma::all(a.xi == b.xi));
    CHECK(arma::all(a.beta_pool_mean == b.beta_pool_mean));
    CHECK(arma::all(arma::vectorise(a.psi_matrix == b.psi_matrix)));
    CHECK(arma::all(a.meas_error_vars == b.meas_error_vars));
    CHECK(arma::all(a.states == b.states));
    CHECK(arma::all(a.probit_intercepts == b.probit_intercepts));
    CHECK(a.probit_slope == b.probit_slope);
  }
  write_file((dir / "draws.bin").string(), "garbage");
  CHECK_THROWS(read_draw_store(dir.string()));
}

}  // TEST_SUITE
