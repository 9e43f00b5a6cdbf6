#include "msfavar/transform.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace msfavar;
using namespace msfavar::transform;

namespace {
const double kNaN = arma::datum::nan;
}

TEST_SUITE("transform") {

TEST_CASE("log quarter-on-quarter differences") {
  arma::vec out = log_qoq_diff(arma::vec{100, 110});
  REQUIRE(out.n_elem == 1);
  CHECK(out(0) == doctest::Approx(9.5310).epsilon(1e-5));
  arma::vec flat = log_qoq_diff(arma::vec{5, 5, 5});
  CHECK(flat.n_elem == 2);
  CHECK(arma::all(flat == 0.0));
  try {
    log_qoq_diff(arma::vec{100, 0});
    FAIL("expected domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }
}

TEST_CASE("log differences of an exponential trend are constant") {
  arma::vec t = arma::regspace(0, 19);
  arma::vec out = log_qoq_diff(3.0 * arma::exp(0.02 * t));
  for (double v : out) CHECK(v == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("four quarter moving sums over GDP") {
  // Four quarters of flow 1 over four quarters of GDP 100 is 100 * 4 / 400.
  arma::vec out = moving_sum_4_over_gdp(arma::vec{1, 1, 1, 1}, arma::vec{100, 100, 100, 100});
  CHECK(std::isnan(out(0)));
  CHECK(std::isnan(out(2)));
  CHECK(out(3) == doctest::Approx(1.0).epsilon(1e-14));
  arma::vec later = moving_sum_4_over_gdp(arma::vec{0, 0, 0, 0, 8}, arma::vec(5, arma::fill::value(100.0)));
  CHECK(later(4) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(moving_sum_4_over_gdp(arma::vec{1, 1, 1}, arma::vec{1, 1, 1}), InsufficientDataError);
  CHECK_THROWS_AS(moving_sum_4_over_gdp(arma::vec{1, 1, 1, 1}, arma::vec{1, 1, 0, 1}), DomainError);
}

TEST_CASE("moving sums are scale invariant") {
  Rng rng(2);
  arma::vec f = rng.normal_vec(30);
  arma::vec g = 50.0 + arma::abs(rng.normal_vec(30));
  arma::vec a = moving_sum_4_over_gdp(f, g);
  arma::vec b = moving_sum_4_over_gdp(7.5 * f, 7.5 * g);
  for (arma::uword t = 3; t < 30; ++t) CHECK(a(t) == doctest::Approx(b(t)).epsilon(1e-12));
}

TEST_CASE("standardize uses the n-1 divisor and is idempotent") {
  Standardized s = standardize(arma::vec{1, 3});
  CHECK(s.values(0) == doctest::Approx(-0.70710678118654752).epsilon(1e-12));
  CHECK(s.values(1) == doctest::Approx(0.70710678118654752).epsilon(1e-12));
  CHECK(s.mean == 2.0);
  CHECK(s.sd == doctest::Approx(std::sqrt(2.0)));

  Rng rng(5);
  arma::vec x = 3.0 + 2.0 * rng.normal_vec(50);
  Standardized once = standardize(x);
  Standardized twice = standardize(once.values);
  CHECK(arma::max(arma::abs(once.values - twice.values)) < 1e-12);
  CHECK(arma::max(arma::abs(once.values * once.sd + once.mean - x)) < 1e-12);
  CHECK_THROWS_AS(standardize(arma::vec{4, 4, 4}), DegenerateSeriesError);
}

TEST_CASE("edge gaps are filled from four neighbours") {
  arma::vec lead = fill_edge_gaps(arma::vec{kNaN, 1, 2, 3, 4});
  CHECK(lead(0) == 2.5);
  arma::vec trail = fill_edge_gaps(arma::vec{1, 2, 3, 4, kNaN});
  CHECK(trail(4) == 2.5);
  arma::vec both = fill_edge_gaps(arma::vec{kNaN, kNaN, 1, 2, 3, 4, 5, kNaN});
  CHECK(both(0) == 2.5);
  CHECK(both(1) == 2.5);
  CHECK(both(7) == 3.5);
  CHECK_THROWS_AS(fill_edge_gaps(arma::vec{1, kNaN, 3}), UnsupportedGapError);
}

TEST_CASE("recipes parse and apply with series context") {
  TransformRecipe r = TransformRecipe::parse("inflows", "four_quarter_moving_sum_over_gdp:fi:ngdp");
  CHECK(r.kind == RecipeKind::four_quarter_moving_sum_over_gdp);
  CHECK(r.sources == std::vector<std::string>{"fi", "ngdp"});
  CHECK(TransformRecipe::parse("x", r.to_string()).to_string() == r.to_string());
  CHECK_THROWS_AS(TransformRecipe::parse("x", "cube_root:x"), ValidationError);
  CHECK_THROWS_AS(TransformRecipe::parse("x", "log_qoq_diff:a:b"), ValidationError);

  TimeSeriesPanel raw;
  raw.series_names = {"gdp", "bad"};
  raw.dates = quarter_range(Quarter{2000, 1}, 3);
  raw.values = arma::mat{{100, 1}, {110, -1}, {121, 2}};
  arma::vec g = apply_recipe(TransformRecipe::parse("g", "log_qoq_diff:gdp"), raw);
  CHECK(std::isnan(g(0)));
  CHECK(g(1) == doctest::Approx(9.53102).epsilon(1e-5));
  try {
    apply_recipe(TransformRecipe::parse("b", "log_qoq_diff:bad"), raw);
    FAIL("expected error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("series 'b'") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_recipe(TransformRecipe::parse("m", "level:missing"), raw), ValidationError);
}

TEST_CASE("common defined window") {
  arma::mat v{{kNaN, 1}, {1, 1}, {1, 1}, {1, kNaN}, {1, 1}};
  auto [first, count] = common_defined_window(v);
  CHECK(first == 1);
  CHECK(count == 2);
}

}  // TEST_SUITE
