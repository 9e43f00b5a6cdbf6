#include "msfavar/transform.hpp"

#include <cmath>
#include <limits>
#include <string_view>

namespace msfavar::transform {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

arma::vec log_qoq_diff(const arma::vec& series) {
  if (series.n_elem < 2) throw InsufficientDataError("log_qoq_diff needs at least two observations");
  for (arma::uword t = 0; t < series.n_elem; ++t) {
    if (!(series(t) > 0.0)) {
      throw DomainError("log_qoq_diff requires strictly positive values; index " + std::to_string(t) + " is " +
                        std::to_string(series(t)));
    }
  }
  arma::vec out(series.n_elem - 1);
  for (arma::uword t = 0; t + 1 < series.n_elem; ++t) out(t) = 100.0 * (std::log(series(t + 1)) - std::log(series(t)));
  return out;
}

arma::vec first_diff(const arma::vec& series) {
  if (series.n_elem < 2) throw InsufficientDataError("first_diff needs at least two observations");
  return arma::diff(series);
}

arma::vec moving_sum_4_over_gdp(const arma::vec& flows, const arma::vec& nominal_gdp) {
  if (flows.n_elem != nominal_gdp.n_elem) throw ValidationError("flows and GDP lengths differ");
  if (flows.n_elem < 4) throw InsufficientDataError("four-quarter moving sum needs at least four observations");
  for (arma::uword t = 0; t < nominal_gdp.n_elem; ++t) {
    if (!(nominal_gdp(t) > 0.0)) throw DomainError("nominal GDP must be positive; index " + std::to_string(t));
  }
  arma::vec out(flows.n_elem, arma::fill::value(kNaN));
  for (arma::uword t = 3; t < flows.n_elem; ++t) {
    double f = 0.0, g = 0.0;
    for (arma::uword j = 0; j < 4; ++j) {
      f += flows(t - j);
      g += nominal_gdp(t - j);
    }
    out(t) = 100.0 * f / g;
  }
  return out;
}

Standardized standardize(const arma::vec& series) {
  if (series.n_elem < 2) throw InsufficientDataError("standardize needs at least two observations");
  if (!series.is_finite()) throw ValidationError("standardize received undefined values");
  Standardized s;
  s.mean = arma::mean(series);
  s.sd = arma::stddev(series);  // n-1 divisor
  if (!(s.sd > 0.0) || s.sd <= 1e-14 * std::max(1.0, std::abs(s.mean))) {
    throw DegenerateSeriesError("series has zero sample variance");
  }
  s.values = (series - s.mean) / s.sd;
  return s;
}

arma::vec fill_edge_gaps(const arma::vec& series) {
  const arma::uword n = series.n_elem;
  arma::uword first = 0;
  while (first < n && !std::isfinite(series(first))) ++first;
  if (first == n) throw InsufficientDataError("series has no defined values");
  arma::uword last = n - 1;
  while (!std::isfinite(series(last))) --last;
  for (arma::uword t = first; t <= last; ++t) {
    if (!std::isfinite(series(t))) throw UnsupportedGapError("interior gap at index " + std::to_string(t));
  }
  arma::vec out = series;
  if (first > 0) {
    if (last - first + 1 < 4) throw InsufficientDataError("fewer than four values after leading gap");
    const double fill = arma::mean(series.subvec(first, first + 3));
    out.subvec(0, first - 1).fill(fill);
  }
  if (last + 1 < n) {
    if (last - first + 1 < 4) throw InsufficientDataError("fewer than four values before trailing gap");
    const double fill = arma::mean(series.subvec(last - 3, last));
    out.subvec(last + 1, n - 1).fill(fill);
  }
  return out;
}

TransformRecipe TransformRecipe::parse(const std::string& target, const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  TransformRecipe r;
  r.target = target;
  const std::string& kind = parts[0];
  std::size_t want = 1;
  if (kind == "log_qoq_diff") {
    r.kind = RecipeKind::log_qoq_diff;
  } else if (kind == "first_diff") {
    r.kind = RecipeKind::first_diff;
  } else if (kind == "level") {
    r.kind = RecipeKind::level;
  } else if (kind == "moving_sum_4_over_gdp" || kind == "four_quarter_moving_sum_over_gdp") {
    r.kind = RecipeKind::four_quarter_moving_sum_over_gdp;
    want = 2;
  } else if (kind == "standardize_only") {
    r.kind = RecipeKind::standardize_only;
  } else if (kind == "sv_proxy") {
    r.kind = RecipeKind::sv_proxy;
  } else {
    throw ValidationError("unknown transformation '" + kind + "' for series '" + target + "'");
  }
  r.sources.assign(parts.begin() + 1, parts.end());
  if (r.sources.size() != want) {
    throw ValidationError("transformation '" + kind + "' for '" + target + "' expects " + std::to_string(want) +
                          " source column(s)");
  }
  return r;
}

std::string TransformRecipe::to_string() const {
  std::string kind;
  switch (this->kind) {
    case RecipeKind::log_qoq_diff: kind = "log_qoq_diff"; break;
    case RecipeKind::first_diff: kind = "first_diff"; break;
    case RecipeKind::level: kind = "level"; break;
    case RecipeKind::four_quarter_moving_sum_over_gdp: kind = "moving_sum_4_over_gdp"; break;
    case RecipeKind::standardize_only: kind = "standardize_only"; break;
    case RecipeKind::sv_proxy: kind = "sv_proxy"; break;
  }
  for (const auto& s : sources) kind += ":" + s;
  return kind;
}

arma::vec apply_recipe(const TransformRecipe& recipe, const TimeSeriesPanel& raw) {
  const arma::uword n = raw.n_periods();
  auto source = [&](std::size_t i) {
    try {
      return fill_edge_gaps(raw.column(recipe.sources.at(i)));
    } catch (const Error& e) {
      rethrow_with_prefix(e, "series '" + recipe.sources.at(i) + "': ");
    }
  };
  try {
    switch (recipe.kind) {
      case RecipeKind::level:
      case RecipeKind::standardize_only:
        return source(0);
      case RecipeKind::log_qoq_diff: {
        arma::vec out(n, arma::fill::value(kNaN));
        out.subvec(1, n - 1) = log_qoq_diff(source(0));
        return out;
      }
      case RecipeKind::first_diff: {
        arma::vec out(n, arma::fill::value(kNaN));
        out.subvec(1, n - 1) = first_diff(source(0));
        return out;
      }
      case RecipeKind::four_quarter_moving_sum_over_gdp:
        return moving_sum_4_over_gdp(source(0), source(1));
      case RecipeKind::sv_proxy:
        break;
    }
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with("series '")) throw;
    rethrow_with_prefix(e, "series '" + recipe.target + "': ");
  }
  throw ContractError("sv_proxy recipes are resolved by the volatility module");
}

std::pair<std::size_t, std::size_t> common_defined_window(const arma::mat& values) {
  std::size_t best_first = 0, best_len = 0, run_first = 0, run_len = 0;
  for (arma::uword t = 0; t < values.n_rows; ++t) {
    if (values.row(t).is_finite()) {
      if (run_len == 0) run_first = t;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_first = run_first;
      }
    } else {
      run_len = 0;
    }
  }
  return {best_first, best_len};
}

}  // namespace msfavar::transform
