#ifndef MSFAVAR_TRANSFORM_HPP
#define MSFAVAR_TRANSFORM_HPP

#include "msfavar/core.hpp"

#include <string>
#include <vector>

namespace msfavar::transform {

/// out[t] = 100 (ln x[t+1] - ln x[t]); length T-1.
arma::vec log_qoq_diff(const arma::vec& series);

/// out[t] = x[t+1] - x[t]; length T-1. Used for index series entering in differences.
arma::vec first_diff(const arma::vec& series);

/// out[t] = 100 * sum_{j<4} flows[t-j] / sum_{j<4} gdp[t-j] for t >= 3; the first
/// three entries are NaN and left for the caller to trim.
arma::vec moving_sum_4_over_gdp(const arma::vec& flows, const arma::vec& nominal_gdp);

struct Standardized {
  arma::vec values;
  double mean = 0.0;
  double sd = 1.0;
};

/// Subtract the sample mean, divide by the n-1 sample standard deviation.
Standardized standardize(const arma::vec& series);

/// Leading NaNs take the mean of the next four defined values, trailing NaNs
/// the mean of the previous four. Interior gaps are rejected.
arma::vec fill_edge_gaps(const arma::vec& series);

enum class RecipeKind {
  log_qoq_diff,
  first_diff,
  level,
  four_quarter_moving_sum_over_gdp,
  standardize_only,
  sv_proxy,         // volatility proxy of another (already transformed) model variable
};

/// One instruction per model series. Standardization is always applied last,
/// after all recipes, by the prepare pipeline.
struct TransformRecipe {
  std::string target;
  RecipeKind kind = RecipeKind::level;
  std::vector<std::string> sources;

  /// Parses "kind:source[:source2]".
  static TransformRecipe parse(const std::string& target, const std::string& text);
  std::string to_string() const;
};

/// Apply a non-SV recipe to a raw panel. The result is aligned with the panel's
/// dates; periods lost to differencing or moving sums are NaN.
arma::vec apply_recipe(const TransformRecipe& recipe, const TimeSeriesPanel& raw);

/// Longest run of rows in which every listed column is defined.
/// Returns {first_row, count}; count = 0 when no such row exists.
std::pair<std::size_t, std::size_t> common_defined_window(const arma::mat& values);

}  // namespace msfavar::transform

#endif
