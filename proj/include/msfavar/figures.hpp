#ifndef MSFAVAR_FIGURES_HPP
#define MSFAVAR_FIGURES_HPP

#include "msfavar/irf.hpp"

#include <string>
#include <vector>

namespace msfavar::figures {

/// Small multiples, one panel per variable: median line and 68% band for each
/// regime (regime 0 blue, regime 1 red).
std::string irf_band_svg(const irf::IrfResult& result, std::size_t shock_pos, const std::vector<std::string>& names,
                         const std::string& title);

struct HeatmapCell {
  bool present = false;  // false renders blank (insignificant)
  double value = 0.0;
  int quarter = 0;
};

/// Rows are variables, columns regimes; colour encodes the signed peak and the
/// label shows the peak quarter.
std::string peak_heatmap_svg(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                             const std::vector<std::vector<HeatmapCell>>& cells, const std::string& title);

/// Probability paths over time, e.g. P(S_t = 1) and the staying probabilities.
std::string regime_path_svg(const std::vector<std::string>& dates, const std::vector<std::string>& labels,
                            const std::vector<arma::vec>& paths, const std::string& title);

}  // namespace msfavar::figures

#endif
