#ifndef MSFAVAR_DRAW_STORE_HPP
#define MSFAVAR_DRAW_STORE_HPP

#include "msfavar/core.hpp"

#include <string>
#include <vector>

namespace msfavar {

/// Dimensions and provenance stored next to the binary draws.
struct DrawStoreMeta {
  std::string spec_hash;
  std::string spec_text;
  std::uint64_t seed = 0;
  int n_regimes = 1;
  int n_vars = 0;
  int p_lags = 1;
  int n_periods = 0;    // effective sample length of the state path
  int n_external = 0;   // rows of each loading matrix (0 if none)
  int q_factors = 0;
  std::string first_date;  // first effective period, "" if unknown
};

struct DrawStore {
  DrawStoreMeta meta;
  std::vector<PosteriorDraw> draws;
};

DrawStoreMeta make_store_meta(const ModelSpec& spec, const std::vector<PosteriorDraw>& draws,
                              const std::string& first_date);

/// Writes <dir>/draws.bin (little-endian float64 records) and <dir>/draws.json.
void write_draw_store(const std::string& dir, const DrawStore& store);
DrawStore read_draw_store(const std::string& dir);

}  // namespace msfavar

#endif
