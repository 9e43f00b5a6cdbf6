#ifndef MSFAVAR_TEST_UTIL_HPP
#define MSFAVAR_TEST_UTIL_HPP

#include "msfavar/core.hpp"
#include "msfavar/random.hpp"

#include <filesystem>
#include <string>

namespace testutil {

inline std::string source_path(const std::string& rel) { return std::string(MSFAVAR_SOURCE_DIR) + "/" + rel; }

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("msfavar_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline arma::mat random_spd(int k, msfavar::Rng& rng) {
  arma::mat a(k, k);
  for (auto& v : a) v = rng.normal();
  return a * a.t() + k * arma::eye(k, k);
}

inline msfavar::ModelSpec small_spec(int m, int q, msfavar::RegimeMode mode, int p = 1) {
  msfavar::ModelSpecInput in;
  in.p_lags = p;
  in.q_factors = q;
  for (int j = 1; j <= m; ++j) in.endogenous.push_back("y" + std::to_string(j));
  in.regime_mode = mode;
  in.rate_variable = "y1";
  in.shock_variable = "y1";
  return msfavar::new_model_spec(in);
}

}  // namespace testutil

#endif
