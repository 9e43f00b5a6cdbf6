#include "msfavar/commands.hpp"
#include "msfavar/config.hpp"
#include "msfavar/digest.hpp"
#include "msfavar/draw_store.hpp"
#include "msfavar/irf.hpp"
#include "msfavar/panel_io.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace msfavar;
namespace fs = std::filesystem;

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
  return s;
}

// Country config pointing at the bundled fixture, with lighter SV settings.
std::string write_country_config(const fs::path& dir, const std::string& extra = "") {
  std::string text = read_file(testutil::source_path("data/configs/country.ini"));
  text = replace_all(text, "../fixture/", testutil::source_path("data/fixture/"));
  text = replace_all(text, "sv_draws = 2000", "sv_draws = 600");
  text = replace_all(text, "sv_burn = 1000", "sv_burn = 300");
  text += extra;
  const std::string path = (dir / "country.ini").string();
  write_file(path, text);
  return path;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
    files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  }
  return files;
}

struct Pipeline {
  fs::path root;
  std::string config;
  fs::path prepared;
};

// One shared prepare run for the estimate/irf cases.
const Pipeline& prepared_pipeline() {
  static Pipeline p = [] {
    Pipeline out;
    out.root = testutil::temp_dir("cli_pipeline");
    out.config = write_country_config(out.root);
    cli::Options o;
    o.config_path = out.config;
    o.out_dir = (out.root / "prepare").string();
    cli::cmd_prepare(o);
    out.prepared = out.root / "prepare" / "prepared.csv";
    return out;
  }();
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("prepare emits twelve endogenous columns plus the factor, reproducibly") {
  const Pipeline& p = prepared_pipeline();
  TimeSeriesPanel panel = read_panel_csv(p.prepared.string());
  CHECK(panel.n_series() == 13);
  CHECK(panel.series_names.front() == "global_factor");
  CHECK(panel.n_periods() == 76);
  CHECK(panel.dates.front().to_string() == "2000Q1");
  CHECK(panel.dates.back().to_string() == "2018Q4");
  CHECK_NOTHROW(panel.validate());
  for (std::size_t j = 0; j < 13; ++j) CHECK(std::abs(arma::stddev(panel.values.col(j)) - 1.0) < 1e-10);

  auto first = snapshot(p.root / "prepare");
  CHECK(first.count("manifest.json") == 1);
  cli::Options o;
  o.config_path = p.config;
  o.out_dir = (p.root / "prepare").string();
  cli::cmd_prepare(o);
  CHECK(snapshot(p.root / "prepare") == first);

  nlohmann::json m = nlohmann::json::parse(first["manifest.json"]);
  CHECK(m["command"] == "prepare");
  CHECK(m["artifacts"].size() == 4);
  for (const auto& a : m["artifacts"]) {
    CHECK(a["sha256"].get<std::string>() == sha256_file((p.root / "prepare" / a["path"].get<std::string>()).string()));
  }
}

TEST_CASE("empty raw file fails with a line-0 parse error") {
  auto dir = testutil::temp_dir("cli_empty");
  write_file((dir / "empty.csv").string(), "");
  std::string cfg = write_country_config(dir);
  Config c = load_config(cfg);
  std::string text = replace_all(read_file(cfg), testutil::source_path("data/fixture/C01_raw.csv"), (dir / "empty.csv").string());
  write_file(cfg, text);
  cli::Options o;
  o.config_path = cfg;
  o.out_dir = (dir / "out").string();
  try {
    cli::cmd_prepare(o);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 0);
  }
}

TEST_CASE("missing raw column is named") {
  auto dir = testutil::temp_dir("cli_missing");
  std::string cfg = write_country_config(dir);
  write_file(cfg, replace_all(read_file(cfg), "log_qoq_diff:cpi", "log_qoq_diff:cpi_sa"));
  cli::Options o;
  o.config_path = cfg;
  o.out_dir = (dir / "out").string();
  try {
    cli::cmd_prepare(o);
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("cpi_sa") != std::string::npos);
  }
}

TEST_CASE("bad config key names the key") {
  auto dir = testutil::temp_dir("cli_badkey");
  std::string cfg = write_country_config(dir, "\n[prior]\nxi_shaep = 2\n");
  cli::Options o;
  o.config_path = cfg;
  try {
    cli::cmd_estimate(o);
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("prior.xi_shaep") != std::string::npos);
  }
}

TEST_CASE("linear estimate and irf produce consistent one-regime tables") {
  const Pipeline& p = prepared_pipeline();
  cli::Options o;
  o.config_path = p.config;
  o.mode = "linear";
  o.draws = 500;
  o.burn = 100;
  o.input = p.prepared.string();
  o.out_dir = (p.root / "linear").string();
  cli::cmd_estimate(o);
  for (const char* f : {"draws/draws.bin", "draws/draws.json", "regimes.csv", "regime_path.svg", "diagnostics.json",
                        "manifest.json"})
    CHECK(fs::exists(p.root / "linear" / f));
  DrawStore store = read_draw_store((p.root / "linear" / "draws").string());
  CHECK(store.meta.n_regimes == 1);
  CHECK(store.draws.size() == 500);

  cli::Options io;
  io.input = (p.root / "linear" / "draws").string();
  io.out_dir = (p.root / "linear_irf").string();
  cli::cmd_irf(io);
  auto irf_rows = read_csv((p.root / "linear_irf" / "irf.csv").string());
  CHECK(irf_rows[0] == std::vector<std::string>{"regime", "shock", "variable", "horizon", "p16", "p50", "p84", "mean"});
  CHECK(irf_rows.size() == 1 + 13 * 21);
  for (std::size_t i = 1; i < irf_rows.size(); ++i) REQUIRE(irf_rows[i][0] == "linear");

  // Medians in the table are exactly those of summarize_irf.
  ModelSpec spec = new_model_spec(model_input_from_config(parse_config_text(store.meta.spec_text)));
  const int shock = static_cast<int>(spec.ordering_index("mppi_d"));
  irf::IrfResult res = irf::summarize_irf(store.draws, spec, {shock});
  for (std::size_t i = 1; i < irf_rows.size(); ++i) {
    const int var = static_cast<int>(spec.ordering_index(irf_rows[i][2]));
    const int h = std::stoi(irf_rows[i][3]);
    REQUIRE(std::stod(irf_rows[i][5]) == res.bands[0][0].p50(var, h));
    REQUIRE(std::stod(irf_rows[i][4]) == res.bands[0][0].p16(var, h));
  }

  auto peaks = read_csv((p.root / "linear_irf" / "peaks.csv").string());
  CHECK(peaks[0] == cli::peak_table_columns());
  CHECK(std::vector<std::string>(peaks[0].begin(), peaks[0].begin() + 5) ==
        std::vector<std::string>{"variable", "regime", "peak", "quarter", "significant"});
  CHECK(peaks.size() == 14);
  // The policy variable's own impact response dominates at quarter 0 and is significant.
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    if (peaks[i][0] == "global_factor") {
      CHECK(peaks[i][3] != "0");
    }
  }
  auto heat = read_csv((p.root / "linear_irf" / "peaks_heatmap.csv").string());
  CHECK(heat[0] == std::vector<std::string>{"variable", "linear", "linear_quarter"});
  for (const char* f : {"irf_bands.svg", "peaks_heatmap.svg", "irf_diagnostics.json", "manifest.json"})
    CHECK(fs::exists(p.root / "linear_irf" / f));
}

TEST_CASE("deterministic break estimate exports the forced split") {
  const Pipeline& p = prepared_pipeline();
  cli::Options o;
  o.config_path = p.config;
  o.mode = "break";
  o.break_date = "2009Q1";
  o.draws = 50;
  o.burn = 10;
  o.input = p.prepared.string();
  o.out_dir = (p.root / "break").string();
  cli::cmd_estimate(o);
  auto rows = read_csv((p.root / "break" / "regimes.csv").string());
  CHECK(rows[0][0] == "date");
  CHECK(rows[0][1] == "prob_regime1");
  CHECK(rows.size() == 1 + 75);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const Quarter q = Quarter::parse(rows[i][0]);
    REQUIRE(std::stod(rows[i][1]) == (q < Quarter{2009, 1} ? 0.0 : 1.0));
  }
}

TEST_CASE("estimate is byte-identical under a fixed seed") {
  const Pipeline& p = prepared_pipeline();
  cli::Options o;
  o.config_path = p.config;
  o.draws = 40;
  o.burn = 20;
  o.input = p.prepared.string();
  o.out_dir = (p.root / "repeat").string();
  cli::cmd_estimate(o);
  auto first = snapshot(p.root / "repeat");
  cli::cmd_estimate(o);
  CHECK(snapshot(p.root / "repeat") == first);
  o.seed = 99;
  cli::cmd_estimate(o);
  CHECK(snapshot(p.root / "repeat")["draws/draws.bin"] != first["draws/draws.bin"]);
}

TEST_CASE("irf rejects a store that does not match the config") {
  const Pipeline& p = prepared_pipeline();
  cli::Options o;
  o.config_path = p.config;
  o.mode = "linear";
  o.draws = 500;
  o.burn = 10;
  o.input = p.prepared.string();
  o.out_dir = (p.root / "mismatch").string();
  cli::cmd_estimate(o);
  cli::Options io;
  io.config_path = p.config;  // markov: two regimes
  io.input = (p.root / "mismatch" / "draws").string();
  io.out_dir = (p.root / "mismatch_irf").string();
  CHECK_THROWS_AS(cli::cmd_irf(io), ValidationError);
}

TEST_CASE("simulate and recover smoke with report schema") {
  auto dir = testutil::temp_dir("cli_sim");
  std::string cfg = (dir / "dgp.ini").string();
  write_file(cfg, "[run]\nseed = 3\n[dgp]\nseed = 50\nn_vars = 2\nn_periods = 120\nn_regimes = 1\nreplications = 2\n"
                  "[model]\nn_draws = 200\nn_burn = 100\n");
  cli::Options o;
  o.config_path = cfg;
  o.out_dir = (dir / "sim").string();
  cli::cmd_simulate(o);
  auto first = snapshot(dir / "sim");
  CHECK(first.count("msvar.csv") == 1);
  CHECK(first.count("truth.json") == 1);
  cli::cmd_simulate(o);
  CHECK(snapshot(dir / "sim") == first);

  o.out_dir = (dir / "rec").string();
  cli::cmd_recover(o);
  auto rows = read_csv((dir / "rec" / "recovery.csv").string());
  CHECK(rows[0] == std::vector<std::string>{"replication", "status", "coverage_90", "rmse", "state_accuracy",
                                            "gamma_mean", "gamma_positive_prob", "error"});
  CHECK(rows.size() == 3);
  CHECK(rows[1][1] == "ok");
  nlohmann::json j = nlohmann::json::parse(read_file((dir / "rec" / "recovery.json").string()));
  CHECK(j["replications"] == 2);
  CHECK(j.contains("coverage_90"));
}

}  // TEST_SUITE
