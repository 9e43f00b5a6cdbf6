#ifndef MSFAVAR_COMMANDS_HPP
#define MSFAVAR_COMMANDS_HPP

#include "msfavar/config.hpp"
#include "msfavar/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace msfavar::cli {

/// Command-line overrides shared by all subcommands.
struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::string input;  // prepared panel, draw store directory or results root
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> break_date;
  std::optional<int> draws;
  std::optional<int> burn;
  int jobs = 1;
};

/// Loads the config, applies overrides and rejects unknown keys.
Config load_run_config(const Options& options);

/// Resolves a path from the config relative to the config file's directory.
std::string resolve_path(const Config& config, const std::string& value);

void cmd_prepare(const Options& options);
void cmd_estimate(const Options& options);
void cmd_irf(const Options& options);
void cmd_simulate(const Options& options);
void cmd_recover(const Options& options);
void cmd_report(const Options& options);
/// prepare -> estimate -> irf for every [batch] country, then report.
void cmd_batch(const Options& options);

/// Writes manifest.json (deterministic) and timing.json in `out_dir`.
void write_run_manifest(const std::string& out_dir, const std::string& command, const std::string& config_path,
                        const std::vector<std::string>& inputs, std::uint64_t seed, const std::string& spec_hash,
                        const std::vector<std::string>& artifacts, double seconds);

/// Column names of peaks.csv.
const std::vector<std::string>& peak_table_columns();

}  // namespace msfavar::cli

#endif
