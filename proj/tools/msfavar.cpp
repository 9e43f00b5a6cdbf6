#include "msfavar/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* cmd, msfavar::cli::Options& o) {
  cmd->add_option("--config", o.config_path, "Config file (INI)");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Random seed override");
  cmd->add_option("--mode", o.mode, "Regime mode: linear|markov|break");
  cmd->add_option("--break-date", o.break_date, "Break date YYYYQn");
  cmd->add_option("--draws", o.draws, "Retained draws");
  cmd->add_option("--burn", o.burn, "Burn-in sweeps");
  cmd->add_option("--jobs", o.jobs, "Concurrent tasks");
  cmd->add_option("--input", o.input, "Input file or directory");
}

int fail(const std::string& kind, const std::string& message) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-switching FAVAR pipeline"};
  app.require_subcommand(1);
  msfavar::cli::Options o;
  auto* prepare = app.add_subcommand("prepare", "Transform raw panels, build volatility proxies and the factor");
  auto* estimate = app.add_subcommand("estimate", "Run the Gibbs sampler on a prepared panel");
  auto* irf = app.add_subcommand("irf", "Impulse responses, peak tables and figures from a draw store");
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic data from a [dgp] config");
  auto* recover = app.add_subcommand("recover", "Monte Carlo parameter recovery study");
  auto* report = app.add_subcommand("report", "Cross-country counts of significant peak responses");
  auto* batch = app.add_subcommand("batch", "prepare, estimate and irf for every [batch] country, then report");
  for (auto* c : {prepare, estimate, irf, simulate, recover, report, batch}) add_common(c, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (prepare->parsed()) msfavar::cli::cmd_prepare(o);
    else if (estimate->parsed()) msfavar::cli::cmd_estimate(o);
    else if (irf->parsed()) msfavar::cli::cmd_irf(o);
    else if (simulate->parsed()) msfavar::cli::cmd_simulate(o);
    else if (recover->parsed()) msfavar::cli::cmd_recover(o);
    else if (report->parsed()) msfavar::cli::cmd_report(o);
    else if (batch->parsed()) msfavar::cli::cmd_batch(o);
  } catch (const msfavar::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
