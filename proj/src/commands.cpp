#include "msfavar/commands.hpp"

#include "msfavar/digest.hpp"
#include "msfavar/draw_store.hpp"
#include "msfavar/factor.hpp"
#include "msfavar/figures.hpp"
#include "msfavar/irf.hpp"
#include "msfavar/mcmc.hpp"
#include "msfavar/panel_io.hpp"
#include "msfavar/sim.hpp"
#include "msfavar/sv.hpp"
#include "msfavar/transform.hpp"

#include <json.hpp>

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace msfavar::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

ModelSpec spec_from(const Config& config) { return new_model_spec(model_input_from_config(config)); }

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("invalid boolean '" + text + "' for " + what);
}

std::string config_to_text(const Config& c) {
  std::ostringstream text;
  for (const auto& [name, entries] : c.sections) {
    text << "[" << name << "]\n";
    for (const auto& [k, v] : entries) text << k << " = " << v << "\n";
    text << "\n";
  }
  return text.str();
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

}  // namespace

const std::vector<std::string>& peak_table_columns() {
  static const std::vector<std::string> cols = {"variable", "regime", "peak", "quarter", "significant",
                                                "sign", "significant_any", "mean_at_peak"};
  return cols;
}

Config load_run_config(const Options& o) {
  if (o.config_path.empty()) throw ValidationError("--config is required");
  Config c = load_config(o.config_path);
  if (o.seed) c.set("run", "seed", std::to_string(*o.seed));
  if (o.mode) c.set("model", "regime_mode", to_string(parse_regime_mode(*o.mode)));
  if (o.break_date) c.set("model", "break_date", Quarter::parse(*o.break_date).to_string());
  if (o.draws) c.set("model", "n_draws", std::to_string(*o.draws));
  if (o.burn) c.set("model", "n_burn", std::to_string(*o.burn));
  check_config_keys(c);
  return c;
}

std::string resolve_path(const Config& config, const std::string& value) {
  fs::path p(value);
  if (p.is_absolute() || config.path.empty()) return p.string();
  return (fs::path(config.path).parent_path() / p).lexically_normal().string();
}

void write_run_manifest(const std::string& out_dir, const std::string& command, const std::string& config_path,
                        const std::vector<std::string>& inputs, std::uint64_t seed, const std::string& spec_hash,
                        const std::vector<std::string>& artifacts, double seconds) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_path;
  j["config_sha256"] = config_path.empty() ? "" : sha256_file(config_path);
  j["seed"] = seed;
  j["spec_hash"] = spec_hash;
  nlohmann::json in = nlohmann::json::array();
  for (const auto& p : inputs) in.push_back({{"path", p}, {"sha256", sha256_file(p)}});
  j["inputs"] = in;
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : artifacts) out.push_back({{"path", a}, {"sha256", sha256_file(join_path(out_dir, a))}});
  j["artifacts"] = out;
  j["versions"] = {{"msfavar", "0.1.0"}, {"armadillo", arma::arma_version::as_string()}};
  write_file(join_path(out_dir, "manifest.json"), j.dump(2) + "\n");
  nlohmann::json t;
  t["command"] = command;
  t["seconds"] = seconds;
  write_file(join_path(out_dir, "timing.json"), t.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// prepare

void cmd_prepare(const Options& o) {
  const auto start = Clock::now();
  const Config config = load_run_config(o);
  const ModelSpec spec = spec_from(config);
  const std::string raw_path = resolve_path(config, config.get("data", "raw_panel"));
  const std::string ext_path = resolve_path(config, config.get("data", "external_panel"));
  const bool fallback = parse_bool(config.get_or("data", "sv_fallback", "false"), "data.sv_fallback");

  TimeSeriesPanel raw = read_panel_csv(raw_path);
  raw.validate(true);
  raw.country_code = config.get_or("data", "country", "");
  TimeSeriesPanel ext = read_panel_csv(ext_path);
  ext.validate(true);

  const auto* series = config.section("series");
  if (!series || series->empty()) throw ValidationError("config has no [series] recipes");
  std::vector<transform::TransformRecipe> recipes;
  for (const auto& [target, text] : *series) recipes.push_back(transform::TransformRecipe::parse(target, text));
  for (const auto& v : spec.endogenous) {
    bool found = false;
    for (const auto& r : recipes) found = found || r.target == v;
    if (!found) throw ValidationError("endogenous variable '" + v + "' has no [series] recipe");
  }

  // Non-SV recipes on the raw calendar.
  std::map<std::string, arma::vec> transformed;
  std::vector<std::string> direct;
  for (const auto& r : recipes) {
    if (r.kind == transform::RecipeKind::sv_proxy) continue;
    transformed[r.target] = transform::apply_recipe(r, raw);
    direct.push_back(r.target);
  }
  arma::mat defined(raw.n_periods(), direct.size());
  for (std::size_t j = 0; j < direct.size(); ++j) defined.col(j) = transformed[direct[j]];
  auto [first, count] = transform::common_defined_window(defined);
  if (count == 0) throw InsufficientDataError("no period where all transformed series are defined");

  // Intersect with the external panel calendar.
  Quarter lo = raw.dates[first], hi = raw.dates[first + count - 1];
  lo = std::max(lo, ext.dates.front());
  hi = std::min(hi, ext.dates.back());
  if (hi < lo) throw InsufficientDataError("external panel does not overlap the country sample");
  const std::size_t raw_first = static_cast<std::size_t>(lo.index() - raw.dates.front().index());
  const std::size_t ext_first = static_cast<std::size_t>(lo.index() - ext.dates.front().index());
  const std::size_t n = static_cast<std::size_t>(hi.index() - lo.index() + 1);
  const std::vector<Quarter> dates(raw.dates.begin() + raw_first, raw.dates.begin() + raw_first + n);
  for (auto& [name, v] : transformed) v = arma::vec(v.subvec(raw_first, raw_first + n - 1));

  // Volatility proxies on the common window.
  sv::ProxyOptions sv_opts;
  sv_opts.ar_order = spec.sv_ar_order;
  sv_opts.n_draws = spec.sv_draws;
  sv_opts.n_burn = spec.sv_burn;
  sv_opts.prior = sv::SvPrior::from(spec.prior);
  std::uint64_t sv_index = 0;
  for (const auto& r : recipes) {
    if (r.kind != transform::RecipeKind::sv_proxy) continue;
    ++sv_index;
    auto it = transformed.find(r.sources.at(0));
    if (it == transformed.end()) {
      throw ValidationError("sv_proxy source '" + r.sources.at(0) + "' for '" + r.target + "' is not a series");
    }
    try {
      if (fallback) {
        transformed[r.target] = sv::rolling_sd_proxy(it->second, 8);
      } else {
        Rng rng(spec.seed + 1000 * sv_index);
        transformed[r.target] = sv::volatility_proxy(it->second, sv_opts, rng);
      }
    } catch (const Error& e) {
      rethrow_with_prefix(e, "series '" + r.target + "': ");
    }
  }

  // Global factor.
  arma::mat ext_values = ext.values.rows(ext_first, ext_first + n - 1);
  for (arma::uword j = 0; j < ext_values.n_cols; ++j) {
    try {
      ext_values.col(j) = transform::standardize(transform::fill_edge_gaps(ext_values.col(j))).values;
    } catch (const Error& e) {
      rethrow_with_prefix(e, "external series '" + ext.series_names[j] + "': ");
    }
  }
  factor::FactorSet fs_ = factor::extract_principal_components(ext_values, spec.q_factors);

  // Prepared panel in identification order.
  TimeSeriesPanel prepared;
  prepared.dates = dates;
  prepared.country_code = raw.country_code;
  prepared.series_names = spec.ordering;
  prepared.values.set_size(n, spec.ordering.size());
  std::ostringstream std_csv;
  CsvWriter sw(std_csv);
  sw.header({"series", "recipe", "mean", "sd"});
  for (std::size_t j = 0; j < spec.ordering.size(); ++j) {
    const std::string& name = spec.ordering[j];
    auto fit = std::find(spec.factor_names.begin(), spec.factor_names.end(), name);
    if (fit != spec.factor_names.end()) {
      prepared.values.col(j) = fs_.factors.col(fit - spec.factor_names.begin());
      sw.cell(name).cell("principal_component").cell(0.0).cell(1.0);
      sw.end_row();
      continue;
    }
    transform::Standardized z;
    try {
      z = transform::standardize(transformed.at(name));
    } catch (const Error& e) {
      rethrow_with_prefix(e, "series '" + name + "': ");
    }
    prepared.values.col(j) = z.values;
    std::string recipe;
    for (const auto& r : recipes)
      if (r.target == name) recipe = r.to_string();
    sw.cell(name).cell(recipe).cell(z.mean).cell(z.sd);
    sw.end_row();
  }

  fs::create_directories(o.out_dir);
  write_panel_csv(join_path(o.out_dir, "prepared.csv"), prepared);
  write_file(join_path(o.out_dir, "standardization.csv"), std_csv.str());
  TimeSeriesPanel ext_std;
  ext_std.dates = dates;
  ext_std.series_names = ext.series_names;
  ext_std.values = ext_values;
  write_panel_csv(join_path(o.out_dir, "external_standardized.csv"), ext_std);
  {
    std::ostringstream os;
    CsvWriter w(os);
    w.header({"factor", "explained_variance_share"});
    for (int j = 0; j < spec.q_factors; ++j) {
      w.cell(spec.factor_names[j]).cell(fs_.explained_variance_share(j));
      w.end_row();
    }
    write_file(join_path(o.out_dir, "factor_summary.csv"), os.str());
  }
  write_run_manifest(o.out_dir, "prepare", o.config_path, {raw_path, ext_path}, spec.seed, model_spec_hash(spec),
                     {"prepared.csv", "standardization.csv", "external_standardized.csv", "factor_summary.csv"},
                     seconds_since(start));
}

// ---------------------------------------------------------------------------
// estimate

void cmd_estimate(const Options& o) {
  const auto start = Clock::now();
  const Config config = load_run_config(o);
  const ModelSpec spec = spec_from(config);
  std::string panel_path = o.input;
  if (panel_path.empty()) panel_path = resolve_path(config, config.get("data", "prepared_panel"));
  TimeSeriesPanel panel = read_panel_csv(panel_path);
  panel.validate(false);
  TimeSeriesPanel model = panel.select(spec.ordering);

  mcmc::GibbsInput in;
  in.x = model.values;
  in.dates = model.dates;
  in.rate = spec.regime_mode == RegimeMode::linear && !panel.has_series(spec.rate_variable)
                ? arma::vec()
                : panel.column(spec.rate_variable);
  std::vector<std::string> inputs = {panel_path};
  const std::string ext_path = join_path(fs::path(panel_path).parent_path().string(), "external_standardized.csv");
  if (fs::exists(ext_path)) {
    TimeSeriesPanel ext = read_panel_csv(ext_path);
    ext.validate(false);
    if (ext.dates.size() == model.dates.size() && ext.dates.front() == model.dates.front()) {
      in.external = ext.values;
      in.factors = panel.select(spec.factor_names).values;
      inputs.push_back(ext_path);
    }
  }

  Rng rng(spec.seed);
  mcmc::GibbsOutput fit = mcmc::run_gibbs(in, spec, rng);

  fs::create_directories(o.out_dir);
  DrawStore store;
  store.meta = make_store_meta(spec, fit.draws, fit.dates.empty() ? "" : fit.dates.front().to_string());
  store.draws = std::move(fit.draws);
  write_draw_store(join_path(o.out_dir, "draws"), store);

  std::vector<std::string> date_labels;
  for (const auto& d : fit.dates) date_labels.push_back(d.to_string());
  {
    std::ostringstream os;
    CsvWriter w(os);
    w.header({"date", "prob_regime1", "filtered_prob0", "filtered_prob1", "stay_prob0", "stay_prob1", "rate"});
    for (std::size_t t = 0; t < fit.dates.size(); ++t) {
      w.cell(date_labels[t]).cell(fit.mean_state(t)).cell(fit.mean_filtered_prob(t, 0))
          .cell(fit.mean_filtered_prob(t, 1)).cell(fit.mean_stay_prob(t, 0)).cell(fit.mean_stay_prob(t, 1));
      if (in.rate.n_elem) w.cell(in.rate(t + spec.p_lags));
      else w.blank();
      w.end_row();
    }
    write_file(join_path(o.out_dir, "regimes.csv"), os.str());
  }
  write_file(join_path(o.out_dir, "regime_path.svg"),
             figures::regime_path_svg(date_labels, {"P(regime 1)", "stay regime 0", "stay regime 1"},
                                      {fit.mean_state, fit.mean_stay_prob.col(0), fit.mean_stay_prob.col(1)},
                                      panel.country_code + " regime probabilities (" + to_string(spec.regime_mode) +
                                          ")"));
  {
    nlohmann::json j;
    j["label_swaps"] = fit.label_swaps;
    j["degenerate_probit_sweeps"] = fit.degenerate_probit_sweeps;
    j["wishart_psi"] = fit.hyper.psi_scalar;
    j["wishart_s"] = fit.hyper.s_scalar;
    j["sigma_hat"] = std::vector<double>(fit.hyper.sigma_hat.begin(), fit.hyper.sigma_hat.end());
    j["ar_variance_warnings"] = fit.sigma_hat.warnings;
    write_file(join_path(o.out_dir, "diagnostics.json"), j.dump(2) + "\n");
  }
  write_run_manifest(o.out_dir, "estimate", o.config_path, inputs, spec.seed, model_spec_hash(spec),
                     {"draws/draws.bin", "draws/draws.json", "regimes.csv", "regime_path.svg", "diagnostics.json"},
                     seconds_since(start));
}

// ---------------------------------------------------------------------------
// irf

void cmd_irf(const Options& o) {
  const auto start = Clock::now();
  if (o.input.empty()) throw ValidationError("irf needs --input <draw store directory>");
  DrawStore store = read_draw_store(o.input);
  const ModelSpec spec = new_model_spec(model_input_from_config(parse_config_text(store.meta.spec_text, "draws.json")));
  if (!o.config_path.empty()) {
    const ModelSpec cfg_spec = spec_from(load_run_config(o));
    if (cfg_spec.n_vars != store.meta.n_vars || cfg_spec.p_lags != store.meta.p_lags ||
        cfg_spec.n_regimes() != store.meta.n_regimes) {
      throw ValidationError("draw store dimensions do not match the config");
    }
  }
  const int shock = static_cast<int>(spec.ordering_index(spec.shock_variable));
  irf::IrfResult res = irf::summarize_irf(store.draws, spec, {shock});
  const int n_reg = res.n_regimes;
  auto regime_label = [&](int r) {
    if (n_reg == 1) return std::string("linear");
    if (spec.regime_mode == RegimeMode::deterministic_break) return std::string(r == 0 ? "pre_break" : "post_break");
    return std::string(r == spec.high_rate_regime ? "high_rate" : "low_rate");
  };

  fs::create_directories(o.out_dir);
  {
    std::ostringstream os;
    CsvWriter w(os);
    w.header({"regime", "shock", "variable", "horizon", "p16", "p50", "p84", "mean"});
    for (int r = 0; r < n_reg; ++r) {
      const auto& b = res.bands[r][0];
      for (int i = 0; i < res.n_vars; ++i)
        for (int h = 0; h <= res.horizon; ++h) {
          w.cell(regime_label(r)).cell(spec.shock_variable).cell(spec.ordering[i]).cell(h).cell(b.p16(i, h))
              .cell(b.p50(i, h)).cell(b.p84(i, h)).cell(b.mean(i, h));
          w.end_row();
        }
    }
    write_file(join_path(o.out_dir, "irf.csv"), os.str());
  }
  std::vector<std::string> regimes;
  for (int r = 0; r < n_reg; ++r) regimes.push_back(regime_label(r));
  std::vector<std::vector<figures::HeatmapCell>> cells(res.n_vars, std::vector<figures::HeatmapCell>(n_reg));
  {
    std::ostringstream os, heat;
    CsvWriter w(os), hw(heat);
    w.header(peak_table_columns());
    std::vector<std::string> hh = {"variable"};
    for (const auto& r : regimes) {
      hh.push_back(r);
      hh.push_back(r + "_quarter");
    }
    hw.header(hh);
    for (int i = 0; i < res.n_vars; ++i) {
      hw.cell(spec.ordering[i]);
      for (int r = 0; r < n_reg; ++r) {
        const auto& b = res.bands[r][0];
        irf::PeakSummary pk = irf::peak_response(b.p50.row(i), b.p16.row(i), b.p84.row(i));
        w.cell(spec.ordering[i]).cell(regimes[r]).cell(pk.value).cell(pk.quarter).cell(pk.significant ? "true" : "false")
            .cell(pk.sign == irf::PeakSign::negative ? "negative" : "positive")
            .cell(b.significant_any(i, 0) ? "true" : "false").cell(b.mean(i, pk.quarter));
        w.end_row();
        if (pk.significant) {
          hw.cell(pk.value).cell(pk.quarter);
          cells[i][r] = {true, pk.value, pk.quarter};
        } else {
          hw.blank().blank();
        }
      }
      hw.end_row();
    }
    write_file(join_path(o.out_dir, "peaks.csv"), os.str());
    write_file(join_path(o.out_dir, "peaks_heatmap.csv"), heat.str());
  }
  write_file(join_path(o.out_dir, "irf_bands.svg"),
             figures::irf_band_svg(res, 0, spec.ordering, "Responses to a 1 sd " + spec.shock_variable + " shock"));
  write_file(join_path(o.out_dir, "peaks_heatmap.svg"),
             figures::peak_heatmap_svg(spec.ordering, regimes, cells, "Peak responses (68% band excludes zero)"));
  {
    nlohmann::json j;
    j["n_draws"] = res.n_draws;
    j["explosive_draws"] = res.explosive_draws;
    j["shock"] = spec.shock_variable;
    write_file(join_path(o.out_dir, "irf_diagnostics.json"), j.dump(2) + "\n");
  }
  write_run_manifest(o.out_dir, "irf", o.config_path,
                     {join_path(o.input, "draws.bin"), join_path(o.input, "draws.json")}, spec.seed,
                     store.meta.spec_hash,
                     {"irf.csv", "peaks.csv", "peaks_heatmap.csv", "irf_bands.svg", "peaks_heatmap.svg",
                      "irf_diagnostics.json"},
                     seconds_since(start));
}

// ---------------------------------------------------------------------------
// simulate / recover

namespace {

sim::DgpParams dgp_params(const Config& config, const Options& o) {
  sim::DgpParams p = sim::DgpParams::from_config(config);
  if (o.seed) p.seed = *o.seed;
  return p;
}

ModelSpec recovery_spec(const Config& config, const sim::DgpSpec& dgp) {
  ModelSpecInput in = model_input_from_config(config);
  in.p_lags = dgp.p_lags;
  in.q_factors = 1;
  in.endogenous.clear();
  for (int j = 1; j < dgp.n_vars; ++j) in.endogenous.push_back("y" + std::to_string(j));
  in.ordering.clear();
  in.rate_variable = "y1";
  in.shock_variable = "y1";
  if (!config.has("model", "regime_mode")) {
    in.regime_mode = dgp.n_regimes() == 2 ? RegimeMode::endogenous_markov : RegimeMode::linear;
  }
  // Label so that the estimated regime with the higher mean rate matches the truth.
  if (!config.has("model", "high_rate_regime")) in.high_rate_regime = dgp.probit.gamma > 0.0 ? 1 : 0;
  if (!config.has("model", "n_draws")) in.n_draws = 1000;
  if (!config.has("model", "n_burn")) in.n_burn = 500;
  return new_model_spec(in);
}

}  // namespace

void cmd_simulate(const Options& o) {
  const auto start = Clock::now();
  const Config config = load_run_config(o);
  const sim::DgpParams params = dgp_params(config, o);
  const sim::DgpSpec dgp = sim::make_dgp(params);
  Rng rng(dgp.seed);
  sim::SimulatedVar s = sim::simulate_msvar(dgp, rng);
  fs::create_directories(o.out_dir);
  std::vector<std::string> artifacts;
  {
    std::ostringstream os;
    CsvWriter w(os);
    std::vector<std::string> h = {"date"};
    for (int j = 0; j < dgp.n_vars; ++j) h.push_back("x" + std::to_string(j + 1));
    h.push_back("rate");
    h.push_back("state");
    w.header(h);
    auto dates = quarter_range(Quarter{2000, 1}, s.x.n_rows);
    for (arma::uword t = 0; t < s.x.n_rows; ++t) {
      w.cell(dates[t].to_string());
      for (int j = 0; j < dgp.n_vars; ++j) w.cell(s.x(t, j));
      w.cell(s.rate(t)).cell(static_cast<long long>(s.states(t)));
      w.end_row();
    }
    write_file(join_path(o.out_dir, "msvar.csv"), os.str());
    artifacts.push_back("msvar.csv");
  }
  {
    nlohmann::json j;
    j["seed"] = dgp.seed;
    j["n_vars"] = dgp.n_vars;
    j["p_lags"] = dgp.p_lags;
    j["n_periods"] = dgp.n_periods;
    j["probit_c0"] = {dgp.probit.c0(0), dgp.probit.c0(1)};
    j["probit_gamma"] = dgp.probit.gamma;
    for (int r = 0; r < dgp.n_regimes(); ++r) {
      j["beta"].push_back(std::vector<double>(dgp.beta[r].begin(), dgp.beta[r].end()));
      j["omega"].push_back(std::vector<double>(dgp.omega[r].begin(), dgp.omega[r].end()));
    }
    write_file(join_path(o.out_dir, "truth.json"), j.dump(2) + "\n");
    artifacts.push_back("truth.json");
  }
  // Optional synthetic country batch for the prepare pipeline.
  if (auto* countries = config.find("batch", "countries")) {
    // 1999Q2 start: after differencing and 4-quarter sums the sample is 2000Q1-2018Q4.
    const Quarter first{1999, 2};
    const int periods = 79;
    arma::vec factor;
    TimeSeriesPanel ext = sim::simulate_external_panel(11, first, periods, dgp.seed + 17, &factor);
    write_panel_csv(join_path(o.out_dir, "external.csv"), ext);
    artifacts.push_back("external.csv");
    std::uint64_t i = 0;
    for (const auto& code : split_list(*countries)) {
      TimeSeriesPanel raw = sim::simulate_raw_country(code, first, periods, factor, dgp.seed + 101 * ++i);
      write_panel_csv(join_path(o.out_dir, code + "_raw.csv"), raw);
      artifacts.push_back(code + "_raw.csv");
    }
  }
  write_run_manifest(o.out_dir, "simulate", o.config_path, {}, dgp.seed, "", artifacts, seconds_since(start));
}

void cmd_recover(const Options& o) {
  const auto start = Clock::now();
  const Config config = load_run_config(o);
  const sim::DgpParams params = dgp_params(config, o);
  const sim::DgpSpec dgp = sim::make_dgp(params);
  const ModelSpec spec = recovery_spec(config, dgp);
  sim::RecoveryReport rep = sim::recovery_report(dgp, spec, params.replications, o.jobs);
  fs::create_directories(o.out_dir);
  sim::write_recovery_csv(join_path(o.out_dir, "recovery.csv"), rep);
  write_file(join_path(o.out_dir, "recovery.json"), sim::recovery_summary_json(rep));
  write_run_manifest(o.out_dir, "recover", o.config_path, {}, dgp.seed, model_spec_hash(spec),
                     {"recovery.csv", "recovery.json"}, seconds_since(start));
}

// ---------------------------------------------------------------------------
// report / batch

void cmd_report(const Options& o) {
  const auto start = Clock::now();
  const Config config = load_run_config(o);
  const auto countries = split_list(config.get("batch", "countries"));
  const std::string root = o.input.empty() ? o.out_dir : o.input;
  // (variable, regime) -> counts of significant negative / positive / insignificant peaks.
  std::map<std::pair<std::string, std::string>, std::array<int, 3>> counts;
  std::vector<std::pair<std::string, std::string>> order;
  std::vector<std::string> inputs;
  for (const auto& code : countries) {
    const std::string path = join_path(join_path(join_path(root, code), "irf"), "peaks.csv");
    std::ifstream in(path);
    if (!in) throw IoError("missing peak table '" + path + "'");
    inputs.push_back(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cells = split_list(line);
      if (cells.size() < 5) throw ParseError(0, path + ": malformed row");
      auto key = std::make_pair(cells[0], cells[1]);
      if (!counts.count(key)) order.push_back(key);
      auto& c = counts[key];
      const bool sig = cells[4] == "true";
      const double value = parse_double(cells[2], "peak");
      if (!sig) ++c[2];
      else if (value < 0.0) ++c[0];
      else ++c[1];
    }
  }
  fs::create_directories(o.out_dir);
  std::ostringstream os;
  CsvWriter w(os);
  w.header({"variable", "regime", "negative_significant", "positive_significant", "insignificant", "countries"});
  for (const auto& key : order) {
    const auto& c = counts[key];
    w.cell(key.first).cell(key.second).cell(c[0]).cell(c[1]).cell(c[2]).cell(c[0] + c[1] + c[2]);
    w.end_row();
  }
  write_file(join_path(o.out_dir, "summary_counts.csv"), os.str());
  write_run_manifest(o.out_dir, "report", o.config_path, inputs, 0, "", {"summary_counts.csv"},
                     seconds_since(start));
}

void cmd_batch(const Options& o) {
  const auto start = Clock::now();
  const Config base = load_run_config(o);
  const auto countries = split_list(base.get("batch", "countries"));
  if (countries.empty()) throw ValidationError("batch.countries is empty");
  const std::string config_text = config_to_text(base);
  const std::uint64_t seed = parse_int(base.get_or("run", "seed", "1"), "run.seed");
  fs::create_directories(o.out_dir);

  std::vector<std::string> errors(countries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < countries.size(); i = next++) {
      const std::string& code = countries[i];
      try {
        const std::string dir = join_path(o.out_dir, code);
        fs::create_directories(dir);
        // Per-country config: placeholders substituted, paths made absolute.
        Config c = parse_config_text(replace_all(config_text, "{country}", code), o.config_path);
        c.set("data", "country", code);
        c.set("data", "raw_panel", resolve_path(c, c.get("data", "raw_panel")));
        c.set("data", "external_panel", resolve_path(c, c.get("data", "external_panel")));
        c.set("run", "seed", std::to_string(seed + i));
        const std::string cfg_path = join_path(dir, "config.ini");
        write_file(cfg_path, config_to_text(c));
        Options sub = o;
        sub.config_path = cfg_path;
        sub.seed.reset();
        sub.out_dir = join_path(dir, "prepare");
        sub.input.clear();
        cmd_prepare(sub);
        sub.input = join_path(sub.out_dir, "prepared.csv");
        sub.out_dir = join_path(dir, "estimate");
        cmd_estimate(sub);
        sub.input = join_path(sub.out_dir, "draws");
        sub.out_dir = join_path(dir, "irf");
        sub.config_path.clear();
        cmd_irf(sub);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int jobs = std::clamp(o.jobs, 1, static_cast<int>(countries.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < countries.size(); ++i) {
    if (!errors[i].empty()) throw Error("batch_failure", "country " + countries[i] + ": " + errors[i]);
  }
  Options rep = o;
  rep.input = o.out_dir;
  cmd_report(rep);
  std::vector<std::string> artifacts = {"summary_counts.csv"};
  for (const auto& code : countries) {
    for (const char* a : {"prepare/prepared.csv", "estimate/draws/draws.bin", "estimate/regimes.csv",
                          "estimate/regime_path.svg", "irf/irf.csv", "irf/peaks.csv", "irf/irf_bands.svg",
                          "irf/peaks_heatmap.svg"}) {
      artifacts.push_back(code + "/" + a);
    }
  }
  write_run_manifest(o.out_dir, "batch", o.config_path, {}, seed, "", artifacts, seconds_since(start));
}

}  // namespace msfavar::cli
