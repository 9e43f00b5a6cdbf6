#include "msfavar/config.hpp"

#include "msfavar/digest.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace msfavar {

namespace pt = boost::property_tree;

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const std::string* Config::find(const std::string& section_name, const std::string& key) const {
  const auto* sec = section(section_name);
  if (!sec) return nullptr;
  for (const auto& [k, v] : *sec)
    if (k == key) return &v;
  return nullptr;
}

std::string Config::get(const std::string& section_name, const std::string& key) const {
  const std::string* v = find(section_name, key);
  if (!v) throw ValidationError("missing config key '" + section_name + "." + key + "'");
  return *v;
}

std::string Config::get_or(const std::string& section_name, const std::string& key,
                           const std::string& fallback) const {
  const std::string* v = find(section_name, key);
  return v ? *v : fallback;
}

const std::vector<std::pair<std::string, std::string>>* Config::section(const std::string& name) const {
  for (const auto& [n, entries] : sections)
    if (n == name) return &entries;
  return nullptr;
}

void Config::set(const std::string& section_name, const std::string& key, const std::string& value) {
  for (auto& [n, entries] : sections) {
    if (n != section_name) continue;
    for (auto& [k, v] : entries) {
      if (k == key) {
        v = value;
        return;
      }
    }
    entries.emplace_back(key, value);
    return;
  }
  sections.push_back({section_name, {{key, value}}});
}

Config parse_config_text(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), origin + ": " + e.message());
  }
  Config cfg;
  cfg.path = origin;
  for (const auto& [name, child] : tree) {
    if (child.empty()) throw ValidationError("config key '" + name + "' outside of any [section]");
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& [key, value] : child) entries.emplace_back(key, trim(value.get_value<std::string>()));
    cfg.sections.emplace_back(name, std::move(entries));
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"seed"}},
      {"model",
       {"p_lags", "q_factors", "regime_mode", "break_date", "sv_ar_order", "sv_draws", "sv_burn", "horizon",
        "n_draws", "n_burn", "rate_variable", "shock_variable", "high_rate_regime", "fixed_xi"}},
      {"variables", {"endogenous", "ordering"}},
      {"prior",
       {"pooling_mean_variance", "xi_shape", "xi_rate", "wishart_psi", "wishart_s", "loading_prior_variance",
        "meas_error_ig_shape", "meas_error_ig_scale", "sv_mu_variance", "sv_sigma_shape", "sv_sigma_rate",
        "sv_phi_beta_a", "sv_phi_beta_b", "sv_rho_variance", "probit_coef_variance"}},
      {"data", {"country", "raw_panel", "external_panel", "prepared_panel", "sv_fallback"}},
      {"batch", {"countries", "jobs"}},
      {"dgp",
       {"n_vars", "p_lags", "n_periods", "n_regimes", "seed", "own_lag", "cross_lag", "intercept",
        "intercept_shift", "error_sd", "error_corr", "probit_c0", "probit_gamma", "rate_ar", "rate_sd",
        "rate_mean_first", "rate_mean_second", "replications", "sv_flows"}},
  };
  return keys;
}

}  // namespace

void check_config_keys(const Config& config, const std::vector<std::string>& free_sections) {
  const auto& keys = known_keys();
  for (const auto& [name, entries] : config.sections) {
    if (std::find(free_sections.begin(), free_sections.end(), name) != free_sections.end()) continue;
    auto it = keys.find(name);
    if (it == keys.end()) throw ValidationError("unknown config section '" + name + "'");
    for (const auto& [k, v] : entries) {
      if (!it->second.count(k)) throw ValidationError("unknown config key '" + name + "." + k + "'");
    }
  }
}

std::string trim(const std::string& text) {
  const char* ws = " \t\r\n";
  auto b = text.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  auto e = text.find_last_not_of(ws);
  return text.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("invalid number '" + text + "' for " + what);
}

long long parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("invalid integer '" + text + "' for " + what);
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

ModelSpecInput model_input_from_config(const Config& c) {
  ModelSpecInput in;
  auto int_key = [&](const char* sec, const char* key, int& target) {
    if (auto* v = c.find(sec, key)) target = static_cast<int>(parse_int(*v, std::string(sec) + "." + key));
  };
  auto dbl_key = [&](const char* key, double& target) {
    if (auto* v = c.find("prior", key)) target = parse_double(*v, std::string("prior.") + key);
  };
  if (auto* v = c.find("run", "seed")) in.seed = static_cast<std::uint64_t>(parse_int(*v, "run.seed"));
  int_key("model", "p_lags", in.p_lags);
  int_key("model", "q_factors", in.q_factors);
  int_key("model", "sv_ar_order", in.sv_ar_order);
  int_key("model", "sv_draws", in.sv_draws);
  int_key("model", "sv_burn", in.sv_burn);
  int_key("model", "horizon", in.horizon);
  int_key("model", "n_draws", in.n_draws);
  int_key("model", "n_burn", in.n_burn);
  int_key("model", "high_rate_regime", in.high_rate_regime);
  if (auto* v = c.find("model", "regime_mode")) in.regime_mode = parse_regime_mode(*v);
  if (auto* v = c.find("model", "break_date")) in.break_date = Quarter::parse(*v);
  if (auto* v = c.find("model", "rate_variable")) in.rate_variable = *v;
  if (auto* v = c.find("model", "shock_variable")) in.shock_variable = *v;
  if (auto* v = c.find("model", "fixed_xi")) in.fixed_xi = parse_double(*v, "model.fixed_xi");
  if (auto* v = c.find("variables", "endogenous")) in.endogenous = split_list(*v);
  if (auto* v = c.find("variables", "ordering")) in.ordering = split_list(*v);

  PriorConfig& p = in.prior;
  dbl_key("pooling_mean_variance", p.pooling_mean_variance);
  dbl_key("xi_shape", p.xi_shape);
  dbl_key("xi_rate", p.xi_rate);
  if (auto* v = c.find("prior", "wishart_psi")) p.wishart_psi_override = parse_double(*v, "prior.wishart_psi");
  if (auto* v = c.find("prior", "wishart_s")) p.wishart_s_override = parse_double(*v, "prior.wishart_s");
  dbl_key("loading_prior_variance", p.loading_prior_variance);
  dbl_key("meas_error_ig_shape", p.meas_error_ig_shape);
  dbl_key("meas_error_ig_scale", p.meas_error_ig_scale);
  dbl_key("sv_mu_variance", p.sv_mu_variance);
  dbl_key("sv_sigma_shape", p.sv_sigma_shape);
  dbl_key("sv_sigma_rate", p.sv_sigma_rate);
  dbl_key("sv_phi_beta_a", p.sv_phi_beta_a);
  dbl_key("sv_phi_beta_b", p.sv_phi_beta_b);
  dbl_key("sv_rho_variance", p.sv_rho_variance);
  dbl_key("probit_coef_variance", p.probit_coef_variance);
  return in;
}

std::string model_spec_to_config_text(const ModelSpec& s) {
  std::ostringstream os;
  auto list = [](const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out;
  };
  os << "[run]\nseed = " << s.seed << "\n\n";
  os << "[model]\n"
     << "p_lags = " << s.p_lags << "\n"
     << "q_factors = " << s.q_factors << "\n"
     << "regime_mode = " << to_string(s.regime_mode) << "\n"
     << "break_date = " << s.break_date.to_string() << "\n"
     << "sv_ar_order = " << s.sv_ar_order << "\n"
     << "sv_draws = " << s.sv_draws << "\n"
     << "sv_burn = " << s.sv_burn << "\n"
     << "horizon = " << s.horizon << "\n"
     << "n_draws = " << s.n_draws << "\n"
     << "n_burn = " << s.n_burn << "\n"
     << "rate_variable = " << s.rate_variable << "\n"
     << "shock_variable = " << s.shock_variable << "\n"
     << "high_rate_regime = " << s.high_rate_regime << "\n";
  if (s.fixed_xi) os << "fixed_xi = " << format_double(*s.fixed_xi) << "\n";
  os << "\n[variables]\nendogenous = " << list(s.endogenous) << "\nordering = " << list(s.ordering) << "\n\n";
  const PriorConfig& p = s.prior;
  os << "[prior]\n"
     << "pooling_mean_variance = " << format_double(p.pooling_mean_variance) << "\n"
     << "xi_shape = " << format_double(p.xi_shape) << "\n"
     << "xi_rate = " << format_double(p.xi_rate) << "\n";
  if (p.wishart_psi_override) os << "wishart_psi = " << format_double(*p.wishart_psi_override) << "\n";
  if (p.wishart_s_override) os << "wishart_s = " << format_double(*p.wishart_s_override) << "\n";
  os << "loading_prior_variance = " << format_double(p.loading_prior_variance) << "\n"
     << "meas_error_ig_shape = " << format_double(p.meas_error_ig_shape) << "\n"
     << "meas_error_ig_scale = " << format_double(p.meas_error_ig_scale) << "\n"
     << "sv_mu_variance = " << format_double(p.sv_mu_variance) << "\n"
     << "sv_sigma_shape = " << format_double(p.sv_sigma_shape) << "\n"
     << "sv_sigma_rate = " << format_double(p.sv_sigma_rate) << "\n"
     << "sv_phi_beta_a = " << format_double(p.sv_phi_beta_a) << "\n"
     << "sv_phi_beta_b = " << format_double(p.sv_phi_beta_b) << "\n"
     << "sv_rho_variance = " << format_double(p.sv_rho_variance) << "\n"
     << "probit_coef_variance = " << format_double(p.probit_coef_variance) << "\n";
  return os.str();
}

std::string model_spec_hash(const ModelSpec& spec) { return sha256_hex(model_spec_to_config_text(spec)); }

}  // namespace msfavar
