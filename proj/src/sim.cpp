#include "msfavar/sim.hpp"

#include "msfavar/irf.hpp"
#include "msfavar/mcmc.hpp"
#include "msfavar/panel_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace msfavar::sim {

DgpParams DgpParams::from_config(const Config& c) {
  DgpParams p;
  auto i = [&](const char* key, int& target) {
    if (auto* v = c.find("dgp", key)) target = static_cast<int>(parse_int(*v, std::string("dgp.") + key));
  };
  auto d = [&](const char* key, double& target) {
    if (auto* v = c.find("dgp", key)) target = parse_double(*v, std::string("dgp.") + key);
  };
  i("n_vars", p.n_vars);
  i("p_lags", p.p_lags);
  i("n_periods", p.n_periods);
  i("n_regimes", p.n_regimes);
  i("replications", p.replications);
  d("own_lag", p.own_lag);
  d("cross_lag", p.cross_lag);
  d("intercept", p.intercept);
  d("intercept_shift", p.intercept_shift);
  d("error_sd", p.error_sd);
  d("error_corr", p.error_corr);
  d("probit_gamma", p.probit_gamma);
  d("rate_ar", p.rate.ar);
  d("rate_sd", p.rate.sd);
  d("rate_mean_first", p.rate.mean_first);
  d("rate_mean_second", p.rate.mean_second);
  if (auto* v = c.find("dgp", "probit_c0")) {
    auto parts = split_list(*v);
    if (parts.size() != 2) throw ValidationError("dgp.probit_c0 needs two values");
    p.probit_c0 = {parse_double(parts[0], "dgp.probit_c0"), parse_double(parts[1], "dgp.probit_c0")};
  }
  if (auto* v = c.find("dgp", "seed")) p.seed = static_cast<std::uint64_t>(parse_int(*v, "dgp.seed"));
  return p;
}

DgpSpec make_dgp(const DgpParams& p) {
  if (p.n_vars <= 0 || p.p_lags <= 0 || p.n_periods <= 0) throw ValidationError("DGP dimensions must be positive");
  if (p.n_regimes != 1 && p.n_regimes != 2) throw ValidationError("DGP supports one or two regimes");
  const arma::uword k = static_cast<arma::uword>(p.n_vars);
  DgpSpec dgp;
  dgp.n_vars = p.n_vars;
  dgp.p_lags = p.p_lags;
  dgp.n_periods = p.n_periods;
  dgp.probit.c0 = p.probit_c0;
  dgp.probit.gamma = p.probit_gamma;
  dgp.rate = p.rate;
  dgp.seed = p.seed;
  arma::mat a(k, k, arma::fill::value(p.cross_lag));
  a.diag().fill(p.own_lag);
  arma::mat omega = p.error_sd * p.error_sd *
                    ((1.0 - p.error_corr) * arma::eye(k, k) + p.error_corr * arma::ones(k, k));
  for (int r = 0; r < p.n_regimes; ++r) {
    arma::mat b(k * p.p_lags + 1, k, arma::fill::zeros);
    b.row(0).fill(p.intercept + r * p.intercept_shift * p.error_sd);
    b.rows(1, k) = a.t();
    dgp.beta.push_back(arma::vectorise(b));
    dgp.omega.push_back(omega);
  }
  validate_dgp(dgp);
  return dgp;
}

void validate_dgp(const DgpSpec& dgp) {
  if (dgp.beta.empty() || dgp.beta.size() != dgp.omega.size()) throw ValidationError("DGP regimes inconsistent");
  bool all_explosive = true;
  for (std::size_t r = 0; r < dgp.beta.size(); ++r) {
    arma::mat l;
    if (!arma::chol(l, dgp.omega[r])) throw ValidationError("DGP covariance is not positive definite");
    const double rad = irf::spectral_radius(irf::companion_matrix(dgp.beta[r], dgp.n_vars, dgp.p_lags));
    if (rad < 1.0) all_explosive = false;
  }
  if (all_explosive) throw ValidationError("DGP is explosive in every regime");
}

SimulatedVar simulate_msvar(const DgpSpec& dgp, Rng& rng) {
  validate_dgp(dgp);
  const int k = dgp.n_vars, p = dgp.p_lags;
  const int total = dgp.burn_in + dgp.n_periods;
  const int shift_at = dgp.burn_in + dgp.n_periods / 2;
  const int n_reg = dgp.n_regimes();

  arma::vec rate(total);
  auto mean_at = [&](int t) { return t < shift_at ? dgp.rate.mean_first : dgp.rate.mean_second; };
  rate(0) = mean_at(0) + dgp.rate.sd / std::sqrt(1.0 - dgp.rate.ar * dgp.rate.ar) * rng.normal();
  for (int t = 1; t < total; ++t) {
    rate(t) = mean_at(t) + dgp.rate.ar * (rate(t - 1) - mean_at(t - 1)) + dgp.rate.sd * rng.normal();
  }

  arma::ivec states(total, arma::fill::zeros);
  if (n_reg == 2) {
    arma::vec init = regime::invariant_distribution(regime::transition_matrix(dgp.probit, rate(0)));
    states(0) = rng.uniform() < init(1) ? 1 : 0;
    for (int t = 1; t < total; ++t) {
      const double p1 = normal_cdf(dgp.probit.c0(states(t - 1)) + dgp.probit.gamma * rate(t - 1));
      states(t) = rng.uniform() < p1 ? 1 : 0;
    }
  }

  std::vector<arma::mat> b(n_reg), chol(n_reg);
  for (int r = 0; r < n_reg; ++r) {
    b[r] = coefficient_matrix(dgp.beta[r], k);
    chol[r] = arma::chol(dgp.omega[r], "lower");
  }
  arma::mat x(total, k, arma::fill::zeros);
  arma::vec z(k * p + 1);
  for (int t = 0; t < total; ++t) {
    z(0) = 1.0;
    for (int l = 1; l <= p; ++l) {
      z.subvec(1 + (l - 1) * k, l * k) = t - l >= 0 ? arma::vec(x.row(t - l).t()) : arma::vec(k, arma::fill::zeros);
    }
    const int s = static_cast<int>(states(t));
    x.row(t) = (b[s].t() * z + chol[s] * rng.normal_vec(k)).t();
  }

  SimulatedVar out;
  out.x = x.rows(dgp.burn_in, total - 1);
  out.rate = rate.subvec(dgp.burn_in, total - 1);
  out.states = states.subvec(dgp.burn_in, total - 1);
  return out;
}

SimulatedSv simulate_ar_sv(const SvTruth& truth, int n_periods, Rng& rng) {
  if (!(std::abs(truth.phi) < 1.0)) throw ValidationError("|phi| must be below 1");
  const int burn = 100;
  const int total = burn + n_periods;
  const int r = static_cast<int>(truth.rho.n_elem);
  arma::vec v(total), y(total, arma::fill::zeros);
  v(0) = truth.mu + truth.sigma_v / std::sqrt(1.0 - truth.phi * truth.phi) * rng.normal();
  for (int t = 1; t < total; ++t) v(t) = truth.mu + truth.phi * (v(t - 1) - truth.mu) + truth.sigma_v * rng.normal();
  for (int t = 0; t < total; ++t) {
    double m = 0.0;
    for (int j = 0; j < r; ++j)
      if (t - 1 - j >= 0) m += truth.rho(j) * y(t - 1 - j);
    y(t) = m + std::exp(0.5 * v(t)) * rng.normal();
  }
  return {y.subvec(burn, total - 1), v.subvec(burn, total - 1)};
}

namespace {

ReplicationResult run_replication(const DgpSpec& dgp, const ModelSpec& spec, int rep) {
  ReplicationResult res;
  res.replication = rep;
  try {
    Rng data_rng(dgp.seed + static_cast<std::uint64_t>(rep));
    SimulatedVar sim = simulate_msvar(dgp, data_rng);
    mcmc::GibbsInput in;
    in.x = sim.x;
    in.rate = sim.rate;
    in.dates = quarter_range(Quarter{2000, 1}, sim.x.n_rows);
    Rng est_rng(spec.seed + static_cast<std::uint64_t>(rep));
    mcmc::GibbsOutput fit = mcmc::run_gibbs(in, spec, est_rng);

    const int n_reg = std::min(spec.n_regimes(), dgp.n_regimes());
    const std::size_t nd = fit.draws.size();
    double sq = 0.0;
    std::vector<double> buf(nd);
    for (int r = 0; r < n_reg; ++r) {
      const arma::vec& truth = dgp.beta[r];
      for (arma::uword j = 0; j < truth.n_elem; ++j) {
        double sum = 0.0;
        for (std::size_t d = 0; d < nd; ++d) {
          buf[d] = fit.draws[d].beta[r](j);
          sum += buf[d];
        }
        std::sort(buf.begin(), buf.end());
        const double lo = irf::sorted_quantile(buf.data(), nd, 0.05);
        const double hi = irf::sorted_quantile(buf.data(), nd, 0.95);
        const double mean = sum / static_cast<double>(nd);
        if (truth(j) >= lo && truth(j) <= hi) ++res.covered;
        ++res.n_coefficients;
        sq += (mean - truth(j)) * (mean - truth(j));
      }
    }
    res.coverage = static_cast<double>(res.covered) / res.n_coefficients;
    res.rmse = std::sqrt(sq / res.n_coefficients);

    const arma::uword p = static_cast<arma::uword>(spec.p_lags);
    const arma::ivec truth_states = sim.states.subvec(p, sim.states.n_elem - 1);
    arma::uword hits = 0;
    for (arma::uword t = 0; t < truth_states.n_elem; ++t) {
      const int mode = fit.mean_state(t) > 0.5 ? 1 : 0;
      if (mode == truth_states(t)) ++hits;
    }
    res.state_accuracy = static_cast<double>(hits) / truth_states.n_elem;
    double g = 0.0, pos = 0.0;
    for (const auto& d : fit.draws) {
      g += d.probit_slope;
      if (d.probit_slope > 0.0) pos += 1.0;
    }
    res.gamma_mean = g / static_cast<double>(nd);
    res.gamma_positive = pos / static_cast<double>(nd);
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  return res;
}

}  // namespace

RecoveryReport recovery_report(const DgpSpec& dgp, const ModelSpec& spec, int n_replications, int n_jobs) {
  if (n_replications <= 0) throw ValidationError("number of replications must be positive");
  if (spec.n_vars != dgp.n_vars || spec.p_lags != dgp.p_lags) {
    throw ValidationError("model spec dimensions do not match the DGP");
  }
  RecoveryReport report;
  report.replications.resize(n_replications);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < n_replications; r = next++) report.replications[r] = run_replication(dgp, spec, r);
  };
  const int jobs = std::clamp(n_jobs, 1, n_replications);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  long covered = 0, total = 0;
  int ok = 0;
  for (const auto& r : report.replications) {
    if (!r.ok) {
      ++report.failures;
      continue;
    }
    ++ok;
    covered += r.covered;
    total += r.n_coefficients;
    report.mean_rmse += r.rmse;
    report.mean_state_accuracy += r.state_accuracy;
  }
  if (ok > 0) {
    report.coverage = static_cast<double>(covered) / static_cast<double>(total);
    report.mean_rmse /= ok;
    report.mean_state_accuracy /= ok;
  }
  return report;
}

void write_recovery_csv(const std::string& path, const RecoveryReport& report) {
  auto out = open_output(path);
  CsvWriter w(out);
  w.header({"replication", "status", "coverage_90", "rmse", "state_accuracy", "gamma_mean", "gamma_positive_prob",
            "error"});
  for (const auto& r : report.replications) {
    w.cell(r.replication).cell(r.ok ? "ok" : "failed");
    if (r.ok) {
      w.cell(r.coverage).cell(r.rmse).cell(r.state_accuracy).cell(r.gamma_mean).cell(r.gamma_positive).blank();
    } else {
      w.blank().blank().blank().blank().blank().cell(r.error);
    }
    w.end_row();
  }
}

std::string recovery_summary_json(const RecoveryReport& report) {
  nlohmann::json j;
  j["replications"] = report.replications.size();
  j["failures"] = report.failures;
  j["coverage_90"] = report.coverage;
  j["mean_rmse"] = report.mean_rmse;
  j["mean_state_accuracy"] = report.mean_state_accuracy;
  return j.dump(2) + "\n";
}

TimeSeriesPanel simulate_external_panel(int n_countries, Quarter first, int n_periods, std::uint64_t seed,
                                        arma::vec* factor_out) {
  if (n_countries <= 0 || n_periods <= 0) throw ValidationError("external panel dimensions must be positive");
  Rng rng(seed);
  const Quarter crisis_start{2008, 3}, crisis_end{2009, 2};
  TimeSeriesPanel panel;
  panel.dates = quarter_range(first, n_periods);
  arma::vec f(n_periods);
  double prev = 0.0;
  for (int t = 0; t < n_periods; ++t) {
    const Quarter q = panel.dates[t];
    const double hit = (q >= crisis_start && q <= crisis_end) ? -2.5 : 0.0;
    prev = 0.7 * prev + hit + rng.normal();
    f(t) = prev;
  }
  const char* kinds[3] = {"equity", "credit", "deposits"};
  const double means[3] = {2.0, 1.5, 1.2};
  const double noise[3] = {3.0, 0.8, 0.6};
  panel.values.set_size(n_periods, 3 * n_countries);
  for (int c = 0; c < n_countries; ++c) {
    char code[16];
    std::snprintf(code, sizeof code, "C%02d", c + 1);
    for (int k = 0; k < 3; ++k) {
      panel.series_names.push_back(std::string(code) + "_" + kinds[k]);
      const double load = (k == 0 ? 2.0 : 0.5) * (0.5 + rng.uniform());
      for (int t = 0; t < n_periods; ++t) {
        panel.values(t, 3 * c + k) = means[k] + load * f(t) + noise[k] * rng.normal();
      }
    }
  }
  if (factor_out) *factor_out = f;
  return panel;
}

TimeSeriesPanel simulate_raw_country(const std::string& code, Quarter first, int n_periods, const arma::vec& factor,
                                     std::uint64_t seed) {
  if (factor.n_elem != static_cast<arma::uword>(n_periods)) throw ValidationError("factor length mismatch");
  Rng rng(seed);
  TimeSeriesPanel p;
  p.country_code = code;
  p.dates = quarter_range(first, n_periods);
  p.series_names = {"mppi", "gdp", "cpi", "credit", "stir", "equity", "reer", "nominal_gdp", "inflows", "outflows"};
  p.values.set_size(n_periods, p.series_names.size());

  double mppi = 0.0, gdp = 100.0, cpi = 100.0, credit = 100.0, equity = 100.0, reer = 100.0;
  double g = 0.6, pi = 0.5, cg = 1.5, rate = 4.0, m_prev = 0.0;
  double v_in = 0.0, v_out = 0.0, v_reer = 0.0;
  const double rate_hi = 4.0 + rng.normal(), rate_lo = 1.0 + 0.5 * rng.normal();
  for (int t = 0; t < n_periods; ++t) {
    const double f = factor(t);
    const double target = t < n_periods / 2 ? rate_hi : rate_lo;
    // High-rate regime: faster growth, credit and inflation, more volatile credit.
    const double high = rate > 2.5 ? 1.0 : 0.0;
    rate = target + 0.85 * (rate - target) + 0.35 * rng.normal();
    // Macroprudential actions: sparse tightening/easing steps.
    double dm = 0.0;
    const double u = rng.uniform();
    if (u < 0.15 + 0.1 * high) dm = 1.0;
    else if (u > 0.92) dm = -1.0;
    mppi += dm;
    g = 0.4 + 0.8 * high + 0.3 * (g - 0.4 - 0.8 * high) + 0.3 * f + 0.5 * rng.normal();
    pi = 0.4 + 0.6 * high + 0.5 * (pi - 0.4 - 0.6 * high) + 0.3 * rng.normal();
    cg = 1.0 + 1.5 * high + 0.4 * (cg - 1.0 - 1.5 * high) + 0.4 * f - (0.3 + 0.3 * high) * m_prev +
         (0.6 + 0.6 * high) * rng.normal();
    m_prev = dm;
    const double eg = 1.0 + 2.0 * high + 2.0 * f + 4.0 * rng.normal();
    v_reer = 0.9 * v_reer + 0.3 * rng.normal();
    const double rg = 0.2 * f + std::exp(0.5 * v_reer) * rng.normal();
    gdp *= std::exp(g / 100.0);
    cpi *= std::exp(pi / 100.0);
    credit *= std::exp(cg / 100.0);
    equity *= std::exp(eg / 100.0);
    reer *= std::exp(rg / 100.0);
    const double nominal = gdp * cpi / 100.0;
    v_in = 0.9 * v_in + 0.3 * rng.normal() - 0.2 * f * (f < -1.0 ? 1.0 : 0.0);
    v_out = 0.9 * v_out + 0.3 * rng.normal();
    const double in_ratio = 3.0 + 0.6 * f - 0.3 * m_prev + std::exp(0.5 * v_in) * rng.normal();
    const double out_ratio = 2.5 + 0.4 * f + std::exp(0.5 * v_out) * rng.normal();
    const double row[] = {mppi, gdp, cpi, credit, rate, equity, reer, nominal,
                          nominal * in_ratio / 100.0, nominal * out_ratio / 100.0};
    for (std::size_t j = 0; j < p.series_names.size(); ++j) p.values(t, j) = row[j];
  }
  return p;
}

}  // namespace msfavar::sim
