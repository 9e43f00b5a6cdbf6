#include "msfavar/draw_store.hpp"

#include "msfavar/config.hpp"
#include "msfavar/panel_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace msfavar {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'F', 'V', 'D', 'R', 'W', '1'};

static_assert(std::endian::native == std::endian::little, "draw store assumes a little-endian host");

struct Field {
  const char* name;
  std::size_t count;
};

std::vector<Field> layout(const DrawStoreMeta& m) {
  const std::size_t k = static_cast<std::size_t>(m.n_vars);
  const std::size_t nc = k * (k * m.p_lags + 1);
  const std::size_t r = static_cast<std::size_t>(m.n_regimes);
  return {
      {"beta", r * nc},
      {"beta_pool_mean", nc},
      {"xi", nc},
      {"omega", r * k * k},
      {"psi_matrix", k * k},
      {"loadings", r * static_cast<std::size_t>(m.n_external) * m.q_factors},
      {"meas_error_vars", static_cast<std::size_t>(m.n_external)},
      {"states", static_cast<std::size_t>(m.n_periods)},
      {"probit_intercepts", 2},
      {"probit_slope", 1},
  };
}

std::size_t record_size(const DrawStoreMeta& m) {
  std::size_t n = 0;
  for (const auto& f : layout(m)) n += f.count;
  return n;
}

void append(std::vector<double>& rec, const arma::mat& m) { rec.insert(rec.end(), m.begin(), m.end()); }

}  // namespace

DrawStoreMeta make_store_meta(const ModelSpec& spec, const std::vector<PosteriorDraw>& draws,
                              const std::string& first_date) {
  DrawStoreMeta m;
  m.spec_text = model_spec_to_config_text(spec);
  m.spec_hash = model_spec_hash(spec);
  m.seed = spec.seed;
  m.n_regimes = spec.n_regimes();
  m.n_vars = spec.n_vars;
  m.p_lags = spec.p_lags;
  m.q_factors = spec.q_factors;
  if (!draws.empty()) {
    m.n_periods = static_cast<int>(draws.front().states.n_elem);
    m.n_external = draws.front().loadings.empty() ? 0 : static_cast<int>(draws.front().loadings.front().n_rows);
  }
  m.first_date = first_date;
  return m;
}

void write_draw_store(const std::string& dir, const DrawStore& store) {
  const DrawStoreMeta& m = store.meta;
  std::filesystem::create_directories(dir);
  const std::size_t rec_len = record_size(m);
  std::ofstream bin(std::filesystem::path(dir) / "draws.bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw IoError("cannot write draw store in '" + dir + "'");
  bin.write(kMagic, sizeof kMagic);
  std::vector<double> rec;
  rec.reserve(rec_len);
  for (const PosteriorDraw& d : store.draws) {
    rec.clear();
    if (d.n_regimes() != m.n_regimes) throw ValidationError("draw regime count differs from the store");
    for (const auto& b : d.beta) append(rec, b);
    append(rec, d.beta_pool_mean);
    append(rec, d.xi);
    for (const auto& o : d.omega) append(rec, o);
    append(rec, d.psi_matrix);
    if (m.n_external > 0)
      for (const auto& l : d.loadings) append(rec, l);
    if (m.n_external > 0) append(rec, d.meas_error_vars);
    for (arma::uword t = 0; t < d.states.n_elem; ++t) rec.push_back(static_cast<double>(d.states(t)));
    append(rec, d.probit_intercepts);
    rec.push_back(d.probit_slope);
    if (rec.size() != rec_len) throw ValidationError("draw does not match the store layout");
    bin.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size() * sizeof(double)));
  }
  if (!bin) throw IoError("failed writing draws.bin");

  nlohmann::json j;
  j["format"] = "msfavar-draws";
  j["version"] = 1;
  j["spec_hash"] = m.spec_hash;
  j["spec"] = m.spec_text;
  j["seed"] = m.seed;
  j["n_draws"] = store.draws.size();
  j["n_regimes"] = m.n_regimes;
  j["n_vars"] = m.n_vars;
  j["p_lags"] = m.p_lags;
  j["n_periods"] = m.n_periods;
  j["n_external"] = m.n_external;
  j["q_factors"] = m.q_factors;
  j["first_date"] = m.first_date;
  j["record_doubles"] = rec_len;
  j["byte_order"] = "little";
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& f : layout(m)) fields.push_back({{"name", f.name}, {"count", f.count}});
  j["fields"] = fields;
  write_file((std::filesystem::path(dir) / "draws.json").string(), j.dump(2) + "\n");
}

DrawStore read_draw_store(const std::string& dir) {
  const auto manifest_path = (std::filesystem::path(dir) / "draws.json").string();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, manifest_path + ": " + e.what());
  }
  DrawStore store;
  DrawStoreMeta& m = store.meta;
  try {
    if (j.at("format") != "msfavar-draws") throw ValidationError("not a draw store manifest: " + manifest_path);
    m.spec_hash = j.at("spec_hash").get<std::string>();
    m.spec_text = j.at("spec").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_regimes = j.at("n_regimes").get<int>();
    m.n_vars = j.at("n_vars").get<int>();
    m.p_lags = j.at("p_lags").get<int>();
    m.n_periods = j.at("n_periods").get<int>();
    m.n_external = j.at("n_external").get<int>();
    m.q_factors = j.at("q_factors").get<int>();
    m.first_date = j.at("first_date").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(manifest_path + ": " + e.what());
  }
  const std::size_t n_draws = j.at("n_draws").get<std::size_t>();
  const std::size_t rec_len = record_size(m);
  if (j.at("record_doubles").get<std::size_t>() != rec_len) throw ValidationError("draw store layout mismatch");

  const std::string raw = read_file((std::filesystem::path(dir) / "draws.bin").string());
  if (raw.size() != sizeof kMagic + n_draws * rec_len * sizeof(double) ||
      std::memcmp(raw.data(), kMagic, sizeof kMagic) != 0) {
    throw ValidationError("draws.bin does not match its manifest");
  }
  const std::size_t k = static_cast<std::size_t>(m.n_vars);
  const std::size_t nc = k * (k * m.p_lags + 1);
  std::vector<double> rec(rec_len);
  store.draws.reserve(n_draws);
  for (std::size_t d = 0; d < n_draws; ++d) {
    std::memcpy(rec.data(), raw.data() + sizeof kMagic + d * rec_len * sizeof(double), rec_len * sizeof(double));
    const double* p = rec.data();
    auto take = [&](std::size_t rows, std::size_t cols) {
      arma::mat out(p, rows, cols);
      p += rows * cols;
      return out;
    };
    PosteriorDraw dr;
    for (int r = 0; r < m.n_regimes; ++r) dr.beta.push_back(arma::vec(take(nc, 1)));
    dr.beta_pool_mean = arma::vec(take(nc, 1));
    dr.xi = arma::vec(take(nc, 1));
    for (int r = 0; r < m.n_regimes; ++r) dr.omega.push_back(take(k, k));
    dr.psi_matrix = take(k, k);
    if (m.n_external > 0) {
      for (int r = 0; r < m.n_regimes; ++r) dr.loadings.push_back(take(m.n_external, m.q_factors));
      dr.meas_error_vars = arma::vec(take(m.n_external, 1));
    }
    dr.states.set_size(m.n_periods);
    for (int t = 0; t < m.n_periods; ++t) dr.states(t) = static_cast<arma::sword>(*p++);
    dr.probit_intercepts = arma::vec(take(2, 1));
    dr.probit_slope = *p++;
    store.draws.push_back(std::move(dr));
  }
  return store;
}

}  // namespace msfavar
