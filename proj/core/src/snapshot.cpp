#include "ofter/snapshot.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ofter/error.hpp"

namespace ofter::snapshot {

namespace {

constexpr std::string_view kModule = "snapshot";

using nlohmann::json;
using Index = Eigen::Index;

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
}

json mat(const Eigen::MatrixXd& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  std::vector<double> data(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(), m.rows(), m.cols()) = m;
  out["data"] = std::move(data);
  return out;
}

Eigen::MatrixXd mat(const json& j) {
  const Index rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != rows * cols) throw Error(kModule, "matrix payload has the wrong size");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(), rows, cols);
}

json config_json(const pipeline::OfterConfig& c) {
  return json{{"use_dr", c.use_dr},
              {"use_ft", c.use_ft},
              {"delta", c.delta},
              {"l0_fraction", c.l0_fraction},
              {"lookback", c.lookback},
              {"c_min", c.c_min},
              {"c_original", c.c_original},
              {"s_set", c.s_set},
              {"k_set", c.k_set},
              {"p_adf", c.p_adf},
              {"loss", select::to_string(c.loss_kind)},
              {"combine", c.combine == select::CombineMode::WinnerTakeAll ? "winner" : "weighted"},
              {"ols_refit_period", c.ols_refit_period},
              {"bernstein_k", c.bernstein_k},
              {"max_lag", c.max_lag},
              {"seed", c.seed},
              {"embedding_update", pipeline::to_string(c.embedding_update)},
              {"embedding_refit_period", c.embedding_refit_period},
              {"embedding_guard", c.embedding_guard},
              {"refit_scale", c.refit_scale},
              {"arima_max_p", c.arima_max_p},
              {"arima_max_q", c.arima_max_q},
              {"arima_acf_lags", c.arima_acf_lags},
              {"arima_significance", c.arima_significance},
              {"prune_eps", c.prune_eps},
              {"warm_start", c.warm_start}};
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

pipeline::OfterConfig config_parse(const json& j, pipeline::OfterConfig c) {
  if (!j.is_object()) throw Error(kModule, "config must be a JSON object");
  const json known = config_json(c);
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw Error(kModule, "unknown config key '" + key + "'");
  read(j, "use_dr", c.use_dr);
  read(j, "use_ft", c.use_ft);
  read(j, "delta", c.delta);
  read(j, "l0_fraction", c.l0_fraction);
  read(j, "lookback", c.lookback);
  read(j, "c_min", c.c_min);
  read(j, "c_original", c.c_original);
  read(j, "s_set", c.s_set);
  read(j, "k_set", c.k_set);
  read(j, "p_adf", c.p_adf);
  if (j.contains("loss")) c.loss_kind = select::parse_loss(j.at("loss").get<std::string>());
  if (j.contains("combine")) {
    const auto mode = j.at("combine").get<std::string>();
    if (mode == "winner") c.combine = select::CombineMode::WinnerTakeAll;
    else if (mode == "weighted") c.combine = select::CombineMode::LossWeighted;
    else throw Error(kModule, "unknown combine mode '" + mode + "' (expected winner or weighted)");
  }
  read(j, "ols_refit_period", c.ols_refit_period);
  read(j, "bernstein_k", c.bernstein_k);
  read(j, "max_lag", c.max_lag);
  read(j, "seed", c.seed);
  if (j.contains("embedding_update"))
    c.embedding_update = pipeline::parse_embedding_update(j.at("embedding_update").get<std::string>());
  read(j, "embedding_refit_period", c.embedding_refit_period);
  read(j, "embedding_guard", c.embedding_guard);
  read(j, "refit_scale", c.refit_scale);
  read(j, "arima_max_p", c.arima_max_p);
  read(j, "arima_max_q", c.arima_max_q);
  read(j, "arima_acf_lags", c.arima_acf_lags);
  read(j, "arima_significance", c.arima_significance);
  read(j, "prune_eps", c.prune_eps);
  read(j, "warm_start", c.warm_start);
  return c;
}

json embedding_json(const embed::EmbeddingState& e) {
  return json{{"values", vec(e.spectrum.values)},
              {"vectors", mat(e.spectrum.vectors)},
              {"mean", vec(e.mean)},
              {"scale", vec(e.scale)},
              {"p", e.p},
              {"t", e.t},
              {"delta", e.delta},
              {"tail", vec(e.tail)},
              {"trace", e.trace}};
}

embed::EmbeddingState embedding_parse(const json& j) {
  embed::EmbeddingState e;
  e.spectrum.values = vec(j.at("values"));
  e.spectrum.vectors = mat(j.at("vectors"));
  e.mean = vec(j.at("mean"));
  e.scale = vec(j.at("scale"));
  e.p = j.at("p").get<Index>();
  e.t = j.at("t").get<double>();
  e.delta = j.at("delta").get<double>();
  e.tail = vec(j.at("tail"));
  e.trace = j.at("trace").get<double>();
  if (e.spectrum.vectors.rows() != e.mean.size() || e.spectrum.vectors.cols() != e.spectrum.values.size() ||
      e.p > e.spectrum.values.size())
    throw Error(kModule, "embedding snapshot has inconsistent shapes");
  return e;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(kModule, std::string("malformed JSON: ") + e.what());
  }
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(kModule, std::string("malformed snapshot: ") + e.what());
  }
}

}  // namespace

std::string config_to_json(const pipeline::OfterConfig& config) { return config_json(config).dump(2); }

pipeline::OfterConfig config_from_json(const std::string& text, pipeline::OfterConfig base) {
  const json j = parse_text(text);
  return guarded([&] { return config_parse(j, std::move(base)); });
}

std::string embedding_to_json(const embed::EmbeddingState& state) {
  json j = embedding_json(state);
  j["schema_version"] = kSchemaVersion;
  return j.dump();
}

embed::EmbeddingState embedding_from_json(const std::string& text) {
  const json j = parse_text(text);
  return guarded([&] { return embedding_parse(j); });
}

std::string state_to_json(const pipeline::PipelineState& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_json(s.config);
  j["l0"] = s.l0;
  j["t"] = s.t;
  const auto& a = s.arima;
  j["arima"] = json{{"p", a.spec.p},
                    {"r", a.spec.r},
                    {"q", a.spec.q},
                    {"ar", vec(a.spec.ar_coeffs)},
                    {"ma", vec(a.spec.ma_coeffs)},
                    {"intercept", a.spec.intercept},
                    {"aic", a.spec.aic},
                    {"y_ts", vec(a.decomposition.y_ts)},
                    {"residual", vec(a.decomposition.residual)},
                    {"stationary", a.stationary}};
  j["y"] = vec(s.y);
  j["target"] = vec(s.target);
  j["input_columns"] = s.input_columns;
  j["active"] = s.active;
  j["standardization"] = json{{"mean", vec(s.standardization.mean)}, {"scale", vec(s.standardization.scale)}};
  j["embedding"] = s.embedding ? embedding_json(*s.embedding) : json(nullptr);
  j["augmented"] = s.augmented;
  j["scores"] = vec(s.scores);
  j["weights"] = json{{"v", vec(s.weights.v)}, {"degenerate", s.weights.degenerate}};
  j["ledger"] = json{{"losses", vec(s.ledger.losses)}, {"updates", s.ledger.updates}};
  j["ols"] = json{{"beta0", s.ols.beta0}, {"beta", vec(s.ols.beta)}};
  j["history"] = mat(s.history);
  return j.dump();
}

pipeline::PipelineState state_from_json(const std::string& text) {
  const json j = parse_text(text);
  return guarded([&] {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion)
      throw Error(kModule, "unsupported schema_version " + std::to_string(version) + " (expected " +
                               std::to_string(kSchemaVersion) + ")");
    pipeline::PipelineState s;
    s.config = config_parse(j.at("config"), {});
    s.l0 = j.at("l0").get<Index>();
    s.t = j.at("t").get<Index>();
    const auto& a = j.at("arima");
    s.arima.spec.p = a.at("p").get<int>();
    s.arima.spec.r = a.at("r").get<int>();
    s.arima.spec.q = a.at("q").get<int>();
    s.arima.spec.ar_coeffs = vec(a.at("ar"));
    s.arima.spec.ma_coeffs = vec(a.at("ma"));
    s.arima.spec.intercept = a.at("intercept").get<double>();
    s.arima.spec.aic = a.at("aic").get<double>();
    s.arima.decomposition.y_ts = vec(a.at("y_ts"));
    s.arima.decomposition.residual = vec(a.at("residual"));
    s.arima.stationary = a.at("stationary").get<bool>();
    s.y = vec(j.at("y"));
    s.target = vec(j.at("target"));
    s.input_columns = j.at("input_columns").get<std::vector<std::string>>();
    s.active = j.at("active").get<std::vector<bool>>();
    s.standardization.mean = vec(j.at("standardization").at("mean"));
    s.standardization.scale = vec(j.at("standardization").at("scale"));
    s.standardization.active.assign(static_cast<std::size_t>(s.standardization.mean.size()), true);
    if (!j.at("embedding").is_null()) s.embedding = embedding_parse(j.at("embedding"));
    s.augmented = j.at("augmented").get<std::vector<Index>>();
    s.scores = vec(j.at("scores"));
    s.weights.v = vec(j.at("weights").at("v"));
    s.weights.degenerate = j.at("weights").at("degenerate").get<bool>();
    s.ledger = select::ModelLedger::create(s.config.s_set, s.config.k_set, s.config.loss_kind);
    const Eigen::VectorXd losses = vec(j.at("ledger").at("losses"));
    if (losses.size() != s.ledger.size()) throw Error(kModule, "ledger size does not match the candidate grids");
    s.ledger.losses = losses;
    s.ledger.updates = j.at("ledger").at("updates").get<Index>();
    s.ols.beta0 = j.at("ols").at("beta0").get<double>();
    s.ols.beta = vec(j.at("ols").at("beta"));
    s.history = mat(j.at("history"));
    if (s.weights.v.size() != s.history.cols() || s.y.size() != s.history.rows() || s.target.size() != s.y.size())
      throw Error(kModule, "snapshot has inconsistent shapes");
    return s;
  });
}

void save(const pipeline::PipelineState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(kModule, "cannot write '" + path + "'");
  out << state_to_json(state);
  if (!out) throw Error(kModule, "write to '" + path + "' failed");
}

pipeline::PipelineState load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(kModule, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return state_from_json(buffer.str());
}

}  // namespace ofter::snapshot
