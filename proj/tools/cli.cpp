#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <optional>
#include <sstream>

#include "ofter/analyze.hpp"
#include "ofter/datagen.hpp"
#include "ofter/error.hpp"
#include "ofter/frame.hpp"
#include "ofter/metrics.hpp"
#include "ofter/pipeline.hpp"
#include "ofter/snapshot.hpp"

namespace ofter::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Index = Eigen::Index;

// Failures caused by the invocation rather than the library.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct DatagenArgs {
  std::string model;
  Index t_len = 3000;
  std::optional<double> sigma;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_datagen(const DatagenArgs& a, std::ostream& out) {
  datagen::SyntheticSpec spec;
  try {
    spec.model = datagen::parse_model(a.model);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  spec.t_len = a.t_len;
  if (spec.model == datagen::Model::Toy && !a.sigma) throw UsageError("--sigma is required for the toy model");
  spec.sigma = a.sigma.value_or(0.0);
  spec.noise_scale = a.noise_scale;
  spec.seed = a.seed;
  frame::write_csv(datagen::generate(spec), a.out);
  out << "wrote " << a.t_len << " rows to " << a.out << '\n';
  return 0;
}

struct RunArgs {
  std::string input;
  std::vector<std::string> targets;
  std::string config_path;
  std::string out_dir = "ofter_out";
  std::optional<std::string> variant, loss, combine, embedding_update;
  std::optional<double> delta, l0_fraction, c_min, c_original, p_adf;
  std::optional<Index> lookback, embedding_guard;
  std::optional<int> max_lag, bernstein_k, ols_refit_period;
  std::optional<std::uint64_t> seed;
  bool record_candidates = false;
};

pipeline::OfterConfig resolve_config(const RunArgs& a) {
  pipeline::OfterConfig c;
  if (!a.config_path.empty()) c = snapshot::config_from_json(read_file(a.config_path));
  if (a.variant) pipeline::apply_variant(c, *a.variant);
  if (a.loss) c.loss_kind = select::parse_loss(*a.loss);
  if (a.combine) {
    if (*a.combine == "winner") c.combine = select::CombineMode::WinnerTakeAll;
    else if (*a.combine == "weighted") c.combine = select::CombineMode::LossWeighted;
    else throw UsageError("unknown combine mode '" + *a.combine + "' (expected winner or weighted)");
  }
  if (a.embedding_update) c.embedding_update = pipeline::parse_embedding_update(*a.embedding_update);
  if (a.delta) c.delta = *a.delta;
  if (a.l0_fraction) c.l0_fraction = *a.l0_fraction;
  if (a.c_min) c.c_min = *a.c_min;
  if (a.c_original) c.c_original = *a.c_original;
  if (a.p_adf) c.p_adf = *a.p_adf;
  if (a.lookback) c.lookback = *a.lookback;
  if (a.embedding_guard) c.embedding_guard = *a.embedding_guard;
  if (a.max_lag) c.max_lag = *a.max_lag;
  if (a.bernstein_k) c.bernstein_k = *a.bernstein_k;
  if (a.ols_refit_period) c.ols_refit_period = *a.ols_refit_period;
  if (a.seed) c.seed = *a.seed;
  c.validate();
  return c;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(1, sep) : "") + items[i];
  return out;
}

void write_forecasts(const fs::path& path, const std::vector<pipeline::ForecastRecord>& records,
                     const std::vector<std::string>& index) {
  auto out = open_out(path);
  out << "t,index,y_hat,y_hat_residual,y_ts,y_true,winners,diagnostic\n";
  for (const auto& r : records) {
    std::string diag = r.diagnostic;
    std::replace(diag.begin(), diag.end(), ',', ';');
    out << r.t << ',' << index[static_cast<std::size_t>(r.t)] << ',' << r.y_hat << ',' << r.y_hat_residual << ','
        << r.y_ts << ',' << r.y_true << ',' << join(r.winners, '|') << ',' << diag << '\n';
  }
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  if (!fs::exists(a.input)) throw UsageError("input file '" + a.input + "' does not exist");
  const auto config = resolve_config(a);
  const auto panel = frame::load_csv(a.input, true);
  std::vector<std::string> targets;
  for (const auto& t : a.targets)
    for (auto& name : split_list(t)) targets.push_back(name);
  if (targets.size() == 1 && targets.front() == "all") targets = panel.columns;
  if (targets.empty()) throw UsageError("no target column given");
  for (const auto& t : targets)
    if (!panel.find_column(t)) throw UsageError("target column '" + t + "' not found in '" + a.input + "'");

  fs::create_directories(a.out_dir);
  json summary;
  summary["schema_version"] = snapshot::kSchemaVersion;
  summary["command"] = "run";
  summary["input"] = a.input;
  summary["variant"] = pipeline::variant_name(config);
  summary["config"] = json::parse(snapshot::config_to_json(config));
  summary["targets"] = json::object();

  std::vector<std::vector<pipeline::ForecastRecord>> all_records;
  std::vector<std::string> index;
  for (const auto& target : targets) {
    const auto aligned = pipeline::align_one_step(panel, target, config.max_lag);
    pipeline::RunOptions options;
    options.record_candidates = a.record_candidates;
    auto state = pipeline::initialize(aligned.X, aligned.y, config, aligned.columns);
    auto records = pipeline::advance(state, aligned.X, options);

    write_forecasts(fs::path(a.out_dir) / ("forecasts_" + target + ".csv"), records, aligned.index);
    snapshot::save(state, (fs::path(a.out_dir) / ("snapshot_" + target + ".json")).string());

    Eigen::VectorXd y_hat(static_cast<Index>(records.size())), y_true(y_hat.size());
    std::size_t failed = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      y_hat(static_cast<Index>(i)) = records[i].y_hat;
      y_true(static_cast<Index>(i)) = records[i].y_true;
      if (!records[i].diagnostic.empty()) ++failed;
    }
    json t;
    t["forecasts"] = records.size();
    t["failed_steps"] = failed;
    t["l0"] = state.l0;
    t["arima"] = {{"p", state.arima.spec.p}, {"r", state.arima.spec.r}, {"q", state.arima.spec.q},
                  {"stationary", state.arima.stationary}};
    t["embedding_dim"] = state.embedding ? state.embedding->p : 0;
    t["features"] = state.feature_labels();
    t["weights"] = std::vector<double>(state.weights.v.data(), state.weights.v.data() + state.weights.v.size());
    try {
      const auto q = metrics::forecast_quality(y_hat, y_true);
      t["correlation"] = nullable(q.pearson);
      t["mse"] = q.mse;
      t["mae"] = q.mae;
    } catch (const Error& e) {
      t["correlation"] = nullptr;
      t["mse"] = (y_hat - y_true).array().square().mean();
      t["mae"] = (y_hat - y_true).array().abs().mean();
      t["quality_note"] = e.what();
    }
    summary["targets"][target] = t;
    out << target << ": " << records.size() << " forecasts";
    if (!t["correlation"].is_null()) out << ", correlation " << t["correlation"].get<double>();
    out << '\n';
    if (index.empty()) index = aligned.index;
    all_records.push_back(std::move(records));
  }

  if (config.loss_kind == select::LossKind::NegPnl) {
    const Index days = static_cast<Index>(all_records.front().size());
    const Index names = static_cast<Index>(all_records.size());
    Eigen::MatrixXd signals(days, names), returns(days, names);
    for (Index j = 0; j < names; ++j)
      for (Index d = 0; d < days; ++d) {
        signals(d, j) = all_records[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)].y_hat;
        returns(d, j) = all_records[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)].y_true;
      }
    json strategies = json::array();
    Eigen::MatrixXd pnl(days, 5);
    for (int q = 1; q <= 5; ++q) {
      const auto s = metrics::evaluate_strategy(signals, returns, q);
      pnl.col(q - 1) = s.pnl;
      strategies.push_back({{"quantile", "Q" + std::to_string(q)},
                            {"sr", s.sr},
                            {"ppd", s.ppd},
                            {"p_value", s.p_value},
                            {"p_value_method", "probabilistic Sharpe ratio (skewness and kurtosis adjusted approximation)"},
                            {"days", days},
                            {"empty_days", s.empty_days.size()}});
    }
    summary["strategies"] = strategies;
    auto csv = open_out(fs::path(a.out_dir) / "strategy_pnl.csv");
    csv << "t,index,Q1,Q2,Q3,Q4,Q5\n";
    for (Index d = 0; d < days; ++d) {
      const Index t = all_records.front()[static_cast<std::size_t>(d)].t;
      csv << t << ',' << index[static_cast<std::size_t>(t)];
      for (int q = 0; q < 5; ++q) csv << ',' << pnl(d, q);
      csv << '\n';
    }
  }

  auto js = open_out(fs::path(a.out_dir) / "summary.json");
  js << summary.dump(2) << '\n';
  return 0;
}

struct ReportArgs {
  std::string kind;
  std::string snapshot;
  std::string target;
  std::string out;
  Index lookback = 600;
  double kappa = 5.0;
  bool mean_distance = false;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  fs::path path = a.snapshot;
  if (fs::is_directory(path)) {
    if (a.target.empty()) throw UsageError("a run directory needs --target to pick a snapshot");
    path /= "snapshot_" + a.target + ".json";
  }
  if (!fs::exists(path)) throw UsageError("snapshot '" + path.string() + "' does not exist");
  const auto state = snapshot::load(path.string());
  std::ostringstream buffer;
  buffer << std::setprecision(std::numeric_limits<double>::max_digits10);
  if (a.kind == "importance") {
    const auto report = analyze::feature_importance(state);
    buffer << "feature,importance\n";
    for (Index j = 0; j < report.importance.size(); ++j)
      buffer << report.labels[static_cast<std::size_t>(j)] << ',' << report.importance(j) << '\n';
  } else {
    analyze::OutlierOptions options;
    options.lookback = a.lookback;
    options.kappa = a.kappa;
    options.mean_distance = a.mean_distance;
    const auto report = analyze::detect_outliers(state.history.topRows(state.t), state.weights, options);
    buffer << "t,d_min,flag\n";
    for (Index t = 0; t < report.d_min.size(); ++t) {
      buffer << t << ',';
      if (std::isfinite(report.d_min(t))) buffer << report.d_min(t);
      buffer << ',' << (report.flags[static_cast<std::size_t>(t)] ? 1 : 0) << '\n';
    }
  }
  if (a.out.empty() || a.out == "-") {
    out << buffer.str();
  } else {
    auto file = open_out(a.out);
    file << buffer.str();
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online forecasting of multivariate time series with embedding-based nearest neighbours", "ofter"};
  app.require_subcommand(1);

  DatagenArgs dg;
  auto* datagen_cmd = app.add_subcommand("datagen", "Generate a synthetic panel (m1, m2, m3, toy)");
  datagen_cmd->add_option("--model", dg.model, "m1 | m2 | m3 | toy")->required();
  datagen_cmd->add_option("--T,-T", dg.t_len, "Number of rows")->check(CLI::Range(Index{10}, std::numeric_limits<Index>::max()));
  datagen_cmd->add_option("--sigma", dg.sigma, "Noise sd of the toy model (required for toy)");
  datagen_cmd->add_option("--noise-scale", dg.noise_scale, "Multiplier on the unit innovations of m1-m3");
  datagen_cmd->add_option("--seed", dg.seed, "RNG seed");
  datagen_cmd->add_option("--out", dg.out, "Output CSV")->required();

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run the online forecaster on a CSV panel");
  run_cmd->add_option("--input", ra.input, "Input CSV with a header row")->required();
  run_cmd->add_option("--target", ra.targets, "Target column(s); comma separated, repeatable, or 'all'")->required();
  run_cmd->add_option("--config", ra.config_path, "JSON file with configuration keys");
  run_cmd->add_option("--out", ra.out_dir, "Output directory");
  run_cmd->add_option("--variant", ra.variant, "plain | dr | ft | dr-ft");
  run_cmd->add_option("--loss", ra.loss, "mse | mae | neg-pnl");
  run_cmd->add_option("--combine", ra.combine, "winner | weighted");
  run_cmd->add_option("--embedding-update", ra.embedding_update, "online | refit | frozen");
  run_cmd->add_option("--delta", ra.delta, "Variance fraction retained by the embedding");
  run_cmd->add_option("--l0-fraction", ra.l0_fraction, "Training fraction of the series");
  run_cmd->add_option("--lookback", ra.lookback, "Neighbour window length");
  run_cmd->add_option("--c-min", ra.c_min, "Weight threshold");
  run_cmd->add_option("--c-original", ra.c_original, "Augmentation threshold");
  run_cmd->add_option("--p-adf", ra.p_adf, "ADF significance");
  run_cmd->add_option("--embedding-guard", ra.embedding_guard, "Extra tracked directions (negative tracks all)");
  run_cmd->add_option("--max-lag", ra.max_lag, "Lagged copies of every column");
  run_cmd->add_option("--bernstein-k", ra.bernstein_k, "Number of Bernstein basis functions");
  run_cmd->add_option("--ols-refit-period", ra.ols_refit_period, "Steps between OLS refits");
  run_cmd->add_option("--seed", ra.seed, "Recorded seed");
  run_cmd->add_flag("--candidates", ra.record_candidates, "Keep per-candidate forecasts in memory");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Feature importance or outlier report from a saved run");
  report_cmd->add_option("kind", rp.kind, "importance | outliers")->required()->check(CLI::IsMember({"importance", "outliers"}));
  report_cmd->add_option("--snapshot", rp.snapshot, "Snapshot JSON or run directory")->required();
  report_cmd->add_option("--target", rp.target, "Target whose snapshot to read from a run directory");
  report_cmd->add_option("--out", rp.out, "Output CSV (stdout when omitted)");
  report_cmd->add_option("--lookback", rp.lookback, "Outlier window L");
  report_cmd->add_option("--kappa", rp.kappa, "Outlier IQR multiplier");
  report_cmd->add_flag("--mean-distance", rp.mean_distance, "Use the mean instead of the minimum distance");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ofter: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*datagen_cmd) return cmd_datagen(dg, out);
    if (*run_cmd) return cmd_run(ra, out);
    if (*report_cmd) return cmd_report(rp, out);
  } catch (const UsageError& e) {
    err << "ofter: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "ofter: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "ofter: internal error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, out, err);
}

}  // namespace ofter::cli
