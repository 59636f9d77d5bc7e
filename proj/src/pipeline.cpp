#include "slsoh/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "slsoh/error.hpp"
#include "slsoh/features.hpp"
#include "slsoh/metrics.hpp"
#include "slsoh/model_io.hpp"
#include "slsoh/selection.hpp"
#include "text_util.hpp"

namespace slsoh {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Config reading with unknown-key detection.

class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError("config: '" + path_ + "' must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <typename T>
  void get(const char* key, T& dst) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<long long>() >= 0))
          throw SchemaError("");
      } else if constexpr (std::is_same_v<T, int>) {
        if (!it->is_number_integer()) throw SchemaError("");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw SchemaError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw SchemaError("");
      }
      dst = it->template get<T>();
    } catch (const std::exception&) {
      throw SchemaError("config: '" + path_ + "." + key + "' has the wrong type");
    }
  }

  Section sub(const char* key) {
    seen_.insert(key);
    static const Json empty = Json::object();
    const auto it = j_.find(key);
    return Section(it == j_.end() ? empty : *it, path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k))
        throw SchemaError("config: unknown key '" + (path_.empty() ? k : path_ + "." + k) + "'");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Files.

fs::path out_path(const PipelineConfig& cfg, const std::string& rel) {
  return fs::path(cfg.out_dir) / rel;
}

void write_text(const PipelineConfig& cfg, const std::string& rel, const std::string& text,
                CommandResult& result) {
  const fs::path p = out_path(cfg, rel);
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + p.string() + "'");
  result.written.push_back(rel);
}

std::string read_text(const fs::path& p, const std::string& hint) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingInput("missing input '" + p.string() + "'" + (hint.empty() ? "" : "; " + hint));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<LabeledSnapshot> load_snapshots(const PipelineConfig& cfg) {
  std::istringstream in(read_text(out_path(cfg, "snapshots.csv"), "run 'extract' first"));
  auto snaps = read_snapshots_csv(in);
  if (snaps.empty()) throw DataError("snapshots.csv holds no rows");
  return snaps;
}

EnrModel load_pipeline_model(const PipelineConfig& cfg) {
  return load_model(read_text(out_path(cfg, "model.json"), "run 'train' first"));
}

std::vector<std::string> cells_of(std::span<const LabeledSnapshot> snaps) {
  std::vector<std::string> cells;
  for (const auto& s : snaps) cells.push_back(s.cell_id);
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

std::vector<LabeledSnapshot> filter_cells(std::span<const LabeledSnapshot> snaps,
                                          const std::vector<std::string>& cells) {
  std::vector<LabeledSnapshot> out;
  for (const auto& s : snaps)
    if (std::find(cells.begin(), cells.end(), s.cell_id) != cells.end()) out.push_back(s);
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

constexpr std::string_view kTruthHeader =
    "cycle_position,time_s,temperature_c,throughput_ah,true_capacity_ah";
constexpr std::string_view kPcepeHeader = "cell_id,cycle_index,split,label_ah,estimate_ah,pcepe_pct";

}  // namespace

// ---------------------------------------------------------------------------
// Config.

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("config: invalid JSON: ") + e.what());
  }
  PipelineConfig c;
  Section root(j, "");
  root.get("seed", c.seed);
  root.get("out", c.out_dir);
  {
    Section s = root.sub("split");
    s.get("train_cells", c.train_cells);
    s.get("test_cells", c.test_cells);
    s.finish();
  }
  {
    Section s = root.sub("simulate");
    s.get("months", c.schedule.months);
    s.get("cycles_per_month", c.schedule.cycles_per_month);
    s.get("rpt_every_n_cycles", c.schedule.rpt_every_n_cycles);
    s.get("aging_dt_s", c.schedule.aging_dt_s);
    s.get("c20_dt_s", c.schedule.c20.dt_s);
    s.get("hppc_dt_s", c.schedule.hppc.dt_s);
    s.get("fade_per_ah", c.fade_per_ah);
    Section t = s.sub("season");
    t.get("mean_c", c.season.mean_c);
    t.get("amplitude_c", c.season.amplitude_c);
    t.get("period_days", c.season.period_days);
    t.get("phase_days", c.season.phase_days);
    t.get("jitter_c", c.season.daily_jitter_c);
    t.finish();
    s.finish();
  }
  {
    Section s = root.sub("extract");
    s.get("test_gap_s", c.test_gap_s);
    s.get("min_current_step_a", c.min_current_step_a);
    s.finish();
  }
  {
    Section s = root.sub("rank");
    s.get("bins", c.mi_bins);
    s.get("top_k", c.top_k);
    s.finish();
  }
  {
    Section s = root.sub("train");
    s.get("lambdas", c.grid.lambdas);
    s.get("alphas", c.grid.alphas);
    s.get("folds", c.folds);
    s.get("tol", c.tol);
    s.get("max_iter", c.max_iter);
    s.finish();
  }
  {
    Section s = root.sub("adaptive");
    s.get("clusters", c.adaptive.clusters);
    s.get("beta", c.adaptive.beta);
    s.get("delta_max_ah", c.adaptive.delta_max_ah);
    s.get("restarts", c.adaptive.restarts);
    s.get("extra_cluster_features", c.adaptive.extra_cluster_features);
    s.finish();
  }
  root.finish();
  c.adaptive.seed = c.seed;
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  return from_json(read_text(path, ""));
}

std::string PipelineConfig::to_json() const {
  Json j;
  j["seed"] = seed;
  j["out"] = out_dir;
  j["split"] = {{"train_cells", train_cells}, {"test_cells", test_cells}};
  j["simulate"] = {{"months", schedule.months},
                   {"cycles_per_month", schedule.cycles_per_month},
                   {"rpt_every_n_cycles", schedule.rpt_every_n_cycles},
                   {"aging_dt_s", schedule.aging_dt_s},
                   {"c20_dt_s", schedule.c20.dt_s},
                   {"hppc_dt_s", schedule.hppc.dt_s},
                   {"fade_per_ah", fade_per_ah},
                   {"season",
                    {{"mean_c", season.mean_c},
                     {"amplitude_c", season.amplitude_c},
                     {"period_days", season.period_days},
                     {"phase_days", season.phase_days},
                     {"jitter_c", season.daily_jitter_c}}}};
  j["extract"] = {{"test_gap_s", test_gap_s}, {"min_current_step_a", min_current_step_a}};
  j["rank"] = {{"bins", mi_bins}, {"top_k", top_k}};
  j["train"] = {{"lambdas", grid.lambdas}, {"alphas", grid.alphas}, {"folds", folds},
                {"tol", tol}, {"max_iter", max_iter}};
  j["adaptive"] = {{"clusters", adaptive.clusters},
                   {"beta", adaptive.beta},
                   {"delta_max_ah", adaptive.delta_max_ah},
                   {"restarts", adaptive.restarts},
                   {"extra_cluster_features", adaptive.extra_cluster_features}};
  return dump(j);
}

void PipelineConfig::validate() const {
  if (out_dir.empty()) throw InvalidArgument("out directory must not be empty");
  if (test_cells.empty()) throw InvalidArgument("at least one test cell is required");
  for (const auto& t : test_cells)
    if (std::find(train_cells.begin(), train_cells.end(), t) != train_cells.end())
      throw InvalidArgument("cell '" + t + "' is both a training and a test cell");
  schedule.validate();
  season.validate();
  if (!(fade_per_ah >= 0.0 && fade_per_ah < 1e-3))
    throw InvalidArgument("fade_per_ah must lie in [0, 1e-3)");
  if (!(test_gap_s > 0.0)) throw InvalidArgument("test_gap_s must be positive");
  if (!(min_current_step_a > 0.0)) throw InvalidArgument("min_current_step_a must be positive");
  if (mi_bins < 2) throw InvalidArgument("rank.bins must be at least 2");
  if (top_k < 1 || top_k > kFeatureNames.size())
    throw InvalidArgument("rank.top_k must lie in [1, 6]");
  if (grid.lambdas.empty() || grid.alphas.empty()) throw InvalidArgument("train grid is empty");
  for (double l : grid.lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidArgument("lambdas must be finite and >= 0");
  for (double a : grid.alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("alphas must lie in [0, 1]");
  if (folds < 2) throw InvalidArgument("train.folds must be at least 2");
  if (!(tol > 0.0) || max_iter == 0) throw InvalidArgument("train.tol and max_iter must be positive");
  adaptive.validate();
  for (const auto& f : adaptive.extra_cluster_features)
    if (std::find(kFeatureNames.begin(), kFeatureNames.end(), f) == kFeatureNames.end())
      throw InvalidArgument("unknown cluster feature '" + f + "'");
}

CellSplit resolve_split(const PipelineConfig& cfg, std::vector<std::string> cells) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  const auto present = [&](const std::string& c) {
    return std::binary_search(cells.begin(), cells.end(), c);
  };
  CellSplit split;
  for (const auto& t : cfg.test_cells) {
    if (!present(t)) throw DataError("test cell '" + t + "' has no snapshots");
    split.test.push_back(t);
  }
  if (cfg.train_cells.empty()) {
    for (const auto& c : cells)
      if (std::find(split.test.begin(), split.test.end(), c) == split.test.end())
        split.train.push_back(c);
  } else {
    for (const auto& t : cfg.train_cells) {
      if (!present(t)) throw DataError("training cell '" + t + "' has no snapshots");
      split.train.push_back(t);
    }
  }
  if (split.train.empty()) throw DataError("no training cells");
  return split;
}

std::string error_json(int code, const std::string& kind, const std::string& message) {
  Json j;
  j["error"] = {{"code", code}, {"kind", kind}, {"message", message}};
  return j.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Commands.

CommandResult cmd_simulate(const PipelineConfig& cfg) {
  cfg.validate();
  CampaignConfig cc;
  cc.fleet = default_fleet();
  for (auto& p : cc.fleet) p.fade_per_ah = cfg.fade_per_ah;
  cc.season = cfg.season;
  cc.schedule = cfg.schedule;
  cc.seed = cfg.seed;
  const auto cells = simulate_campaign(cc);

  CommandResult result;
  Json campaign;
  campaign["seed"] = cfg.seed;
  campaign["months"] = cfg.schedule.months;
  campaign["cycles_per_month"] = cfg.schedule.cycles_per_month;
  campaign["rpt_every_n_cycles"] = cfg.schedule.rpt_every_n_cycles;
  campaign["season"] = {{"mean_c", cfg.season.mean_c},
                        {"amplitude_c", cfg.season.amplitude_c},
                        {"period_days", cfg.season.period_days},
                        {"phase_days", cfg.season.phase_days},
                        {"jitter_c", cfg.season.daily_jitter_c}};
  Json cell_list = Json::array();
  for (const auto& c : cells) {
    const std::string& id = c.params.cell_id;
    for (const auto& [kind, series] :
         {std::pair{"aging", c.aging}, std::pair{"c20", c.c20}, std::pair{"hppc", c.hppc}}) {
      const std::string rel = "telemetry/" + id + "_" + kind + ".csv";
      std::ostringstream ss;
      write_timeseries_csv(ss, *series);
      write_text(cfg, rel, ss.str(), result);
    }
    std::ostringstream truth;
    truth << kTruthHeader << '\n';
    for (const auto& t : c.rpt_truth)
      truth << t.cycle_position << ',' << format_double(t.time_s) << ','
            << format_double(t.temperature_c) << ',' << format_double(t.throughput_ah) << ','
            << format_double(t.true_capacity_ah) << '\n';
    write_text(cfg, "truth/" + id + "_truth.csv", truth.str(), result);
    cell_list.push_back({{"cell_id", id},
                         {"q0_ah", c.params.q0_ah},
                         {"r0_ohm", c.params.r0_ohm},
                         {"fade_per_ah", c.params.fade_per_ah},
                         {"cycles", c.cycle_truth.size()},
                         {"rpts", c.rpt_truth.size()}});
  }
  campaign["cells"] = cell_list;
  write_text(cfg, "campaign.json", dump(campaign), result);
  return result;
}

CommandResult cmd_extract(const PipelineConfig& cfg) {
  cfg.validate();
  const fs::path dir = out_path(cfg, "telemetry");
  if (!fs::is_directory(dir))
    throw MissingInput("missing input '" + dir.string() + "'; run 'simulate' first");
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    const std::string suffix = "_aging.csv";
    if (name.size() > suffix.size() && name.ends_with(suffix))
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw MissingInput("no *_aging.csv telemetry in '" + dir.string() + "'");

  DatasetConfig dc;
  dc.test_gap_s = cfg.test_gap_s;
  AlignmentConfig ac;
  ac.min_current_step_a = cfg.min_current_step_a;

  CommandResult result;
  std::vector<LabeledSnapshot> all;
  for (const auto& id : ids) {
    const auto load = [&](const std::string& kind) {
      const fs::path p = dir / (id + "_" + kind + ".csv");
      if (!fs::exists(p)) throw MissingInput("missing input '" + p.string() + "'");
      try {
        return parse_timeseries_csv_file(p.string(), id);
      } catch (const ParseError& e) {
        throw ParseError(e.line(), p.string() + ": " + e.what());
      }
    };
    auto aging = std::make_shared<const TimeSeries>(load("aging"));
    const TimeSeries c20 = load("c20");
    const TimeSeries hppc = load("hppc");
    const CellDataset ds = assemble_dataset(id, aging, c20, hppc, dc);
    auto snaps = build_snapshots(ds, ac, &result.warnings);
    all.insert(all.end(), snaps.begin(), snaps.end());
  }
  std::ostringstream ss;
  write_snapshots_csv(ss, all);
  write_text(cfg, "snapshots.csv", ss.str(), result);
  return result;
}

CommandResult cmd_rank(const PipelineConfig& cfg) {
  cfg.validate();
  const auto snaps = load_snapshots(cfg);
  const CellSplit split = resolve_split(cfg, cells_of(snaps));
  const auto train = filter_cells(snaps, split.train);
  CommandResult result;
  const auto names = all_feature_names();
  const auto ranked = mrmr_rank(feature_matrix(train, names), labels_of(train),
                                MutualInfoConfig{cfg.mi_bins}, &result.warnings);
  std::ostringstream ss;
  write_ranking_csv(ss, ranked);
  write_text(cfg, "ranking.csv", ss.str(), result);
  return result;
}

CommandResult cmd_train(const PipelineConfig& cfg) {
  cfg.validate();
  const auto snaps = load_snapshots(cfg);
  std::istringstream rin(read_text(out_path(cfg, "ranking.csv"), "run 'rank' first"));
  auto ranked = read_ranking_csv(rin);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  const auto names = select_top_k(ranked, cfg.top_k);

  const CellSplit split = resolve_split(cfg, cells_of(snaps));
  const auto train = filter_cells(snaps, split.train);

  EnrOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  const GridSearchResult gs = grid_search(train, names, cfg.grid, cfg.folds, cfg.seed, opt);
  opt.lambda = gs.best_lambda;
  opt.alpha = gs.best_alpha;

  std::vector<double> y = labels_of(train);
  const EnrFit fit = enr_fit(design_matrix(train, names), y, names, opt);

  CommandResult result;
  if (!fit.converged)
    result.warnings.push_back("coordinate descent stopped at max_iter without converging");
  write_text(cfg, "model.json", save_model(fit.model), result);
  std::ostringstream ss;
  write_cv_table_csv(ss, gs);
  write_text(cfg, "cv_table.csv", ss.str(), result);
  return result;
}

CommandResult cmd_evaluate(const PipelineConfig& cfg) {
  cfg.validate();
  const EnrModel model = load_pipeline_model(cfg);
  const auto snaps = load_snapshots(cfg);
  const CellSplit split = resolve_split(cfg, cells_of(snaps));

  CommandResult result;
  std::ostringstream pcsv;
  pcsv << kPcepeHeader << '\n';
  Json summary;
  for (const auto& [label, cells] : {std::pair{"train", split.train}, std::pair{"test", split.test}}) {
    const auto part = filter_cells(snaps, cells);
    const auto y_hat = enr_predict(model, part);
    const auto y = labels_of(part);
    write_text(cfg, std::string("metrics_") + label + ".json", metrics_to_json(metrics(y_hat, y)),
               result);
    const PcepeSummary pc = pcepe(y_hat, y);
    for (std::size_t i = 0; i < part.size(); ++i)
      pcsv << part[i].cell_id << ',' << part[i].cycle_index << ',' << label << ','
           << format_double(y[i]) << ',' << format_double(y_hat[i]) << ','
           << format_double(pc.errors_pct[i]) << '\n';
    summary[label] = {{"p10_pct", pc.p10_pct}, {"p90_pct", pc.p90_pct}, {"n", part.size()}};
  }
  write_text(cfg, "pcepe.csv", pcsv.str(), result);
  write_text(cfg, "pcepe_summary.json", dump(summary), result);
  return result;
}

CommandResult cmd_adaptive(const PipelineConfig& cfg) {
  cfg.validate();
  const EnrModel model = load_pipeline_model(cfg);
  const auto snaps = load_snapshots(cfg);
  const CellSplit split = resolve_split(cfg, cells_of(snaps));

  CommandResult result;
  const auto train = filter_cells(snaps, split.train);
  AdaptiveConfig ac = cfg.adaptive;
  ac.seed = cfg.seed;
  const TrajectoryBank bank = build_bank(train, model, ac, &result.warnings);

  Json summary = Json::object();
  for (const auto& cell : split.test) {
    auto stream = filter_cells(snaps, {cell});
    std::stable_sort(stream.begin(), stream.end(),
                     [](const auto& a, const auto& b) { return a.cycle_index < b.cycle_index; });
    const EstimateTrace trace = run_stream(stream, model, bank, ac);
    std::ostringstream ss;
    write_trace_csv(ss, trace);
    write_text(cfg, "trace_" + cell + ".csv", ss.str(), result);

    std::vector<double> off, ad, y = labels_of(stream);
    for (const auto& r : trace.rows) {
      off.push_back(r.offline_ah);
      ad.push_back(r.adaptive_ah);
    }
    const auto max_abs = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double e : v) m = std::max(m, std::abs(e));
      return m;
    };
    summary[cell] = {{"offline_mape_pct", metrics(off, y).mape_pct},
                     {"adaptive_mape_pct", metrics(ad, y).mape_pct},
                     {"offline_max_abs_pcepe_pct", max_abs(pcepe(off, y).errors_pct)},
                     {"adaptive_max_abs_pcepe_pct", max_abs(pcepe(ad, y).errors_pct)},
                     {"n", y.size()}};
  }
  write_text(cfg, "adaptive_summary.json", dump(summary), result);
  return result;
}

// ---------------------------------------------------------------------------
// Validation.

namespace {

void check_csv_numeric(const std::string& text, std::string_view header, std::size_t text_cols,
                       const std::string& what) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no)) throw SchemaError(what + " is empty");
  if (detail::trim(line) != header) throw SchemaError(what + " header mismatch");
  const std::size_t cols = detail::split_fields(header).size();
  while (detail::next_line(in, line, line_no)) {
    const auto f = detail::split_fields(line);
    if (f.size() != cols) throw ParseError(line_no, "expected " + std::to_string(cols) + " fields");
    for (std::size_t i = text_cols; i < f.size(); ++i) {
      const auto v = detail::parse_number(f[i]);
      if (!v || !std::isfinite(*v)) throw ParseError(line_no, "non-numeric field " + std::to_string(i + 1));
    }
  }
}

Json parse_object(const std::string& text, const std::string& what) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(what + ": invalid JSON");
  }
  if (!j.is_object()) throw SchemaError(what + ": not an object");
  return j;
}

void require_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& what) {
  if (j.size() != keys.size()) throw SchemaError(what + ": unexpected field count");
  for (const char* k : keys)
    if (!j.contains(k)) throw SchemaError(what + ": missing field '" + k + "'");
}

}  // namespace

std::string ValidationReport::to_json() const {
  Json j;
  j["ok"] = ok();
  j["checked"] = checked;
  Json arr = Json::array();
  for (const auto& i : issues) arr.push_back({{"file", i.file}, {"message", i.message}});
  j["issues"] = arr;
  return dump(j);
}

ValidationReport cmd_validate(const PipelineConfig& cfg) {
  ValidationReport report;
  const fs::path root(cfg.out_dir);
  if (!fs::is_directory(root)) throw MissingInput("missing input '" + root.string() + "'");

  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root).generic_string());
  std::sort(files.begin(), files.end());

  for (const auto& rel : files) {
    const std::string name = fs::path(rel).filename().string();
    const std::string parent = fs::path(rel).parent_path().generic_string();
    std::function<void(const std::string&)> check;
    if (parent == "telemetry" && name.ends_with(".csv")) {
      check = [&](const std::string& text) {
        std::istringstream in(text);
        parse_timeseries_csv(in, name);
      };
    } else if (parent == "truth" && name.ends_with("_truth.csv")) {
      check = [](const std::string& text) { check_csv_numeric(text, kTruthHeader, 0, "truth CSV"); };
    } else if (!parent.empty()) {
      continue;
    } else if (name == "campaign.json") {
      check = [](const std::string& text) {
        const Json j = parse_object(text, "campaign.json");
        if (!j.contains("cells") || !j["cells"].is_array()) throw SchemaError("campaign.json: missing cells");
      };
    } else if (name == "snapshots.csv") {
      check = [](const std::string& text) {
        std::istringstream in(text);
        read_snapshots_csv(in);
      };
    } else if (name == "ranking.csv") {
      check = [](const std::string& text) {
        std::istringstream in(text);
        const auto r = read_ranking_csv(in);
        for (const auto& f : r)
          if (std::find(kFeatureNames.begin(), kFeatureNames.end(), f.feature_name) == kFeatureNames.end())
            throw SchemaError("ranking.csv: unknown feature '" + f.feature_name + "'");
      };
    } else if (name == "model.json") {
      check = [](const std::string& text) { load_model(text); };
    } else if (name == "cv_table.csv") {
      check = [](const std::string& text) {
        std::istringstream in(text);
        std::string header;
        std::getline(in, header);
        const auto cols = detail::split_fields(header);
        if (cols.size() < 4 || cols[0] != "lambda" || cols[1] != "alpha" || cols[2] != "mean_rmse_ah")
          throw SchemaError("cv_table.csv header mismatch");
        for (std::size_t f = 3; f < cols.size(); ++f)
          if (cols[f] != "fold_" + std::to_string(f - 2) + "_rmse_ah")
            throw SchemaError("cv_table.csv header mismatch");
        check_csv_numeric(text, detail::trim(header), 0, "cv_table.csv");
      };
    } else if (name == "metrics_train.json" || name == "metrics_test.json") {
      check = [](const std::string& text) {
        const Json j = parse_object(text, "metrics");
        require_keys(j, {"rmse_ah", "rmspe_pct", "mape_pct", "n"}, "metrics");
        metrics_from_json(text);
      };
    } else if (name == "pcepe.csv") {
      check = [](const std::string& text) { check_csv_numeric(text, kPcepeHeader, 3, "pcepe.csv"); };
    } else if (name == "pcepe_summary.json") {
      check = [](const std::string& text) {
        const Json j = parse_object(text, "pcepe_summary.json");
        for (const auto& [k, v] : j.items())
          require_keys(v, {"p10_pct", "p90_pct", "n"}, "pcepe_summary.json." + k);
      };
    } else if (name.starts_with("trace_") && name.ends_with(".csv")) {
      const double delta = cfg.adaptive.delta_max_ah;
      check = [delta](const std::string& text) {
        std::istringstream in(text);
        for (const auto& r : read_trace_csv(in))
          if (std::abs(r.adaptive_ah - r.offline_ah) > delta || std::abs(r.correction_ah) > delta)
            throw SchemaError("trace row at cycle " + std::to_string(r.cycle_index) +
                              " exceeds delta_max_ah");
      };
    } else if (name == "adaptive_summary.json") {
      check = [](const std::string& text) {
        const Json j = parse_object(text, "adaptive_summary.json");
        for (const auto& [k, v] : j.items())
          require_keys(v,
                       {"offline_mape_pct", "adaptive_mape_pct", "offline_max_abs_pcepe_pct",
                        "adaptive_max_abs_pcepe_pct", "n"},
                       "adaptive_summary.json." + k);
      };
    } else {
      continue;
    }
    report.checked.push_back(rel);
    try {
      check(read_text(root / rel, ""));
    } catch (const std::exception& e) {
      report.issues.push_back({rel, e.what()});
    }
  }
  if (report.checked.empty())
    throw MissingInput("no pipeline artifacts found under '" + root.string() + "'");
  return report;
}

}  // namespace slsoh
