#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "slsoh/adaptive.hpp"
#include "slsoh/cross_validation.hpp"
#include "slsoh/error.hpp"
#include "slsoh/metrics.hpp"
#include "slsoh/model_io.hpp"
#include "slsoh/pipeline.hpp"
#include "slsoh/regression.hpp"
#include "slsoh/selection.hpp"

namespace py = pybind11;
using namespace slsoh;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidArgument("design matrix has no rows");
  Matrix x(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != x.cols()) throw InvalidArgument("ragged design matrix");
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = rows[i][j];
  }
  return x;
}

py::dict report_dict(const MetricsReport& m) {
  py::dict d;
  d["rmse_ah"] = m.rmse_ah;
  d["rmspe_pct"] = m.rmspe_pct;
  d["mape_pct"] = m.mape_pct;
  d["n"] = m.n;
  return d;
}

BankTrajectory trajectory_from(const py::dict& d) {
  BankTrajectory t;
  t.cell_id = d["cell_id"].cast<std::string>();
  const auto keys = d["throughput"].cast<std::vector<double>>();
  const auto offline = d["offline"].cast<std::vector<double>>();
  const auto labels = d["label"].cast<std::vector<double>>();
  if (keys.size() != offline.size() || keys.size() != labels.size())
    throw InvalidArgument("trajectory arrays differ in length");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    BankPoint p;
    p.cycle_index = i;
    p.throughput_key = keys[i];
    p.offline_ah = offline[i];
    p.label_ah = labels[i];
    t.points.push_back(p);
  }
  return t;
}

py::dict run_command(const std::string& command, const std::optional<std::string>& config_json,
                     std::optional<std::uint64_t> seed, std::optional<std::string> out) {
  PipelineConfig cfg = config_json ? PipelineConfig::from_json(*config_json) : PipelineConfig{};
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  cfg.validate();
  py::dict d;
  if (command == "validate") {
    const auto rep = cmd_validate(cfg);
    d["checked"] = rep.checked;
    py::list issues;
    for (const auto& i : rep.issues) issues.append(py::make_tuple(i.file, i.message));
    d["issues"] = issues;
    return d;
  }
  CommandResult r;
  if (command == "simulate") r = cmd_simulate(cfg);
  else if (command == "extract") r = cmd_extract(cfg);
  else if (command == "rank") r = cmd_rank(cfg);
  else if (command == "train") r = cmd_train(cfg);
  else if (command == "evaluate") r = cmd_evaluate(cfg);
  else if (command == "adaptive") r = cmd_adaptive(cfg);
  else throw InvalidArgument("unknown command '" + command + "'");
  d["written"] = r.written;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_slsoh, m) {
  m.doc() = "Second-life battery capacity estimation core";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto input = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", input.ptr());
  py::register_exception<ParseError>(m, "ParseError", input.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", input.ptr());
  py::register_exception<MissingInput>(m, "MissingInput", input.ptr());
  py::register_exception<DataError>(m, "DataError", input.ptr());
  (void)error;

  m.def("metrics", [](const std::vector<double>& y_hat, const std::vector<double>& y) {
    return report_dict(metrics(y_hat, y));
  }, py::arg("y_hat"), py::arg("y"));

  m.def("pcepe", [](const std::vector<double>& y_hat, const std::vector<double>& y) {
    const auto s = pcepe(y_hat, y);
    py::dict d;
    d["errors_pct"] = s.errors_pct;
    d["p10_pct"] = s.p10_pct;
    d["p90_pct"] = s.p90_pct;
    return d;
  }, py::arg("y_hat"), py::arg("y"));

  m.def("mutual_information", [](const std::vector<double>& x, const std::vector<double>& y, std::size_t bins) {
    return mutual_information(x, y, bins);
  }, py::arg("x"), py::arg("y"), py::arg("bins") = 8);

  m.def("mrmr_rank", [](const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns,
                        const std::vector<double>& labels, std::size_t bins) {
    FeatureMatrix fm{names, columns};
    if (fm.names.size() != fm.columns.size()) throw InvalidArgument("one name per column required");
    py::list out;
    for (const auto& r : mrmr_rank(fm, labels, MutualInfoConfig{bins})) {
      py::dict d;
      d["rank"] = r.rank;
      d["feature_name"] = r.feature_name;
      d["score"] = r.score;
      d["relevance"] = r.relevance;
      d["redundancy"] = r.redundancy;
      out.append(d);
    }
    return out;
  }, py::arg("names"), py::arg("columns"), py::arg("labels"), py::arg("bins") = 8);

  py::class_<EnrModel>(m, "EnrModel")
      .def_readonly("feature_names", &EnrModel::feature_names)
      .def_readonly("weights", &EnrModel::weights)
      .def_readonly("intercept", &EnrModel::intercept)
      .def_readonly("lambda_", &EnrModel::lambda)
      .def_readonly("alpha", &EnrModel::alpha)
      .def_property_readonly("means", [](const EnrModel& e) { return e.standardizer.means; })
      .def_property_readonly("stds", [](const EnrModel& e) { return e.standardizer.stds; })
      .def("predict", [](const EnrModel& e, const std::vector<double>& row) { return enr_predict(e, row); },
           py::arg("row"))
      .def("to_json", [](const EnrModel& e) { return save_model(e); })
      .def_static("from_json", [](const std::string& s) { return load_model(s); }, py::arg("document"));

  m.def("enr_fit", [](const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
                      const std::vector<std::string>& names, double lam, double alpha, double tol,
                      std::size_t max_iter) {
    EnrOptions opt;
    opt.lambda = lam;
    opt.alpha = alpha;
    opt.tol = tol;
    opt.max_iter = max_iter;
    return enr_fit(to_matrix(rows), y, names, opt).model;
  }, py::arg("rows"), py::arg("y"), py::arg("names"), py::arg("lam") = 0.01, py::arg("alpha") = 0.5,
     py::arg("tol") = 1e-8, py::arg("max_iter") = 10000);

  m.def("grouped_kfold", [](const std::vector<std::string>& cells, std::size_t k, std::uint64_t seed) {
    const auto fa = grouped_kfold(cells, k, seed);
    py::dict d;
    for (std::size_t i = 0; i < fa.cells.size(); ++i) d[py::str(fa.cells[i])] = fa.cell_fold[i];
    return d;
  }, py::arg("cells"), py::arg("k"), py::arg("seed"));

  m.def("adaptive_run", [](const std::vector<py::dict>& bank, const std::vector<double>& throughput,
                           const std::vector<double>& offline, std::size_t clusters, double beta,
                           double delta_max_ah, std::uint64_t seed) {
    AdaptiveConfig cfg;
    cfg.clusters = clusters;
    cfg.beta = beta;
    cfg.delta_max_ah = delta_max_ah;
    cfg.seed = seed;
    std::vector<BankTrajectory> trajs;
    for (const auto& d : bank) trajs.push_back(trajectory_from(d));
    const TrajectoryBank b = build_bank(std::move(trajs), cfg);
    if (throughput.size() != offline.size()) throw InvalidArgument("stream arrays differ in length");
    std::vector<StreamPoint> stream;
    for (std::size_t i = 0; i < throughput.size(); ++i) stream.push_back({i, throughput[i], {}, offline[i]});
    const auto trace = run_stream("stream", stream, b, cfg);
    py::dict d;
    std::vector<double> adaptive, correction;
    std::vector<std::size_t> cluster;
    for (const auto& r : trace.rows) {
      adaptive.push_back(r.adaptive_ah);
      correction.push_back(r.correction_ah);
      cluster.push_back(r.cluster_id);
    }
    d["adaptive_ah"] = adaptive;
    d["correction_ah"] = correction;
    d["cluster_id"] = cluster;
    return d;
  }, py::arg("bank"), py::arg("throughput"), py::arg("offline"), py::arg("clusters") = 3,
     py::arg("beta") = 0.3, py::arg("delta_max_ah") = 1.0, py::arg("seed") = 42);

  m.def("run_command", &run_command, py::arg("command"), py::arg("config_json") = py::none(),
        py::arg("seed") = py::none(), py::arg("out") = py::none());
}
