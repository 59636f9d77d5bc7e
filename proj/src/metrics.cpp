#include "slsoh/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "slsoh/error.hpp"

namespace slsoh {

namespace {

void check_pair(std::span<const double> y_hat, std::span<const double> y) {
  if (y.empty()) throw InvalidArgument("metrics: no observations");
  if (y_hat.size() != y.size()) throw InvalidArgument("metrics: length mismatch");
  for (double v : y)
    if (v == 0.0) throw InvalidArgument("metrics: zero label");
}

}  // namespace

MetricsReport metrics(std::span<const double> y_hat, std::span<const double> y) {
  check_pair(y_hat, y);
  double se = 0.0, spe = 0.0, ape = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y_hat[i] - y[i];
    se += e * e;
    spe += (e / y[i]) * (e / y[i]);
    ape += std::abs(e) / std::abs(y[i]);
  }
  const double m = static_cast<double>(y.size());
  return {std::sqrt(se / m), std::sqrt(spe / m) * 100.0, ape / m * 100.0, y.size()};
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = (static_cast<double>(values.size()) - 1.0) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

PcepeSummary pcepe(std::span<const double> y_hat, std::span<const double> y) {
  check_pair(y_hat, y);
  PcepeSummary s;
  for (std::size_t i = 0; i < y.size(); ++i)
    s.errors_pct.push_back(100.0 * (y_hat[i] - y[i]) / y[i]);
  s.p10_pct = percentile(s.errors_pct, 10.0);
  s.p90_pct = percentile(s.errors_pct, 90.0);
  return s;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["rmse_ah"] = report.rmse_ah;
  j["rmspe_pct"] = report.rmspe_pct;
  j["mape_pct"] = report.mape_pct;
  j["n"] = report.n;
  return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.rmse_ah = j.at("rmse_ah").get<double>();
    r.rmspe_pct = j.at("rmspe_pct").get<double>();
    r.mape_pct = j.at("mape_pct").get<double>();
    r.n = j.at("n").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("metrics JSON: ") + e.what());
  }
}

}  // namespace slsoh
