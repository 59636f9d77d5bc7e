#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace slsoh {

struct MetricsReport {
  double rmse_ah = 0.0;
  double rmspe_pct = 0.0;
  double mape_pct = 0.0;
  std::size_t n = 0;
};

// RMSE, RMSPE and MAPE of estimates against labels. Throws InvalidArgument
// on length mismatch, empty input, or a zero label.
MetricsReport metrics(std::span<const double> y_hat, std::span<const double> y);

struct PcepeSummary {
  std::vector<double> errors_pct;  // 100 (y_hat - y) / y, signed
  double p10_pct = 0.0;
  double p90_pct = 0.0;
};

PcepeSummary pcepe(std::span<const double> y_hat, std::span<const double> y);

// Percentile with linear interpolation between order statistics
// (position (n - 1) * q / 100).
double percentile(std::vector<double> values, double q);

// {"rmse_ah":..,"rmspe_pct":..,"mape_pct":..,"n":..}
std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);

}  // namespace slsoh
