#include "slsoh/data_model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "slsoh/error.hpp"
#include "text_util.hpp"

namespace slsoh {

namespace {

using detail::parse_number;
using detail::split_fields;
using detail::trim;

constexpr std::array<std::string_view, 7> kLabelNames = {
    "aging_dchg_1c", "aging_dchg_c2", "aging_chg_c2", "hppc",
    "c20_chg",       "c20_dchg",      "rest",
};

constexpr std::string_view kCsvHeader = "time_s,current_a,voltage_v,temperature_c";

bool voltage_in_band(double v) {
  return std::isfinite(v) && v >= kMinVoltage && v <= kMaxVoltage;
}

// Integrates the piecewise-linear interpolant of g(sample) over [a, b].
template <typename Integrand>
double integrate(const TimeSeries& series, double a, double b, Integrand g) {
  if (!(a < b))
    throw InvalidArgument("integration interval requires a < b");
  if (a < series.start_time() || b > series.end_time())
    throw InvalidArgument("integration interval [" + format_double(a) + ", " +
                          format_double(b) + "] outside series range [" +
                          format_double(series.start_time()) + ", " +
                          format_double(series.end_time()) + "]");

  const auto samples = series.samples();
  const auto by_time = [](double t, const Sample& s) { return t < s.time_s; };
  // samples[i - 1].time_s <= a < samples[i].time_s
  auto i = static_cast<std::size_t>(
      std::upper_bound(samples.begin(), samples.end(), a, by_time) - samples.begin());

  const auto interp = [&](std::size_t hi, double t) {
    const Sample& s0 = samples[hi - 1];
    const Sample& s1 = samples[hi];
    const double g0 = g(s0);
    if (t == s0.time_s) return g0;
    const double g1 = g(s1);
    return g0 + (g1 - g0) * (t - s0.time_s) / (s1.time_s - s0.time_s);
  };

  double t_prev = a;
  double g_prev = interp(i, a);
  double acc = 0.0;
  while (i < samples.size() && samples[i].time_s < b) {
    const double gi = g(samples[i]);
    acc += 0.5 * (g_prev + gi) * (samples[i].time_s - t_prev);
    t_prev = samples[i].time_s;
    g_prev = gi;
    ++i;
  }
  const double g_b = (i < samples.size() && samples[i].time_s == b) ? g(samples[i])
                                                                    : interp(i, b);
  acc += 0.5 * (g_prev + g_b) * (b - t_prev);
  return acc;
}

template <typename Field>
double value_at(const TimeSeries& series, double t, Field field) {
  const auto samples = series.samples();
  if (t <= samples.front().time_s) return field(samples.front());
  if (t >= samples.back().time_s) return field(samples.back());
  const auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double x, const Sample& s) { return x < s.time_s; });
  const Sample& s1 = *it;
  const Sample& s0 = *(it - 1);
  if (t == s0.time_s) return field(s0);
  const double f0 = field(s0);
  return f0 + (field(s1) - f0) * (t - s0.time_s) / (s1.time_s - s0.time_s);
}

}  // namespace

std::string_view to_string(StepLabel label) {
  return kLabelNames.at(static_cast<std::size_t>(label));
}

std::optional<StepLabel> parse_step_label(std::string_view text) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == text) return static_cast<StepLabel>(i);
  }
  return std::nullopt;
}

TimeSeries::TimeSeries(std::string cell_id, std::vector<Sample> samples,
                       std::vector<StepLabel> step_labels)
    : cell_id_(std::move(cell_id)),
      samples_(std::move(samples)),
      labels_(std::move(step_labels)) {
  if (samples_.empty()) throw InvalidArgument("time series is empty");
  if (!labels_.empty() && labels_.size() != samples_.size())
    throw InvalidArgument("step labels length does not match samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (!std::isfinite(s.time_s) || !std::isfinite(s.current_a) ||
        !std::isfinite(s.temperature_c))
      throw InvalidArgument("non-finite value at sample " + std::to_string(i));
    if (!voltage_in_band(s.voltage_v))
      throw InvalidArgument("voltage outside [0, 6] V at sample " + std::to_string(i));
    if (i > 0 && !(s.time_s > samples_[i - 1].time_s))
      throw InvalidArgument("time not strictly increasing at sample " + std::to_string(i));
  }
}

TimeSeries TimeSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > samples_.size())
    throw InvalidArgument("invalid slice range");
  std::vector<Sample> s(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                        samples_.begin() + static_cast<std::ptrdiff_t>(end));
  std::vector<StepLabel> l;
  if (!labels_.empty())
    l.assign(labels_.begin() + static_cast<std::ptrdiff_t>(begin),
             labels_.begin() + static_cast<std::ptrdiff_t>(end));
  return TimeSeries(cell_id_, std::move(s), std::move(l));
}

// ---------------------------------------------------------------------------

TimeSeries parse_timeseries_csv(std::istream& in, std::string cell_id) {
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw MissingInput("CSV has no header");

  const auto header = split_fields(line);
  const auto find_column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  std::array<std::size_t, 4> cols{};
  constexpr std::array<std::string_view, 4> mandatory = {"time_s", "current_a", "voltage_v",
                                                         "temperature_c"};
  for (std::size_t k = 0; k < mandatory.size(); ++k) {
    const auto c = find_column(mandatory[k]);
    if (!c) throw SchemaError("missing mandatory column '" + std::string(mandatory[k]) + "'");
    cols[k] = *c;
  }
  const auto step_col = find_column("step");

  std::vector<Sample> samples;
  std::vector<StepLabel> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
    std::array<double, 4> v{};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto x = parse_number(fields[cols[k]]);
      if (!x || !std::isfinite(*x))
        throw ParseError(line_no, "invalid number in column '" + std::string(mandatory[k]) + "'");
      v[k] = *x;
    }
    const Sample s{v[0], v[1], v[2], v[3]};
    if (!voltage_in_band(s.voltage_v)) throw ParseError(line_no, "voltage outside [0, 6] V");
    if (!samples.empty() && !(s.time_s > samples.back().time_s))
      throw ParseError(line_no, "time not strictly increasing");
    samples.push_back(s);
    if (step_col) {
      const auto label = parse_step_label(fields[*step_col]);
      if (!label)
        throw ParseError(line_no, "unknown step label '" + std::string(fields[*step_col]) + "'");
      labels.push_back(*label);
    }
  }
  if (samples.empty()) throw MissingInput("CSV has no data rows");
  return TimeSeries(std::move(cell_id), std::move(samples), std::move(labels));
}

TimeSeries parse_timeseries_csv_file(const std::string& path, std::string cell_id) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open '" + path + "'");
  return parse_timeseries_csv(in, std::move(cell_id));
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf.data(), ptr);
}

void write_timeseries_csv(std::ostream& out, const TimeSeries& series) {
  out << kCsvHeader;
  if (series.has_labels()) out << ",step";
  out << '\n';
  std::string row;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Sample& s = series[i];
    row.clear();
    row += format_double(s.time_s);
    row += ',';
    row += format_double(s.current_a);
    row += ',';
    row += format_double(s.voltage_v);
    row += ',';
    row += format_double(s.temperature_c);
    if (series.has_labels()) {
      row += ',';
      row += to_string(series.label(i));
    }
    row += '\n';
    out << row;
  }
}

void write_timeseries_csv_file(const std::string& path, const TimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_timeseries_csv(out, series);
}

// ---------------------------------------------------------------------------

double integrate_abs_current(const TimeSeries& series, double a, double b) {
  return integrate(series, a, b, [](const Sample& s) { return std::abs(s.current_a); }) /
         3600.0;
}

double integrate_power(const TimeSeries& series, double a, double b) {
  return integrate(series, a, b,
                   [](const Sample& s) { return std::abs(s.current_a * s.voltage_v); }) /
         3600.0;
}

double mean_temperature(const TimeSeries& series, double a, double b) {
  return integrate(series, a, b, [](const Sample& s) { return s.temperature_c; }) / (b - a);
}

double voltage_at(const TimeSeries& series, double t) {
  return value_at(series, t, [](const Sample& s) { return s.voltage_v; });
}

double current_at(const TimeSeries& series, double t) {
  return value_at(series, t, [](const Sample& s) { return s.current_a; });
}

// ---------------------------------------------------------------------------

void AgingCycle::validate() const {
  if (!series) throw InvalidArgument("aging cycle has no series");
  if (!(t0_s < t1_s && t1_s < t2_s && t2_s < t3_s))
    throw InvalidArgument("aging cycle boundaries out of order");
  const auto check = [&](const IndexSpan& span, bool positive, const char* name) {
    if (span.empty() || span.end > series->size())
      throw InvalidArgument(std::string("aging cycle ") + name + " span invalid");
    for (std::size_t i = span.begin; i < span.end; ++i) {
      const double c = (*series)[i].current_a;
      if (positive ? !(c > 0.0) : !(c < 0.0))
        throw InvalidArgument(std::string("aging cycle ") + name + " current has wrong sign");
    }
  };
  check(segment1, false, "segment1");
  check(segment2, false, "segment2");
  check(segment3, true, "segment3");
}

std::vector<IndexSpan> split_on_gaps(const TimeSeries& series, double gap_s) {
  std::vector<IndexSpan> runs;
  std::size_t begin = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].time_s - series[i - 1].time_s > gap_s) {
      runs.push_back({begin, i});
      begin = i;
    }
  }
  runs.push_back({begin, series.size()});
  return runs;
}

void CellDataset::validate() const {
  const auto check = [&](std::size_t prev, std::size_t pos) {
    if (pos < prev) throw InvalidArgument("RPT stamps must be non-decreasing");
    if (pos > cycles.size()) throw InvalidArgument("RPT stamp beyond cycle range");
  };
  std::size_t prev = 0;
  for (const auto& r : c20) {
    check(prev, r.cycle_position);
    if (!(r.charge_capacity_ah > 0.0))
      throw InvalidArgument("C/20 charge capacity must be positive");
    prev = r.cycle_position;
  }
  prev = 0;
  for (const auto& r : hppc) {
    check(prev, r.cycle_position);
    prev = r.cycle_position;
  }
}

}  // namespace slsoh
