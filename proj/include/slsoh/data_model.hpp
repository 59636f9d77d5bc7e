#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slsoh {

// Sign convention: positive current charges the cell, negative discharges.
struct Sample {
  double time_s = 0.0;
  double current_a = 0.0;
  double voltage_v = 0.0;
  double temperature_c = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class StepLabel : std::uint8_t {
  aging_dchg_1c,
  aging_dchg_c2,
  aging_chg_c2,
  hppc,
  c20_chg,
  c20_dchg,
  rest,
};

std::string_view to_string(StepLabel label);
std::optional<StepLabel> parse_step_label(std::string_view text);

inline constexpr double kMinVoltage = 0.0;
inline constexpr double kMaxVoltage = 6.0;

// Immutable telemetry record for one cell. Construction validates that the
// series is non-empty, strictly increasing in time, finite, and that the
// voltage lies inside the [0, 6] V sanity band.
class TimeSeries {
 public:
  TimeSeries(std::string cell_id, std::vector<Sample> samples,
             std::vector<StepLabel> step_labels = {});

  const std::string& cell_id() const noexcept { return cell_id_; }
  std::span<const Sample> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  bool has_labels() const noexcept { return !labels_.empty(); }
  std::span<const StepLabel> step_labels() const noexcept { return labels_; }
  StepLabel label(std::size_t i) const { return labels_[i]; }

  double start_time() const noexcept { return samples_.front().time_s; }
  double end_time() const noexcept { return samples_.back().time_s; }

  // Copy of samples [begin, end) as a new series.
  TimeSeries slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::string cell_id_;
  std::vector<Sample> samples_;
  std::vector<StepLabel> labels_;
};

// Half-open range of sample indices.
struct IndexSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end <= begin; }
  friend bool operator==(const IndexSpan&, const IndexSpan&) = default;
};

// ---------------------------------------------------------------------------
// CSV ingestion. Header `time_s,current_a,voltage_v,temperature_c[,step]`;
// columns are located by name and unknown columns are ignored.

TimeSeries parse_timeseries_csv(std::istream& in, std::string cell_id);
TimeSeries parse_timeseries_csv_file(const std::string& path,
                                     std::string cell_id);

// Writes the bit-exact header followed by one row per sample. Numbers use the
// shortest decimal form that reparses to the same double.
void write_timeseries_csv(std::ostream& out, const TimeSeries& series);
void write_timeseries_csv_file(const std::string& path,
                               const TimeSeries& series);

// Shortest round-trip decimal text of a double.
std::string format_double(double value);

// ---------------------------------------------------------------------------
// Integration primitives. The integrand is evaluated at every sample and
// interpolated linearly in between (trapezoidal rule); interval ends that fall
// between samples are interpolated.

// Integral of |current| over [a, b], in Ah.
double integrate_abs_current(const TimeSeries& series, double a, double b);

// Integral of |current * voltage| over [a, b], in Wh.
double integrate_power(const TimeSeries& series, double a, double b);

// Time-weighted mean temperature over [a, b].
double mean_temperature(const TimeSeries& series, double a, double b);

// Linear interpolation of the voltage at time t (clamped to the series).
double voltage_at(const TimeSeries& series, double t);
double current_at(const TimeSeries& series, double t);

// ---------------------------------------------------------------------------
// Aging cycles and segmentation.

// One aging cycle: 1C discharge (segment1), C/2 discharge (segment2), and
// C/2 charge (segment3). t0..t2 are the first-sample times of the segments,
// t3 the last sample of the charge.
struct AgingCycle {
  std::shared_ptr<const TimeSeries> series;
  IndexSpan segment1;
  IndexSpan segment2;
  IndexSpan segment3;
  double t0_s = 0.0;
  double t1_s = 0.0;
  double t2_s = 0.0;
  double t3_s = 0.0;

  // Throws InvalidArgument when boundaries are out of order or segment
  // currents have the wrong sign.
  void validate() const;
};

struct SegmentationConfig {
  // 1C current magnitude in amperes; zero or negative means infer it from
  // the largest discharge current in the series.
  double one_c_current_a = 0.0;
  // Band half-width as a fraction of the 1C current.
  double tolerance_fraction = 0.1;
  // Use step labels when the series carries them.
  bool use_labels = true;
};

// Splits an aging telemetry stream into complete cycles. Returns an empty list
// when the series carries no excitation at all; throws DataError when it does
// but no complete cycle is present, or when a labeled segment's current falls
// outside the tolerance band.
std::vector<AgingCycle> segment_aging_cycles(
    std::shared_ptr<const TimeSeries> series,
    const SegmentationConfig& cfg = {});

// Groups samples into runs separated by time gaps strictly larger than gap_s.
std::vector<IndexSpan> split_on_gaps(const TimeSeries& series, double gap_s);

// ---------------------------------------------------------------------------
// Reference performance test records and the per-cell dataset.

struct C20Record {
  IndexSpan discharge_span;
  IndexSpan charge_span;
  double start_time_s = 0.0;
  double mean_temperature_c = 0.0;
  double charge_capacity_ah = 0.0;
  // Number of aging cycles completed before this test.
  std::size_t cycle_position = 0;
};

enum class SocContext : std::uint8_t { low, high };

struct HppcPulse {
  double delta_v = 0.0;
  double delta_i = 0.0;
  SocContext soc = SocContext::low;
  double onset_time_s = 0.0;
};

// Charge-portion HPPC edges evaluated at the 2 s mark: the discharge pulse at
// high SOC (R1) and the charge pulse at low SOC (R2).
struct HppcRecord {
  HppcPulse discharge_high;
  HppcPulse charge_low;
  double start_time_s = 0.0;
  std::size_t cycle_position = 0;
};

struct CellDataset {
  std::string cell_id;
  std::vector<AgingCycle> cycles;
  std::vector<C20Record> c20;
  std::vector<HppcRecord> hppc;
  double initial_capacity_ah = 0.0;

  // RPT stamps must be non-decreasing and within [0, cycles.size()].
  void validate() const;
};

}  // namespace slsoh
