#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slsoh/data_model.hpp"

namespace slsoh {

// The six features the SOH model consumes.
struct FeatureVector {
  double q_initial_c20_ah = 0.0;
  double q_ah_aging_ah = 0.0;
  double e_ch_aging_wh = 0.0;
  double r0_ch_ch_low_2s_ohm = 0.0;
  double r0_dis_ch_high_2s_ohm = 0.0;
  double t_aging_c = 0.0;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline constexpr std::array<std::string_view, 6> kFeatureNames = {
    "q_initial_c20_ah",    "q_ah_aging_ah",         "e_ch_aging_wh",
    "r0_ch_ch_low_2s_ohm", "r0_dis_ch_high_2s_ohm", "t_aging_c",
};

std::vector<std::string> all_feature_names();

// Throws InvalidArgument for a name outside kFeatureNames.
double feature_value(const FeatureVector& fv, std::string_view name);
void set_feature_value(FeatureVector& fv, std::string_view name, double value);

struct LabeledSnapshot {
  std::string cell_id;
  std::size_t cycle_index = 0;
  FeatureVector features;
  double label_q_ch_c20_ah = 0.0;

  friend bool operator==(const LabeledSnapshot&, const LabeledSnapshot&) = default;
};

// ---------------------------------------------------------------------------
// Per-cycle features.

// Ah throughput of one cycle: |I| integrated over the three segments.
double q_ah_aging(const AgingCycle& cycle);
// Charge energy of one cycle: |I3 V3| integrated over [t2, t3].
double e_ch_aging(const AgingCycle& cycle);
// Time-weighted mean temperature over [t0, t3].
double t_aging(const AgingCycle& cycle);

// ---------------------------------------------------------------------------
// HPPC.

struct HppcResistances {
  double r0_dis_ch_high_2s_ohm = 0.0;
  double r0_ch_ch_low_2s_ohm = 0.0;
};

// Ohm's-law resistances from the 2 s pulse edges, reported as magnitudes.
// Throws DataError when either |delta_i| is below min_current_step_a.
HppcResistances hppc_resistances(const HppcRecord& rec, double min_current_step_a = 0.1);

struct HppcExtractConfig {
  double rest_current_a = 0.1;  // |I| at or below this counts as rest
  double max_pulse_s = 30.0;    // longer excitations are SOC moves, not pulses
  double read_at_s = 2.0;
  double soc_split_voltage_v = 3.5;  // pre-pulse rest voltage below this is "low" SOC
};

// Locates the discharge pulse at high SOC and the charge pulse at low SOC in
// one HPPC test occupying `span` of the series.
HppcRecord extract_hppc_record(const TimeSeries& series, IndexSpan span,
                               const HppcExtractConfig& cfg = {});

// ---------------------------------------------------------------------------
// C/20 capacity test.

// One C/20 test occupying `span`. The charge span is the c20_chg-labeled run,
// or the first run of positive current for unlabeled data.
C20Record extract_c20_record(const TimeSeries& series, IndexSpan span);

// Coulomb-counted charge capacity of a series holding one C/20 test.
double q_c20_charge_capacity(const TimeSeries& series);

// ---------------------------------------------------------------------------
// Dataset assembly and snapshot alignment.

struct DatasetConfig {
  SegmentationConfig segmentation;
  HppcExtractConfig hppc;
  // Separate tests inside one C/20 or HPPC file are split at time gaps larger
  // than this.
  double test_gap_s = 3600.0;
};

// Segments the aging stream, splits the RPT streams into individual tests,
// and stamps each test with the number of cycles completed before it starts.
CellDataset assemble_dataset(const std::string& cell_id, std::shared_ptr<const TimeSeries> aging,
                             const TimeSeries& c20, const TimeSeries& hppc,
                             const DatasetConfig& cfg = {});

struct AlignmentConfig {
  double min_current_step_a = 0.1;
};

// One snapshot per C/20 record. Cumulative features sum every cycle before
// the RPT, resistances come from the latest HPPC at or before it, and T_aging
// averages the per-cycle means of the preceding inter-RPT block. Snapshots
// without a usable HPPC are dropped and reported through `warnings`.
std::vector<LabeledSnapshot> build_snapshots(const CellDataset& dataset,
                                             const AlignmentConfig& align = {},
                                             std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Snapshot CSV.

inline constexpr std::string_view kSnapshotCsvHeader =
    "cell_id,cycle_index,q_initial_c20_ah,q_ah_aging_ah,e_ch_aging_wh,r0_ch_ch_low_2s_ohm,"
    "r0_dis_ch_high_2s_ohm,t_aging_c,label_q_ch_c20_ah";

void write_snapshots_csv(std::ostream& out, std::span<const LabeledSnapshot> snapshots);
std::vector<LabeledSnapshot> read_snapshots_csv(std::istream& in);

}  // namespace slsoh
