#include "slsoh/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>

#include "slsoh/error.hpp"
#include "text_util.hpp"

namespace slsoh {

namespace {

template <typename FV>
auto* field_ptr(FV& fv, std::string_view name) {
  if (name == kFeatureNames[0]) return &fv.q_initial_c20_ah;
  if (name == kFeatureNames[1]) return &fv.q_ah_aging_ah;
  if (name == kFeatureNames[2]) return &fv.e_ch_aging_wh;
  if (name == kFeatureNames[3]) return &fv.r0_ch_ch_low_2s_ohm;
  if (name == kFeatureNames[4]) return &fv.r0_dis_ch_high_2s_ohm;
  if (name == kFeatureNames[5]) return &fv.t_aging_c;
  throw InvalidArgument("unknown feature '" + std::string(name) + "'");
}

// First maximal run inside `span` whose samples satisfy pred.
template <typename Pred>
IndexSpan first_run(IndexSpan span, Pred pred) {
  std::size_t i = span.begin;
  while (i < span.end && !pred(i)) ++i;
  std::size_t j = i;
  while (j < span.end && pred(j)) ++j;
  return {i, j};
}

}  // namespace

std::vector<std::string> all_feature_names() {
  return {kFeatureNames.begin(), kFeatureNames.end()};
}

double feature_value(const FeatureVector& fv, std::string_view name) {
  return *field_ptr(fv, name);
}

void set_feature_value(FeatureVector& fv, std::string_view name, double value) {
  *field_ptr(fv, name) = value;
}

// ---------------------------------------------------------------------------

double q_ah_aging(const AgingCycle& cycle) {
  const TimeSeries& s = *cycle.series;
  return integrate_abs_current(s, cycle.t0_s, cycle.t1_s) +
         integrate_abs_current(s, cycle.t1_s, cycle.t2_s) +
         integrate_abs_current(s, cycle.t2_s, cycle.t3_s);
}

double e_ch_aging(const AgingCycle& cycle) {
  return integrate_power(*cycle.series, cycle.t2_s, cycle.t3_s);
}

double t_aging(const AgingCycle& cycle) {
  return mean_temperature(*cycle.series, cycle.t0_s, cycle.t3_s);
}

// ---------------------------------------------------------------------------

HppcResistances hppc_resistances(const HppcRecord& rec, double min_current_step_a) {
  const auto ohms = [&](const HppcPulse& p, const char* name) {
    if (!(std::abs(p.delta_i) >= min_current_step_a))
      throw DataError(std::string("degenerate HPPC pulse (") + name + "): |delta_i| = " +
                      format_double(std::abs(p.delta_i)) + " A below floor");
    return std::abs(p.delta_v) / std::abs(p.delta_i);
  };
  return {ohms(rec.discharge_high, "R1 discharge/high"), ohms(rec.charge_low, "R2 charge/low")};
}

HppcRecord extract_hppc_record(const TimeSeries& series, IndexSpan span,
                               const HppcExtractConfig& cfg) {
  if (span.empty() || span.end > series.size())
    throw InvalidArgument("HPPC span outside series");
  const auto is_rest = [&](std::size_t i) {
    return std::abs(series[i].current_a) <= cfg.rest_current_a;
  };

  std::optional<HppcPulse> dis_high, chg_low;
  std::size_t i = span.begin + 1;
  while (i < span.end) {
    if (is_rest(i) || !is_rest(i - 1)) {
      ++i;
      continue;
    }
    const bool charge = series[i].current_a > 0.0;
    std::size_t j = i;
    while (j < span.end && !is_rest(j) && (series[j].current_a > 0.0) == charge) ++j;
    const double onset = series[i].time_s;
    const double duration = series[j - 1].time_s - onset;
    if (duration >= cfg.read_at_s && duration <= cfg.max_pulse_s) {
      const Sample& rest = series[i - 1];
      const double t_read = onset + cfg.read_at_s;
      HppcPulse p;
      p.onset_time_s = onset;
      p.delta_v = voltage_at(series, t_read) - rest.voltage_v;
      p.delta_i = current_at(series, t_read) - rest.current_a;
      p.soc = rest.voltage_v < cfg.soc_split_voltage_v ? SocContext::low : SocContext::high;
      if (!charge && p.soc == SocContext::high && !dis_high) dis_high = p;
      if (charge && p.soc == SocContext::low && !chg_low) chg_low = p;
    }
    i = j;
  }
  if (!dis_high) throw DataError("HPPC test lacks a discharge pulse at high SOC");
  if (!chg_low) throw DataError("HPPC test lacks a charge pulse at low SOC");

  HppcRecord rec;
  rec.discharge_high = *dis_high;
  rec.charge_low = *chg_low;
  rec.start_time_s = series[span.begin].time_s;
  return rec;
}

// ---------------------------------------------------------------------------

C20Record extract_c20_record(const TimeSeries& series, IndexSpan span) {
  if (span.empty() || span.end > series.size()) throw InvalidArgument("C/20 span outside series");
  const bool labeled = series.has_labels();
  const IndexSpan charge = first_run(span, [&](std::size_t i) {
    return labeled ? series.label(i) == StepLabel::c20_chg : series[i].current_a > 0.0;
  });
  const IndexSpan discharge = first_run(span, [&](std::size_t i) {
    return labeled ? series.label(i) == StepLabel::c20_dchg : series[i].current_a < 0.0;
  });
  if (charge.size() < 2) throw DataError("C/20 charge span not found");

  C20Record rec;
  rec.charge_span = charge;
  rec.discharge_span = discharge;
  rec.start_time_s = series[span.begin].time_s;
  const double t_first = series[span.begin].time_s;
  const double t_last = series[span.end - 1].time_s;
  rec.mean_temperature_c = span.size() > 1 ? mean_temperature(series, t_first, t_last)
                                           : series[span.begin].temperature_c;
  rec.charge_capacity_ah = integrate_abs_current(series, series[charge.begin].time_s,
                                                 series[charge.end - 1].time_s);
  if (!(rec.charge_capacity_ah > 0.0)) throw DataError("C/20 charge capacity is zero");
  return rec;
}

double q_c20_charge_capacity(const TimeSeries& series) {
  return extract_c20_record(series, {0, series.size()}).charge_capacity_ah;
}

// ---------------------------------------------------------------------------

CellDataset assemble_dataset(const std::string& cell_id, std::shared_ptr<const TimeSeries> aging,
                             const TimeSeries& c20, const TimeSeries& hppc,
                             const DatasetConfig& cfg) {
  CellDataset ds;
  ds.cell_id = cell_id;
  ds.cycles = segment_aging_cycles(std::move(aging), cfg.segmentation);

  const auto position_at = [&](double t) {
    const auto it = std::partition_point(ds.cycles.begin(), ds.cycles.end(),
                                         [&](const AgingCycle& c) { return c.t3_s <= t; });
    return static_cast<std::size_t>(it - ds.cycles.begin());
  };

  for (const IndexSpan& span : split_on_gaps(c20, cfg.test_gap_s)) {
    C20Record rec = extract_c20_record(c20, span);
    rec.cycle_position = position_at(rec.start_time_s);
    ds.c20.push_back(rec);
  }
  for (const IndexSpan& span : split_on_gaps(hppc, cfg.test_gap_s)) {
    HppcRecord rec = extract_hppc_record(hppc, span, cfg.hppc);
    rec.cycle_position = position_at(rec.start_time_s);
    ds.hppc.push_back(rec);
  }
  if (ds.c20.empty()) throw DataError("no C/20 test found for cell '" + cell_id + "'");
  ds.initial_capacity_ah = ds.c20.front().charge_capacity_ah;
  ds.validate();
  return ds;
}

std::vector<LabeledSnapshot> build_snapshots(const CellDataset& dataset,
                                             const AlignmentConfig& align,
                                             std::vector<std::string>* warnings) {
  if (dataset.c20.empty()) throw DataError("dataset has no C/20 record");
  if (dataset.hppc.empty()) throw DataError("dataset has no HPPC record");
  dataset.validate();

  const std::size_t n = dataset.cycles.size();
  std::vector<double> q_prefix(n + 1, 0.0), e_prefix(n + 1, 0.0), temps(n);
  for (std::size_t k = 0; k < n; ++k) {
    const AgingCycle& c = dataset.cycles[k];
    q_prefix[k + 1] = q_prefix[k] + q_ah_aging(c);
    e_prefix[k + 1] = e_prefix[k] + e_ch_aging(c);
    temps[k] = t_aging(c);
  }

  std::vector<LabeledSnapshot> out;
  std::optional<double> last_t_aging;
  std::size_t block_start = 0;
  for (const C20Record& rpt : dataset.c20) {
    const std::size_t pos = rpt.cycle_position;

    double t_block;
    if (pos > block_start) {
      double sum = 0.0;
      for (std::size_t k = block_start; k < pos; ++k) sum += temps[k];
      t_block = sum / static_cast<double>(pos - block_start);
    } else {
      t_block = last_t_aging.value_or(rpt.mean_temperature_c);
    }
    last_t_aging = t_block;
    block_start = pos;

    const HppcRecord* hppc = nullptr;
    for (const HppcRecord& h : dataset.hppc)
      if (h.cycle_position <= pos) hppc = &h;
    if (hppc == nullptr) {
      if (warnings)
        warnings->push_back("cell '" + dataset.cell_id + "': no HPPC at or before RPT at cycle " +
                            std::to_string(pos) + "; snapshot dropped");
      continue;
    }
    const HppcResistances r = hppc_resistances(*hppc, align.min_current_step_a);

    LabeledSnapshot snap;
    snap.cell_id = dataset.cell_id;
    snap.cycle_index = pos;
    snap.features.q_initial_c20_ah = dataset.initial_capacity_ah;
    snap.features.q_ah_aging_ah = q_prefix[pos];
    snap.features.e_ch_aging_wh = e_prefix[pos];
    snap.features.r0_ch_ch_low_2s_ohm = r.r0_ch_ch_low_2s_ohm;
    snap.features.r0_dis_ch_high_2s_ohm = r.r0_dis_ch_high_2s_ohm;
    snap.features.t_aging_c = t_block;
    snap.label_q_ch_c20_ah = rpt.charge_capacity_ah;
    out.push_back(std::move(snap));
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_snapshots_csv(std::ostream& out, std::span<const LabeledSnapshot> snapshots) {
  out << kSnapshotCsvHeader << '\n';
  for (const auto& s : snapshots) {
    out << s.cell_id << ',' << s.cycle_index;
    for (const auto name : kFeatureNames) out << ',' << format_double(feature_value(s.features, name));
    out << ',' << format_double(s.label_q_ch_c20_ah) << '\n';
  }
}

std::vector<LabeledSnapshot> read_snapshots_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no)) throw MissingInput("snapshot CSV is empty");
  if (detail::trim(line) != kSnapshotCsvHeader)
    throw SchemaError("snapshot CSV header mismatch");

  std::vector<LabeledSnapshot> out;
  while (detail::next_line(in, line, line_no)) {
    const auto f = detail::split_fields(line);
    if (f.size() != 9) throw ParseError(line_no, "expected 9 fields");
    LabeledSnapshot s;
    s.cell_id = std::string(f[0]);
    if (s.cell_id.empty()) throw ParseError(line_no, "empty cell_id");
    const auto idx = detail::parse_index(f[1]);
    if (!idx) throw ParseError(line_no, "invalid cycle_index");
    s.cycle_index = *idx;
    for (std::size_t k = 0; k < kFeatureNames.size(); ++k) {
      const auto v = detail::parse_number(f[2 + k]);
      if (!v || !std::isfinite(*v))
        throw ParseError(line_no, "invalid value for " + std::string(kFeatureNames[k]));
      set_feature_value(s.features, kFeatureNames[k], *v);
    }
    const auto label = detail::parse_number(f[8]);
    if (!label || !(*label > 0.0)) throw ParseError(line_no, "label must be positive");
    s.label_q_ch_c20_ah = *label;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace slsoh
