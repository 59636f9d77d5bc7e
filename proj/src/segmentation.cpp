#include <algorithm>
#include <cmath>

#include "slsoh/data_model.hpp"
#include "slsoh/error.hpp"

namespace slsoh {

namespace {

enum class Plateau { discharge_1c, discharge_c2, charge_c2, rest, other };

Plateau from_label(StepLabel label) {
  switch (label) {
    case StepLabel::aging_dchg_1c: return Plateau::discharge_1c;
    case StepLabel::aging_dchg_c2: return Plateau::discharge_c2;
    case StepLabel::aging_chg_c2: return Plateau::charge_c2;
    case StepLabel::rest: return Plateau::rest;
    default: return Plateau::other;
  }
}

Plateau from_current(double current, double one_c, double tol) {
  if (std::abs(current + one_c) <= tol) return Plateau::discharge_1c;
  if (std::abs(current + 0.5 * one_c) <= tol) return Plateau::discharge_c2;
  if (std::abs(current - 0.5 * one_c) <= tol) return Plateau::charge_c2;
  if (std::abs(current) <= tol) return Plateau::rest;
  return Plateau::other;
}

std::size_t run_end(const std::vector<Plateau>& cls, std::size_t i, Plateau p) {
  while (i < cls.size() && cls[i] == p) ++i;
  return i;
}

}  // namespace

std::vector<AgingCycle> segment_aging_cycles(std::shared_ptr<const TimeSeries> series,
                                             const SegmentationConfig& cfg) {
  if (!series) throw InvalidArgument("segment_aging_cycles: null series");
  if (!(cfg.tolerance_fraction > 0.0 && cfg.tolerance_fraction < 0.25))
    throw InvalidArgument("segmentation tolerance must lie in (0, 0.25)");
  const TimeSeries& ts = *series;

  double one_c = cfg.one_c_current_a;
  if (!(one_c > 0.0)) {
    one_c = 0.0;
    for (const Sample& s : ts.samples())
      if (s.current_a < 0.0) one_c = std::max(one_c, -s.current_a);
  }
  if (!(one_c > 0.0)) return {};  // no discharge at all: pure rest or charge only
  const double tol = cfg.tolerance_fraction * one_c;

  const bool labeled = cfg.use_labels && ts.has_labels();
  std::vector<Plateau> cls(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    cls[i] = labeled ? from_label(ts.label(i)) : from_current(ts[i].current_a, one_c, tol);

  const bool excited = std::any_of(cls.begin(), cls.end(), [](Plateau p) {
    return p == Plateau::discharge_1c || p == Plateau::discharge_c2 || p == Plateau::charge_c2;
  });
  if (!excited) return {};

  const auto check_band = [&](const IndexSpan& span, double nominal, const char* name) {
    for (std::size_t i = span.begin; i < span.end; ++i) {
      if (std::abs(ts[i].current_a - nominal) > tol)
        throw DataError(std::string("aging segment ") + name + " current " +
                        format_double(ts[i].current_a) + " A at t=" +
                        format_double(ts[i].time_s) + " s outside tolerance band around " +
                        format_double(nominal) + " A");
    }
  };

  std::vector<AgingCycle> cycles;
  std::size_t i = 0;
  while (i < cls.size()) {
    if (cls[i] != Plateau::discharge_1c) {
      ++i;
      continue;
    }
    const IndexSpan s1{i, run_end(cls, i, Plateau::discharge_1c)};
    const IndexSpan s2{s1.end, run_end(cls, s1.end, Plateau::discharge_c2)};
    const IndexSpan s3{s2.end, run_end(cls, s2.end, Plateau::charge_c2)};
    // A complete cycle has all three plateaus and is followed by at least one
    // sample that ends the charge; a stream ending mid-charge is rejected.
    const bool complete = !s2.empty() && s3.size() >= 2 && s3.end < cls.size();
    if (!complete) {
      i = std::max(s3.end, s1.end);
      continue;
    }
    if (labeled) {
      check_band(s1, -one_c, "1C discharge");
      check_band(s2, -0.5 * one_c, "C/2 discharge");
      check_band(s3, 0.5 * one_c, "C/2 charge");
    }
    AgingCycle c;
    c.series = series;
    c.segment1 = s1;
    c.segment2 = s2;
    c.segment3 = s3;
    c.t0_s = ts[s1.begin].time_s;
    c.t1_s = ts[s2.begin].time_s;
    c.t2_s = ts[s3.begin].time_s;
    c.t3_s = ts[s3.end - 1].time_s;
    c.validate();
    cycles.push_back(std::move(c));
    i = s3.end;
  }
  if (cycles.empty()) throw DataError("no complete aging cycle found in '" + ts.cell_id() + "'");
  return cycles;
}

}  // namespace slsoh
