#include "slsoh/plant_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slsoh/error.hpp"
#include "slsoh/random.hpp"

namespace slsoh {

namespace {

struct Point {
  double current_a;
  double voltage_v;
};

// Accumulates protocol steps into one telemetry stream. Every step emits its
// first sample at its start time, grid samples every dt, and a final sample at
// its exact end time.
class Emitter {
 public:
  Emitter(double t_start, double temp_c) : t_start_(t_start), temp_c_(temp_c) {}

  template <typename Profile>
  double step(double duration, double dt, StepLabel label, Profile profile) {
    const double t0 = started_ ? end_ + kStepTransitionS : t_start_;
    const double guard = 1e-6 * dt;
    for (std::size_t k = 0;; ++k) {
      const double tau = static_cast<double>(k) * dt;
      if (tau >= duration - guard) break;
      push(t0 + tau, profile(tau), label);
    }
    push(t0 + duration, profile(duration), label);
    end_ = t0 + duration;
    started_ = true;
    return t0;
  }

  double end() const { return end_; }

  TimeSeries finish(const std::string& cell_id) {
    return TimeSeries(cell_id, std::move(samples_), std::move(labels_));
  }

 private:
  void push(double t, Point p, StepLabel label) {
    samples_.push_back({t, p.current_a, p.voltage_v, temp_c_});
    labels_.push_back(label);
  }

  double t_start_;
  double temp_c_;
  double end_ = 0.0;
  bool started_ = false;
  std::vector<Sample> samples_;
  std::vector<StepLabel> labels_;
};

double window(const CellParams& p) { return p.ocv_hi_v - p.ocv_lo_v; }
double ocv(const CellParams& p, double soc) { return p.ocv_lo_v + window(p) * soc; }

double temperature_factor(const CellParams& p, double temp_c) {
  return std::max(0.05, 1.0 + p.r0_temp_coeff * (temp_c - p.t_ref_c));
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

void CellParams::validate() const {
  if (!(q0_ah > 0.0)) throw InvalidArgument("cell '" + cell_id + "': q0_ah must be positive");
  if (!(r0_ohm >= 0.0))
    throw InvalidArgument("cell '" + cell_id + "': r0_ohm must be non-negative");
  if (!(ocv_lo_v < ocv_hi_v))
    throw InvalidArgument("cell '" + cell_id + "': ocv_lo_v must be below ocv_hi_v");
  if (rc_r_ohm < 0.0 || !(rc_tau_s > 0.0))
    throw InvalidArgument("cell '" + cell_id + "': invalid relaxation branch");
  if (fade_per_ah < 0.0)
    throw InvalidArgument("cell '" + cell_id + "': fade_per_ah must be non-negative");
}

void SeasonalTemperature::validate() const {
  if (amplitude_c < 0.0) throw InvalidArgument("amplitude_c must be non-negative");
  if (!(period_days > 0.0)) throw InvalidArgument("period_days must be positive");
  if (daily_jitter_c < 0.0) throw InvalidArgument("daily_jitter_c must be non-negative");
}

double SeasonalTemperature::at(double day) const {
  return mean_c + amplitude_c * std::sin(2.0 * std::numbers::pi * (day - phase_days) / period_days);
}

double true_capacity(const CellParams& params, double temp_c, double throughput_ah) {
  const double q = params.q0_ah * (1.0 + params.cap_temp_coeff * (temp_c - params.t_ref_c)) *
                   (1.0 - params.fade_per_ah * throughput_ah);
  return std::max(0.0, q);
}

double series_resistance(const CellParams& params, double temp_c) {
  return params.r0_ohm * temperature_factor(params, temp_c);
}

double relaxation_resistance(const CellParams& params, double temp_c) {
  return params.rc_r_ohm * temperature_factor(params, temp_c);
}

// ---------------------------------------------------------------------------

GeneratedCycle generate_aging_cycle(const CellParams& params, double temp_c, double dt_s,
                                    double t_start_s, double start_soc, double throughput_ah) {
  params.validate();
  if (!(dt_s > 0.0)) throw InvalidArgument("dt_s must be positive");
  if (!(start_soc > 0.5 && start_soc <= 1.0))
    throw InvalidArgument("aging cycle must start above 50% SOC");

  const double q = true_capacity(params, temp_c, throughput_ah);
  const double r0 = series_resistance(params, temp_c);
  const double w = window(params);
  const double i_1c = params.q0_ah;
  const double i_c2 = 0.5 * params.q0_ah;
  const double as = q * 3600.0;  // ampere-seconds per unit SOC

  // Terminal-voltage cutoffs expressed in SOC.
  const double soc_dchg_end = i_c2 * r0 / w;
  const double soc_chg_end = 1.0 - i_c2 * r0 / w;
  if (!(q > 0.0) || soc_dchg_end >= 0.5)
    throw InvalidArgument("cell '" + params.cell_id +
                          "': series resistance drop exceeds the OCV window");

  Emitter em(t_start_s, temp_c);
  AgingCycleTruth truth;

  const double d1 = (start_soc - 0.5) * as / i_1c;
  truth.t0_s = em.step(d1, dt_s, StepLabel::aging_dchg_1c, [&](double tau) {
    return Point{-i_1c, ocv(params, start_soc - i_1c * tau / as) - i_1c * r0};
  });
  truth.t1_s = em.end();

  const double d2 = (0.5 - soc_dchg_end) * as / i_c2;
  em.step(d2, dt_s, StepLabel::aging_dchg_c2, [&](double tau) {
    return Point{-i_c2, ocv(params, 0.5 - i_c2 * tau / as) - i_c2 * r0};
  });
  truth.t2_s = em.end();

  const double d3 = (soc_chg_end - soc_dchg_end) * as / i_c2;
  em.step(d3, dt_s, StepLabel::aging_chg_c2, [&](double tau) {
    return Point{i_c2, ocv(params, soc_dchg_end + i_c2 * tau / as) + i_c2 * r0};
  });
  truth.t3_s = em.end();

  truth.throughput_ah = (i_1c * d1 + i_c2 * d2 + i_c2 * d3) / 3600.0;
  // V3 is linear in time, so the charge energy has a closed form.
  const double v3_start = ocv(params, soc_dchg_end) + i_c2 * r0;
  const double v3_end = ocv(params, soc_chg_end) + i_c2 * r0;
  truth.charge_energy_wh = i_c2 * 0.5 * (v3_start + v3_end) * d3 / 3600.0;

  return GeneratedCycle{em.finish(params.cell_id), truth};
}

void HppcConfig::validate() const {
  if (!(low_soc > 0.0 && low_soc < high_soc && high_soc < 1.0))
    throw InvalidArgument("HPPC setpoints must satisfy 0 < low < high < 1");
  if (!(pulse_c_rate > 0.0) || !(pulse_s > 2.0) || !(rest_s > 0.0) || !(step_c_rate > 0.0) ||
      !(dt_s > 0.0))
    throw InvalidArgument("HPPC currents and durations must be positive (pulse longer than 2 s)");
}

TimeSeries generate_hppc(const CellParams& params, double temp_c, const HppcConfig& cfg,
                         double t_start_s, double throughput_ah) {
  params.validate();
  cfg.validate();
  const double q = true_capacity(params, temp_c, throughput_ah);
  if (!(q > 0.0)) throw InvalidArgument("cell capacity is zero at this temperature");
  const double r0 = series_resistance(params, temp_c);
  const double rct = cfg.relaxation ? relaxation_resistance(params, temp_c) : 0.0;
  const double tau_c = params.rc_tau_s;
  const double i_pulse = cfg.pulse_c_rate * params.q0_ah;
  const double i_step = cfg.step_c_rate * params.q0_ah;

  Emitter em(t_start_s, temp_c);
  double soc = cfg.low_soc;
  double v_rc = 0.0;  // relaxation branch voltage at the start of the step

  // Constant-current step: the RC branch relaxes toward current * rct.
  const auto rc_at = [&](double current, double tau) {
    return current * rct + (v_rc - current * rct) * std::exp(-tau / tau_c);
  };
  const auto hold = [&](double current, double duration, StepLabel label, bool moves_soc) {
    const double soc0 = soc;
    em.step(duration, cfg.dt_s, label, [&](double tau) {
      const double s = moves_soc ? soc0 + current * tau / (q * 3600.0) : soc0;
      return Point{current, ocv(params, s) + current * r0 + rc_at(current, tau)};
    });
    v_rc = rc_at(current, duration);
    if (moves_soc) soc = soc0 + current * duration / (q * 3600.0);
  };
  const auto pulse_pair = [&] {
    hold(0.0, cfg.rest_s, StepLabel::rest, false);
    hold(-i_pulse, cfg.pulse_s, StepLabel::hppc, false);
    hold(0.0, cfg.rest_s, StepLabel::rest, false);
    hold(i_pulse, cfg.pulse_s, StepLabel::hppc, false);
    hold(0.0, cfg.rest_s, StepLabel::rest, false);
  };

  pulse_pair();
  hold(i_step, (cfg.high_soc - cfg.low_soc) * q * 3600.0 / i_step, StepLabel::hppc, true);
  pulse_pair();
  return em.finish(params.cell_id);
}

void C20Config::validate() const {
  if (!(dt_s > 0.0) || !(c_rate > 0.0) || !(rest_s >= 0.0))
    throw InvalidArgument("C/20 test parameters must be positive");
  if (cv_hold && !(cv_cutoff_c_rate > 0.0 && cv_cutoff_c_rate < c_rate))
    throw InvalidArgument("CV cutoff must lie between zero and the test C-rate");
}

TimeSeries generate_c20_test(const CellParams& params, double temp_c, const C20Config& cfg,
                             double t_start_s, double throughput_ah) {
  params.validate();
  cfg.validate();
  const double q = true_capacity(params, temp_c, throughput_ah);
  if (!(q > 0.0)) throw InvalidArgument("cell capacity is zero at this temperature");
  const double r0 = series_resistance(params, temp_c);
  const double w = window(params);
  const double as = q * 3600.0;
  const double i_cc = cfg.c_rate * params.q0_ah;
  const double i_cut = cfg.cv_cutoff_c_rate * params.q0_ah;
  const double tau_cv = r0 * as / w;  // CV current decay constant with linear OCV
  const double cv_duration = cfg.cv_hold ? tau_cv * std::log(i_cc / i_cut) : 0.0;
  const double soc_drop = i_cc * r0 / w;  // SOC offset at a CC voltage cutoff
  if (soc_drop >= 0.5)
    throw InvalidArgument("cell '" + params.cell_id +
                          "': series resistance drop exceeds the OCV window");

  Emitter em(t_start_s, temp_c);
  em.step(0.0, cfg.dt_s, StepLabel::rest, [&](double) { return Point{0.0, ocv(params, 1.0)}; });

  // CC discharge to the lower cutoff, then hold at ocv_lo_v.
  em.step((1.0 - soc_drop) * as / i_cc, cfg.dt_s, StepLabel::c20_dchg, [&](double tau) {
    return Point{-i_cc, ocv(params, 1.0 - i_cc * tau / as) - i_cc * r0};
  });
  double soc = soc_drop;
  if (cv_duration > 0.0) {
    em.step(cv_duration, cfg.dt_s, StepLabel::c20_dchg, [&](double tau) {
      return Point{-i_cc * std::exp(-tau / tau_cv), params.ocv_lo_v};
    });
    soc = soc_drop * std::exp(-cv_duration / tau_cv);
  }

  em.step(cfg.rest_s, cfg.dt_s, StepLabel::rest, [&](double) { return Point{0.0, ocv(params, soc)}; });

  // CC charge to the upper cutoff, then hold at ocv_hi_v.
  const double soc_cc_end = 1.0 - soc_drop;
  const double soc0 = soc;
  em.step((soc_cc_end - soc0) * as / i_cc, cfg.dt_s, StepLabel::c20_chg, [&](double tau) {
    return Point{i_cc, ocv(params, soc0 + i_cc * tau / as) + i_cc * r0};
  });
  soc = soc_cc_end;
  if (cv_duration > 0.0) {
    em.step(cv_duration, cfg.dt_s, StepLabel::c20_chg, [&](double tau) {
      return Point{i_cc * std::exp(-tau / tau_cv), params.ocv_hi_v};
    });
    soc = 1.0 - soc_drop * std::exp(-cv_duration / tau_cv);
  }
  em.step(0.0, cfg.dt_s, StepLabel::rest, [&](double) { return Point{0.0, ocv(params, soc)}; });
  return em.finish(params.cell_id);
}

// ---------------------------------------------------------------------------

void CampaignSchedule::validate() const {
  if (months < 1) throw InvalidArgument("months must be at least 1");
  if (cycles_per_month < 1) throw InvalidArgument("cycles_per_month must be at least 1");
  if (rpt_every_n_cycles < 1) throw InvalidArgument("rpt_every_n_cycles must be at least 1");
  if (!(days_per_month > 0.0) || !(aging_dt_s > 0.0) || rest_after_cycle_s < 0.0)
    throw InvalidArgument("campaign timing parameters must be positive");
  c20.validate();
  hppc.validate();
}

std::vector<CellParams> default_fleet() {
  struct Row {
    const char* id;
    double q0;
    double r0;
  };
  // Capacities follow the initial C/20 charge capacities of a published
  // second-life fleet; resistances are representative of large pouch cells.
  constexpr Row rows[] = {
      {"1.1", 20.27, 0.00230}, {"1.2", 17.42, 0.00265}, {"1.3", 19.57, 0.00240},
      {"1.4", 18.93, 0.00250}, {"2.1", 25.04, 0.00185}, {"2.2", 23.65, 0.00195},
      {"2.3", 22.87, 0.00205}, {"2.4", 17.59, 0.00260},
  };
  std::vector<CellParams> fleet;
  for (const Row& r : rows) {
    CellParams p;
    p.cell_id = r.id;
    p.q0_ah = r.q0;
    p.r0_ohm = r.r0;
    fleet.push_back(p);
  }
  return fleet;
}

std::vector<SimulatedCell> simulate_campaign(const CampaignConfig& cfg) {
  cfg.season.validate();
  cfg.schedule.validate();
  if (cfg.fleet.empty()) throw InvalidArgument("campaign fleet is empty");
  for (const auto& p : cfg.fleet) p.validate();

  const CampaignSchedule& sch = cfg.schedule;
  const std::size_t total_cycles = static_cast<std::size_t>(sch.months) *
                                   static_cast<std::size_t>(sch.cycles_per_month);
  const std::size_t rpt_every = static_cast<std::size_t>(sch.rpt_every_n_cycles);
  const double spacing_days = sch.days_per_month / sch.cycles_per_month;
  constexpr double kDay = 86400.0;

  std::vector<SimulatedCell> out;
  out.reserve(cfg.fleet.size());
  for (std::size_t idx = 0; idx < cfg.fleet.size(); ++idx) {
    const CellParams& params = cfg.fleet[idx];
    Rng rng(cell_seed(cfg.seed, idx));
    const auto draw_temperature = [&](double t_s) {
      const double jitter = cfg.season.daily_jitter_c > 0.0
                                ? uniform(rng, -cfg.season.daily_jitter_c, cfg.season.daily_jitter_c)
                                : 0.0;
      return cfg.season.at(t_s / kDay) + jitter;
    };

    SimulatedCell cell;
    cell.params = params;
    std::vector<Sample> aging, c20, hppc;
    std::vector<StepLabel> aging_l, c20_l, hppc_l;
    const auto append = [](std::vector<Sample>& s, std::vector<StepLabel>& l, const TimeSeries& ts) {
      s.insert(s.end(), ts.samples().begin(), ts.samples().end());
      l.insert(l.end(), ts.step_labels().begin(), ts.step_labels().end());
    };

    double clock = 0.0;
    double throughput = 0.0;
    const auto run_rpt = [&](std::size_t position) {
      const double start = std::max(clock, static_cast<double>(position) * spacing_days * kDay);
      const double temp = draw_temperature(start);
      const TimeSeries c = generate_c20_test(params, temp, sch.c20, start, throughput);
      const double hppc_start = c.end_time() + sch.rest_after_cycle_s;
      const TimeSeries h = generate_hppc(params, temp, sch.hppc, hppc_start, throughput);
      append(c20, c20_l, c);
      append(hppc, hppc_l, h);
      cell.rpt_truth.push_back(
          {position, start, temp, throughput, true_capacity(params, temp, throughput)});
      clock = h.end_time() + sch.rest_after_cycle_s;
    };

    run_rpt(0);
    for (std::size_t c = 0; c < total_cycles; ++c) {
      const double nominal = (static_cast<double>(c) + 0.5) * spacing_days * kDay;
      // Leading rest sample so the idle gap before the cycle integrates to zero.
      const double start = std::max(clock + 1.0, nominal);
      const double temp = draw_temperature(start);
      aging.push_back({start - kStepTransitionS, 0.0, params.ocv_hi_v, temp});
      aging_l.push_back(StepLabel::rest);
      GeneratedCycle gc = generate_aging_cycle(params, temp, sch.aging_dt_s, start, 1.0, throughput);
      append(aging, aging_l, gc.series);
      // Trailing rest after the charge.
      const double rest_v = gc.series[gc.series.size() - 1].voltage_v -
                            0.5 * params.q0_ah * series_resistance(params, temp);
      const double rest_start = gc.truth.t3_s + kStepTransitionS;
      aging.push_back({rest_start, 0.0, rest_v, temp});
      aging_l.push_back(StepLabel::rest);
      if (sch.rest_after_cycle_s > kStepTransitionS) {
        aging.push_back({gc.truth.t3_s + sch.rest_after_cycle_s, 0.0, rest_v, temp});
        aging_l.push_back(StepLabel::rest);
      }
      clock = aging.back().time_s;
      throughput += gc.truth.throughput_ah;
      cell.cycle_truth.push_back(gc.truth);
      cell.cycle_temperature_c.push_back(temp);
      if ((c + 1) % rpt_every == 0 || c + 1 == total_cycles) run_rpt(c + 1);
    }

    cell.aging = std::make_shared<const TimeSeries>(params.cell_id, std::move(aging), std::move(aging_l));
    cell.c20 = std::make_shared<const TimeSeries>(params.cell_id, std::move(c20), std::move(c20_l));
    cell.hppc = std::make_shared<const TimeSeries>(params.cell_id, std::move(hppc), std::move(hppc_l));
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace slsoh
