#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "slsoh/data_model.hpp"

namespace slsoh {

// Synthetic cell: linear OCV over the derated window, temperature-dependent
// series resistance, and one RC relaxation branch that is only excited by
// HPPC pulses.
struct CellParams {
  std::string cell_id = "cell";
  double q0_ah = 20.0;           // capacity at t_ref_c
  double r0_ohm = 0.002;         // series resistance at t_ref_c
  double r0_temp_coeff = -0.01;  // fractional resistance change per degC
  double cap_temp_coeff = 0.005; // fractional capacity change per degC
  double ocv_lo_v = 3.0;
  double ocv_hi_v = 4.0;
  double t_ref_c = 25.0;
  double rc_r_ohm = 0.0015;
  double rc_tau_s = 5.0;
  double fade_per_ah = 0.0;      // fractional capacity loss per Ah of aging throughput

  void validate() const;
};

struct SeasonalTemperature {
  double mean_c = 27.0;
  double amplitude_c = 8.0;
  double period_days = 365.0;
  double phase_days = 0.0;
  double daily_jitter_c = 1.0;  // half-width of uniform per-event noise

  void validate() const;
  // Deterministic seasonal component at the given campaign day.
  double at(double day) const;
};

// Capacity of the plant at temperature temp_c after throughput_ah of aging.
double true_capacity(const CellParams& params, double temp_c, double throughput_ah = 0.0);
double series_resistance(const CellParams& params, double temp_c);
double relaxation_resistance(const CellParams& params, double temp_c);

// Time between the last sample of one protocol step and the first sample of
// the next. Current steps are represented by this pair of samples.
inline constexpr double kStepTransitionS = 1e-3;

struct AgingCycleTruth {
  double t0_s = 0.0;
  double t1_s = 0.0;
  double t2_s = 0.0;
  double t3_s = 0.0;
  double throughput_ah = 0.0;
  double charge_energy_wh = 0.0;
};

struct GeneratedCycle {
  TimeSeries series;
  AgingCycleTruth truth;
};

// 1C discharge from start_soc to 50% SOC, C/2 discharge to 3.0 V, C/2 charge
// to 4.0 V. C-rates are relative to q0_ah.
GeneratedCycle generate_aging_cycle(const CellParams& params, double temp_c, double dt_s = 1.0,
                                    double t_start_s = 0.0, double start_soc = 1.0,
                                    double throughput_ah = 0.0);

struct HppcConfig {
  double low_soc = 0.2;
  double high_soc = 0.8;
  double pulse_c_rate = 1.0;
  double pulse_s = 3.0;
  double rest_s = 60.0;
  double step_c_rate = 0.5;  // charge between the SOC setpoints
  double dt_s = 1.0;
  bool relaxation = true;

  void validate() const;
};

// Charge-portion HPPC: at the low and then the high SOC setpoint, a discharge
// pulse followed by a charge pulse, separated by rests. Pulses are treated as
// charge-neutral for the OCV.
TimeSeries generate_hppc(const CellParams& params, double temp_c, const HppcConfig& cfg = {},
                         double t_start_s = 0.0, double throughput_ah = 0.0);

struct C20Config {
  double dt_s = 10.0;
  double c_rate = 0.05;
  bool cv_hold = true;
  double cv_cutoff_c_rate = 0.001;
  double rest_s = 600.0;

  void validate() const;
};

// C/20 discharge to 3.0 V then C/20 charge to 4.0 V, each followed by an
// optional constant-voltage hold until the current tapers to the cutoff.
TimeSeries generate_c20_test(const CellParams& params, double temp_c, const C20Config& cfg = {},
                             double t_start_s = 0.0, double throughput_ah = 0.0);

struct CampaignSchedule {
  int months = 15;
  int cycles_per_month = 6;
  int rpt_every_n_cycles = 3;
  double days_per_month = 30.4375;
  double aging_dt_s = 10.0;
  double rest_after_cycle_s = 600.0;
  C20Config c20{.dt_s = 60.0};
  HppcConfig hppc{};

  void validate() const;
};

struct CampaignConfig {
  std::vector<CellParams> fleet;
  SeasonalTemperature season;
  CampaignSchedule schedule;
  std::uint64_t seed = 42;
};

// Ground truth at one reference performance test.
struct TruthPoint {
  std::size_t cycle_position = 0;
  double time_s = 0.0;
  double temperature_c = 0.0;
  double throughput_ah = 0.0;
  double true_capacity_ah = 0.0;
};

struct SimulatedCell {
  CellParams params;
  std::shared_ptr<const TimeSeries> aging;
  std::shared_ptr<const TimeSeries> c20;
  std::shared_ptr<const TimeSeries> hppc;
  std::vector<AgingCycleTruth> cycle_truth;
  std::vector<double> cycle_temperature_c;
  std::vector<TruthPoint> rpt_truth;
};

// Eight cells whose reference capacities mirror the spread of a retired
// two-pack fleet (17-25 Ah).
std::vector<CellParams> default_fleet();

// Deterministic for a given config: each cell draws from its own generator
// derived from the seed and the cell's position in the fleet.
std::vector<SimulatedCell> simulate_campaign(const CampaignConfig& cfg);

}  // namespace slsoh
