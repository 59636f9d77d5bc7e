#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slsoh/features.hpp"
#include "slsoh/regression.hpp"

namespace slsoh {

struct AdaptiveConfig {
  std::size_t clusters = 3;
  double beta = 0.3;           // smoothing factor, (0, 1]
  double delta_max_ah = 1.0;   // bound on |adaptive - offline|
  std::uint64_t seed = 42;
  std::size_t restarts = 10;
  std::size_t max_kmeans_iter = 100;
  // Features appended to the throughput key when clustering.
  std::vector<std::string> extra_cluster_features;

  void validate() const;
};

struct BankPoint {
  std::size_t cycle_index = 0;
  double throughput_key = 0.0;       // Ah
  std::vector<double> feature_point; // extra cluster features, raw
  double offline_ah = 0.0;
  double label_ah = 0.0;
  double residual_ah() const { return label_ah - offline_ah; }
};

struct BankTrajectory {
  std::string cell_id;
  std::vector<BankPoint> points;  // strictly increasing throughput_key
};

// Immutable after construction.
struct TrajectoryBank {
  std::vector<std::string> extra_cluster_features;
  std::vector<BankTrajectory> trajectories;
  std::vector<double> descriptor_means;
  std::vector<double> descriptor_stds;
  std::vector<std::vector<double>> centroids;          // standardized space
  std::vector<std::vector<std::size_t>> point_cluster; // [trajectory][point]
  std::vector<std::vector<std::size_t>> members;       // [cluster] -> trajectory indices

  std::size_t clusters() const { return centroids.size(); }
};

// Bank from raw trajectories. Points whose throughput key does not increase
// are dropped. Throws InvalidArgument when no trajectory keeps 2 points.
TrajectoryBank build_bank(std::vector<BankTrajectory> trajectories, const AdaptiveConfig& cfg);

// Groups training snapshots by cell (ordered by cycle_index), replays the
// model on each, and clusters the result.
TrajectoryBank build_bank(std::span<const LabeledSnapshot> training, const EnrModel& model,
                          const AdaptiveConfig& cfg, std::vector<std::string>* warnings = nullptr);

// Nearest centroid in standardized descriptor space; ties go to the lower id.
std::size_t assign_cluster(const TrajectoryBank& bank, std::span<const double> feature_point,
                           double throughput_key);

// label - offline of one trajectory, linear in throughput, clamped at the ends.
double interpolate_residual(const BankTrajectory& trajectory, double throughput_key);

// Mean interpolated residual over the cluster's member trajectories.
double cluster_residual(const TrajectoryBank& bank, std::size_t cluster, double throughput_key);

struct AdaptiveState {
  long cluster_id = -1;
  double residual_ah = 0.0;
  double beta = 0.3;
  double delta_max_ah = 1.0;
  std::vector<double> history;

  static AdaptiveState init(const AdaptiveConfig& cfg);
};

struct StepResult {
  double adaptive_ah = 0.0;
  double correction_ah = 0.0;
  std::size_t cluster_id = 0;
};

// r <- (1 - beta) r + beta target; emits offline + clip(r, +-delta_max).
// The emitted value always satisfies |adaptive - offline| <= delta_max in
// floating point.
StepResult adaptive_step(AdaptiveState& state, double offline_ah,
                         std::span<const double> feature_point, double throughput_key,
                         const TrajectoryBank& bank);

struct TraceRow {
  std::size_t cycle_index = 0;
  double throughput_ah = 0.0;
  double offline_ah = 0.0;
  double adaptive_ah = 0.0;
  double correction_ah = 0.0;
  std::size_t cluster_id = 0;
};

struct EstimateTrace {
  std::string cell_id;
  double delta_max_ah = 0.0;
  std::vector<TraceRow> rows;
};

struct StreamPoint {
  std::size_t cycle_index = 0;
  double throughput_key = 0.0;
  std::vector<double> feature_point;
  double offline_ah = 0.0;
};

EstimateTrace run_stream(std::string cell_id, std::span<const StreamPoint> stream,
                         const TrajectoryBank& bank, const AdaptiveConfig& cfg);

// One test cell's snapshots, in the order given.
EstimateTrace run_stream(std::span<const LabeledSnapshot> snapshots, const EnrModel& model,
                         const TrajectoryBank& bank, const AdaptiveConfig& cfg);

inline constexpr std::string_view kTraceCsvHeader =
    "cycle_index,throughput_ah,offline_ah,adaptive_ah,correction_ah,cluster_id";

void write_trace_csv(std::ostream& out, const EstimateTrace& trace);
std::vector<TraceRow> read_trace_csv(std::istream& in);

}  // namespace slsoh
