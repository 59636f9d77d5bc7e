#include "slsoh/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "slsoh/error.hpp"
#include "slsoh/random.hpp"
#include "text_util.hpp"

namespace slsoh {

namespace {

using Point = std::vector<double>;

double sq_dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

std::size_t nearest(const std::vector<Point>& centroids, const Point& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(centroids[c], p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

struct KMeansResult {
  std::vector<Point> centroids;
  std::vector<std::size_t> labels;
  double inertia = 0.0;
};

// k-means++ seeding followed by Lloyd iterations. Empty clusters keep their
// previous centroid.
KMeansResult kmeans_once(const std::vector<Point>& pts, std::size_t k, Rng& rng,
                         std::size_t max_iter) {
  KMeansResult r;
  r.centroids.push_back(pts[static_cast<std::size_t>(uniform_index(rng, pts.size()))]);
  std::vector<double> d2(pts.size());
  while (r.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = sq_dist(pts[i], r.centroids[nearest(r.centroids, pts[i])]);
      total += d2[i];
    }
    std::size_t pick = pts.size() - 1;
    if (total > 0.0) {
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && u < acc) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0) --pick;  // guard for u landing on the rounding tail
    }
    r.centroids.push_back(pts[pick]);
  }

  r.labels.assign(pts.size(), k);
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t c = nearest(r.centroids, pts[i]);
      if (c != r.labels[i]) {
        r.labels[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    const std::size_t dim = pts.front().size();
    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ++counts[r.labels[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[r.labels[i]][d] += pts[i][d];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t d = 0; d < dim; ++d)
          r.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    r.inertia += sq_dist(pts[i], r.centroids[r.labels[i]]);
  return r;
}

Point descriptor(const TrajectoryBank& bank, std::span<const double> feature_point,
                 double throughput_key) {
  if (feature_point.size() + 1 != bank.descriptor_means.size())
    throw InvalidArgument("feature point has " + std::to_string(feature_point.size()) +
                          " values, bank expects " +
                          std::to_string(bank.descriptor_means.size() - 1));
  Point p(bank.descriptor_means.size());
  p[0] = (throughput_key - bank.descriptor_means[0]) / bank.descriptor_stds[0];
  for (std::size_t i = 0; i < feature_point.size(); ++i)
    p[i + 1] = (feature_point[i] - bank.descriptor_means[i + 1]) / bank.descriptor_stds[i + 1];
  return p;
}

}  // namespace

void AdaptiveConfig::validate() const {
  if (clusters == 0) throw InvalidArgument("adaptive: clusters must be at least 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("adaptive: beta must lie in (0, 1]");
  if (!(delta_max_ah >= 0.0) || !std::isfinite(delta_max_ah))
    throw InvalidArgument("adaptive: delta_max_ah must be finite and non-negative");
  if (restarts == 0 || max_kmeans_iter == 0)
    throw InvalidArgument("adaptive: restarts and max_kmeans_iter must be positive");
}

TrajectoryBank build_bank(std::vector<BankTrajectory> trajectories, const AdaptiveConfig& cfg) {
  cfg.validate();
  TrajectoryBank bank;
  bank.extra_cluster_features = cfg.extra_cluster_features;
  const std::size_t dim = cfg.extra_cluster_features.size() + 1;

  for (auto& t : trajectories) {
    BankTrajectory kept{t.cell_id, {}};
    for (auto& p : t.points) {
      if (p.feature_point.size() + 1 != dim)
        throw InvalidArgument("bank point feature count mismatch in cell '" + t.cell_id + "'");
      if (!std::isfinite(p.throughput_key) || !std::isfinite(p.offline_ah) ||
          !std::isfinite(p.label_ah))
        throw InvalidArgument("bank point is not finite in cell '" + t.cell_id + "'");
      if (!kept.points.empty() && !(p.throughput_key > kept.points.back().throughput_key))
        continue;
      kept.points.push_back(std::move(p));
    }
    if (kept.points.size() >= 2) bank.trajectories.push_back(std::move(kept));
  }
  if (bank.trajectories.empty())
    throw InvalidArgument("adaptive: bank needs a training cell with at least 2 snapshots");

  std::vector<Point> raw;
  for (const auto& t : bank.trajectories)
    for (const auto& p : t.points) {
      Point d{p.throughput_key};
      d.insert(d.end(), p.feature_point.begin(), p.feature_point.end());
      raw.push_back(std::move(d));
    }
  bank.descriptor_means.assign(dim, 0.0);
  bank.descriptor_stds.assign(dim, 0.0);
  const double n = static_cast<double>(raw.size());
  for (const auto& p : raw)
    for (std::size_t d = 0; d < dim; ++d) bank.descriptor_means[d] += p[d] / n;
  for (const auto& p : raw)
    for (std::size_t d = 0; d < dim; ++d) {
      const double e = p[d] - bank.descriptor_means[d];
      bank.descriptor_stds[d] += e * e / n;
    }
  for (auto& s : bank.descriptor_stds) s = s > 0.0 ? std::sqrt(s) : 1.0;

  std::vector<Point> pts;
  for (const auto& p : raw) {
    Point q(dim);
    for (std::size_t d = 0; d < dim; ++d)
      q[d] = (p[d] - bank.descriptor_means[d]) / bank.descriptor_stds[d];
    pts.push_back(std::move(q));
  }

  std::vector<Point> distinct = pts;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t k = std::min(cfg.clusters, distinct.size());

  Rng rng(cfg.seed);
  KMeansResult best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    KMeansResult km = kmeans_once(pts, k, rng, cfg.max_kmeans_iter);
    if (r == 0 || km.inertia < best.inertia) best = std::move(km);
  }
  bank.centroids = std::move(best.centroids);

  bank.members.assign(k, {});
  std::size_t idx = 0;
  for (std::size_t t = 0; t < bank.trajectories.size(); ++t) {
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < bank.trajectories[t].points.size(); ++i) {
      const std::size_t c = nearest(bank.centroids, pts[idx++]);
      labels.push_back(c);
      auto& m = bank.members[c];
      if (m.empty() || m.back() != t) m.push_back(t);
    }
    bank.point_cluster.push_back(std::move(labels));
  }
  return bank;
}

TrajectoryBank build_bank(std::span<const LabeledSnapshot> training, const EnrModel& model,
                          const AdaptiveConfig& cfg, std::vector<std::string>* warnings) {
  if (training.empty()) throw InvalidArgument("adaptive: empty training set");
  std::map<std::string, std::vector<const LabeledSnapshot*>> by_cell;
  for (const auto& s : training) by_cell[s.cell_id].push_back(&s);

  std::vector<BankTrajectory> trajectories;
  for (auto& [cell, snaps] : by_cell) {
    std::stable_sort(snaps.begin(), snaps.end(), [](const auto* a, const auto* b) {
      return a->cycle_index < b->cycle_index;
    });
    BankTrajectory t{cell, {}};
    for (const auto* s : snaps) {
      BankPoint p;
      p.cycle_index = s->cycle_index;
      p.throughput_key = s->features.q_ah_aging_ah;
      for (const auto& f : cfg.extra_cluster_features)
        p.feature_point.push_back(feature_value(s->features, f));
      p.offline_ah = enr_predict(model, s->features);
      p.label_ah = s->label_q_ch_c20_ah;
      if (!t.points.empty() && !(p.throughput_key > t.points.back().throughput_key)) {
        if (warnings)
          warnings->push_back("cell " + cell + ": snapshot at cycle " +
                              std::to_string(p.cycle_index) +
                              " dropped from bank (throughput did not increase)");
        continue;
      }
      t.points.push_back(std::move(p));
    }
    trajectories.push_back(std::move(t));
  }
  return build_bank(std::move(trajectories), cfg);
}

std::size_t assign_cluster(const TrajectoryBank& bank, std::span<const double> feature_point,
                           double throughput_key) {
  if (bank.centroids.empty()) throw InvalidArgument("adaptive: bank has no clusters");
  return nearest(bank.centroids, descriptor(bank, feature_point, throughput_key));
}

double interpolate_residual(const BankTrajectory& trajectory, double throughput_key) {
  const auto& pts = trajectory.points;
  if (pts.empty()) throw InvalidArgument("adaptive: empty trajectory");
  if (throughput_key <= pts.front().throughput_key) return pts.front().residual_ah();
  if (throughput_key >= pts.back().throughput_key) return pts.back().residual_ah();
  const auto hi = std::upper_bound(
      pts.begin(), pts.end(), throughput_key,
      [](double key, const BankPoint& p) { return key < p.throughput_key; });
  const auto lo = hi - 1;
  const double f = (throughput_key - lo->throughput_key) / (hi->throughput_key - lo->throughput_key);
  return lo->residual_ah() + f * (hi->residual_ah() - lo->residual_ah());
}

double cluster_residual(const TrajectoryBank& bank, std::size_t cluster, double throughput_key) {
  if (cluster >= bank.clusters()) throw InvalidArgument("adaptive: cluster id out of range");
  const auto& members = bank.members[cluster];
  double sum = 0.0;
  if (members.empty()) {
    for (const auto& t : bank.trajectories) sum += interpolate_residual(t, throughput_key);
    return sum / static_cast<double>(bank.trajectories.size());
  }
  for (std::size_t t : members) sum += interpolate_residual(bank.trajectories[t], throughput_key);
  return sum / static_cast<double>(members.size());
}

AdaptiveState AdaptiveState::init(const AdaptiveConfig& cfg) {
  cfg.validate();
  AdaptiveState s;
  s.beta = cfg.beta;
  s.delta_max_ah = cfg.delta_max_ah;
  return s;
}

StepResult adaptive_step(AdaptiveState& state, double offline_ah,
                         std::span<const double> feature_point, double throughput_key,
                         const TrajectoryBank& bank) {
  if (!std::isfinite(offline_ah) || !std::isfinite(throughput_key))
    throw InvalidArgument("adaptive_step: non-finite input");
  StepResult out;
  out.cluster_id = assign_cluster(bank, feature_point, throughput_key);
  state.cluster_id = static_cast<long>(out.cluster_id);
  const double target = cluster_residual(bank, out.cluster_id, throughput_key);
  state.residual_ah = (1.0 - state.beta) * state.residual_ah + state.beta * target;

  const double delta = state.delta_max_ah;
  const double c = std::clamp(state.residual_ah, -delta, delta);
  double e = offline_ah + c;
  while (std::abs(e - offline_ah) > delta) e = std::nextafter(e, offline_ah);
  if (e == 0.0) e = 0.0;
  out.adaptive_ah = e;
  out.correction_ah = c == 0.0 ? 0.0 : c;
  state.history.push_back(e);
  return out;
}

EstimateTrace run_stream(std::string cell_id, std::span<const StreamPoint> stream,
                         const TrajectoryBank& bank, const AdaptiveConfig& cfg) {
  EstimateTrace trace;
  trace.cell_id = std::move(cell_id);
  trace.delta_max_ah = cfg.delta_max_ah;
  AdaptiveState state = AdaptiveState::init(cfg);
  for (const auto& p : stream) {
    const StepResult r = adaptive_step(state, p.offline_ah, p.feature_point, p.throughput_key, bank);
    trace.rows.push_back({p.cycle_index, p.throughput_key, p.offline_ah, r.adaptive_ah,
                          r.correction_ah, r.cluster_id});
  }
  return trace;
}

EstimateTrace run_stream(std::span<const LabeledSnapshot> snapshots, const EnrModel& model,
                         const TrajectoryBank& bank, const AdaptiveConfig& cfg) {
  if (snapshots.empty()) throw InvalidArgument("adaptive: empty test stream");
  std::vector<StreamPoint> stream;
  for (const auto& s : snapshots) {
    StreamPoint p;
    p.cycle_index = s.cycle_index;
    p.throughput_key = s.features.q_ah_aging_ah;
    for (const auto& f : bank.extra_cluster_features)
      p.feature_point.push_back(feature_value(s.features, f));
    p.offline_ah = enr_predict(model, s.features);
    stream.push_back(std::move(p));
  }
  return run_stream(snapshots.front().cell_id, stream, bank, cfg);
}

void write_trace_csv(std::ostream& out, const EstimateTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.rows)
    out << r.cycle_index << ',' << format_double(r.throughput_ah) << ','
        << format_double(r.offline_ah) << ',' << format_double(r.adaptive_ah) << ','
        << format_double(r.correction_ah) << ',' << r.cluster_id << '\n';
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no)) throw MissingInput("trace CSV is empty");
  if (detail::trim(line) != kTraceCsvHeader) throw SchemaError("trace CSV header mismatch");
  std::vector<TraceRow> rows;
  while (detail::next_line(in, line, line_no)) {
    const auto f = detail::split_fields(line);
    if (f.size() != 6) throw ParseError(line_no, "expected 6 fields");
    const auto cycle = detail::parse_index(f[0]);
    const auto tp = detail::parse_number(f[1]);
    const auto off = detail::parse_number(f[2]);
    const auto ad = detail::parse_number(f[3]);
    const auto corr = detail::parse_number(f[4]);
    const auto cl = detail::parse_index(f[5]);
    if (!cycle || !tp || !off || !ad || !corr || !cl) throw ParseError(line_no, "invalid trace row");
    rows.push_back({*cycle, *tp, *off, *ad, *corr, *cl});
  }
  return rows;
}

}  // namespace slsoh
