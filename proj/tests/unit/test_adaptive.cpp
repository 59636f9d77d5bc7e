#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "slsoh/adaptive.hpp"
#include "slsoh/error.hpp"
#include "slsoh/random.hpp"

using namespace slsoh;

namespace {

// Trajectory with a constant residual: label = offline + residual.
BankTrajectory flat_trajectory(std::string id, double key0, double step, std::size_t n,
                               double residual, std::vector<double> extra = {}) {
  BankTrajectory t{std::move(id), {}};
  for (std::size_t i = 0; i < n; ++i) {
    BankPoint p;
    p.cycle_index = i;
    p.throughput_key = key0 + step * static_cast<double>(i);
    p.feature_point = extra;
    p.offline_ah = 20.0 - 0.001 * p.throughput_key;
    p.label_ah = p.offline_ah + residual;
    t.points.push_back(p);
  }
  return t;
}

AdaptiveConfig cfg_with(std::size_t clusters, double beta, double delta) {
  AdaptiveConfig c;
  c.clusters = clusters;
  c.beta = beta;
  c.delta_max_ah = delta;
  return c;
}

TrajectoryBank random_bank(Rng& rng, std::size_t extra_dims, std::vector<std::string>* names) {
  AdaptiveConfig cfg = cfg_with(1 + uniform_index(rng, 4), 0.3, 1.0);
  for (std::size_t d = 0; d < extra_dims; ++d) cfg.extra_cluster_features.push_back("x" + std::to_string(d));
  if (names) *names = cfg.extra_cluster_features;
  cfg.seed = rng();
  cfg.restarts = 2;
  std::vector<BankTrajectory> trajs;
  const std::size_t n_traj = 1 + uniform_index(rng, 4);
  for (std::size_t t = 0; t < n_traj; ++t) {
    BankTrajectory tr{"c" + std::to_string(t), {}};
    double key = uniform(rng, 0, 50);
    const std::size_t n = 2 + uniform_index(rng, 8);
    for (std::size_t i = 0; i < n; ++i) {
      BankPoint p;
      p.cycle_index = i;
      p.throughput_key = key;
      key += uniform(rng, 1, 100);
      for (std::size_t d = 0; d < extra_dims; ++d) p.feature_point.push_back(uniform(rng, -5, 5));
      p.offline_ah = uniform(rng, 10, 30);
      p.label_ah = p.offline_ah + uniform(rng, -1e3, 1e3) * std::pow(10.0, uniform(rng, -6, 0));
      tr.points.push_back(p);
    }
    trajs.push_back(tr);
  }
  return build_bank(trajs, cfg);
}

}  // namespace

TEST_CASE("one cluster means every trajectory is a member") {
  std::vector<BankTrajectory> t = {flat_trajectory("a", 0, 10, 5, 0.2), flat_trajectory("b", 5, 10, 5, 0.4)};
  const auto bank = build_bank(t, cfg_with(1, 0.5, 1.0));
  REQUIRE(bank.clusters() == 1);
  CHECK(bank.members[0] == std::vector<std::size_t>{0, 1});
  CHECK(assign_cluster(bank, {}, 1e6) == 0);
  CHECK(cluster_residual(bank, 0, 20.0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("two separated blobs form two clusters") {
  std::vector<BankTrajectory> t = {flat_trajectory("lo_a", 0, 1, 6, 0.5), flat_trajectory("lo_b", 0.5, 1, 6, 0.5),
                                   flat_trajectory("hi_a", 1000, 1, 6, -0.5), flat_trajectory("hi_b", 1000.5, 1, 6, -0.5)};
  const auto bank = build_bank(t, cfg_with(2, 0.5, 1.0));
  REQUIRE(bank.clusters() == 2);
  const auto lo = assign_cluster(bank, {}, 2.0);
  const auto hi = assign_cluster(bank, {}, 1003.0);
  CHECK(lo != hi);
  std::set<std::size_t> lo_members(bank.members[lo].begin(), bank.members[lo].end());
  CHECK(lo_members == std::set<std::size_t>{0, 1});
  CHECK(cluster_residual(bank, lo, 2.0) == doctest::Approx(0.5));
  CHECK(cluster_residual(bank, hi, 1003.0) == doctest::Approx(-0.5));
  for (std::size_t tr = 0; tr < 4; ++tr)
    for (std::size_t c : bank.point_cluster[tr]) CHECK(c == (tr < 2 ? lo : hi));
}

TEST_CASE("bank construction is deterministic and k is capped by distinct points") {
  Rng rng(5);
  std::vector<std::string> names;
  const auto a = random_bank(rng, 2, &names);
  Rng rng2(5);
  const auto b = random_bank(rng2, 2, nullptr);
  CHECK(a.centroids == b.centroids);
  CHECK(a.members == b.members);
  std::vector<BankTrajectory> t = {flat_trajectory("a", 0, 10, 2, 0.1)};
  CHECK(build_bank(t, cfg_with(5, 0.5, 1.0)).clusters() == 2);
}

TEST_CASE("bank guards") {
  std::vector<BankTrajectory> one = {flat_trajectory("a", 0, 10, 1, 0.1)};
  CHECK_THROWS_AS(build_bank(one, cfg_with(2, 0.5, 1.0)), InvalidArgument);
  std::vector<BankTrajectory> ok = {flat_trajectory("a", 0, 10, 3, 0.1)};
  CHECK_THROWS_AS(build_bank(ok, cfg_with(0, 0.5, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(build_bank(ok, cfg_with(1, 0.0, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(build_bank(ok, cfg_with(1, 0.5, -1.0)), InvalidArgument);
  // non-increasing keys are dropped
  ok[0].points[2].throughput_key = ok[0].points[1].throughput_key;
  CHECK(build_bank(ok, cfg_with(1, 0.5, 1.0)).trajectories[0].points.size() == 2);
  const auto bank = build_bank(ok, cfg_with(1, 0.5, 1.0));
  const std::vector<double> extra = {1.0};
  CHECK_THROWS_AS(assign_cluster(bank, extra, 0.0), InvalidArgument);
}

TEST_CASE("residual interpolation is linear and clamped") {
  BankTrajectory t{"a", {}};
  for (auto [k, r] : {std::pair{0.0, 0.0}, {10.0, 1.0}, {30.0, -1.0}}) {
    BankPoint p;
    p.throughput_key = k;
    p.offline_ah = 20.0;
    p.label_ah = 20.0 + r;
    t.points.push_back(p);
  }
  CHECK(interpolate_residual(t, -5) == 0.0);
  CHECK(interpolate_residual(t, 5) == doctest::Approx(0.5));
  CHECK(interpolate_residual(t, 20) == doctest::Approx(0.0));
  CHECK(interpolate_residual(t, 25) == doctest::Approx(-0.5));
  CHECK(interpolate_residual(t, 99) == doctest::Approx(-1.0));
}

TEST_CASE("smoothing follows the geometric recursion") {
  std::vector<BankTrajectory> t = {flat_trajectory("a", 0, 10, 5, 0.5)};
  const auto bank = build_bank(t, cfg_with(1, 0.5, 1.0));
  auto state = AdaptiveState::init(cfg_with(1, 0.5, 1.0));
  double last = 0.0;
  for (int i = 0; i < 3; ++i) last = adaptive_step(state, 18.0, {}, 5.0, bank).correction_ah;
  CHECK(last == doctest::Approx(0.4375).epsilon(1e-15));
  CHECK(state.history.size() == 3);
  CHECK(state.cluster_id == 0);
}

TEST_CASE("correction is clipped to delta_max") {
  std::vector<BankTrajectory> t = {flat_trajectory("a", 0, 10, 5, 3.0)};
  const auto bank = build_bank(t, cfg_with(1, 1.0, 1.0));
  auto state = AdaptiveState::init(cfg_with(1, 1.0, 1.0));
  const auto r = adaptive_step(state, 18.0, {}, 5.0, bank);
  CHECK(r.correction_ah == 1.0);
  CHECK(r.adaptive_ah == 19.0);
  CHECK(state.residual_ah == doctest::Approx(3.0));
}

TEST_CASE("zero delta reproduces the offline stream bit for bit") {
  Rng rng(6);
  std::vector<std::string> names;
  const auto bank = random_bank(rng, 1, &names);
  AdaptiveConfig cfg = cfg_with(2, 0.4, 0.0);
  std::vector<StreamPoint> stream;
  for (std::size_t i = 0; i < 50; ++i)
    stream.push_back({i, 10.0 * i, {uniform(rng, -5, 5)}, uniform(rng, 5, 30)});
  const auto trace = run_stream("x", stream, bank, cfg);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    CHECK(trace.rows[i].adaptive_ah == stream[i].offline_ah);
    CHECK(trace.rows[i].correction_ah == 0.0);
  }
}

TEST_CASE("zero residuals leave the offline estimate unchanged") {
  std::vector<BankTrajectory> t = {flat_trajectory("a", 0, 10, 5, 0.0), flat_trajectory("b", 3, 10, 5, 0.0)};
  const auto bank = build_bank(t, cfg_with(2, 0.3, 1.0));
  std::vector<StreamPoint> stream;
  for (std::size_t i = 0; i < 10; ++i) stream.push_back({i, 5.0 * i, {}, 19.0 - 0.01 * i});
  const auto trace = run_stream("x", stream, bank, cfg_with(2, 0.3, 1.0));
  for (std::size_t i = 0; i < 10; ++i) CHECK(trace.rows[i].adaptive_ah == stream[i].offline_ah);
}

TEST_CASE("bound holds on randomized banks and streams") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dims = uniform_index(rng, 3);
    const auto bank = random_bank(rng, dims, nullptr);
    const double delta = std::pow(10.0, uniform(rng, -8, 1));
    AdaptiveConfig cfg = cfg_with(1, uniform(rng, 0.01, 1.0), delta);
    AdaptiveState st = AdaptiveState::init(cfg);
    for (int i = 0; i < 30; ++i) {
      std::vector<double> fp;
      for (std::size_t d = 0; d < dims; ++d) fp.push_back(uniform(rng, -10, 10));
      const double off = uniform(rng, -1e4, 1e4) * std::pow(10.0, uniform(rng, -6, 0));
      const auto r = adaptive_step(st, off, fp, uniform(rng, -100, 1000), bank);
      CHECK(std::abs(r.adaptive_ah - off) <= delta);
    }
  }
}

TEST_CASE("self bank corrects a biased offline stream") {
  // Offline under-predicts by a drifting amount that the bank has seen.
  std::vector<BankTrajectory> trajs;
  for (int c = 0; c < 3; ++c) {
    BankTrajectory t{"c" + std::to_string(c), {}};
    for (std::size_t i = 0; i < 20; ++i) {
      BankPoint p;
      p.cycle_index = i;
      p.throughput_key = 100.0 * i + c;
      p.label_ah = 20.0 - 0.002 * p.throughput_key;
      p.offline_ah = p.label_ah - 0.3 - 0.0002 * p.throughput_key;
      t.points.push_back(p);
    }
    trajs.push_back(t);
  }
  const auto bank = build_bank(trajs, cfg_with(2, 0.5, 1.0));
  std::vector<StreamPoint> stream;
  std::vector<double> labels, offline, adaptive;
  for (std::size_t i = 0; i < 20; ++i) {
    const double key = 100.0 * i + 1.5;
    const double label = 20.0 - 0.002 * key;
    stream.push_back({i, key, {}, label - 0.3 - 0.0002 * key});
    labels.push_back(label);
  }
  const auto trace = run_stream("t", stream, bank, cfg_with(2, 0.5, 1.0));
  double mape_off = 0.0, mape_ad = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    mape_off += std::abs(trace.rows[i].offline_ah - labels[i]) / labels[i];
    mape_ad += std::abs(trace.rows[i].adaptive_ah - labels[i]) / labels[i];
  }
  CHECK(mape_ad < mape_off);
}

TEST_CASE("bank from labeled snapshots replays the model") {
  EnrModel m;
  m.feature_names = {"q_ah_aging_ah"};
  m.standardizer.means = {500.0};
  m.standardizer.stds = {100.0};
  m.weights = {-0.2};
  m.intercept = 19.0;
  std::vector<LabeledSnapshot> snaps;
  for (int c = 0; c < 6; ++c)
    for (std::size_t k = 0; k < 4; ++k) {
      LabeledSnapshot s;
      s.cell_id = "1." + std::to_string(c + 1);
      s.cycle_index = 3 * (3 - k);  // reverse order on purpose
      s.features.q_ah_aging_ah = 40.0 * s.cycle_index + c;
      s.label_q_ch_c20_ah = 19.5 - 0.001 * s.features.q_ah_aging_ah;
      snaps.push_back(s);
    }
  std::vector<std::string> warnings;
  const auto bank = build_bank(snaps, m, AdaptiveConfig{}, &warnings);
  CHECK(warnings.empty());
  REQUIRE(bank.trajectories.size() == 6);
  CHECK(bank.trajectories[0].cell_id == "1.1");
  for (const auto& t : bank.trajectories) {
    REQUIRE(t.points.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& p = t.points[i];
      CHECK(p.cycle_index == 3 * i);
      const double expected = 19.0 - 0.2 * (p.throughput_key - 500.0) / 100.0;
      CHECK(p.offline_ah == doctest::Approx(expected).epsilon(1e-14));
    }
  }
  snaps[1].features.q_ah_aging_ah = snaps[0].features.q_ah_aging_ah;
  warnings.clear();
  build_bank(snaps, m, AdaptiveConfig{}, &warnings);
  CHECK(warnings.size() == 1);
}

TEST_CASE("trace CSV round-trip") {
  EstimateTrace tr{"1.4", 1.0, {{0, 0.0, 19.5, 19.6, 0.1, 0}, {3, 120.25, 19.25, 19.0, -0.25, 2}}};
  std::ostringstream out;
  write_trace_csv(out, tr);
  CHECK(out.str().rfind(std::string(kTraceCsvHeader) + "\n", 0) == 0);
  std::istringstream in(out.str());
  const auto rows = read_trace_csv(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].throughput_ah == 120.25);
  CHECK(rows[1].correction_ah == -0.25);
  CHECK(rows[1].cluster_id == 2);
  std::istringstream bad("cycle_index,nope\n");
  CHECK_THROWS_AS(read_trace_csv(bad), SchemaError);
  std::istringstream short_row(std::string(kTraceCsvHeader) + "\n1,2,3\n");
  CHECK_THROWS_AS(read_trace_csv(short_row), ParseError);
}
