#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "d2d/harness.hpp"

using namespace d2d;

namespace {

ParameterSet small() {
  ParameterSet p;
  p.H = 2.5;
  p.u = 1.0;
  p.theta = 5.0;
  p.v = 10.0;
  p.reps = 2;
  p.horizon_h = 2.0;
  return p;
}

std::string csv(const RunResult& r) {
  std::ostringstream os;
  write_run_row(os, r);
  write_events(os, r.events);
  return os.str();
}

}  // namespace

TEST(Parameters, DefaultsAndDerivedValues) {
  ParameterSet p;
  EXPECT_DOUBLE_EQ(p.step(), 18.0);
  EXPECT_EQ(p.max_steps(), 4800u);
  EXPECT_TRUE(p.validate().empty());
  p.dt = 7.0;
  EXPECT_EQ(p.max_steps(), static_cast<std::size_t>(std::ceil(86400.0 / 7.0)));
}

TEST(Parameters, ConfigFileAndOverrides) {
  ParameterSet p;
  std::istringstream in("# comment\nlambda = 20\ntheta=4.5  # per km\n\nplacement = nearest-device\nk_max = 12\n");
  apply_config(p, in);
  apply_assignment(p, "v=7");
  EXPECT_EQ(p.lambda, 20.0);
  EXPECT_EQ(p.theta, 4.5);
  EXPECT_EQ(p.v, 7.0);
  EXPECT_EQ(p.placement, PlacementMode::NearestDevice);
  EXPECT_EQ(p.max_steps(), 12u);

  std::ostringstream out;
  write_config(out, p);
  ParameterSet q;
  std::istringstream back(out.str());
  apply_config(q, back);
  std::ostringstream again;
  write_config(again, q);
  EXPECT_EQ(out.str(), again.str());
}

TEST(Parameters, Errors) {
  ParameterSet p;
  try {
    apply_assignment(p, "speed=3");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unknown_key");
  }
  EXPECT_THROW(apply_assignment(p, "lambda"), Error);
  EXPECT_THROW(apply_assignment(p, "lambda=abc"), Error);
  p.dt = 20.0;
  try {
    p.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "discretization_contract");
  }
  p.dt.reset();
  p.u = 6.0;
  EXPECT_EQ(p.validate().size(), 1u);
  p.v_min = 3.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Run, DefaultParametersComplete) {
  ParameterSet p;
  const auto r = run_simulation(p, 1);
  EXPECT_GT(r.agents, 3000u);
  EXPECT_GE(r.steps, 1u);
  if (r.reached()) {
    EXPECT_GT(*r.metrics.tau, 0.0);
    EXPECT_GE(r.metrics.at_tau.infected, 1u);
  } else {
    EXPECT_EQ(r.steps, p.max_steps());
  }
}

TEST(Run, SameSeedByteIdentical) {
  const auto p = small();
  EXPECT_EQ(csv(run_simulation(p, 17)), csv(run_simulation(p, 17)));
  EXPECT_NE(csv(run_simulation(p, 17)), csv(run_simulation(p, 18)));
}

TEST(Run, NoDevicesNoPropagation) {
  auto p = small();
  p.theta = 0.0;
  const auto r = run_simulation(p, 3);
  EXPECT_FALSE(r.reached());
  EXPECT_TRUE(r.rate.no_propagation);
  EXPECT_EQ(r.steps, p.max_steps());
  EXPECT_EQ(r.agents, 1u);
}

TEST(Run, EventLogStartsWithOriginAndIsTimeOrdered) {
  const auto r = run_simulation(small(), 5);
  ASSERT_FALSE(r.events.empty());
  EXPECT_EQ(r.events.front().agent, r.origin);
  EXPECT_EQ(r.events.front().time, 0.0);
  for (std::size_t i = 1; i < r.events.size(); ++i) EXPECT_LE(r.events[i - 1].time, r.events[i].time);
}

TEST(Run, HeterogeneousSpeedsAreSupported) {
  auto p = small();
  p.v_min = 4.0;
  p.v_max = 12.0;
  const auto r = run_simulation(p, 2);
  EXPECT_GT(r.agents, 10u);
}

TEST(Sweep, SingleCellSingleRepEqualsDirectRun) {
  const auto p = small();
  SweepSpec spec{{"v", {p.v}}, {"theta", {p.theta}}, MapScaling::FixedH, false};
  const auto res = run_sweep(spec, p, 1);
  ASSERT_EQ(res.runs.size(), 1u);
  const auto direct = run_simulation(p, sweep_run_seed(p.seed, 0, 0));
  EXPECT_EQ(res.runs[0].tau, direct.metrics.tau);
  EXPECT_EQ(res.runs[0].rate, direct.rate.raw);
}

TEST(Sweep, LambdaScaledSides) {
  SweepSpec spec{{"lambda", {10.0, 50.0, 200.0}}, {"v", {5.0}}, MapScaling::LambdaScaledH, true};
  const auto lo = cell_parameters(spec, ParameterSet{}, 0);
  const auto hi = cell_parameters(spec, ParameterSet{}, 2);
  EXPECT_NEAR(lo.H, 11.25, 0.005);
  EXPECT_NEAR(hi.H, 5.32, 0.005);
  EXPECT_DOUBLE_EQ(lo.u, 0.45 * lo.H);
}

TEST(Sweep, ThreadsAndResumeDoNotChangeResults) {
  auto p = small();
  p.horizon_h = 1.0;
  SweepSpec spec{{"v", {5.0, 15.0}}, {"theta", {3.0, 6.0}}, MapScaling::FixedH, true};
  const auto serial = run_sweep(spec, p, 2);
  ASSERT_TRUE(serial.complete);
  SweepOptions threaded;
  threaded.threads = 3;
  const auto parallel = run_sweep(spec, p, 2, threaded);
  std::ostringstream a, b;
  write_grid(a, serial.cells);
  write_grid(b, parallel.cells);
  EXPECT_EQ(a.str(), b.str());

  SweepOptions partial;
  partial.max_runs = 3;
  const auto first = run_sweep(spec, p, 2, partial);
  EXPECT_FALSE(first.complete);
  EXPECT_FALSE(first.resume_token.empty());
  std::stringstream saved;
  write_sweep_runs(saved, first.runs);
  SweepOptions resume;
  resume.prior = read_sweep_runs(saved);
  const auto rest = run_sweep(spec, p, 2, resume);
  EXPECT_TRUE(rest.complete);
  std::ostringstream c;
  write_grid(c, rest.cells);
  EXPECT_EQ(a.str(), c.str());
}

TEST(Sweep, SeedsDistinctPerCellAndMapsSharedAcrossSameLambda) {
  std::set<std::uint64_t> seeds;
  for (std::size_t cell = 0; cell < 6; ++cell)
    for (std::size_t rep = 0; rep < 5; ++rep) seeds.insert(sweep_run_seed(9, cell, rep));
  EXPECT_EQ(seeds.size(), 30u);
  EXPECT_EQ(shared_map_seed(9, 50.0, 10.0, 2), shared_map_seed(9, 50.0, 10.0, 2));
  EXPECT_NE(shared_map_seed(9, 50.0, 10.0, 2), shared_map_seed(9, 50.0, 10.0, 3));
  EXPECT_NE(shared_map_seed(9, 50.0, 10.0, 2), shared_map_seed(9, 60.0, 10.0, 2));
}

TEST(Sweep, AggregatesAreMeansOverReps) {
  auto p = small();
  p.horizon_h = 1.0;
  SweepSpec spec{{"v", {8.0}}, {"theta", {5.0}}, MapScaling::FixedH, true};
  const auto res = run_sweep(spec, p, 3);
  ASSERT_EQ(res.cells.size(), 1u);
  std::vector<std::optional<double>> taus;
  double rate = 0.0;
  for (const auto& r : res.runs) {
    taus.push_back(r.tau);
    rate += r.rate / 3.0;
  }
  EXPECT_EQ(res.cells[0].runs, 3u);
  EXPECT_DOUBLE_EQ(res.cells[0].V_kmh, propagation_speed(taus, p.u).kmh);
  EXPECT_NEAR(res.cells[0].R, rate, 1e-12);
}

TEST(Sweep, RejectsBadSpecs) {
  SweepSpec spec{{"v", {1.0}}, {"v", {2.0}}, MapScaling::FixedH, true};
  EXPECT_THROW(run_sweep(spec, small(), 1), Error);
  spec.axis2 = {"theta", {}};
  EXPECT_THROW(run_sweep(spec, small(), 1), Error);
  EXPECT_EQ(parse_axis("lambda=10,50,150").values.size(), 3u);
  EXPECT_THROW(parse_axis("lambda"), Error);
}

TEST(Overlay, ThresholdCurves) {
  SweepSpec spec{{"lambda", {50.0}}, {"v", {1.0}}, MapScaling::FixedH, true};
  ParameterSet p;
  const auto pts = threshold_overlay(spec, p, {2.0 / 3.0, 0.0, 1.5});
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_NEAR(pts[0].v_kmh, 16.97, 0.005);
  EXPECT_EQ(pts[1].v_kmh, 0.0);
  EXPECT_DOUBLE_EQ(pts[2].v_kmh, 1.5 / (20.0 / 3600.0 * std::sqrt(50.0)));
  SweepSpec wrong{{"theta", {1.0}}, {"v", {1.0}}, MapScaling::FixedH, true};
  try {
    threshold_overlay(wrong, p, {1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "wrong_axes");
  }
}
