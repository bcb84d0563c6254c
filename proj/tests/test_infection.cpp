#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "d2d/infection.hpp"
#include "d2d/point_process.hpp"

using namespace d2d;

namespace {

// Connection window by scanning time in 10 ms steps.
std::optional<ConnectionInterval> scan_connection(const ContactKinematics& i, const ContactKinematics& j, double t,
                                                  double r) {
  const double lo = std::max(i.t_in, j.t_in), hi = std::min(i.t_out, j.t_out);
  std::optional<ConnectionInterval> out;
  const double h = 0.01;
  const auto n = static_cast<long>(std::floor((hi - lo) / h));
  for (long k = 0; k <= n; ++k) {
    const double s = lo + k * h;
    const double gap = std::abs((i.offset + i.velocity * (s - t)) - (j.offset + j.velocity * (s - t)));
    if (gap <= r) {
      if (!out) out = ConnectionInterval{s, s};
      out->end = s;
    } else if (out && s > t) {
      break;
    } else if (out) {
      out.reset();  // an earlier window that ended before t
    }
  }
  return out;
}

struct World {
  std::shared_ptr<const StreetSystem> streets;
  std::vector<AgentSetup> agents;
  AgentId origin = 0;
};

World make_world(std::uint64_t seed, double lambda, double side, double theta, double v) {
  World w;
  w.streets = std::make_shared<const StreetSystem>(generate_street_system(lambda, side, seed));
  Rng rng(derive_seed(seed, {kDeviceStream}));
  for (const auto& d : sample_devices(*w.streets, theta, rng)) w.agents.push_back({d, v});
  w.origin = static_cast<AgentId>(w.agents.size());
  w.agents.push_back({place_initial_infected(*w.streets, {}, PlacementMode::NearestStreet).position, v});
  return w;
}

}  // namespace

TEST(ConnectionInterval, SameVelocityIsRecordOverlap) {
  const ContactKinematics a{0.10, 0.001, 5.0, 100.0};
  const ContactKinematics b{0.25, 0.001, 12.0, 80.0};
  const auto iv = connection_interval(a, b, 20.0, 0.2);
  EXPECT_DOUBLE_EQ(iv.start, 12.0);
  EXPECT_DOUBLE_EQ(iv.end, 80.0);
}

TEST(ConnectionInterval, HeadOnAtFiveKmhLasts144Seconds) {
  const double v = kmh_to_kms(5.0);
  const ContactKinematics a{1.0, v, 0.0, 1e6};
  const ContactKinematics b{1.1, -v, 0.0, 1e6};
  const auto iv = connection_interval(a, b, 500.0, 0.2);
  EXPECT_NEAR(iv.duration(), 144.0, 1e-9);
  // Closest approach 0.1 km / (10 km/h) = 36 s after the reference time.
  EXPECT_NEAR(0.5 * (iv.start + iv.end), 536.0, 1e-9);
}

TEST(ConnectionInterval, MatchesTimeScanOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double r = 0.2;
  int checked = 0;
  while (checked < 300) {
    const double len = 0.05 + 0.6 * u01(rng);
    const double t = 1000.0;
    auto agent = [&] {
      const double speed = kmh_to_kms(1.0 + 40.0 * u01(rng)) * (u01(rng) < 0.5 ? -1.0 : 1.0);
      const double x = len * u01(rng);
      const double t_in = t - (speed > 0 ? x : len - x) / std::abs(speed);
      const double t_out = t + (speed > 0 ? len - x : x) / std::abs(speed);
      return ContactKinematics{x, speed, t_in, t_out};
    };
    const auto a = agent(), b = agent();
    if (std::abs(a.offset - b.offset) > r) continue;
    const auto iv = connection_interval(a, b, t, r);
    const auto scan = scan_connection(a, b, t, r);
    ASSERT_TRUE(scan);
    EXPECT_NEAR(iv.start, scan->start, 0.02);
    EXPECT_NEAR(iv.end, scan->end, 0.02);
    ++checked;
  }
}

TEST(Transmission, ExactlyRhoInfectsAndShorterDoesNot) {
  EXPECT_EQ(transmission_time({100.0, 120.0}, 0.0, 20.0), std::optional<double>(120.0));
  EXPECT_FALSE(transmission_time({100.0, 120.0 - 1e-9}, 0.0, 20.0));
  // Clamped to the infector's own infection time.
  EXPECT_EQ(transmission_time({100.0, 200.0}, 150.0, 20.0), std::optional<double>(170.0));
  EXPECT_FALSE(transmission_time({100.0, 200.0}, 185.0, 20.0));
}

TEST(Transmission, EarliestOfTwoQualifyingInfectorsWins) {
  const double t1 = 40.0, t2 = 55.0, rho = 20.0;
  const auto via_late = transmission_time({t2, t2 + 60.0}, 0.0, rho);
  const auto via_early = transmission_time({t1, t1 + 30.0}, 0.0, rho);
  ASSERT_TRUE(via_late && via_early);
  EXPECT_EQ(std::min(*via_late, *via_early), t1 + rho);
}

TEST(Simulation, RejectsStepsNotShorterThanRho) {
  auto w = make_world(1, 50.0, 1.0, 3.0, 5.0);
  try {
    Simulation sim(w.streets, w.agents, w.origin, 1, {20.0, 20.0, 0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "discretization_contract");
    EXPECT_NE(std::string(e.what()).find("discretization contract violated"), std::string::npos);
  }
}

TEST(Simulation, NeighborsRequireSameStreet) {
  // Two parallel streets 50 m apart; one agent on each plus one more on the first street.
  std::vector<Point> v{{0.0, 0.0}, {5.0, 0.0}, {0.0, 0.05}, {5.0, 0.05}};
  auto s = std::make_shared<const StreetSystem>(1.0, 5.0, 0, v, std::vector<std::pair<VertexId, VertexId>>{{0, 1}, {2, 3}});
  std::vector<AgentSetup> agents{{s->point_at(0, 2.5), 0.001}, {s->point_at(1, 2.5), 0.001}, {s->point_at(0, 2.6), 0.001}};
  Simulation sim(s, agents, 0, 3, {18.0, 20.0, 0.2});
  const auto n0 = sim.neighbors(0);
  ASSERT_EQ(n0.size(), 1u);
  EXPECT_EQ(n0[0], 2);
  EXPECT_TRUE(sim.neighbors(1).empty());
  EXPECT_THROW(sim.connection(0, 1), Error);
  sim.step();
  EXPECT_DOUBLE_EQ(sim.infection_time(2), 20.0);
  EXPECT_EQ(sim.infector(2), 0);
  EXPECT_EQ(sim.infection_time(1), kNever);
}

TEST(Simulation, FirstStepUsesOnlyTheInitialInfected) {
  auto w = make_world(3, 50.0, 2.0, 5.0, 10.0);
  Simulation sim(w.streets, w.agents, w.origin, 9, {18.0, 20.0, 0.2});
  sim.step();
  for (AgentId i = 0; i < static_cast<AgentId>(sim.agent_count()); ++i)
    EXPECT_EQ(sim.infected_in_step(i), i == w.origin);
}

TEST(Simulation, NeighborIndexMatchesPairwiseScan) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto w = make_world(seed, 50.0, 1.5, 6.0, 10.0);
    Simulation sim(w.streets, w.agents, w.origin, seed, {18.0, 20.0, 0.2});
    for (int k = 0; k < 30; ++k) {
      sim.step();
      const auto n = static_cast<AgentId>(sim.agent_count());
      for (AgentId i = 0; i < n; ++i) {
        std::vector<AgentId> want;
        for (AgentId j = 0; j < n; ++j) {
          if (j == i || sim.current_edge(i) != sim.current_edge(j)) continue;
          if (distance(sim.position(i).position, sim.position(j).position) <= 0.2) want.push_back(j);
        }
        auto got = sim.neighbors(i);
        std::sort(got.begin(), got.end());
        ASSERT_EQ(got, want);
      }
    }
  }
}

TEST(Simulation, InfectionTimesMatchBruteForceReplay) {
  // Independent replay: every step, every (infected, susceptible) pair on a shared street
  // within r proposes a time; the minimum over proposals must match the simulation.
  std::size_t lowered = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto w = make_world(seed, 50.0, 1.5, 8.0, 8.0);
    const InfectionParams params{18.0, 20.0, 0.2};
    Simulation sim(w.streets, w.agents, w.origin, seed + 100, params);
    std::vector<double> T(sim.agent_count(), kNever);
    T[w.origin] = 0.0;
    for (int k = 1; k <= 200; ++k) {
      sim.step();
      const double t = sim.time();
      std::vector<char> infected(T.size());
      for (std::size_t i = 0; i < T.size(); ++i) infected[i] = t >= T[i];
      for (AgentId i = 0; i < static_cast<AgentId>(T.size()); ++i) {
        if (!infected[i]) continue;
        for (AgentId j = 0; j < static_cast<AgentId>(T.size()); ++j) {
          if (infected[j] || sim.current_edge(i) != sim.current_edge(j)) continue;
          if (distance(sim.position(i).position, sim.position(j).position) > params.r) continue;
          const auto c = transmission_time(connection_interval(sim.kinematics(i), sim.kinematics(j), t, params.r),
                                           T[i], params.rho);
          if (c && *c < T[j]) {
            lowered += T[j] != kNever;
            T[j] = *c;
          }
        }
      }
      for (std::size_t i = 0; i < T.size(); ++i) ASSERT_EQ(sim.infection_time(static_cast<AgentId>(i)), T[i]);
    }
  }
  EXPECT_GT(lowered, 0u);
}

TEST(Simulation, CoarseAndFineStepsAgree) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto w = make_world(seed, 50.0, 2.0, 5.0, 10.0);
    Simulation coarse(w.streets, w.agents, w.origin, seed, {18.0, 20.0, 0.2});
    Simulation fine(w.streets, w.agents, w.origin, seed, {1.8, 20.0, 0.2});
    for (int k = 1; k <= 300; ++k) {
      coarse.step();
      for (int j = 0; j < 10; ++j) fine.step();
      const double t = coarse.time();
      for (AgentId i = 0; i < static_cast<AgentId>(coarse.agent_count()); ++i) {
        const double a = coarse.infection_time(i), b = fine.infection_time(i);
        ASSERT_EQ(a <= t, b <= t) << "agent " << i << " at " << t;
        if (a <= t) ASSERT_NEAR(a, b, 1e-6);
      }
    }
  }
}

TEST(Simulation, FinalEventsAreOrderedAndReportedOnce) {
  auto w = make_world(4, 50.0, 2.0, 8.0, 8.0);
  Simulation sim(w.streets, w.agents, w.origin, 4, {18.0, 20.0, 0.2});
  std::map<AgentId, int> seen;
  auto first = sim.take_final_events();
  ASSERT_EQ(first.size(), 1u);
  EXPECT_EQ(first[0].agent, w.origin);
  EXPECT_EQ(first[0].infector, -1);
  for (int k = 0; k < 300; ++k) {
    sim.step();
    const auto ev = sim.take_final_events();
    for (std::size_t i = 0; i < ev.size(); ++i) {
      EXPECT_LE(ev[i].time, sim.time());
      EXPECT_GT(ev[i].time, sim.time() - 2.0 * 18.0);
      EXPECT_EQ(ev[i].time, sim.infection_time(ev[i].agent));
      if (i > 0) EXPECT_LE(ev[i - 1].time, ev[i].time);
      EXPECT_EQ(++seen[ev[i].agent], 1);
      EXPECT_LE(sim.infection_time(ev[i].infector) + 20.0, ev[i].time);
    }
  }
  EXPECT_GT(seen.size(), 1u);
}

TEST(Simulation, NoDevicesMeansNoSpread) {
  auto w = make_world(5, 50.0, 2.0, 0.0, 5.0);
  ASSERT_EQ(w.agents.size(), 1u);
  Simulation sim(w.streets, w.agents, w.origin, 5, {18.0, 20.0, 0.2});
  for (int k = 0; k < 50; ++k) sim.step();
  EXPECT_EQ(sim.infected_count_in_step(), 1u);
}
