#pragma once

// Propagation speed and infection rate at a finite radius u around the initial
// infected position.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "infection.hpp"

namespace d2d {

/// First time in [a, b] at which a point moving as start + w*(t - a) is at
/// distance >= u from center, or nothing.
inline std::optional<double> first_exit_time(Point start, Point w, double a, double b, Point center, double u) {
  const Point rel = start - center;
  const double c = dot(rel, rel) - u * u;
  if (c >= 0.0) return a;
  const double qa = dot(w, w);
  if (qa == 0.0) return std::nullopt;
  const double qb = 2.0 * dot(rel, w);
  const double s = (-qb + std::sqrt(qb * qb - 4.0 * qa * c)) / (2.0 * qa);
  if (a + s <= b) return a + s;
  return std::nullopt;
}

/// First time in [a, b] at which the walker is at distance >= u from center.
inline std::optional<double> first_exit_time(const Walker& walker, const StreetSystem& streets, double a, double b,
                                             Point center, double u) {
  for (const auto& r : walker.records()) {
    if (r.t_out <= a) continue;
    if (r.t_in > b) break;
    const double lo = std::max(a, r.t_in);
    const double hi = std::min(b, r.t_out);
    const Point p0 = streets.point_at(r.edge, r.offset_at(lo)).position;
    const Point w = r.velocity * streets.edge_direction(r.edge);
    if (auto hit = first_exit_time(p0, w, lo, hi, center, u)) return hit;
  }
  return std::nullopt;
}

enum class TauMode {
  /// Any infected agent, the initial one included, at distance >= u (carriers' motion counts).
  Carrier,
  /// Infected agents other than the initial one, with their motion after infection.
  SecondaryCarrier,
  /// Position at the moment of infection of agents other than the initial one.
  InfectionSite,
};

inline TauMode parse_tau_mode(std::string_view s) {
  if (s == "carrier") return TauMode::Carrier;
  if (s == "secondary-carrier") return TauMode::SecondaryCarrier;
  if (s == "infection-site") return TauMode::InfectionSite;
  throw Error("invalid_argument", "unknown tau mode '" + std::string(s) + "'");
}

inline const char* to_string(TauMode m) {
  switch (m) {
    case TauMode::Carrier: return "carrier";
    case TauMode::SecondaryCarrier: return "secondary-carrier";
    case TauMode::InfectionSite: return "infection-site";
  }
  return "?";
}

/// Watches a running simulation for the first time the infection is at distance >= u
/// from the initial infected position. Carrier modes are exact in continuous time:
/// each infected agent's piecewise-linear trajectory is tested over every step window
/// from the later of its infection time and the previous step time.
class TauTracker {
 public:
  TauTracker(const Simulation& sim, double u, TauMode mode = TauMode::Carrier) : u_(u), mode_(mode) {
    if (!(u > 0.0)) throw Error("invalid_argument", "u must be positive");
    center_ = sim.position_at(sim.origin(), 0.0).position;
    checked_until_ = sim.time();
  }

  Point center() const { return center_; }
  double u() const { return u_; }
  TauMode mode() const { return mode_; }
  std::optional<double> tau() const { return tau_; }

  /// Call after each step; returns tau once reached.
  std::optional<double> observe(const Simulation& sim) {
    if (tau_) return tau_;
    const double t = sim.time();
    std::optional<double> best;
    const auto& times = sim.infection_times();
    for (AgentId j = 0; j < static_cast<AgentId>(times.size()); ++j) {
      if (times[j] > t) continue;
      if (mode_ != TauMode::Carrier && j == sim.origin()) continue;
      if (mode_ == TauMode::InfectionSite) {
        if (times[j] <= checked_until_) continue;
        if (distance(sim.position_at(j, times[j]).position, center_) >= u_ && (!best || times[j] < *best))
          best = times[j];
        continue;
      }
      const double a = std::max(times[j], checked_until_);
      if (best && a >= *best) continue;
      const auto hit = first_exit_time(sim.walker(j), sim.streets(), a, best ? std::min(*best, t) : t, center_, u_);
      if (hit && (!best || *hit < *best)) best = hit;
    }
    checked_until_ = t;
    tau_ = best;
    return tau_;
  }

 private:
  double u_;
  TauMode mode_;
  Point center_;
  double checked_until_ = 0.0;
  std::optional<double> tau_;
};

struct InfectionCounts {
  std::size_t infected = 0;           // all agents with T <= t
  std::size_t in_ball = 0;            // agents strictly inside B(center, u) at t
  std::size_t infected_in_ball = 0;
  std::size_t infected_outside_ball = 0;
};

inline InfectionCounts count_at(const Simulation& sim, double t, Point center, double u) {
  InfectionCounts c;
  for (AgentId j = 0; j < static_cast<AgentId>(sim.agent_count()); ++j) {
    const bool infected = sim.infection_time(j) <= t;
    const bool inside = distance(sim.position_at(j, t).position, center) < u;
    c.infected += infected;
    c.in_ball += inside;
    c.infected_in_ball += infected && inside;
    c.infected_outside_ball += infected && !inside;
  }
  return c;
}

struct InfectionRate {
  /// |I(tau)| / (agents inside the open ball at tau); 0 when tau was not reached.
  double raw = 0.0;
  /// Infected agents inside the ball over agents inside the ball.
  double in_ball = 0.0;
  bool no_propagation = true;
};

struct RunMetrics {
  double u = 0.0;
  std::optional<double> tau;  // s
  InfectionCounts at_tau;
};

inline InfectionRate infection_rate(const RunMetrics& m) {
  if (!m.tau) return {};
  InfectionRate r;
  r.no_propagation = false;
  if (m.at_tau.in_ball > 0) {
    r.raw = static_cast<double>(m.at_tau.infected) / static_cast<double>(m.at_tau.in_ball);
    r.in_ball = static_cast<double>(m.at_tau.infected_in_ball) / static_cast<double>(m.at_tau.in_ball);
  }
  return r;
}

struct PropagationSpeed {
  double kmh = 0.0;
  std::size_t not_reached = 0;
};

/// u * mean(1/tau_u) over runs, in km/h; runs that never reached u contribute 0.
inline PropagationSpeed propagation_speed(const std::vector<std::optional<double>>& taus_s, double u) {
  if (taus_s.empty()) throw Error("empty_input", "no runs to aggregate");
  double sum = 0.0;
  PropagationSpeed out;
  for (const auto& tau : taus_s) {
    if (tau && *tau > 0.0)
      sum += kSecondsPerHour / *tau;
    else
      ++out.not_reached;
  }
  out.kmh = u * sum / static_cast<double>(taus_s.size());
  return out;
}

}  // namespace d2d
