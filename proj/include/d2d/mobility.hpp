#pragma once

// Street-adapted random waypoint mobility.
//
// Every agent owns an itinerary of constant-velocity records. A record covers the
// half-open interval [t_in, t_out) on one edge; its entry and exit instants are exact
// event times, never snapped to the simulation step. Reversals in the middle of an
// edge (arrival at destination or base) start a new record, so the velocity inside a
// record is constant, which is what the connection-interval arithmetic assumes.

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <vector>

#include "error.hpp"
#include "random.hpp"
#include "street_system.hpp"

namespace d2d {

inline constexpr double kSecondsPerHour = 3600.0;

inline double kmh_to_kms(double v) { return v / kSecondsPerHour; }

struct MotionRecord {
  EdgeId edge = kNoEdge;
  double t_in = 0.0;       // s
  double t_out = 0.0;      // s
  double offset_in = 0.0;  // km, offset at t_in
  double velocity = 0.0;   // km/s, signed along the edge's a->b direction

  double offset_at(double t) const { return offset_in + velocity * (t - t_in); }
  double offset_out() const { return offset_at(t_out); }
};

/// Agent position and signed on-edge velocity at one instant.
struct KinematicState {
  StreetPoint position;
  double velocity = 0.0;  // km/s, signed
  double speed = 0.0;     // km/s, |velocity| while moving
};

struct MobilityConfig {
  /// Waypoint spread: sigma = waypoint_time * v (15 minutes of straight-line travel).
  double waypoint_time_s = 900.0;
  /// Gaussian draws allowed before an agent is declared isolated for one cycle.
  int max_destination_retries = 100;
  /// Standing time of an isolated agent, or of one whose destination equals its base.
  double stationary_wait_s = 900.0;
};

inline double waypoint_sigma_km(double speed_kmh, const MobilityConfig& config = {}) {
  return config.waypoint_time_s / kSecondsPerHour * speed_kmh;
}

/// Gaussian waypoint around `current`, projected on the streets; resampled while the
/// projection lands on a component that `current` cannot reach.
inline StreetPoint sample_destination(const StreetPoint& current, double speed_kmh, const StreetSystem& streets,
                                      Rng& rng, const MobilityConfig& config = {}) {
  if (!(speed_kmh > 0.0)) throw Error("invalid_argument", "speed must be positive");
  std::normal_distribution<double> gauss(0.0, waypoint_sigma_km(speed_kmh, config));
  const int home = streets.component_of_edge(current.edge);
  for (int attempt = 0; attempt < config.max_destination_retries; ++attempt) {
    const double dx = gauss(rng);
    const double dy = gauss(rng);
    const StreetPoint dest = streets.nearest({current.position.x + dx, current.position.y + dy});
    if (streets.component_of_edge(dest.edge) == home) return dest;
  }
  throw Error("isolated_agent", "isolated agent");
}

/// What the street system and routing engine look like to a moving agent.
struct MobilityContext {
  const StreetSystem* streets = nullptr;
  PathFinder* paths = nullptr;
  MobilityConfig config;
};

class Walker {
 public:
  Walker(StreetPoint base, double speed_kmh, std::uint64_t seed, double start_time = 0.0)
      : base_(base), speed_kmh_(speed_kmh), rng_(seed), planned_until_(start_time) {
    if (!(speed_kmh_ > 0.0)) throw Error("invalid_argument", "speed must be positive");
  }

  const StreetPoint& base() const { return base_; }
  double speed_kmh() const { return speed_kmh_; }
  std::size_t cycles() const { return cycles_; }
  std::size_t isolation_events() const { return isolation_events_; }
  double distance_travelled_until(double t) const;
  const std::deque<MotionRecord>& records() const { return records_; }

  /// Plans far enough that the record covering `t` is final: a later record exists.
  void advance_to(double t, MobilityContext& ctx) {
    while (records_.empty() || records_.back().t_in <= t) plan_cycle(ctx);
  }

  /// Record covering t; t must lie in the planned, retained range.
  const MotionRecord& record_at(double t) const {
    if (records_.empty() || t < records_.front().t_in || t >= records_.back().t_out)
      throw Error("out_of_horizon", "time outside the retained itinerary");
    auto it = std::upper_bound(records_.begin(), records_.end(), t,
                               [](double value, const MotionRecord& r) { return value < r.t_in; });
    return *std::prev(it);
  }

  KinematicState state_at(double t, const StreetSystem& streets) const {
    const auto& r = record_at(t);
    return {streets.point_at(r.edge, r.offset_at(t)), r.velocity, std::abs(r.velocity)};
  }

  StreetPoint position_at(double t, const StreetSystem& streets) const { return state_at(t, streets).position; }

  /// Drops records that ended at or before t (the one covering t is kept).
  void forget_before(double t) {
    while (records_.size() > 1 && records_.front().t_out <= t) records_.pop_front();
  }

 private:
  void append(const MotionRecord& r) {
    if (!records_.empty()) {
      auto& last = records_.back();
      if (last.edge == r.edge && last.velocity != 0.0 && last.velocity == r.velocity && last.t_out == r.t_in) {
        last.t_out = r.t_out;
        return;
      }
    }
    records_.push_back(r);
  }

  void stand_still(double duration) {
    append({base_.edge, planned_until_, planned_until_ + duration, base_.offset, 0.0});
    planned_until_ += duration;
  }

  void plan_cycle(MobilityContext& ctx) {
    ++cycles_;
    StreetPoint dest;
    try {
      dest = sample_destination(base_, speed_kmh_, *ctx.streets, rng_, ctx.config);
    } catch (const Error& e) {
      if (e.code() != "isolated_agent") throw;
      ++isolation_events_;
      stand_still(ctx.config.stationary_wait_s);
      return;
    }
    const Path out = ctx.paths->shortest_path(base_, dest);
    if (out.legs.empty()) {
      stand_still(ctx.config.stationary_wait_s);
      return;
    }
    const double v = kmh_to_kms(speed_kmh_);
    auto walk = [&](const Path& p) {
      for (const auto& leg : p.legs) {
        const double t_out = planned_until_ + leg.length() / v;
        append({leg.edge, planned_until_, t_out, leg.from, leg.direction() * v});
        planned_until_ = t_out;
      }
    };
    walk(out);
    walk(out.reversed());
  }

  StreetPoint base_;
  double speed_kmh_;
  Rng rng_;
  double planned_until_;
  std::deque<MotionRecord> records_;
  std::size_t cycles_ = 0;
  std::size_t isolation_events_ = 0;
};

inline double Walker::distance_travelled_until(double t) const {
  double d = 0.0;
  for (const auto& r : records_) {
    if (r.t_in >= t) break;
    d += std::abs(r.velocity) * (std::min(t, r.t_out) - r.t_in);
  }
  return d;
}

}  // namespace d2d
