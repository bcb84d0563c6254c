#pragma once

// SI dynamics on the street system.
//
// Connectivity: two agents are connected while they are on the same edge and at
// most r apart. The state of agent i at step k is read from its first-infection
// time recorded at the end of step k-1; the step function moves every agent, then
// lets every infected agent update the first-infection times of its susceptible
// neighbours from the exact connection interval around k*dt. With dt < rho every
// connection long enough to transmit is seen at some step, which makes the
// resulting infection times independent of dt.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <vector>

#include "error.hpp"
#include "mobility.hpp"
#include "street_system.hpp"

namespace d2d {

using AgentId = std::int32_t;

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct ConnectionInterval {
  double start = 0.0;  // s
  double end = 0.0;    // s
  double duration() const { return end - start; }
};

/// On-edge kinematics of one agent inside its current constant-velocity record.
struct ContactKinematics {
  double offset = 0.0;    // km, at the reference time
  double velocity = 0.0;  // km/s, signed along the edge
  double t_in = 0.0;      // s, entry into the record
  double t_out = 0.0;     // s, exit from the record
};

/// Interval around reference time t during which the two agents stay within r of each
/// other on their shared edge, given their offsets at t.
inline ConnectionInterval connection_interval(const ContactKinematics& i, const ContactKinematics& j, double t,
                                              double r) {
  if (i.velocity != j.velocity) {
    const double dv = i.velocity - j.velocity;
    const double closest = t - (i.offset - j.offset) / dv;
    const double half = r / std::abs(dv);
    return {std::max({closest - half, i.t_in, j.t_in}), std::min({closest + half, i.t_out, j.t_out})};
  }
  return {std::max(i.t_in, j.t_in), std::min(i.t_out, j.t_out)};
}

/// Time at which an agent infected at `infector_time` transmits over the connection
/// interval `iv`: the connection must last at least rho after the infector's infection.
inline std::optional<double> transmission_time(ConnectionInterval iv, double infector_time, double rho) {
  iv.start = std::max(iv.start, infector_time);
  if (iv.duration() >= rho) return iv.start + rho;
  return std::nullopt;
}

struct InfectionParams {
  double dt = 18.0;   // s
  double rho = 20.0;  // s
  double r = 0.2;     // km
};

struct InfectionEvent {
  AgentId agent = -1;
  double time = 0.0;  // s
  AgentId infector = -1;
  EdgeId edge = kNoEdge;
};

struct AgentSetup {
  StreetPoint base;
  double speed_kmh = 5.0;
};

class Simulation {
 public:
  /// Agents are numbered in the order given; `origin` starts infected at t = 0.
  Simulation(std::shared_ptr<const StreetSystem> streets, const std::vector<AgentSetup>& agents, AgentId origin,
             std::uint64_t mobility_seed, InfectionParams params, MobilityConfig mobility = {})
      : streets_(std::move(streets)), params_(params), paths_(*streets_), ctx_{streets_.get(), &paths_, mobility} {
    if (!(params_.dt > 0.0) || !(params_.rho > 0.0) || !(params_.r > 0.0))
      throw Error("invalid_argument", "dt, rho and r must be positive");
    if (params_.dt >= params_.rho) throw Error("discretization_contract", "discretization contract violated");
    if (origin < 0 || origin >= static_cast<AgentId>(agents.size()))
      throw Error("invalid_argument", "origin agent out of range");
    walkers_.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i)
      walkers_.emplace_back(agents[i].base, agents[i].speed_kmh, derive_seed(mobility_seed, {i}));
    const auto n = agents.size();
    infection_time_.assign(n, kNever);
    infector_.assign(n, -1);
    infection_edge_.assign(n, kNoEdge);
    infected_now_.assign(n, 0);
    current_.resize(n);
    origin_ = origin;
    infection_time_[origin] = 0.0;
    infection_edge_[origin] = agents[origin].base.edge;
    infected_now_[origin] = 1;
    pending_.push_back(origin);
    for (std::size_t i = 0; i < n; ++i) walkers_[i].advance_to(0.0, ctx_);
    capture_positions(0.0);
  }

  const StreetSystem& streets() const { return *streets_; }
  const InfectionParams& params() const { return params_; }
  std::size_t agent_count() const { return walkers_.size(); }
  AgentId origin() const { return origin_; }
  std::size_t step_count() const { return step_; }
  double time() const { return static_cast<double>(step_) * params_.dt; }

  /// First-infection times, kNever for agents not (yet) infected.
  const std::vector<double>& infection_times() const { return infection_time_; }
  double infection_time(AgentId i) const { return infection_time_[i]; }
  AgentId infector(AgentId i) const { return infector_[i]; }
  EdgeId infection_edge(AgentId i) const { return infection_edge_[i]; }

  /// Membership of the infected set used by the last step (kdt >= T at step k-1).
  bool infected_in_step(AgentId i) const { return infected_now_[i] != 0; }
  std::size_t infected_count_in_step() const {
    return static_cast<std::size_t>(std::count(infected_now_.begin(), infected_now_.end(), 1));
  }

  const Walker& walker(AgentId i) const { return walkers_[i]; }
  StreetPoint position(AgentId i) const { return streets_->point_at(current_[i].edge, current_[i].offset); }
  StreetPoint position_at(AgentId i, double t) const { return walkers_[i].position_at(t, *streets_); }
  EdgeId current_edge(AgentId i) const { return current_[i].edge; }
  ContactKinematics kinematics(AgentId i) const {
    const auto& c = current_[i];
    return {c.offset, c.velocity, c.t_in, c.t_out};
  }

  /// Agents on the same edge as i, at most r away, at the current step time.
  std::vector<AgentId> neighbors(AgentId i) const {
    std::vector<AgentId> out;
    for_each_neighbor(i, [&](AgentId j) { out.push_back(j); });
    return out;
  }

  /// Requires i and j to share their current edge.
  ConnectionInterval connection(AgentId i, AgentId j) const {
    if (current_[i].edge != current_[j].edge)
      throw Error("contract_violation", "agents are not on a common edge");
    return connection_interval(kinematics(i), kinematics(j), time(), params_.r);
  }

  /// Lowers the first-infection time of every susceptible neighbour of i that stays
  /// connected to i for at least rho after i's own infection.
  void infect_neighbors(AgentId i) {
    const double t_i = infection_time_[i];
    for_each_neighbor(i, [&](AgentId j) {
      if (infected_now_[j]) return;
      const auto candidate = transmission_time(connection(i, j), t_i, params_.rho);
      if (candidate && *candidate < infection_time_[j]) {
        if (infection_time_[j] == kNever) pending_.push_back(j);
        infection_time_[j] = *candidate;
        infector_[j] = i;
        infection_edge_[j] = current_[i].edge;
      }
    });
  }

  void step() {
    const std::size_t k = step_ + 1;
    const double t = static_cast<double>(k) * params_.dt;
    for (std::size_t i = 0; i < walkers_.size(); ++i) infected_now_[i] = t >= infection_time_[i] ? 1 : 0;
    for (auto& w : walkers_) w.advance_to(t, ctx_);
    step_ = k;
    capture_positions(t);
    for (AgentId i = 0; i < static_cast<AgentId>(walkers_.size()); ++i)
      if (infected_now_[i]) infect_neighbors(i);
    for (auto& w : walkers_) w.forget_before(t - 2.0 * params_.dt);
  }

  /// Infection events that can no longer change (time <= current step time), in
  /// (time, agent) order. Each event is returned once.
  std::vector<InfectionEvent> take_final_events() {
    const double t = time();
    std::vector<InfectionEvent> out;
    auto keep = std::partition(pending_.begin(), pending_.end(), [&](AgentId j) { return infection_time_[j] > t; });
    for (auto it = keep; it != pending_.end(); ++it)
      out.push_back({*it, infection_time_[*it], infector_[*it], infection_edge_[*it]});
    pending_.erase(keep, pending_.end());
    std::sort(out.begin(), out.end(), [](const InfectionEvent& a, const InfectionEvent& b) {
      return a.time < b.time || (a.time == b.time && a.agent < b.agent);
    });
    return out;
  }

 private:
  struct Current {
    EdgeId edge = kNoEdge;
    double offset = 0.0;
    double velocity = 0.0;
    double t_in = 0.0;
    double t_out = 0.0;
  };

  void capture_positions(double t) {
    const auto n = walkers_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = walkers_[i].record_at(t);
      const double len = streets_->edge(r.edge).length;
      current_[i] = {r.edge, std::clamp(r.offset_at(t), 0.0, len), r.velocity, r.t_in, r.t_out};
    }
    // Per-edge index: agents sorted by (edge, offset, id).
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](AgentId a, AgentId b) {
      const auto& ca = current_[a];
      const auto& cb = current_[b];
      if (ca.edge != cb.edge) return ca.edge < cb.edge;
      if (ca.offset != cb.offset) return ca.offset < cb.offset;
      return a < b;
    });
    rank_.resize(n);
    for (std::size_t p = 0; p < n; ++p) rank_[order_[p]] = p;
  }

  template <typename F>
  void for_each_neighbor(AgentId i, F&& f) const {
    const auto& ci = current_[i];
    const std::size_t p = rank_[i];
    for (std::size_t q = p; q-- > 0;) {
      const auto& cj = current_[order_[q]];
      if (cj.edge != ci.edge || ci.offset - cj.offset > params_.r) break;
      f(order_[q]);
    }
    for (std::size_t q = p + 1; q < order_.size(); ++q) {
      const auto& cj = current_[order_[q]];
      if (cj.edge != ci.edge || cj.offset - ci.offset > params_.r) break;
      f(order_[q]);
    }
  }

  std::shared_ptr<const StreetSystem> streets_;
  InfectionParams params_;
  PathFinder paths_;
  MobilityContext ctx_;
  std::vector<Walker> walkers_;
  AgentId origin_ = 0;
  std::size_t step_ = 0;

  std::vector<double> infection_time_;
  std::vector<AgentId> infector_;
  std::vector<EdgeId> infection_edge_;
  std::vector<char> infected_now_;
  std::vector<AgentId> pending_;

  std::vector<Current> current_;
  std::vector<AgentId> order_;
  std::vector<std::size_t> rank_;
};

}  // namespace d2d
