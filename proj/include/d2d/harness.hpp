#pragma once

// Experiment driver: parameter sets, single runs, grid sweeps and CSV output.

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "format.hpp"
#include "infection.hpp"
#include "metrics.hpp"
#include "mobility.hpp"
#include "point_process.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "street_system.hpp"

namespace d2d {

struct ParameterSet {
  std::optional<double> dt;  // s; defaults to 0.9 rho
  double rho = 20.0;         // s
  double r = 0.2;            // km
  double lambda = 50.0;      // km^-2
  double theta = 3.0;        // km^-1
  double v = 5.0;            // km/h
  /// Optional per-agent speeds, uniform in [v_min, v_max] km/h.
  std::optional<double> v_min;
  std::optional<double> v_max;
  double H = 10.0;           // km
  double u = 3.5;            // km
  double horizon_h = 24.0;   // h; used when k_max is not set
  std::optional<std::size_t> k_max;
  std::uint64_t seed = 1;
  std::size_t reps = 20;
  PlacementMode placement = PlacementMode::NearestStreet;
  bool early_exit = true;
  TauMode tau_mode = TauMode::InfectionSite;
  MobilityConfig mobility;

  double step() const { return dt.value_or(0.9 * rho); }
  std::size_t max_steps() const {
    return k_max.value_or(static_cast<std::size_t>(std::ceil(horizon_h * kSecondsPerHour / step() - 1e-9)));
  }
  bool heterogeneous_speed() const { return v_min.has_value() || v_max.has_value(); }

  /// Throws on hard violations; returns warnings for soft ones.
  std::vector<std::string> validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw Error("invalid_parameters", what);
    };
    require(rho > 0.0, "rho must be positive");
    require(step() > 0.0, "dt must be positive");
    if (step() >= rho) throw Error("discretization_contract", "discretization contract violated");
    require(r > 0.0, "r must be positive");
    require(lambda > 0.0, "lambda must be positive");
    require(theta >= 0.0, "theta must be non-negative");
    require(v > 0.0, "v must be positive");
    require(H > 0.0, "H must be positive");
    require(u > 0.0, "u must be positive");
    require(horizon_h > 0.0, "horizon_h must be positive");
    require(max_steps() >= 1, "k_max must be at least 1");
    require(reps >= 1, "reps must be at least 1");
    if (heterogeneous_speed()) {
      require(v_min.has_value() && v_max.has_value(), "v_min and v_max must be given together");
      require(*v_min > 0.0 && *v_min <= *v_max, "need 0 < v_min <= v_max");
    }
    std::vector<std::string> warnings;
    if (u > 0.45 * H) warnings.push_back("u exceeds 0.45*H; border effects likely");
    return warnings;
  }
};

/// Sets one parameter by its config key. Units: dt, rho, waypoint_time_s,
/// stationary_wait_s in s; r, H, u in km; lambda in km^-2; theta in km^-1;
/// v, v_min, v_max in km/h; horizon_h in h.
inline void set_parameter(ParameterSet& p, std::string_view key, std::string_view value) {
  if (key == "dt") p.dt = parse_double(value);
  else if (key == "rho") p.rho = parse_double(value);
  else if (key == "r") p.r = parse_double(value);
  else if (key == "lambda") p.lambda = parse_double(value);
  else if (key == "theta") p.theta = parse_double(value);
  else if (key == "v") p.v = parse_double(value);
  else if (key == "v_min") p.v_min = parse_double(value);
  else if (key == "v_max") p.v_max = parse_double(value);
  else if (key == "H") p.H = parse_double(value);
  else if (key == "u") p.u = parse_double(value);
  else if (key == "horizon_h") p.horizon_h = parse_double(value);
  else if (key == "k_max") p.k_max = parse_integer<std::size_t>(value);
  else if (key == "seed") p.seed = parse_integer<std::uint64_t>(value);
  else if (key == "reps") p.reps = parse_integer<std::size_t>(value);
  else if (key == "placement") p.placement = parse_placement_mode(value);
  else if (key == "early_exit") {
    if (value == "true" || value == "1") p.early_exit = true;
    else if (value == "false" || value == "0") p.early_exit = false;
    else throw Error("parse", "early_exit must be true or false");
  }
  else if (key == "tau_mode") p.tau_mode = parse_tau_mode(value);
  else if (key == "waypoint_time_s") p.mobility.waypoint_time_s = parse_double(value);
  else if (key == "stationary_wait_s") p.mobility.stationary_wait_s = parse_double(value);
  else if (key == "destination_retries") p.mobility.max_destination_retries = parse_integer<int>(value);
  else throw Error("unknown_key", "unknown parameter '" + std::string(key) + "'");
}

inline void set_parameter(ParameterSet& p, std::string_view key, double value) {
  set_parameter(p, key, format_double(value));
}

/// Flat `key = value` lines; `#` starts a comment.
inline void apply_config(ParameterSet& p, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view t = trim(line);
    if (const auto hash = t.find('#'); hash != std::string_view::npos) t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw Error("parse", "config line " + std::to_string(line_no) + ": expected key = value");
    set_parameter(p, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

inline void apply_assignment(ParameterSet& p, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error("parse", "expected key=value, got '" + std::string(assignment) + "'");
  set_parameter(p, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

inline void write_config(std::ostream& os, const ParameterSet& p) {
  os << "dt = " << format_double(p.step()) << "  # s\n"
     << "rho = " << format_double(p.rho) << "  # s\n"
     << "r = " << format_double(p.r) << "  # km\n"
     << "lambda = " << format_double(p.lambda) << "  # km^-2\n"
     << "theta = " << format_double(p.theta) << "  # km^-1\n"
     << "v = " << format_double(p.v) << "  # km/h\n";
  if (p.v_min) os << "v_min = " << format_double(*p.v_min) << "  # km/h\n";
  if (p.v_max) os << "v_max = " << format_double(*p.v_max) << "  # km/h\n";
  os << "H = " << format_double(p.H) << "  # km\n"
     << "u = " << format_double(p.u) << "  # km\n"
     << "k_max = " << p.max_steps() << "  # steps\n"
     << "seed = " << p.seed << '\n'
     << "reps = " << p.reps << '\n'
     << "placement = " << to_string(p.placement) << '\n'
     << "early_exit = " << (p.early_exit ? "true" : "false") << '\n'
     << "tau_mode = " << to_string(p.tau_mode) << '\n'
     << "waypoint_time_s = " << format_double(p.mobility.waypoint_time_s) << "  # s\n"
     << "stationary_wait_s = " << format_double(p.mobility.stationary_wait_s) << "  # s\n"
     << "destination_retries = " << p.mobility.max_destination_retries << '\n';
}

struct RunSeeds {
  std::uint64_t map = 0;
  std::uint64_t agents = 0;
};

inline RunSeeds seeds_for_run(std::uint64_t run_seed) {
  return {derive_seed(run_seed, {kMapStream}), derive_seed(run_seed, {kDeviceStream})};
}

struct RunResult {
  ParameterSet params;
  std::uint64_t seed = 0;
  std::uint64_t map_seed = 0;
  std::size_t agents = 0;
  AgentId origin = 0;
  std::size_t steps = 0;
  RunMetrics metrics;
  InfectionRate rate;
  std::vector<InfectionEvent> events;
  std::size_t isolation_events = 0;

  bool reached() const { return metrics.tau.has_value(); }
};

struct RunHooks {
  /// Called after every step with the live simulation.
  std::function<void(const Simulation&)> on_step;
};

/// One simulation: map, devices, initial infected, then steps until k_max or until
/// the infection first reaches distance u (when early exit is on).
inline RunResult run_simulation(const ParameterSet& P, RunSeeds seeds,
                                std::shared_ptr<const StreetSystem> map = nullptr, const RunHooks& hooks = {}) {
  P.validate();
  if (!map) map = std::make_shared<const StreetSystem>(generate_street_system(P.lambda, P.H, seeds.map));

  Rng device_rng(derive_seed(seeds.agents, {kDeviceStream}));
  auto devices = sample_devices(*map, P.theta, device_rng);
  const auto initial = place_initial_infected(*map, devices, P.placement);

  std::vector<AgentSetup> agents;
  agents.reserve(devices.size() + 1);
  for (const auto& d : devices) agents.push_back({d, P.v});
  AgentId origin = 0;
  if (initial.converted_device) {
    origin = static_cast<AgentId>(*initial.converted_device);
  } else {
    origin = static_cast<AgentId>(agents.size());
    agents.push_back({initial.position, P.v});
  }
  if (P.heterogeneous_speed()) {
    std::uniform_real_distribution<double> speed(*P.v_min, *P.v_max);
    for (auto& a : agents) a.speed_kmh = speed(device_rng);
  }

  Simulation sim(map, agents, origin, derive_seed(seeds.agents, {kMobilityStream}),
                 {P.step(), P.rho, P.r}, P.mobility);
  TauTracker tracker(sim, P.u, P.tau_mode);

  RunResult out;
  out.params = P;
  out.seed = seeds.agents;
  out.map_seed = map->seed();
  out.agents = agents.size();
  out.origin = origin;
  out.metrics.u = P.u;
  out.events = sim.take_final_events();

  const std::size_t k_max = P.max_steps();
  for (std::size_t k = 1; k <= k_max; ++k) {
    sim.step();
    if (hooks.on_step) hooks.on_step(sim);
    auto fresh = sim.take_final_events();
    out.events.insert(out.events.end(), fresh.begin(), fresh.end());
    if (!out.metrics.tau) {
      if (const auto tau = tracker.observe(sim)) {
        out.metrics.tau = tau;
        out.metrics.at_tau = count_at(sim, *tau, tracker.center(), P.u);
        if (P.early_exit) break;
      }
    }
  }
  out.steps = sim.step_count();
  out.rate = infection_rate(out.metrics);
  for (std::size_t i = 0; i < sim.agent_count(); ++i) out.isolation_events += sim.walker(static_cast<AgentId>(i)).isolation_events();
  return out;
}

inline RunResult run_simulation(const ParameterSet& P, std::uint64_t run_seed) {
  return run_simulation(P, seeds_for_run(run_seed));
}

// ---------------------------------------------------------------------------
// CSV output

inline constexpr const char* kRunCsvHeader =
    "seed,map_seed,lambda,theta,v,rho,r,u,H,dt,k_max,agents,steps,reached,tau_u_s,infected_at_tau,"
    "in_ball_at_tau,infected_outside_ball,R_u,R_u_in_ball,isolation_events";

inline void write_run_row(std::ostream& os, const RunResult& r) {
  const auto& p = r.params;
  const auto& c = r.metrics.at_tau;
  os << r.seed << ',' << r.map_seed << ',' << format_double(p.lambda) << ',' << format_double(p.theta) << ','
     << format_double(p.v) << ',' << format_double(p.rho) << ',' << format_double(p.r) << ','
     << format_double(p.u) << ',' << format_double(p.H) << ',' << format_double(p.step()) << ','
     << p.max_steps() << ',' << r.agents << ',' << r.steps << ',' << (r.reached() ? 1 : 0) << ','
     << (r.reached() ? format_double(*r.metrics.tau) : std::string("")) << ',' << c.infected << ','
     << c.in_ball << ',' << c.infected_outside_ball << ',' << format_double(r.rate.raw) << ','
     << format_double(r.rate.in_ball) << ',' << r.isolation_events << '\n';
}

inline constexpr const char* kEventCsvHeader = "agent_id,t_infected_s,infector_id,edge_id";

inline void write_events(std::ostream& os, const std::vector<InfectionEvent>& events) {
  os << kEventCsvHeader << '\n';
  for (const auto& e : events)
    os << e.agent << ',' << format_double(e.time) << ',' << e.infector << ',' << e.edge << '\n';
}

// ---------------------------------------------------------------------------
// Sweeps

enum class MapScaling {
  FixedH,
  /// H = 20 lambda^(-1/4), u = 0.45 H for every cell.
  LambdaScaledH,
};

inline MapScaling parse_map_scaling(std::string_view s) {
  if (s == "fixed-H") return MapScaling::FixedH;
  if (s == "lambda-scaled-H") return MapScaling::LambdaScaledH;
  throw Error("invalid_argument", "unknown scaling '" + std::string(s) + "'");
}

inline double lambda_scaled_side(double lambda) { return 20.0 * std::pow(lambda, -0.25); }

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepSpec {
  SweepAxis axis1;
  SweepAxis axis2;
  MapScaling scaling = MapScaling::FixedH;
  bool shared_maps = true;

  std::size_t cell_count() const { return axis1.values.size() * axis2.values.size(); }
  bool has_axis(std::string_view name) const { return axis1.name == name || axis2.name == name; }

  void validate() const {
    if (axis1.name.empty() || axis2.name.empty() || axis1.name == axis2.name)
      throw Error("invalid_sweep", "sweep axes must name two distinct parameters");
    if (axis1.values.empty() || axis2.values.empty()) throw Error("invalid_sweep", "sweep axes need values");
  }
};

inline SweepAxis parse_axis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw Error("parse", "axis must look like name=v1,v2,...");
  SweepAxis axis{std::string(trim(text.substr(0, eq))), {}};
  for (auto item : split(text.substr(eq + 1), ',')) axis.values.push_back(parse_double(trim(item)));
  return axis;
}

/// Parameters of cell (i, j): axis values applied to the base, then the map scaling rule.
inline ParameterSet cell_parameters(const SweepSpec& spec, const ParameterSet& base, std::size_t cell) {
  ParameterSet p = base;
  const std::size_t n2 = spec.axis2.values.size();
  set_parameter(p, spec.axis1.name, spec.axis1.values[cell / n2]);
  set_parameter(p, spec.axis2.name, spec.axis2.values[cell % n2]);
  if (spec.scaling == MapScaling::LambdaScaledH) {
    p.H = lambda_scaled_side(p.lambda);
    p.u = 0.45 * p.H;
  }
  return p;
}

/// Compact per-run record kept by sweeps; enough to aggregate and to resume.
struct SweepRun {
  std::size_t cell = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::optional<double> tau;  // s
  double rate = 0.0;
  std::size_t infected_at_tau = 0;
  std::size_t in_ball_at_tau = 0;
};

struct CellAggregate {
  std::size_t cell = 0;
  ParameterSet params;
  std::size_t runs = 0;
  double V_kmh = 0.0;
  double V_se = 0.0;  // standard error of the per-run u/tau values
  double R = 0.0;
  double R_se = 0.0;
  std::size_t not_reached = 0;
};

struct SweepOptions {
  std::size_t threads = 1;
  /// Stop after this many new runs (0: no limit); the result then carries a resume token.
  std::size_t max_runs = 0;
  /// Runs completed by an earlier, interrupted invocation.
  std::vector<SweepRun> prior;
};

struct SweepResult {
  std::vector<SweepRun> runs;  // ordered by (cell, rep)
  std::vector<CellAggregate> cells;
  bool complete = true;
  std::string resume_token;
};

inline std::uint64_t double_bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

/// Seed of repetition `rep` in `cell`; distinct cells never share a run seed.
inline std::uint64_t sweep_run_seed(std::uint64_t master, std::size_t cell, std::size_t rep) {
  return derive_seed(master, {cell, rep});
}

/// Map seed shared by every cell with the same (lambda, H) for repetition `rep`.
inline std::uint64_t shared_map_seed(std::uint64_t master, double lambda, double H, std::size_t rep) {
  return derive_seed(master, {kMapStream, double_bits(lambda), double_bits(H), rep});
}

inline std::vector<CellAggregate> aggregate(const SweepSpec& spec, const ParameterSet& base,
                                            const std::vector<SweepRun>& runs) {
  std::vector<CellAggregate> cells(spec.cell_count());
  std::vector<std::vector<std::optional<double>>> taus(cells.size());
  std::vector<std::vector<double>> rates(cells.size()), speeds(cells.size());
  for (const auto& r : runs) {
    taus[r.cell].push_back(r.tau);
    rates[r.cell].push_back(r.rate);
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& agg = cells[c];
    agg.cell = c;
    agg.params = cell_parameters(spec, base, c);
    agg.runs = taus[c].size();
    if (agg.runs == 0) continue;
    const auto speed = propagation_speed(taus[c], agg.params.u);
    agg.V_kmh = speed.kmh;
    agg.not_reached = speed.not_reached;
    for (const auto& t : taus[c]) speeds[c].push_back(t ? agg.params.u * kSecondsPerHour / *t : 0.0);
    agg.V_se = stats::standard_error(speeds[c]);
    agg.R = stats::mean(rates[c]);
    agg.R_se = stats::standard_error(rates[c]);
  }
  return cells;
}

/// Runs `reps` simulations per grid cell. Work is spread over `threads` workers; the
/// result does not depend on the completion order.
inline SweepResult run_sweep(const SweepSpec& spec, const ParameterSet& base, std::size_t reps,
                             const SweepOptions& options = {}) {
  spec.validate();
  if (reps == 0) throw Error("invalid_argument", "reps must be at least 1");
  base.validate();
  const std::size_t total = spec.cell_count() * reps;

  std::vector<std::optional<SweepRun>> slots(total);
  for (const auto& r : options.prior)
    if (r.cell < spec.cell_count() && r.rep < reps) slots[r.cell * reps + r.rep] = r;

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < total; ++i)
    if (!slots[i]) todo.push_back(i);
  bool complete = true;
  if (options.max_runs > 0 && todo.size() > options.max_runs) {
    todo.resize(options.max_runs);
    complete = false;
  }

  std::vector<ParameterSet> params(spec.cell_count());
  for (std::size_t c = 0; c < params.size(); ++c) {
    params[c] = cell_parameters(spec, base, c);
    params[c].validate();
  }

  // Shared maps are built once per (lambda, H, rep).
  std::mutex map_mutex;
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::size_t>, std::shared_ptr<const StreetSystem>> maps;
  auto map_for = [&](const ParameterSet& p, std::size_t rep) -> std::shared_ptr<const StreetSystem> {
    const auto key = std::make_tuple(double_bits(p.lambda), double_bits(p.H), rep);
    {
      std::lock_guard lock(map_mutex);
      if (auto it = maps.find(key); it != maps.end()) return it->second;
    }
    auto built = std::make_shared<const StreetSystem>(
        generate_street_system(p.lambda, p.H, shared_map_seed(base.seed, p.lambda, p.H, rep)));
    std::lock_guard lock(map_mutex);
    return maps.try_emplace(key, std::move(built)).first->second;
  };

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t n = next.fetch_add(1);
      if (n >= todo.size()) return;
      const std::size_t slot = todo[n];
      const std::size_t cell = slot / reps, rep = slot % reps;
      try {
        const auto& p = params[cell];
        const std::uint64_t seed = sweep_run_seed(base.seed, cell, rep);
        RunSeeds seeds = seeds_for_run(seed);
        std::shared_ptr<const StreetSystem> map;
        if (spec.shared_maps) map = map_for(p, rep);
        const auto res = run_simulation(p, seeds, map);
        slots[slot] = SweepRun{cell, rep, seed, res.metrics.tau, res.rate.raw, res.metrics.at_tau.infected,
                               res.metrics.at_tau.in_ball};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, todo.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult out;
  for (std::size_t i = 0; i < total; ++i)
    if (slots[i]) out.runs.push_back(*slots[i]);
  out.complete = complete && out.runs.size() == total;
  if (!out.complete) out.resume_token = "completed=" + std::to_string(out.runs.size()) + "/" + std::to_string(total);
  out.cells = aggregate(spec, base, out.runs);
  return out;
}

inline constexpr const char* kGridCsvHeader = "lambda,theta,v,rho,r,u,H,seed_count,V_u_kmh,R_u,not_reached_count";

inline void write_grid(std::ostream& os, const std::vector<CellAggregate>& cells) {
  os << kGridCsvHeader << '\n';
  for (const auto& c : cells) {
    const auto& p = c.params;
    os << format_double(p.lambda) << ',' << format_double(p.theta) << ',' << format_double(p.v) << ','
       << format_double(p.rho) << ',' << format_double(p.r) << ',' << format_double(p.u) << ','
       << format_double(p.H) << ',' << c.runs << ',' << format_double(c.V_kmh) << ',' << format_double(c.R) << ','
       << c.not_reached << '\n';
  }
}

inline constexpr const char* kSweepRunCsvHeader = "cell,rep,seed,reached,tau_u_s,R_u,infected_at_tau,in_ball_at_tau";

inline void write_sweep_runs(std::ostream& os, const std::vector<SweepRun>& runs) {
  os << kSweepRunCsvHeader << '\n';
  for (const auto& r : runs)
    os << r.cell << ',' << r.rep << ',' << r.seed << ',' << (r.tau ? 1 : 0) << ','
       << (r.tau ? format_double(*r.tau) : std::string("")) << ',' << format_double(r.rate) << ','
       << r.infected_at_tau << ',' << r.in_ball_at_tau << '\n';
}

inline std::vector<SweepRun> read_sweep_runs(std::istream& is) {
  std::vector<SweepRun> out;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (header) {
      if (t != kSweepRunCsvHeader) throw Error("parse", "unexpected sweep run header");
      header = false;
      continue;
    }
    const auto f = split(t, ',');
    if (f.size() != 8) throw Error("parse", "sweep run row needs 8 fields");
    SweepRun r;
    r.cell = parse_integer<std::size_t>(f[0]);
    r.rep = parse_integer<std::size_t>(f[1]);
    r.seed = parse_integer<std::uint64_t>(f[2]);
    if (f[3] == "1") r.tau = parse_double(f[4]);
    r.rate = parse_double(f[5]);
    r.infected_at_tau = parse_integer<std::size_t>(f[6]);
    r.in_ball_at_tau = parse_integer<std::size_t>(f[7]);
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Threshold curves v(lambda) = c / (rho sqrt(lambda))

struct OverlayPoint {
  double c = 0.0;
  double lambda = 0.0;
  double v_kmh = 0.0;
};

inline double threshold_speed_kmh(double c, double lambda, double rho_s) {
  return c / (rho_s / kSecondsPerHour * std::sqrt(lambda));
}

inline std::vector<OverlayPoint> threshold_overlay(const SweepSpec& spec, const ParameterSet& base,
                                                   const std::vector<double>& cs) {
  if (!spec.has_axis("lambda") || !spec.has_axis("v"))
    throw Error("wrong_axes", "threshold overlay needs lambda and v axes");
  const auto& lambdas = spec.axis1.name == "lambda" ? spec.axis1.values : spec.axis2.values;
  std::vector<OverlayPoint> out;
  for (double c : cs)
    for (double l : lambdas) out.push_back({c, l, threshold_speed_kmh(c, l, base.rho)});
  return out;
}

inline void write_overlay(std::ostream& os, const std::vector<OverlayPoint>& pts) {
  os << "c,lambda,v_kmh\n";
  for (const auto& p : pts)
    os << format_double(p.c) << ',' << format_double(p.lambda) << ',' << format_double(p.v_kmh) << '\n';
}

}  // namespace d2d
