// d2dsim: command-line front end for the street-network malware propagation simulator.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "d2d/harness.hpp"
#include "d2d/meanfield.hpp"
#include "d2d/stats.hpp"

using namespace d2d;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("io", "cannot write '" + path + "'");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("io", "cannot read '" + path + "'");
  return is;
}

// Writes to the named file, or to stdout for "" and "-".
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
  } else {
    auto os = open_out(path);
    write(os);
  }
}

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "key = value parameter file");
    cmd->add_option("--set", sets, "override one parameter, key=value (repeatable)");
    cmd->add_option("--seed", seed, "master seed");
  }

  ParameterSet load() const {
    ParameterSet p;
    if (!config.empty()) {
      auto in = open_in(config);
      apply_config(p, in);
    }
    for (const auto& s : sets) apply_assignment(p, s);
    if (seed) p.seed = *seed;
    for (const auto& w : p.validate()) std::cerr << "warning: " << w << '\n';
    return p;
  }
};

// ---------------------------------------------------------------------------

struct RunCommand {
  CommonOptions common;
  std::string out, events, itinerary_out, config_out;
  std::optional<AgentId> itinerary_agent;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("run", "single simulation");
    common.attach(cmd);
    cmd->add_option("--out", out, "run CSV (default stdout)");
    cmd->add_option("--events", events, "infection event log CSV");
    cmd->add_option("--dump-itinerary", itinerary_agent, "record the motion records of this agent");
    cmd->add_option("--itinerary-out", itinerary_out, "itinerary CSV (default stderr)");
    cmd->add_option("--config-out", config_out, "write the effective configuration");
    cmd->callback([this] { execute(); });
  }

  void execute() {
    const auto P = common.load();
    RunHooks hooks;
    std::ostringstream itinerary;
    double emitted_until = 0.0;
    if (itinerary_agent) {
      itinerary << "edge_id,t_in_s,t_out_s,offset_in_km,velocity_kms\n";
      hooks.on_step = [&](const Simulation& sim) {
        if (*itinerary_agent < 0 || static_cast<std::size_t>(*itinerary_agent) >= sim.agent_count())
          throw Error("invalid_argument", "itinerary agent out of range");
        const auto& recs = sim.walker(*itinerary_agent).records();
        for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
          const auto& r = recs[i];
          if (r.t_in < emitted_until || r.t_out > sim.time()) continue;
          itinerary << r.edge << ',' << format_double(r.t_in) << ',' << format_double(r.t_out) << ','
                    << format_double(r.offset_in) << ',' << format_double(r.velocity) << '\n';
          emitted_until = r.t_out;
        }
      };
    }
    const auto result = run_simulation(P, seeds_for_run(P.seed), nullptr, hooks);
    emit(out, [&](std::ostream& os) {
      os << kRunCsvHeader << '\n';
      write_run_row(os, result);
    });
    if (!events.empty()) emit(events, [&](std::ostream& os) { write_events(os, result.events); });
    if (!config_out.empty()) emit(config_out, [&](std::ostream& os) { write_config(os, P); });
    if (itinerary_agent) {
      if (itinerary_out.empty()) std::cerr << itinerary.str();
      else emit(itinerary_out, [&](std::ostream& os) { os << itinerary.str(); });
    }
  }
};

// ---------------------------------------------------------------------------

struct SweepCommand {
  CommonOptions common;
  std::string axis1, axis2, scaling = "fixed-H", out, runs_out, resume, overlay, overlay_out;
  bool independent_maps = false;
  std::optional<std::size_t> reps;
  std::size_t threads = 1, max_runs = 0;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("sweep", "grid of simulations over two parameters");
    common.attach(cmd);
    cmd->add_option("--axis1", axis1, "name=v1,v2,...")->required();
    cmd->add_option("--axis2", axis2, "name=v1,v2,...")->required();
    cmd->add_option("--scaling", scaling, "fixed-H or lambda-scaled-H");
    cmd->add_flag("--independent-maps", independent_maps, "draw a fresh map for every run");
    cmd->add_option("--reps", reps, "repetitions per cell (default: reps parameter)");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_option("--max-runs", max_runs, "stop after this many new runs");
    cmd->add_option("--resume", resume, "per-run CSV of an earlier partial sweep");
    cmd->add_option("--runs-out", runs_out, "per-run CSV (needed to resume)");
    cmd->add_option("--out", out, "aggregated grid CSV (default stdout)");
    cmd->add_option("--overlay", overlay, "threshold constants c1,c2,... for v = c/(rho sqrt(lambda))");
    cmd->add_option("--overlay-out", overlay_out, "overlay CSV (default stdout)");
    cmd->callback([this] { execute(); });
  }

  void execute() {
    const auto P = common.load();
    SweepSpec spec{parse_axis(axis1), parse_axis(axis2), parse_map_scaling(scaling), !independent_maps};
    SweepOptions options;
    options.threads = threads;
    options.max_runs = max_runs;
    if (!resume.empty()) {
      auto in = open_in(resume);
      options.prior = read_sweep_runs(in);
    }
    std::vector<OverlayPoint> curves;
    if (!overlay.empty()) {
      std::vector<double> cs;
      for (auto c : split(overlay, ',')) cs.push_back(parse_double(trim(c)));
      curves = threshold_overlay(spec, P, cs);
    }
    const auto result = run_sweep(spec, P, reps.value_or(P.reps), options);
    if (!runs_out.empty()) emit(runs_out, [&](std::ostream& os) { write_sweep_runs(os, result.runs); });
    emit(out, [&](std::ostream& os) { write_grid(os, result.cells); });
    if (!overlay.empty()) emit(overlay_out, [&](std::ostream& os) { write_overlay(os, curves); });
    if (!result.complete) {
      std::cerr << "partial: " << result.resume_token << '\n';
      if (runs_out.empty()) std::cerr << "warning: no --runs-out given, partial runs cannot be resumed\n";
    }
  }
};

// ---------------------------------------------------------------------------

struct MeanFieldCommand {
  double lambda = 50.0, theta = 3.0, v = 5.0, rho = 20.0, r = 0.2;
  std::size_t p_samples = 100000, tau_samples = 10000;
  std::uint64_t seed = 1;
  std::optional<double> l0;
  std::string pool_map, out;
  bool calibrate = false;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("meanfield", "per-street infection probability and first-transmission bounds");
    cmd->add_option("--lambda", lambda, "street seed intensity, km^-2");
    cmd->add_option("--theta", theta, "device intensity, km^-1");
    cmd->add_option("--v", v, "speed, km/h");
    cmd->add_option("--rho", rho, "transmission time, s");
    cmd->add_option("--r", r, "radio range, km");
    cmd->add_option("--p-samples", p_samples, "street episodes for the probability estimate");
    cmd->add_option("--tau-samples", tau_samples, "first-transmission samples");
    cmd->add_option("--seed", seed, "seed");
    cmd->add_option("--l0", l0, "tail cutoff (default: built-in calibration)");
    cmd->add_option("--pool-map", pool_map, "street file whose interior edge lengths are used as they are");
    cmd->add_flag("--calibrate", calibrate, "print the tail cutoff fitted on the reference lengths and exit");
    cmd->add_option("--out", out, "CSV (default stdout)");
    cmd->callback([this] { execute(); });
  }

  void execute() {
    if (calibrate) {
      const auto fitted = calibrate_tail_cutoff(reference_edge_lengths());
      if (!fitted) throw Error("calibration_failed", "no cutoff in [1, 2] bounds the empirical tail");
      std::cout << "l0," << format_double(*fitted) << '\n';
      return;
    }
    MeanFieldParams p{lambda, theta, v, rho, r, LengthSource::ReferenceScaled, nullptr};
    if (!pool_map.empty()) {
      auto in = open_in(pool_map);
      p.source = LengthSource::EmpiricalPool;
      p.pool = std::make_shared<const std::vector<double>>(interior_edge_lengths(read_street_system(in)));
    }
    const auto rep = bound_report(p, p_samples, tau_samples, seed, l0.value_or(kTailCutoff));
    auto value = [](const RegimeBound& b) { return format_double(b.value); };
    emit(out, [&](std::ostream& os) {
      os << "p_hat,ci_lo,ci_hi,etau_mc,etau_lb,etau_ub,t0,emp_tail,c5,c6,c7,guards\n"
         << format_double(rep.p.p_hat) << ',' << format_double(rep.p.ci.lo) << ',' << format_double(rep.p.ci.hi)
         << ',' << format_double(rep.etau_mc) << ',' << format_double(rep.etau.lower) << ','
         << format_double(rep.etau.upper) << ',' << format_double(rep.t0) << ','
         << format_double(rep.empirical_tail) << ',' << value(rep.corollaries.long_transmission) << ','
         << value(rep.corollaries.short_range) << ',' << value(rep.corollaries.sparse_agents) << ','
         << rep.guards() << '\n';
    });
    if (rep.censored > 0) std::cerr << "warning: " << rep.censored << " censored samples\n";
  }
};

// ---------------------------------------------------------------------------

struct ValidateCommand {
  std::uint64_t seed = 1;
  double unit_side = 190.0;
  std::string suite = "all";

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("validate", "geometry and length-statistics checks");
    cmd->add_option("--seed", seed, "seed");
    cmd->add_option("--side", unit_side, "window side of the unit-intensity map, km");
    cmd->add_option("--suite", suite, "geometry, scaling, tail or all");
    cmd->callback([this] { execute(); });
  }

  int failures = 0;

  void check(const std::string& name, double value, double expected, double rel_tol) {
    const bool ok = std::abs(value - expected) <= rel_tol * std::abs(expected);
    failures += !ok;
    std::cout << name << ',' << format_double(value) << ',' << format_double(expected) << ','
              << (ok ? "pass" : "FAIL") << '\n';
  }

  void execute() {
    if (suite != "all" && suite != "geometry" && suite != "scaling" && suite != "tail")
      throw Error("invalid_argument", "unknown suite '" + suite + "'");
    std::cout << "check,value,expected,status\n";
    const auto unit = generate_street_system(1.0, unit_side, seed);
    const auto unit_lengths = interior_edge_lengths(unit);
    if (suite == "all" || suite == "geometry") {
      const auto st = summarize_lengths(unit_lengths);
      check("mean_edge_length_unit", st.mean, 2.0 / 3.0, 0.02);
      check("edge_length_variance_unit", st.variance, 0.1856, 0.05);
      check("length_per_area_unit", unit.total_length() / (unit_side * unit_side), 2.0, 0.03);
      const double side50 = unit_side / std::sqrt(50.0);
      const auto dense = generate_street_system(50.0, side50, derive_seed(seed, {50}));
      check("length_per_area_50", dense.total_length() / (side50 * side50), 2.0 * std::sqrt(50.0), 0.03);
    }
    if (suite == "all" || suite == "scaling") {
      const double side4 = unit_side / 2.0;
      const auto four = interior_edge_lengths(generate_street_system(4.0, side4, derive_seed(seed, {4})));
      std::vector<double> scaled;
      for (double l : unit_lengths) scaled.push_back(0.5 * l);
      const auto ks = stats::ks_two_sample(four, scaled);
      std::cout << "ks_scaling_p_value," << format_double(ks.p_value) << ",0.01," << (ks.p_value > 0.01 ? "pass" : "FAIL")
                << '\n';
      failures += ks.p_value <= 0.01;
      for (int n : {1, 2})
        check("moment_" + std::to_string(n) + "_scaled", stats::raw_moment(four, n),
              std::pow(4.0, -n / 2.0) * stats::raw_moment(unit_lengths, n), 0.03);
    }
    if (suite == "all" || suite == "tail") {
      const auto l0 = calibrate_tail_cutoff(unit_lengths);
      std::cout << "tail_cutoff," << (l0 ? format_double(*l0) : std::string("none")) << ','
                << format_double(kTailCutoff) << ',' << (l0 ? "pass" : "FAIL") << '\n';
      failures += !l0;
    }
    if (failures > 0) throw Error("validation_failed", std::to_string(failures) + " check(s) failed");
  }
};

// ---------------------------------------------------------------------------

struct MapCommand {
  double lambda = 50.0, side = 10.0;
  std::uint64_t seed = 1;
  std::string out, in;
  std::size_t bins = 50;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("map", "generate, serialize and inspect street systems");
    cmd->require_subcommand(1);
    auto* gen = cmd->add_subcommand("generate", "write a street system file");
    gen->add_option("--lambda", lambda, "seed intensity, km^-2");
    gen->add_option("--side", side, "window side H, km");
    gen->add_option("--seed", seed, "seed");
    gen->add_option("--out", out, "street file (default stdout)");
    gen->callback([this] {
      const auto s = generate_street_system(lambda, side, seed);
      emit(out, [&](std::ostream& os) { write_street_system(os, s); });
    });
    auto* st = cmd->add_subcommand("stats", "edge statistics of a street file");
    st->add_option("--in", in, "street file")->required();
    st->add_option("--bins", bins, "histogram bins");
    st->callback([this] {
      auto is = open_in(in);
      const auto s = read_street_system(is);
      const auto stats = edge_length_statistics(s, bins);
      std::cout << "vertices," << s.vertex_count() << "\nedges," << s.edge_count() << "\ninterior_edges,"
                << stats.count << "\nmean_length_km," << format_double(stats.mean) << "\nlength_variance,"
                << format_double(stats.variance) << "\ntotal_length_km," << format_double(s.total_length())
                << "\nreliable," << (stats.reliable ? "true" : "false") << "\nbin_width_km,"
                << format_double(stats.bin_width) << "\ndensity";
      for (double d : stats.density) std::cout << ',' << format_double(d);
      std::cout << '\n';
    });
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Malware propagation over device-to-device contacts on random street networks"};
  app.require_subcommand(1);
  RunCommand run;
  SweepCommand sweep;
  MeanFieldCommand meanfield;
  ValidateCommand validate;
  MapCommand map;
  run.attach(app);
  sweep.attach(app);
  meanfield.attach(app);
  validate.attach(app);
  map.attach(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 64;
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 70;
  }
  return 0;
}
