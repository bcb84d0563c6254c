#pragma once

// Simplified street-succession model used as a theoretical benchmark.
//
// The initially infected agent walks through a sequence of streets whose lengths are
// drawn independently from the Poisson-Voronoi edge-length law. Whenever it enters a
// street, the other agents on the line through that street form a Poisson process of
// intensity theta, each moving at the common speed in one of the two directions with
// probability 1/2. This is a heuristic companion model, not a limit of the full
// simulator: consecutive street lengths are independent here and agents are renewed
// on every street.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "infection.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "street_system.hpp"

namespace d2d {

/// Default lower cutoff for the Poisson-Voronoi tail bound P[L >= x] <= exp(-lambda x^2),
/// x >= l0/sqrt(lambda); see calibrate_tail_cutoff.
inline constexpr double kTailCutoff = 1.0;

/// Window side (lambda = 1) and seed of the reference tessellation used for edge lengths.
inline constexpr double kReferenceSide = 190.0;
inline constexpr std::uint64_t kReferenceSeed = 20220901;

/// Interior edge lengths of a lambda = 1 tessellation; more than 10^5 values. Built once.
inline const std::vector<double>& reference_edge_lengths() {
  static const std::vector<double> pool = [] {
    const auto streets = generate_street_system(1.0, kReferenceSide, kReferenceSeed);
    return interior_edge_lengths(streets);
  }();
  return pool;
}

/// Smallest l0 in {1.0, 1.2, ..., 2.0} such that the empirical survival function of
/// the unit-intensity lengths stays below exp(-x^2) for every x >= l0.
inline std::optional<double> calibrate_tail_cutoff(std::vector<double> lengths) {
  std::sort(lengths.begin(), lengths.end());
  const double n = static_cast<double>(lengths.size());
  for (int step = 0; step <= 5; ++step) {
    const double l0 = 1.0 + 0.2 * step;
    auto first = std::lower_bound(lengths.begin(), lengths.end(), l0);
    // Survival at l0 and at every sample point beyond it: the bound is tightest there.
    bool holds = static_cast<double>(lengths.end() - first) / n <= std::exp(-l0 * l0);
    for (auto it = first; holds && it != lengths.end(); ++it) {
      const double surv = static_cast<double>(lengths.end() - it) / n;
      holds = surv <= std::exp(-(*it) * (*it));
    }
    if (holds) return l0;
  }
  return std::nullopt;
}

enum class LengthSource {
  /// Lengths from `pool`, used as they are (already at intensity lambda).
  EmpiricalPool,
  /// Reference unit-intensity lengths scaled by 1/sqrt(lambda).
  ReferenceScaled,
};

struct MeanFieldParams {
  double lambda = 50.0;  // km^-2
  double theta = 3.0;    // km^-1
  double v = 5.0;        // km/h
  double rho = 20.0;     // s
  double r = 0.2;        // km
  LengthSource source = LengthSource::ReferenceScaled;
  std::shared_ptr<const std::vector<double>> pool;

  void validate() const {
    if (!(lambda > 0.0) || !(v > 0.0) || !(rho > 0.0) || !(r > 0.0) || !(theta >= 0.0))
      throw Error("invalid_argument", "mean-field parameters must be positive");
    if (source == LengthSource::EmpiricalPool && (!pool || pool->empty()))
      throw Error("invalid_argument", "empirical length pool is empty");
  }
};

/// Draws street lengths (km) according to the configured source.
class StreetLengthSampler {
 public:
  explicit StreetLengthSampler(const MeanFieldParams& p)
      : values_(p.source == LengthSource::EmpiricalPool ? p.pool.get() : &reference_edge_lengths()),
        scale_(p.source == LengthSource::EmpiricalPool ? 1.0 : 1.0 / std::sqrt(p.lambda)),
        pick_(0, values_->size() - 1) {}

  double operator()(Rng& rng) { return scale_ * (*values_)[pick_(rng)]; }
  double mean() const { return scale_ * stats::mean(*values_); }

 private:
  const std::vector<double>* values_;
  double scale_;
  std::uniform_int_distribution<std::size_t> pick_;
};

/// One street episode: time after entering a street of length `length` at which the
/// walker completes its first transmission there, or nothing.
inline std::optional<double> street_episode(const MeanFieldParams& p, double length, Rng& rng) {
  if (p.theta == 0.0) return std::nullopt;
  const double v = kmh_to_kms(p.v);
  const ContactKinematics walker{0.0, v, 0.0, length / v};
  std::optional<double> first;
  auto offer = [&](const ContactKinematics& other) {
    const auto iv = connection_interval(walker, other, 0.0, p.r);
    if (iv.duration() >= p.rho) {
      const double t = iv.start + p.rho;
      if (!first || t < *first) first = t;
    }
  };
  // Same direction: only agents starting within r can ever be in range.
  {
    std::poisson_distribution<long long> count(0.5 * p.theta * 2.0 * p.r);
    std::uniform_real_distribution<double> where(-p.r, p.r);
    for (long long n = count(rng); n > 0; --n) {
      const double x = where(rng);
      offer({x, v, -x / v, (length - x) / v});
    }
  }
  // Opposite direction: the walker meets agents starting in [-r, 2L + r].
  {
    std::poisson_distribution<long long> count(0.5 * p.theta * (2.0 * length + 2.0 * p.r));
    std::uniform_real_distribution<double> where(-p.r, 2.0 * length + p.r);
    for (long long n = count(rng); n > 0; --n) {
      const double x = where(rng);
      offer({x, -v, (x - length) / v, x / v});
    }
  }
  return first;
}

struct TauSample {
  double tau = 0.0;      // s; equals the horizon when censored
  bool censored = false;
  std::size_t street_index = 0;  // index of the street where the first transmission happened
};

/// First transmission time of the simplified model, censored at `horizon_s`.
inline TauSample simulate_simplified(const MeanFieldParams& p, Rng& rng, double horizon_s) {
  p.validate();
  if (p.theta == 0.0) return {horizon_s, true, 0};
  StreetLengthSampler lengths(p);
  const double v = kmh_to_kms(p.v);
  double elapsed = 0.0;
  for (std::size_t i = 0;; ++i) {
    const double len = lengths(rng);
    if (auto t = street_episode(p, len, rng)) {
      if (elapsed + *t > horizon_s) return {horizon_s, true, i};
      return {elapsed + *t, false, i};
    }
    elapsed += len / v;
    if (elapsed >= horizon_s) return {horizon_s, true, i};
  }
}

struct ProbabilityEstimate {
  double p_hat = 0.0;
  stats::Interval ci;
  std::size_t samples = 0;
};

/// Monte Carlo frequency of at least one transmission during a single street episode.
inline ProbabilityEstimate estimate_p(const MeanFieldParams& p, std::size_t n, Rng& rng) {
  p.validate();
  if (n < 100) throw Error("invalid_argument", "estimate_p needs at least 100 samples");
  StreetLengthSampler lengths(p);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (street_episode(p, lengths(rng), rng)) ++hits;
  return {static_cast<double>(hits) / static_cast<double>(n), stats::wilson_interval(hits, n), n};
}

/// Mean time spent on one street, 2/(3 sqrt(lambda) v), in seconds.
inline double mean_street_time_s(double lambda, double v_kmh) {
  return 2.0 / (3.0 * std::sqrt(lambda) * v_kmh) * kSecondsPerHour;
}

struct TauBounds {
  double lower = 0.0;  // s
  double upper = 0.0;  // s
};

/// Sandwich on the expected first-transmission time given the per-street probability p.
inline TauBounds etau_bounds(double p, double lambda, double v_kmh) {
  if (!(p > 0.0)) return {kNever, kNever};
  if (p > 1.0) throw Error("invalid_argument", "p must lie in (0, 1]");
  const double unit = mean_street_time_s(lambda, v_kmh);
  return {unit * (1.0 / p - 1.0), unit / p};
}

/// t0 = 1/(3 sqrt(p lambda) v), in seconds; below it tau falls with probability O(p^(1/4)).
inline double tau_tail_point(double p, double lambda, double v_kmh) {
  if (!(p > 0.0) || p > 1.0) throw Error("invalid_argument", "p must lie in (0, 1]");
  return kSecondsPerHour / (3.0 * std::sqrt(p * lambda) * v_kmh);
}

struct RegimeBound {
  double value = 0.0;  // s
  bool applies = false;
  /// True when the bound is non-positive and therefore says nothing.
  bool vacuous = false;
};

struct CorollaryBounds {
  RegimeBound long_transmission;  // sqrt(lambda) rho v >= l0
  RegimeBound short_range;        // r < rho v
  RegimeBound sparse_agents;      // always
};

inline CorollaryBounds corollary_lower_bounds(const MeanFieldParams& p, double l0 = kTailCutoff) {
  const double rho_h = p.rho / kSecondsPerHour;
  const double x = std::sqrt(p.lambda) * rho_h * p.v;
  const double unit = mean_street_time_s(p.lambda, p.v);
  CorollaryBounds b;
  b.long_transmission.applies = x >= l0;
  b.long_transmission.value = unit * std::expm1(p.lambda * rho_h * rho_h * p.v * p.v);
  b.short_range.applies = p.r < rho_h * p.v;
  b.short_range.value = p.theta > 0.0 ? unit * (1.0 / (p.theta * p.r) - 1.0) : kNever;
  b.sparse_agents.applies = true;
  b.sparse_agents.value = p.theta > 0.0
                              ? (std::sqrt(p.lambda) / p.theta - 4.0 / 3.0) / (2.0 * std::sqrt(p.lambda) * p.v) *
                                    kSecondsPerHour
                              : kNever;
  for (auto* r : {&b.long_transmission, &b.short_range, &b.sparse_agents}) r->vacuous = !(r->value > 0.0);
  return b;
}

/// Per-street probability bounds behind the three regime corollaries.
struct ProbabilityBounds {
  double long_transmission = 1.0;  // exp(-lambda rho^2 v^2), when sqrt(lambda) rho v >= l0
  double short_range = 1.0;        // theta r, when r < rho v
  double sparse_agents = 1.0;      // 4 theta / (3 sqrt(lambda))
};

inline ProbabilityBounds probability_bounds(const MeanFieldParams& p) {
  const double rho_h = p.rho / kSecondsPerHour;
  return {std::exp(-p.lambda * rho_h * rho_h * p.v * p.v), p.theta * p.r, 4.0 * p.theta / (3.0 * std::sqrt(p.lambda))};
}

struct BoundReport {
  ProbabilityEstimate p;
  double etau_mc = 0.0;        // s, censored samples counted at the horizon
  double etau_mc_se = 0.0;     // s
  std::size_t censored = 0;
  std::size_t samples = 0;
  double mean_first_street = 0.0;  // MC mean of the index of the first infecting street
  TauBounds etau;              // at p_hat
  double t0 = kNever;          // s
  double empirical_tail = 0.0; // P[tau >= t0]
  CorollaryBounds corollaries;
  double horizon = 0.0;        // s

  std::string guards() const {
    std::string g;
    g += corollaries.long_transmission.applies ? 'Y' : 'n';
    g += corollaries.short_range.applies ? 'Y' : 'n';
    g += corollaries.sparse_agents.applies ? 'Y' : 'n';
    return g;
  }
};

/// Censoring horizon for simplified runs: 200 times the upper expectation bound.
inline double censoring_horizon_s(const MeanFieldParams& p, double p_hat) {
  return 200.0 * mean_street_time_s(p.lambda, p.v) / std::max(p_hat, 1e-4);
}

inline BoundReport bound_report(const MeanFieldParams& params, std::size_t p_samples, std::size_t tau_samples,
                                std::uint64_t seed, double l0 = kTailCutoff) {
  params.validate();
  BoundReport rep;
  Rng p_rng(derive_seed(seed, {1}));
  rep.p = estimate_p(params, p_samples, p_rng);
  rep.horizon = censoring_horizon_s(params, rep.p.p_hat);
  rep.etau = etau_bounds(rep.p.p_hat, params.lambda, params.v);
  rep.t0 = rep.p.p_hat > 0.0 ? tau_tail_point(rep.p.p_hat, params.lambda, params.v) : kNever;
  rep.corollaries = corollary_lower_bounds(params, l0);

  Rng tau_rng(derive_seed(seed, {2}));
  std::vector<double> taus;
  taus.reserve(tau_samples);
  double index_sum = 0.0;
  std::size_t beyond_t0 = 0;
  for (std::size_t i = 0; i < tau_samples; ++i) {
    const auto s = simulate_simplified(params, tau_rng, rep.horizon);
    taus.push_back(s.tau);
    rep.censored += s.censored;
    index_sum += static_cast<double>(s.street_index);
    beyond_t0 += s.tau >= rep.t0;
  }
  rep.samples = tau_samples;
  rep.etau_mc = stats::mean(taus);
  rep.etau_mc_se = stats::standard_error(taus);
  rep.mean_first_street = tau_samples ? index_sum / static_cast<double>(tau_samples) : 0.0;
  rep.empirical_tail = tau_samples ? static_cast<double>(beyond_t0) / static_cast<double>(tau_samples) : 0.0;
  return rep;
}

}  // namespace d2d
