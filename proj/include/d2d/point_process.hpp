#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "street_system.hpp"

namespace d2d {

/// Linear Poisson process of intensity `theta` (km^-1) on every edge, clipped edges included.
/// Points come out grouped by edge in ascending edge id, uniformly placed within each edge.
inline std::vector<StreetPoint> sample_devices(const StreetSystem& streets, double theta, Rng& rng) {
  if (!(theta >= 0.0)) throw Error("invalid_argument", "theta must be non-negative");
  std::vector<StreetPoint> out;
  if (theta == 0.0) return out;
  for (EdgeId e = 0; e < static_cast<EdgeId>(streets.edge_count()); ++e) {
    const double len = streets.edge(e).length;
    std::poisson_distribution<long long> count(theta * len);
    std::uniform_real_distribution<double> where(0.0, len);
    const long long n = count(rng);
    for (long long i = 0; i < n; ++i) out.push_back(streets.point_at(e, where(rng)));
  }
  return out;
}

enum class PlacementMode {
  /// A new device at the street point closest to the window center.
  NearestStreet,
  /// The existing device closest to the window center becomes the infected one.
  NearestDevice,
};

inline PlacementMode parse_placement_mode(std::string_view s) {
  if (s == "nearest-street") return PlacementMode::NearestStreet;
  if (s == "nearest-device") return PlacementMode::NearestDevice;
  throw Error("invalid_argument", "unknown placement mode '" + std::string(s) + "'");
}

inline std::string_view to_string(PlacementMode m) {
  return m == PlacementMode::NearestStreet ? "nearest-street" : "nearest-device";
}

struct InitialInfected {
  StreetPoint position;
  /// Index into the device list when an existing device was converted.
  std::optional<std::size_t> converted_device;
};

inline InitialInfected place_initial_infected(const StreetSystem& streets, const std::vector<StreetPoint>& devices,
                                              PlacementMode mode) {
  if (streets.empty()) throw Error("empty_street_system", "street system has no edges");
  const Point center{0.5 * streets.side(), 0.5 * streets.side()};
  if (mode == PlacementMode::NearestStreet) return {streets.nearest(center), std::nullopt};
  if (devices.empty()) throw Error("no_devices", "nearest-device placement needs at least one device");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const double d = distance(devices[i].position, center);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return {devices[best], best};
}

}  // namespace d2d
