#pragma once

// Poisson-Voronoi street systems: generation, point projection, routing and
// the line-oriented text format used to share maps between runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <tuple>
#include <vector>

#include <boost/polygon/voronoi.hpp>

#include "error.hpp"
#include "format.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace d2d {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;

inline constexpr EdgeId kNoEdge = -1;

struct Edge {
  VertexId a = 0;
  VertexId b = 0;
  double length = 0.0;
  /// True when one endpoint was produced by cutting the edge at the window border.
  bool clipped = false;
};

/// A position on the street system: edge plus distance from the edge's `a` endpoint.
struct StreetPoint {
  EdgeId edge = kNoEdge;
  double offset = 0.0;
  Point position;

  friend bool operator==(const StreetPoint&, const StreetPoint&) = default;
};

/// One partial or full traversal of an edge, from `from` to `to` (offsets).
struct PathLeg {
  EdgeId edge = kNoEdge;
  double from = 0.0;
  double to = 0.0;

  double length() const { return std::abs(to - from); }
  /// +1 when moving along the canonical a->b direction, -1 against it.
  int direction() const { return to > from ? 1 : (to < from ? -1 : 0); }
};

struct Path {
  std::vector<PathLeg> legs;
  double length = 0.0;

  Path reversed() const {
    Path out;
    out.length = length;
    out.legs.reserve(legs.size());
    for (auto it = legs.rbegin(); it != legs.rend(); ++it) out.legs.push_back({it->edge, it->to, it->from});
    return out;
  }
};

class StreetSystem {
 public:
  StreetSystem() = default;

  /// Builds the graph from explicit geometry. Edge lengths are recomputed from the
  /// vertex coordinates; an edge counts as clipped when an endpoint lies on the border.
  StreetSystem(double lambda, double side, std::uint64_t seed, std::vector<Point> vertices,
               const std::vector<std::pair<VertexId, VertexId>>& endpoints)
      : lambda_(lambda), side_(side), seed_(seed), vertices_(std::move(vertices)) {
    if (!(side_ > 0.0)) throw Error("invalid_argument", "window side must be positive");
    for (const auto& v : vertices_) {
      if (v.x < -kGeomTolerance || v.y < -kGeomTolerance || v.x > side_ + kGeomTolerance ||
          v.y > side_ + kGeomTolerance)
        throw Error("invalid_argument", "vertex outside the window");
    }
    edges_.reserve(endpoints.size());
    for (const auto& [a, b] : endpoints) {
      if (a < 0 || b < 0 || a >= static_cast<VertexId>(vertices_.size()) ||
          b >= static_cast<VertexId>(vertices_.size()))
        throw Error("invalid_argument", "edge endpoint out of range");
      const double len = distance(vertices_[a], vertices_[b]);
      if (len < kGeomTolerance) throw Error("invalid_argument", "zero-length edge");
      edges_.push_back({a, b, len, on_border(vertices_[a]) || on_border(vertices_[b])});
    }
    build_adjacency();
    build_components();
    build_grid();
  }

  double lambda() const { return lambda_; }
  double side() const { return side_; }
  std::uint64_t seed() const { return seed_; }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }

  const std::vector<EdgeId>& incident_edges(VertexId v) const {
    return adjacency_[static_cast<std::size_t>(v)];
  }

  int component_of_vertex(VertexId v) const { return component_[static_cast<std::size_t>(v)]; }
  int component_of_edge(EdgeId e) const { return component_of_vertex(edge(e).a); }
  int main_component() const { return main_component_; }
  std::size_t component_count() const { return component_count_; }
  /// Edges outside the largest component are kept but flagged by this predicate.
  bool in_main_component(EdgeId e) const { return component_of_edge(e) == main_component_; }

  Point edge_direction(EdgeId e) const {
    const auto& ed = edge(e);
    return (1.0 / ed.length) * (vertices_[ed.b] - vertices_[ed.a]);
  }

  StreetPoint point_at(EdgeId e, double offset) const {
    const auto& ed = edge(e);
    offset = std::clamp(offset, 0.0, ed.length);
    return {e, offset, lerp(vertices_[ed.a], vertices_[ed.b], offset / ed.length)};
  }

  /// Sum of all edge lengths; every edge is already cut to the window.
  double total_length() const {
    return std::accumulate(edges_.begin(), edges_.end(), 0.0,
                           [](double acc, const Edge& e) { return acc + e.length; });
  }

  /// Closest street point to p. Ties go to the lowest edge id, then the lowest offset.
  StreetPoint nearest(Point p) const {
    if (empty()) throw Error("empty_street_system", "street system has no edges");
    Candidate best;
    const int cx = std::clamp(static_cast<int>(std::floor(p.x / cell_size_)), 0, grid_n_ - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(p.y / cell_size_)), 0, grid_n_ - 1);
    for (int ring = 0;; ++ring) {
      visit_ring(cx, cy, ring, [&](int cell) {
        for (auto i = cell_start_[cell]; i < cell_start_[cell + 1]; ++i) consider(p, cell_edges_[i], best);
      });
      const bool covers_grid =
          cx - ring <= 0 && cy - ring <= 0 && cx + ring >= grid_n_ - 1 && cy + ring >= grid_n_ - 1;
      if (covers_grid) break;
      // Every unvisited cell lies in a part of the grid beyond a block side that is not
      // on the grid border.
      const double g = grid_n_ * cell_size_;
      const double x0 = (cx - ring) * cell_size_, x1 = (cx + ring + 1) * cell_size_;
      const double y0 = (cy - ring) * cell_size_, y1 = (cy + ring + 1) * cell_size_;
      auto rect_distance = [&](double ax, double bx, double ay, double by) {
        const double dx = std::max({ax - p.x, 0.0, p.x - bx});
        const double dy = std::max({ay - p.y, 0.0, p.y - by});
        return std::hypot(dx, dy);
      };
      double gap = std::numeric_limits<double>::infinity();
      if (cx - ring > 0) gap = std::min(gap, rect_distance(0.0, x0, 0.0, g));
      if (cx + ring < grid_n_ - 1) gap = std::min(gap, rect_distance(x1, g, 0.0, g));
      if (cy - ring > 0) gap = std::min(gap, rect_distance(0.0, g, 0.0, y0));
      if (cy + ring < grid_n_ - 1) gap = std::min(gap, rect_distance(0.0, g, y1, g));
      if (best.edge != kNoEdge && best.dist + kTieTolerance < gap) break;
    }
    return point_at(best.edge, best.offset);
  }

  /// Distance tolerance under which two projections count as a tie.
  static constexpr double kTieTolerance = 1e-12;

 private:
  struct Candidate {
    double dist = std::numeric_limits<double>::infinity();
    EdgeId edge = kNoEdge;
    double offset = 0.0;
  };

  bool on_border(Point v) const {
    return v.x <= kGeomTolerance || v.y <= kGeomTolerance || v.x >= side_ - kGeomTolerance ||
           v.y >= side_ - kGeomTolerance;
  }

  void consider(Point p, EdgeId e, Candidate& best) const {
    const auto& ed = edge(e);
    const double s = project_parameter(p, vertices_[ed.a], vertices_[ed.b]);
    const double d = distance(p, lerp(vertices_[ed.a], vertices_[ed.b], s));
    const double off = s * ed.length;
    const bool better = d < best.dist - kTieTolerance ||
                        (d <= best.dist + kTieTolerance &&
                         (e < best.edge || (e == best.edge && off < best.offset)));
    if (best.edge == kNoEdge || better) best = {d, e, off};
  }

  template <typename F>
  void visit_ring(int cx, int cy, int ring, F&& f) const {
    auto in = [&](int v) { return v >= 0 && v < grid_n_; };
    if (ring == 0) {
      f(cy * grid_n_ + cx);
      return;
    }
    const int xl = std::max(cx - ring, 0), xh = std::min(cx + ring, grid_n_ - 1);
    if (in(cy - ring))
      for (int x = xl; x <= xh; ++x) f((cy - ring) * grid_n_ + x);
    if (in(cy + ring))
      for (int x = xl; x <= xh; ++x) f((cy + ring) * grid_n_ + x);
    const int yl = std::max(cy - ring + 1, 0), yh = std::min(cy + ring - 1, grid_n_ - 1);
    if (in(cx - ring))
      for (int y = yl; y <= yh; ++y) f(y * grid_n_ + cx - ring);
    if (in(cx + ring))
      for (int y = yl; y <= yh; ++y) f(y * grid_n_ + cx + ring);
  }

  void build_adjacency() {
    adjacency_.assign(vertices_.size(), {});
    for (EdgeId e = 0; e < static_cast<EdgeId>(edges_.size()); ++e) {
      adjacency_[edges_[e].a].push_back(e);
      adjacency_[edges_[e].b].push_back(e);
    }
  }

  void build_components() {
    component_.assign(vertices_.size(), -1);
    std::vector<std::size_t> sizes;
    std::vector<VertexId> stack;
    for (VertexId s = 0; s < static_cast<VertexId>(vertices_.size()); ++s) {
      if (component_[s] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      component_[s] = id;
      stack.push_back(s);
      while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        ++sizes[id];
        for (EdgeId e : adjacency_[v]) {
          const VertexId w = edges_[e].a == v ? edges_[e].b : edges_[e].a;
          if (component_[w] < 0) {
            component_[w] = id;
            stack.push_back(w);
          }
        }
      }
    }
    component_count_ = sizes.size();
    main_component_ = sizes.empty()
                          ? -1
                          : static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  }

  void build_grid() {
    const double typical = lambda_ > 0.0 ? 0.5 / std::sqrt(lambda_) : side_ / 64.0;
    grid_n_ = std::clamp(static_cast<int>(std::ceil(side_ / typical)), 1, 2048);
    cell_size_ = side_ / grid_n_;
    std::vector<std::vector<EdgeId>> cells(static_cast<std::size_t>(grid_n_) * grid_n_);
    auto cell_of = [&](double c) { return std::clamp(static_cast<int>(std::floor(c / cell_size_)), 0, grid_n_ - 1); };
    for (EdgeId e = 0; e < static_cast<EdgeId>(edges_.size()); ++e) {
      const Point a = vertices_[edges_[e].a];
      const Point b = vertices_[edges_[e].b];
      const int x0 = cell_of(std::min(a.x, b.x)), x1 = cell_of(std::max(a.x, b.x));
      const int y0 = cell_of(std::min(a.y, b.y)), y1 = cell_of(std::max(a.y, b.y));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) cells[y * grid_n_ + x].push_back(e);
    }
    cell_start_.assign(cells.size() + 1, 0);
    for (std::size_t i = 0; i < cells.size(); ++i) cell_start_[i + 1] = cell_start_[i] + cells[i].size();
    cell_edges_.clear();
    cell_edges_.reserve(cell_start_.back());
    for (const auto& c : cells) cell_edges_.insert(cell_edges_.end(), c.begin(), c.end());
  }

  double lambda_ = 0.0;
  double side_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> adjacency_;
  std::vector<int> component_;
  std::size_t component_count_ = 0;
  int main_component_ = -1;

  int grid_n_ = 1;
  double cell_size_ = 1.0;
  std::vector<std::size_t> cell_start_;
  std::vector<EdgeId> cell_edges_;
};

inline StreetPoint nearest_street_point(const StreetSystem& streets, Point p) { return streets.nearest(p); }

struct GenerationOptions {
  /// Refuse instances whose expected edge count exceeds this.
  double max_edges = 5.0e6;
  /// Seeds are sampled on [-pad, H+pad]^2 with pad = pad_factor / sqrt(lambda).
  double pad_factor = 3.0;
};

/// Voronoi tessellation of a homogeneous Poisson process of intensity `lambda`
/// sampled on a padded window, cut to [0,side]^2.
inline StreetSystem generate_street_system(double lambda, double side, std::uint64_t seed,
                                           const GenerationOptions& options = {}) {
  if (!(lambda > 0.0) || !(side > 0.0))
    throw Error("invalid_argument", "lambda and H must be positive");
  const double pad = options.pad_factor / std::sqrt(lambda);
  const double span = side + 2.0 * pad;
  const double mean_seeds = lambda * span * span;
  if (3.0 * mean_seeds > options.max_edges) throw Error("instance_too_large", "instance too large");

  Rng rng(seed);
  std::poisson_distribution<long long> count_dist(mean_seeds);
  const long long n = count_dist(rng);
  if (n < 3) throw Error("degenerate_tessellation", "degenerate tessellation");

  // The Voronoi builder works on integer input; 2^30 steps across the padded window
  // puts the quantization well below the geometric tolerance for any realistic span.
  const double quantum = span / static_cast<double>(1 << 30);
  std::uniform_real_distribution<double> coord(0.0, span);
  using IPoint = boost::polygon::point_data<std::int32_t>;
  std::vector<IPoint> sites;
  sites.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const double x = coord(rng);
    const double y = coord(rng);
    sites.emplace_back(static_cast<std::int32_t>(std::llround(x / quantum)),
                       static_cast<std::int32_t>(std::llround(y / quantum)));
  }

  boost::polygon::voronoi_diagram<double> vd;
  boost::polygon::construct_voronoi(sites.begin(), sites.end(), &vd);

  auto to_world = [&](double gx, double gy) { return Point{gx * quantum - pad, gy * quantum - pad}; };
  auto site_of = [&](const auto* cell) {
    const auto& s = sites[cell->source_index()];
    return Point{static_cast<double>(s.x()), static_cast<double>(s.y())};
  };

  std::vector<Point> vertices;
  std::vector<std::pair<VertexId, VertexId>> endpoints;
  std::unordered_map<std::size_t, VertexId> voronoi_vertex_id;
  const auto* vertex_base = vd.vertices().empty() ? nullptr : &vd.vertices().front();

  auto interior_vertex = [&](const auto* vx, Point world) {
    const auto key = static_cast<std::size_t>(vx - vertex_base);
    auto [it, inserted] = voronoi_vertex_id.try_emplace(key, static_cast<VertexId>(vertices.size()));
    if (inserted) vertices.push_back(world);
    return it->second;
  };
  auto border_vertex = [&](Point world) {
    world.x = std::clamp(world.x, 0.0, side);
    world.y = std::clamp(world.y, 0.0, side);
    vertices.push_back(world);
    return static_cast<VertexId>(vertices.size() - 1);
  };

  for (const auto& e : vd.edges()) {
    if (!e.is_primary() || e.color() != 0) continue;
    e.twin()->color(1);
    e.color(1);

    Point start, end;  // grid units
    const auto* v0 = e.vertex0();
    const auto* v1 = e.vertex1();
    if (v0 == nullptr || v1 == nullptr) {
      const Point p1 = site_of(e.cell());
      const Point p2 = site_of(e.twin()->cell());
      const Point origin = 0.5 * (p1 + p2);
      const Point dir{p1.y - p2.y, p2.x - p1.x};
      const double k = 4.0 * static_cast<double>(1 << 30) / std::max(std::abs(dir.x), std::abs(dir.y));
      start = v0 ? Point{v0->x(), v0->y()} : origin - k * dir;
      end = v1 ? Point{v1->x(), v1->y()} : origin + k * dir;
    } else {
      start = {v0->x(), v0->y()};
      end = {v1->x(), v1->y()};
    }
    const Point a = to_world(start.x, start.y);
    const Point b = to_world(end.x, end.y);
    const auto clip = clip_to_square(a, b, side);
    if (!clip) continue;
    const auto [s0, s1] = *clip;
    if ((s1 - s0) * distance(a, b) < kGeomTolerance) continue;
    const VertexId ia = (s0 == 0.0 && v0) ? interior_vertex(v0, a) : border_vertex(lerp(a, b, s0));
    const VertexId ib = (s1 == 1.0 && v1) ? interior_vertex(v1, b) : border_vertex(lerp(a, b, s1));
    if (distance(vertices[ia], vertices[ib]) < kGeomTolerance) continue;
    endpoints.emplace_back(ia, ib);
  }
  return StreetSystem(lambda, side, seed, std::move(vertices), endpoints);
}

/// Dijkstra over the street graph with reusable buffers; one instance per worker.
class PathFinder {
 public:
  explicit PathFinder(const StreetSystem& streets)
      : streets_(&streets),
        dist_(streets.vertex_count(), kInf),
        pred_edge_(streets.vertex_count(), kNoEdge),
        pred_vertex_(streets.vertex_count(), -1) {
    arc_start_.reserve(streets.vertex_count() + 1);
    arc_start_.push_back(0);
    for (VertexId v = 0; v < static_cast<VertexId>(streets.vertex_count()); ++v) {
      for (EdgeId e : streets.incident_edges(v)) {
        const Edge& ed = streets.edge(e);
        arcs_.push_back({ed.a == v ? ed.b : ed.a, e, ed.length});
      }
      arc_start_.push_back(arcs_.size());
    }
  }

  /// Minimal-length route along the streets. Throws "unreachable" across components.
  Path shortest_path(const StreetPoint& from, const StreetPoint& to) {
    const auto& S = *streets_;
    Path path;
    if (from.edge == to.edge) {
      if (from.offset != to.offset) path.legs.push_back({from.edge, from.offset, to.offset});
      path.length = std::abs(from.offset - to.offset);
      return path;
    }
    if (S.component_of_edge(from.edge) != S.component_of_edge(to.edge))
      throw Error("unreachable", "unreachable destination");

    const Edge& ef = S.edge(from.edge);
    const Edge& et = S.edge(to.edge);
    reset();
    // A* with the straight-line distance to the target point, which never exceeds the
    // remaining street distance.
    const auto& vertices = S.vertices();
    auto estimate = [&](VertexId v) { return distance(vertices[static_cast<std::size_t>(v)], to.position); };
    heap_.clear();
    auto push = [&](double d, VertexId v) {
      heap_.push_back({d + estimate(v), d, v});
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
    };
    auto seed_source = [&](VertexId v, double d) {
      if (d < dist_[v]) {
        touch(v);
        dist_[v] = d;
        push(d, v);
      }
    };
    seed_source(ef.a, from.offset);
    seed_source(ef.b, ef.length - from.offset);

    double best = kInf;
    VertexId best_target = -1;
    auto offer = [&](VertexId v, double total) {
      if (total < best || (total == best && v < best_target)) {
        best = total;
        best_target = v;
      }
    };
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
      const auto [f, d, v] = heap_.back();
      heap_.pop_back();
      if (d > dist_[v]) continue;
      if (f >= best) break;
      if (v == et.a) offer(v, d + to.offset);
      if (v == et.b) offer(v, d + et.length - to.offset);
      for (auto k = arc_start_[v]; k < arc_start_[v + 1]; ++k) {
        const Arc& arc = arcs_[k];
        const double nd = d + arc.length;
        const VertexId w = arc.to;
        if (nd < dist_[w] || (nd == dist_[w] && pred_vertex_[w] >= 0 && v < pred_vertex_[w])) {
          touch(w);
          dist_[w] = nd;
          pred_edge_[w] = arc.edge;
          pred_vertex_[w] = v;
          push(nd, w);
        }
      }
    }
    if (best_target < 0) throw Error("unreachable", "unreachable destination");

    std::vector<EdgeId> chain;
    VertexId v = best_target;
    while (pred_edge_[v] != kNoEdge) {
      chain.push_back(pred_edge_[v]);
      v = pred_vertex_[v];
    }
    std::reverse(chain.begin(), chain.end());
    const VertexId exit_vertex = v;  // endpoint of the start edge the route leaves through

    auto add_leg = [&](EdgeId e, double a, double b) {
      if (a != b) path.legs.push_back({e, a, b});
    };
    add_leg(from.edge, from.offset, exit_vertex == ef.a ? 0.0 : ef.length);
    VertexId at = exit_vertex;
    for (EdgeId e : chain) {
      const Edge& ed = S.edge(e);
      if (ed.a == at) {
        add_leg(e, 0.0, ed.length);
        at = ed.b;
      } else {
        add_leg(e, ed.length, 0.0);
        at = ed.a;
      }
    }
    add_leg(to.edge, at == et.a ? 0.0 : et.length, to.offset);
    path.length = best;
    return path;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  void touch(VertexId v) {
    if (dist_[v] == kInf) touched_.push_back(v);
  }
  void reset() {
    for (VertexId v : touched_) {
      dist_[v] = kInf;
      pred_edge_[v] = kNoEdge;
      pred_vertex_[v] = -1;
    }
    touched_.clear();
  }

  struct Arc {
    VertexId to;
    EdgeId edge;
    double length;
  };
  using Item = std::tuple<double, double, VertexId>;  // (estimate, distance, vertex)

  const StreetSystem* streets_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> arc_start_;
  std::vector<Item> heap_;
  std::vector<double> dist_;
  std::vector<EdgeId> pred_edge_;
  std::vector<VertexId> pred_vertex_;
  std::vector<VertexId> touched_;
};

inline Path shortest_path(const StreetSystem& streets, const StreetPoint& a, const StreetPoint& b) {
  PathFinder finder(streets);
  return finder.shortest_path(a, b);
}

struct EdgeLengthStatistics {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  /// Histogram over [0, bin_width * density.size()), normalized to unit area.
  double bin_width = 0.0;
  std::vector<double> density;
  /// At least 100 interior edges contributed.
  bool reliable = false;
};

/// Lengths of the edges that were not cut by the window border.
inline std::vector<double> interior_edge_lengths(const StreetSystem& streets) {
  std::vector<double> out;
  out.reserve(streets.edge_count());
  for (const auto& e : streets.edges())
    if (!e.clipped) out.push_back(e.length);
  return out;
}

inline EdgeLengthStatistics summarize_lengths(const std::vector<double>& lengths, std::size_t bins = 50) {
  EdgeLengthStatistics st;
  st.count = lengths.size();
  st.reliable = st.count >= 100;
  if (st.count == 0) return st;
  double sum = 0.0;
  for (double l : lengths) sum += l;
  st.mean = sum / static_cast<double>(st.count);
  double ss = 0.0;
  for (double l : lengths) ss += (l - st.mean) * (l - st.mean);
  st.variance = st.count > 1 ? ss / static_cast<double>(st.count - 1) : 0.0;

  const double max_len = *std::max_element(lengths.begin(), lengths.end());
  if (st.count == 1 || bins <= 1) bins = 1;
  st.bin_width = max_len / static_cast<double>(bins);
  st.density.assign(bins, 0.0);
  for (double l : lengths) {
    auto i = static_cast<std::size_t>(l / st.bin_width);
    st.density[std::min(i, bins - 1)] += 1.0;
  }
  for (auto& d : st.density) d /= static_cast<double>(st.count) * st.bin_width;
  return st;
}

inline EdgeLengthStatistics edge_length_statistics(const StreetSystem& streets, std::size_t bins = 50) {
  return summarize_lengths(interior_edge_lengths(streets), bins);
}

// Text format:
//   S <lambda> <H> <seed>
//   V <id> <x> <y>      (one per vertex, ids dense from 0)
//   E <id> <v1> <v2> <length>
inline void write_street_system(std::ostream& os, const StreetSystem& streets) {
  os << "S " << format_double(streets.lambda()) << ' ' << format_double(streets.side()) << ' '
     << streets.seed() << '\n';
  for (std::size_t i = 0; i < streets.vertex_count(); ++i) {
    const auto& v = streets.vertices()[i];
    os << "V " << i << ' ' << format_double(v.x) << ' ' << format_double(v.y) << '\n';
  }
  for (std::size_t i = 0; i < streets.edge_count(); ++i) {
    const auto& e = streets.edges()[i];
    os << "E " << i << ' ' << e.a << ' ' << e.b << ' ' << format_double(e.length) << '\n';
  }
}

inline StreetSystem read_street_system(std::istream& is) {
  double lambda = 0.0, side = 0.0;
  std::uint64_t seed = 0;
  bool header = false;
  std::vector<Point> vertices;
  std::vector<std::pair<VertexId, VertexId>> endpoints;
  std::vector<double> lengths;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error("bad_street_file", "line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t, ' ');
    try {
      if (fields[0] == "S" && fields.size() == 4) {
        lambda = parse_double(fields[1]);
        side = parse_double(fields[2]);
        seed = parse_integer<std::uint64_t>(fields[3]);
        header = true;
      } else if (fields[0] == "V" && fields.size() == 4) {
        if (parse_integer<std::size_t>(fields[1]) != vertices.size()) fail("vertex ids must be dense");
        vertices.push_back({parse_double(fields[2]), parse_double(fields[3])});
      } else if (fields[0] == "E" && fields.size() == 5) {
        if (parse_integer<std::size_t>(fields[1]) != endpoints.size()) fail("edge ids must be dense");
        endpoints.emplace_back(parse_integer<VertexId>(fields[2]), parse_integer<VertexId>(fields[3]));
        lengths.push_back(parse_double(fields[4]));
      } else {
        fail("unrecognized record");
      }
    } catch (const Error& e) {
      if (e.code() == "bad_street_file") throw;
      fail(e.what());
    }
  }
  if (!header) throw Error("bad_street_file", "missing S header");
  for (const auto& [a, b] : endpoints)
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= vertices.size() || static_cast<std::size_t>(b) >= vertices.size())
      throw Error("bad_street_file", "edge endpoint out of range");
  StreetSystem streets(lambda, side, seed, std::move(vertices), endpoints);
  for (std::size_t i = 0; i < lengths.size(); ++i)
    if (std::abs(lengths[i] - streets.edges()[i].length) > kGeomTolerance)
      throw Error("bad_street_file", "edge " + std::to_string(i) + " length disagrees with its endpoints");
  return streets;
}

}  // namespace d2d
