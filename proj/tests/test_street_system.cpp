#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "d2d/street_system.hpp"

using namespace d2d;

namespace {

// Exhaustive projection onto every edge; ties go to the lowest edge id.
StreetPoint brute_nearest(const StreetSystem& s, Point p) {
  double best = std::numeric_limits<double>::infinity();
  StreetPoint out;
  for (EdgeId e = 0; e < static_cast<EdgeId>(s.edge_count()); ++e) {
    const auto& ed = s.edge(e);
    const Point a = s.vertices()[ed.a], b = s.vertices()[ed.b];
    const Point d = b - a;
    double t = dot(p - a, d) / dot(d, d);
    t = std::clamp(t, 0.0, 1.0);
    const double dist = distance(p, a + t * d);
    if (dist < best - 1e-12) {
      best = dist;
      out = s.point_at(e, t * ed.length);
    }
  }
  return out;
}

// All-pairs vertex distances by Floyd-Warshall.
std::vector<std::vector<double>> all_pairs(const StreetSystem& s) {
  const auto n = s.vertex_count();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : s.edges()) {
    d[e.a][e.b] = std::min(d[e.a][e.b], e.length);
    d[e.b][e.a] = std::min(d[e.b][e.a], e.length);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

double oracle_distance(const StreetSystem& s, const std::vector<std::vector<double>>& d, const StreetPoint& x,
                       const StreetPoint& y) {
  if (x.edge == y.edge) return std::abs(x.offset - y.offset);
  const auto& ex = s.edge(x.edge);
  const auto& ey = s.edge(y.edge);
  const double to_x[2] = {x.offset, ex.length - x.offset};
  const double to_y[2] = {y.offset, ey.length - y.offset};
  const VertexId vx[2] = {ex.a, ex.b};
  const VertexId vy[2] = {ey.a, ey.b};
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) best = std::min(best, to_x[i] + d[vx[i]][vy[j]] + to_y[j]);
  return best;
}

void expect_connected_route(const StreetSystem& s, const Path& p, const StreetPoint& from, const StreetPoint& to) {
  double total = 0.0;
  Point at = from.position;
  for (const auto& leg : p.legs) {
    EXPECT_LT(distance(s.point_at(leg.edge, leg.from).position, at), 1e-9);
    at = s.point_at(leg.edge, leg.to).position;
    total += leg.length();
  }
  EXPECT_LT(distance(at, to.position), 1e-9);
  EXPECT_NEAR(total, p.length, 1e-9);
}

StreetSystem small_graph() {
  // Unit square with one diagonal and a tail.
  //  3 ---- 2
  //  |    / |
  //  |  /   |
  //  0 ---- 1 ---- 4
  std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {2, 0}};
  return StreetSystem(1.0, 2.0, 0, v, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 4}});
}

}  // namespace

TEST(Generation, UnitIntensityMomentsAndDensity) {
  const auto s = generate_street_system(1.0, 60.0, 11);
  const auto st = edge_length_statistics(s);
  ASSERT_GT(st.count, 9000u);
  EXPECT_NEAR(st.mean, 2.0 / 3.0, 0.02);
  EXPECT_NEAR(st.variance, 0.1856, 0.015);
  EXPECT_NEAR(s.total_length() / (60.0 * 60.0), 2.0, 0.06);
  double area = 0.0;
  for (double d : st.density) area += d * st.bin_width;
  EXPECT_NEAR(area, 1.0, 1e-9);
}

TEST(Generation, GeometryStaysInsideWindowAndClippedFlagsMatchBorder) {
  const auto s = generate_street_system(50.0, 2.0, 5);
  ASSERT_FALSE(s.empty());
  std::size_t clipped = 0;
  for (const auto& v : s.vertices()) {
    EXPECT_GE(v.x, -1e-9);
    EXPECT_LE(v.x, 2.0 + 1e-9);
    EXPECT_GE(v.y, -1e-9);
    EXPECT_LE(v.y, 2.0 + 1e-9);
  }
  auto on_border = [](Point p) { return p.x < 1e-9 || p.y < 1e-9 || p.x > 2.0 - 1e-9 || p.y > 2.0 - 1e-9; };
  for (const auto& e : s.edges()) {
    EXPECT_EQ(e.clipped, on_border(s.vertices()[e.a]) || on_border(s.vertices()[e.b]));
    EXPECT_GT(e.length, 0.0);
    clipped += e.clipped;
  }
  EXPECT_GT(clipped, 0u);
}

TEST(Generation, SameSeedSameMapDifferentSeedDifferentMap) {
  const auto a = generate_street_system(50.0, 3.0, 42);
  const auto b = generate_street_system(50.0, 3.0, 42);
  const auto c = generate_street_system(50.0, 3.0, 43);
  std::ostringstream sa, sb, sc;
  write_street_system(sa, a);
  write_street_system(sb, b);
  write_street_system(sc, c);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Generation, RejectsBadArgumentsAndHugeInstances) {
  try {
    generate_street_system(0.0, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "invalid_argument");
  }
  try {
    generate_street_system(1e6, 100.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "instance_too_large");
  }
}

TEST(Generation, ComponentsPartitionEdges) {
  const auto s = generate_street_system(50.0, 4.0, 3);
  ASSERT_GE(s.main_component(), 0);
  std::size_t main_edges = 0;
  for (EdgeId e = 0; e < static_cast<EdgeId>(s.edge_count()); ++e) {
    EXPECT_EQ(s.component_of_edge(e), s.component_of_vertex(s.edge(e).b));
    main_edges += s.in_main_component(e);
  }
  EXPECT_GT(main_edges, s.edge_count() * 9 / 10);
}

TEST(Nearest, MatchesExhaustiveSearchInsideAndOutsideWindow) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = generate_street_system(50.0, 1.0, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.5, 2.5);
    for (int i = 0; i < 200; ++i) {
      const Point p{u(rng), u(rng)};
      const auto got = nearest_street_point(s, p);
      const auto want = brute_nearest(s, p);
      ASSERT_NEAR(distance(got.position, p), distance(want.position, p), 1e-12);
      EXPECT_EQ(got.edge, want.edge);
    }
  }
}

TEST(Nearest, PointOnVertexPicksLowestIncidentEdge) {
  const auto s = small_graph();
  const auto p = s.nearest({1.0, 0.0});
  EXPECT_EQ(p.edge, 0);
  EXPECT_NEAR(p.offset, 1.0, 1e-12);
}

TEST(ShortestPath, SmallGraphAgainstEnumeratedRoutes) {
  const auto s = small_graph();
  // Vertex 3 to vertex 4: 3-0-1-4 = 3, 3-2-1-4 = 3, 3-0-2-1-4 > 3 ... minimum is 3.
  const auto from = s.point_at(2, 1.0);  // vertex 3 on edge 2-3
  const auto to = s.point_at(5, 1.0);    // vertex 4
  const auto p = shortest_path(s, from, to);
  EXPECT_NEAR(p.length, 3.0, 1e-12);
  expect_connected_route(s, p, from, to);
  // Midpoint of 0-1 to midpoint of 2-3: 0.5 + sqrt(2) vs 0.5 + 1 + 0.5 ... minimum is 2.
  const auto a = s.point_at(0, 0.5);
  const auto b = s.point_at(2, 0.5);
  EXPECT_NEAR(shortest_path(s, a, b).length, 2.0, 1e-12);
  // Point on the diagonal to vertex 1 via either 0 or 2.
  const double diag = std::sqrt(2.0);
  const auto c = s.point_at(4, 0.25 * diag);
  EXPECT_NEAR(shortest_path(s, c, s.point_at(0, 1.0)).length, 0.25 * diag + 1.0, 1e-12);
}

TEST(ShortestPath, SameEdgeIsDirect) {
  const auto s = small_graph();
  const auto p = shortest_path(s, s.point_at(4, 0.1), s.point_at(4, 1.2));
  ASSERT_EQ(p.legs.size(), 1u);
  EXPECT_NEAR(p.length, 1.1, 1e-12);
  EXPECT_EQ(p.legs[0].direction(), 1);
  EXPECT_TRUE(shortest_path(s, s.point_at(4, 0.3), s.point_at(4, 0.3)).legs.empty());
}

TEST(ShortestPath, MatchesFloydWarshallOnRandomMaps) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto s = generate_street_system(30.0, 1.2, seed);
    ASSERT_LE(s.edge_count(), 200u);
    const auto d = all_pairs(s);
    PathFinder finder(s);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<EdgeId> pick(0, static_cast<EdgeId>(s.edge_count()) - 1);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const EdgeId ea = pick(rng), eb = pick(rng);
      const auto x = s.point_at(ea, frac(rng) * s.edge(ea).length);
      const auto y = s.point_at(eb, frac(rng) * s.edge(eb).length);
      const double want = oracle_distance(s, d, x, y);
      if (!std::isfinite(want)) {
        EXPECT_THROW(finder.shortest_path(x, y), Error);
        continue;
      }
      const auto p = finder.shortest_path(x, y);
      EXPECT_NEAR(p.length, want, 1e-9);
      expect_connected_route(s, p, x, y);
      EXPECT_NEAR(p.reversed().length, p.length, 0.0);
    }
  }
}

TEST(ShortestPath, UnreachableAcrossComponents) {
  std::vector<Point> v{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const StreetSystem s(1.0, 1.0, 0, v, {{0, 1}, {2, 3}});
  try {
    shortest_path(s, s.point_at(0, 0.5), s.point_at(1, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unreachable");
  }
}

TEST(Serialization, RoundTripPreservesGeometry) {
  const auto s = generate_street_system(50.0, 2.0, 9);
  std::stringstream buf;
  write_street_system(buf, s);
  const auto back = read_street_system(buf);
  ASSERT_EQ(back.vertex_count(), s.vertex_count());
  ASSERT_EQ(back.edge_count(), s.edge_count());
  for (std::size_t i = 0; i < s.edge_count(); ++i) {
    EXPECT_EQ(back.edges()[i].a, s.edges()[i].a);
    EXPECT_EQ(back.edges()[i].length, s.edges()[i].length);
    EXPECT_EQ(back.edges()[i].clipped, s.edges()[i].clipped);
  }
  EXPECT_EQ(back.seed(), s.seed());
}

TEST(Serialization, RejectsMalformedInput) {
  const char* bad[] = {
      "V 0 0 0\n",                                  // no header
      "S 1 1 0\nV 1 0 0\n",                         // sparse ids
      "S 1 1 0\nV 0 0 0\nV 1 1 0\nE 0 0 1 2\n",     // wrong length
      "S 1 1 0\nX 0\n",                             // unknown record
  };
  for (const char* text : bad) {
    std::istringstream in(text);
    try {
      read_street_system(in);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "bad_street_file");
    }
  }
}

TEST(Statistics, SummaryOfKnownSample) {
  const auto st = summarize_lengths({1.0, 2.0, 3.0, 4.0}, 4);
  EXPECT_DOUBLE_EQ(st.mean, 2.5);
  EXPECT_DOUBLE_EQ(st.variance, 5.0 / 3.0);
  EXPECT_FALSE(st.reliable);
  EXPECT_DOUBLE_EQ(st.bin_width, 1.0);
}

TEST(Geometry, ClipToSquare) {
  const auto inside = clip_to_square({0.2, 0.2}, {0.8, 0.8}, 1.0);
  ASSERT_TRUE(inside);
  EXPECT_DOUBLE_EQ(inside->first, 0.0);
  EXPECT_DOUBLE_EQ(inside->second, 1.0);
  const auto crossing = clip_to_square({-1.0, 0.5}, {1.0, 0.5}, 1.0);
  ASSERT_TRUE(crossing);
  EXPECT_DOUBLE_EQ(crossing->first, 0.5);
  EXPECT_DOUBLE_EQ(crossing->second, 1.0);
  EXPECT_FALSE(clip_to_square({-1.0, 2.0}, {2.0, 2.0}, 1.0));
}
