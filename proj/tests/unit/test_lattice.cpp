#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "calderon/lattice.hpp"

using namespace calderon;

namespace {

using Point = std::vector<int>;

// Independent enumeration of [0, n+1]^d by odometer.
std::vector<Point> grid(int d, int n) {
  std::vector<Point> out;
  Point x(d, 0);
  while (true) {
    out.push_back(x);
    int i = d - 1;
    while (i >= 0 && ++x[i] > n + 1) x[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

int extremes(const Point& x, int n) {
  return static_cast<int>(std::count_if(x.begin(), x.end(), [n](int v) { return v == 0 || v == n + 1; }));
}

struct Brute {
  std::set<Point> interior, boundary;
  std::set<std::pair<Point, Point>> edges;
};

Brute brute(int d, int n) {
  Brute b;
  for (const auto& x : grid(d, n)) {
    if (extremes(x, n) == 0) b.interior.insert(x);
    if (extremes(x, n) == 1) b.boundary.insert(x);
  }
  std::set<Point> nodes = b.interior;
  nodes.insert(b.boundary.begin(), b.boundary.end());
  for (const auto& p : nodes)
    for (const auto& q : nodes) {
      int dist = 0;
      for (int i = 0; i < d; ++i) dist += std::abs(p[i] - q[i]);
      if (dist == 1 && p < q && !(b.boundary.count(p) && b.boundary.count(q))) b.edges.insert({p, q});
    }
  return b;
}

Point pt(const Lattice& lat, NodeId p) {
  const auto c = lat.coords(p);
  return Point(c.begin(), c.end());
}

std::set<Point> points(const Lattice& lat, const std::vector<NodeId>& ids) {
  std::set<Point> out;
  for (NodeId p : ids) out.insert(pt(lat, p));
  return out;
}

long ipow(long b, int e) {
  long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("counts agree with brute-force enumeration and the closed forms") {
    for (int d = 2; d <= 4; ++d)
      for (int n = 1; n <= 5; ++n) {
        if (d == 4 && n > 4) continue;
        CAPTURE(d);
        CAPTURE(n);
        const Lattice lat(d, n);
        const auto b = brute(d, n);
        CHECK(lat.num_interior() == b.interior.size());
        CHECK(lat.num_boundary() == b.boundary.size());
        CHECK(lat.num_edges() == b.edges.size());
        CHECK(static_cast<long>(lat.num_interior()) == ipow(n, d));
        CHECK(static_cast<long>(lat.num_boundary()) == 2L * d * ipow(n, d - 1));
        CHECK(static_cast<long>(lat.num_edges()) == d * ipow(n, d - 1) * (n + 1));
      }
  }

  TEST_CASE("small examples") {
    const Lattice a(2, 1);
    CHECK(a.num_interior() == 1);
    CHECK(a.num_boundary() == 4);
    CHECK(a.num_edges() == 4);
    const Lattice b(3, 2);
    CHECK(b.num_interior() == 8);
    CHECK(b.num_boundary() == 24);
    CHECK(b.num_edges() == 36);
    CHECK_THROWS_AS(Lattice(1, 3), std::invalid_argument);
    CHECK_THROWS_AS(Lattice(2, 0), std::invalid_argument);
  }

  TEST_CASE("canonical orderings are lexicographic") {
    const Lattice lat(3, 3);
    for (std::size_t p = 1; p < lat.num_interior(); ++p)
      CHECK(pt(lat, static_cast<NodeId>(p - 1)) < pt(lat, static_cast<NodeId>(p)));
    for (std::size_t b = 1; b < lat.num_boundary(); ++b)
      CHECK(pt(lat, lat.boundary_node(b - 1)) < pt(lat, lat.boundary_node(b)));
    for (std::size_t e = 0; e < lat.num_edges(); ++e) {
      const auto& k = lat.edge(static_cast<EdgeId>(e));
      CHECK(pt(lat, k.a) < pt(lat, k.b));
      if (e) {
        const auto& prev = lat.edge(static_cast<EdgeId>(e - 1));
        CHECK(std::make_pair(pt(lat, prev.a), pt(lat, prev.b)) < std::make_pair(pt(lat, k.a), pt(lat, k.b)));
      }
    }
    for (std::size_t p = 0; p < lat.num_nodes(); ++p) CHECK(lat.find(lat.coords(static_cast<NodeId>(p))) == static_cast<NodeId>(p));
    const int corner[3] = {0, 0, 1};
    CHECK(lat.find(corner) == -1);
  }

  TEST_CASE("boundary nodes have exactly one interior neighbour") {
    const Lattice lat(3, 3);
    for (std::size_t b = 0; b < lat.num_boundary(); ++b) {
      const auto nb = lat.neighbors(lat.boundary_node(b));
      REQUIRE(nb.size() == 1);
      CHECK(lat.is_interior(nb.front().node));
    }
  }

  TEST_CASE("slice sets of the d=3, n=2 lattice") {
    const Lattice lat(3, 2);
    const auto s2 = lat.slice_sets(2);
    CHECK(s2.L.empty());
    CHECK(points(lat, s2.K) == std::set<Point>{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    const auto s3 = lat.slice_sets(3);
    CHECK(s3.J.size() == 6);
    CHECK(s3.J == s3.K_minus);
    CHECK(lat.slice_sets(4).K_plus.empty());
    CHECK(s3.J_cum.size() == 9);
    CHECK(s3.L_cum.size() == 1);
    CHECK(lat.slice_sets(4).L_cum.size() == 4);
    for (int n = 1; n <= 4; ++n) {
      const Lattice l(3, n);
      CHECK(points(l, l.slice_sets(3).L) == std::set<Point>{{1, 1, 1}});
    }
  }

  TEST_CASE("slice sets match a direct classification") {
    for (int d = 2; d <= 3; ++d)
      for (int n = 1; n <= 4; ++n) {
        const Lattice lat(d, n);
        const auto b = brute(d, n);
        auto sum = [](const Point& x) {
          int s = 0;
          for (int v : x) s += v;
          return s;
        };
        for (int t = 0; t <= d * (n + 1) + 1; ++t) {
          std::set<Point> L, Km, Kp, Lc, Jc;
          for (const auto& x : b.interior) {
            if (sum(x) == t) L.insert(x);
            if (sum(x) <= t) Lc.insert(x);
          }
          for (const auto& x : b.boundary) {
            const bool minus = std::count(x.begin(), x.end(), 0) == 1;
            if (sum(x) == t && minus) Km.insert(x);
            if (sum(x) == t && !minus) Kp.insert(x);
            if ((minus && sum(x) <= t) || (!minus && sum(x) <= t + 1)) Jc.insert(x);
          }
          const auto s = lat.slice_sets(t);
          CHECK(points(lat, s.L) == L);
          CHECK(points(lat, s.K_minus) == Km);
          CHECK(points(lat, s.K_plus) == Kp);
          CHECK(points(lat, s.L_cum) == Lc);
          CHECK(points(lat, s.J_cum) == Jc);
          CHECK(std::is_sorted(s.J_cum.begin(), s.J_cum.end()));
        }
      }
  }

  TEST_CASE("neighbours of a level lie in the adjacent levels") {
    const Lattice lat(3, 4);
    for (std::size_t p = 0; p < lat.num_nodes(); ++p)
      for (const auto& nb : lat.neighbors(static_cast<NodeId>(p)))
        CHECK(std::abs(lat.coord_sum(nb.node) - lat.coord_sum(static_cast<NodeId>(p))) == 1);
  }

  TEST_CASE("interface edges join consecutive levels") {
    const Lattice lat(3, 3);
    std::size_t total = 0;
    for (int t = 0; t <= 3 * 4; ++t) {
      const auto es = lat.interface_edges(t);
      total += es.size();
      for (EdgeId e : es) {
        const auto& k = lat.edge(e);
        CHECK(std::min(lat.coord_sum(k.a), lat.coord_sum(k.b)) == t);
        CHECK(lat.edge_level(e) == t);
      }
    }
    CHECK(total == lat.num_edges());
    CHECK(lat.interface_edges(2).size() == 3);
  }

  TEST_CASE("corner maps") {
    const Lattice lat(2, 1);
    const auto id = lat.corner_map(Corner::origin(2));
    for (std::size_t p = 0; p < lat.num_nodes(); ++p) CHECK(id.node_perm[p] == static_cast<NodeId>(p));

    const Point a{0, 1}, b{2, 1}, c{1, 0}, e{1, 2};
    const auto m = lat.corner_map(Corner{{1, 0}});
    auto img = [&](const Point& x) { return pt(lat, m.node_perm[lat.find(x)]); };
    CHECK(img(a) == b);
    CHECK(img(b) == a);
    CHECK(img(c) == c);
    CHECK(img(e) == e);

    const Lattice big(3, 3);
    for (const auto& corner : all_corners(3)) {
      const auto map = big.corner_map(corner);
      for (std::size_t p = 0; p < big.num_nodes(); ++p) CHECK(map.node_perm[map.node_perm[p]] == static_cast<NodeId>(p));
      for (std::size_t k = 0; k < big.num_edges(); ++k) {
        const auto& edge = big.edge(static_cast<EdgeId>(k));
        CHECK(big.find_edge(map.node_perm[edge.a], map.node_perm[edge.b]) == map.edge_perm[k]);
      }
    }
  }

  TEST_CASE("corner masks enumerate lexicographically") {
    const auto cs = all_corners(3);
    REQUIRE(cs.size() == 8);
    CHECK(cs[1].to_string() == "001");
    CHECK(cs[4].to_string() == "100");
    for (std::size_t i = 0; i < cs.size(); ++i) CHECK(cs[i].mask() == i);
    CHECK(cs[0].is_origin());
  }

  TEST_CASE("corner distance measures to the interior corner node") {
    const Lattice lat(2, 3);
    const Point p{1, 0}, q{1, 1};
    const EdgeId e = lat.find_edge(lat.find(p), lat.find(q));
    CHECK(lat.corner_distance(e, Corner{{0, 0}}) == doctest::Approx(0.5));
    CHECK(lat.corner_distance(e, Corner{{1, 0}}) == doctest::Approx(2.5));
    CHECK(lat.corner_distance(e, Corner{{0, 1}}) == doctest::Approx(2.5));
  }

  TEST_CASE("expected kernel dimension") {
    CHECK(expected_kernel_dim(Lattice(3, 2), 2) == 2);
    CHECK(expected_kernel_dim(Lattice(3, 2), 3) == 6);
    for (int n = 1; n <= 4; ++n) CHECK(expected_kernel_dim(Lattice(3, n), 2) == 2);
  }
}
