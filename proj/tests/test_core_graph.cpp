#include <gtest/gtest.h>

#include <random>

#include "tropicurve/graph.hpp"

using namespace tropicurve;
using R = Rational;

namespace {

MetricGraph circle3() { return MetricGraph::build({"o"}, {{"l", "o", "o", R(3)}}); }

MetricGraph theta() {
  return MetricGraph::build({"a", "b"}, {{"e1", "a", "b", R(1)}, {"e2", "a", "b", R(2)}, {"e3", "a", "b", R(3)}});
}

// Floyd-Warshall over vertices after refining at both points; independent of Dijkstra.
R oracle_distance(const MetricGraph& g0, const Point& p, const Point& q) {
  auto [g, pts] = refine_at(g0, {p, q});
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<std::optional<R>>> d(n, std::vector<std::optional<R>>(n));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = R(0);
  for (const auto& e : g.edges()) {
    if (!d[e.a][e.b] || e.length < *d[e.a][e.b]) d[e.a][e.b] = d[e.b][e.a] = e.length;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] && d[k][j] && (!d[i][j] || *d[i][k] + *d[k][j] < *d[i][j])) d[i][j] = *d[i][k] + *d[k][j];
  return *d[pts[0].index][pts[1].index];
}

}  // namespace

TEST(Rational, ParseFormatRoundTrip) {
  EXPECT_EQ(format_rational(parse_rational("6/4")), "3/2");
  EXPECT_EQ(format_rational(parse_rational("-10/5")), "-2");
  EXPECT_EQ(format_rational(parse_rational("+7")), "7");
  EXPECT_THROW(parse_rational("1/0"), Error);
  EXPECT_THROW(parse_rational("1/-2"), Error);
  EXPECT_THROW(parse_rational("x"), Error);
  EXPECT_THROW(parse_rational(""), Error);
}

TEST(Rational, ExtendedOrderIsTotal) {
  auto lo = ExtRational::minus_infinity(), hi = ExtRational::plus_infinity();
  ExtRational a(R(-1000000)), b(R(1, 3));
  EXPECT_LT(lo, a);
  EXPECT_LT(a, b);
  EXPECT_LT(b, hi);
  EXPECT_EQ(parse_ext("+inf"), hi);
  EXPECT_EQ(format_ext(lo), "-inf");
  EXPECT_EQ(parse_ext("2/6"), ExtRational(R(1, 3)));
}

TEST(BuildGraph, PathAndCircle) {
  auto path = MetricGraph::build({"a", "b"}, {{"e", "a", "b", R(1)}});
  EXPECT_EQ(path.betti_number(), 0u);
  EXPECT_EQ(circle3().betti_number(), 1u);
}

TEST(BuildGraph, TateSkeleton) {
  R c = 1, h = c / 2;
  auto g = MetricGraph::build({"q1", "q2", "q3", "p1", "p2", "p3", "p4", "p5", "p6"},
                              {{"a1", "q1", "p6", h}, {"a2", "p6", "q2", h}, {"a3", "q2", "p4", h},
                               {"a4", "p4", "q3", h}, {"a5", "q3", "p5", h}, {"a6", "p5", "q1", h},
                               {"s1", "q1", "p1", h}, {"s2", "q2", "p2", h}, {"s3", "q3", "p3", h}});
  EXPECT_EQ(g.betti_number(), 1u);
  std::size_t leaves = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) leaves += g.valence(v) == 1;
  EXPECT_EQ(leaves, 3u);
  EXPECT_EQ(g.vertex_count() - leaves, 6u);
}

TEST(BuildGraph, Errors) {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code([] { MetricGraph::build({"a", "b"}, {}); }), ErrorCode::DisconnectedGraph);
  EXPECT_EQ(code([] { MetricGraph::build({"a", "b"}, {{"e", "a", "b", R(0)}}); }), ErrorCode::NonpositiveLength);
  EXPECT_EQ(code([] { MetricGraph::build({"a"}, {{"e", "a", "z", R(1)}}); }), ErrorCode::DanglingEndpoint);
}

TEST(Subdivide, EdgeAndLoop) {
  auto path = MetricGraph::build({"a", "b"}, {{"e", "a", "b", R(2)}});
  auto s = path.subdivide(0, R(1));
  EXPECT_EQ(s.graph.edge_count(), 2u);
  EXPECT_EQ(s.graph.edge(s.edge).length, R(1));
  EXPECT_EQ(s.graph.edge(s.new_edge).length, R(1));

  auto loop = circle3().subdivide(0, R(1));
  EXPECT_EQ(loop.graph.edge_count(), 2u);
  EXPECT_EQ(loop.graph.betti_number(), 1u);
  std::vector<R> lengths{loop.graph.edge(0).length, loop.graph.edge(1).length};
  std::sort(lengths.begin(), lengths.end());
  EXPECT_EQ(lengths, (std::vector<R>{1, 2}));
}

TEST(Subdivide, IsIsometry) {
  auto g = theta();
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto pick = [&] {
      std::size_t e = rng() % g.edge_count();
      return g.canonical({e, g.edge(e).length * R(int(rng() % 8), 8)});
    };
    Point p = pick(), q = pick(), cut = pick();
    if (!cut.is_interior()) continue;
    auto s = g.subdivide(cut.index, cut.offset);
    EXPECT_EQ(distance(g, p, q), distance(s.graph, s.translate(p), s.translate(q)));
    EXPECT_EQ(s.graph.betti_number(), g.betti_number());
  }
}

TEST(Distance, Examples) {
  auto path = MetricGraph::build({"a", "b"}, {{"e", "a", "b", R(5)}});
  EXPECT_EQ(distance(path, Point::vertex(0), Point::vertex(1)), R(5));
  auto c = circle3();
  EXPECT_EQ(distance(c, Point::vertex(0), Point::interior(0, R(2))), R(1));
  EXPECT_EQ(distance(c, Point::interior(0, R(1)), Point::interior(0, R(1))), R(0));
}

TEST(Distance, MatchesFloydWarshall) {
  auto g = MetricGraph::build({"a", "b", "c", "d"}, {{"e1", "a", "b", R(1)},
                                                     {"e2", "b", "c", R(5, 2)},
                                                     {"e3", "c", "a", R(2)},
                                                     {"e4", "c", "d", R(1, 3)},
                                                     {"e5", "d", "d", R(4)},
                                                     {"e6", "a", "b", R(7, 3)}});
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto pick = [&] {
      std::size_t e = rng() % g.edge_count();
      return g.canonical({e, g.edge(e).length * R(int(rng() % 7), 6)});
    };
    Point p = pick(), q = pick();
    EXPECT_EQ(distance(g, p, q), oracle_distance(g, p, q)) << g.describe(p) << " " << g.describe(q);
  }
}

TEST(EdgeDistance, Examples) {
  auto c = circle3();
  EXPECT_EQ(edge_distance(c, 0, Point::interior(0, R(1, 2)), Point::interior(0, R(5, 2))), R(2));
  EXPECT_EQ(distance(c, Point::interior(0, R(1, 2)), Point::interior(0, R(5, 2))), R(1));
  EXPECT_EQ(edge_distance(c, 0, Point::interior(0, R(1)), Point::interior(0, R(1))), R(0));
  auto p = MetricGraph::build({"a", "b"}, {{"e", "a", "b", R(1)}});
  EXPECT_EQ(edge_distance(p, 0, Point::interior(0, R(1, 3)), Point::interior(0, R(5, 6))), R(1, 2));
  EXPECT_THROW(edge_distance(p, 0, Point::vertex(0), Point::interior(0, R(1, 2))), Error);
}

TEST(SpanningTree, CircleAndTheta) {
  EXPECT_TRUE(spanning_tree_complement(circle3(), {0}).ok);
  auto t = theta();
  // Brute force: a pair is a complement iff the remaining single edge connects a and b.
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      std::size_t left = 3 - i - j;
      bool expected = t.edge(left).a != t.edge(left).b;
      EXPECT_EQ(spanning_tree_complement(t, {i, j}).ok, expected);
    }
  EXPECT_EQ(all_tree_complements(t).size(), 3u);
  try {
    spanning_tree_complement(t, {0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongCardinality);
  }
}

TEST(SpanningTree, CountMatchesKirchhoffOnK4) {
  auto g = MetricGraph::build({"a", "b", "c", "d"}, {{"1", "a", "b", R(1)},
                                                     {"2", "a", "c", R(1)},
                                                     {"3", "a", "d", R(1)},
                                                     {"4", "b", "c", R(1)},
                                                     {"5", "b", "d", R(1)},
                                                     {"6", "c", "d", R(1)}});
  // Cayley: n^(n-2) = 16 spanning trees.
  EXPECT_EQ(all_tree_complements(g).size(), 16u);
}

TEST(PillarPoints, Examples) {
  auto g = MetricGraph::build({"a", "b"}, {{"e", "a", "b", R(10)}});
  auto pts = [](int a, int b, int c, int d) {
    return std::array<Point, 4>{Point::interior(0, R(a)), Point::interior(0, R(b)), Point::interior(0, R(c)),
                                Point::interior(0, R(d))};
  };
  EXPECT_TRUE(validate_pillar_points(g, 0, pts(1, 2, 7, 8)));
  EXPECT_FALSE(validate_pillar_points(g, 0, pts(1, 3, 5, 6)));
  EXPECT_FALSE(validate_pillar_points(g, 0, pts(1, 2, 8, 7)));
  EXPECT_TRUE(validate_pillar_points(g, 0, pts(8, 7, 2, 1)));
  std::array<Point, 4> bad{Point::vertex(0), Point::interior(0, R(2)), Point::interior(0, R(7)), Point::interior(0, R(8))};
  EXPECT_THROW(validate_pillar_points(g, 0, bad), Error);
}

TEST(TwoCore, LollipopAndTree) {
  auto g = MetricGraph::build({"a", "b", "c"}, {{"l", "a", "a", R(1)}, {"s", "a", "b", R(1)}, {"t", "b", "c", R(1)}});
  auto core = two_core(g);
  EXPECT_TRUE(core.edge[0]);
  EXPECT_FALSE(core.edge[1]);
  EXPECT_FALSE(core.edge[2]);
  EXPECT_TRUE(core.vertex[0]);
  EXPECT_FALSE(core.vertex[2]);
  auto tree = MetricGraph::build({"a", "b"}, {{"e", "a", "b", R(1)}});
  auto tc = two_core(tree, 1);
  EXPECT_FALSE(tc.vertex[0]);
  EXPECT_TRUE(tc.vertex[1]);
}

TEST(ExtendedGraph, RaysAndSplit) {
  auto g = MetricGraph::build({"a", "b"}, {{"e", "a", "b", R(1)}});
  ExtendedGraph x(g, {{"r", 1}});
  EXPECT_EQ(x.valence(1), 2u);
  auto split = x.split_ray(0, R(2));
  EXPECT_EQ(split.graph.ray(0).id, "r");
  EXPECT_EQ(split.graph.ray(0).attach, split.vertex);
  EXPECT_EQ(split.graph.finite().edge(split.edge).length, R(2));
  EXPECT_EQ(split.graph.finite().betti_number(), 0u);
  auto y = x.with_ray(0, "r");
  EXPECT_EQ(y.rays().size(), 2u);
  EXPECT_NE(y.ray(1).id, "r");
}
