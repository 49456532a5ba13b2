#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tropicurve/pipeline.hpp"
#include "tropicurve/synthesis.hpp"

using namespace tropicurve;
using R = Rational;

namespace {

Embedding bare(const MetricGraph& g, std::vector<Ray> rays = {}) {
  return {ExtendedGraph(g, rays), {}, {}, true};
}

MetricGraph circle(const R& len) { return MetricGraph::build({"o"}, {{"l", "o", "o", len}}); }

MetricGraph lollipop() {
  return MetricGraph::build({"a", "b", "c"}, {{"l", "a", "a", R(4)}, {"s", "a", "b", R(1)}, {"t", "b", "c", R(2)}});
}

// Intersection in the plane by Cramer's rule, or by interval overlap when parallel.
bool meet_2d(const ImageSegment& x, const ImageSegment& y) {
  R a = R(x.slope[0]), b = R(-y.slope[0]), c = R(x.slope[1]), d = R(-y.slope[1]);
  R r0 = y.start[0] - x.start[0], r1 = y.start[1] - x.start[1];
  auto ok = [](const R& v, const std::optional<R>& len) { return v >= 0 && (!len || v <= *len); };
  R det = a * d - b * c;
  if (det != 0) return ok((r0 * d - b * r1) / det, x.length) && ok((a * r1 - r0 * c) / det, y.length);
  // Parallel: same line iff the offset is along x's slope; compare parameter intervals on that line.
  if (r0 * c - r1 * a != 0) return false;
  R n2 = a * a + c * c;
  R ys = (r0 * a + r1 * c) / n2;                          // y.start in x's parameter
  R k = (R(y.slope[0]) * a + R(y.slope[1]) * c) / n2;     // y's parameter step in x's parameter
  std::optional<R> lo = ys, hi = ys;
  if (!y.length) (k > 0 ? hi : lo) = std::nullopt;
  else {
    R end = ys + k * *y.length;
    lo = std::min(ys, end), hi = std::max(ys, end);
  }
  bool below = hi && *hi < 0;
  bool above = x.length && lo && *lo > *x.length;
  return !below && !above;
}

// Coefficient of the divisor of F at p equals minus the total slope of the new rays placed at p.
void expect_rays_cancel(const ExtendedGraph& sk, const EdgeFunction& ef) {
  Divisor d = divisor_of(sk, ef.f);
  Divisor want;
  for (const auto& r : ef.rays) want.add(r.attach, -r.slope.convert_to<std::int64_t>());
  for (std::size_t r = 0; r < sk.rays().size(); ++r) EXPECT_EQ(ef.f.ray_slope(r), Integer(0)) << r;
  Divisor finite;
  for (const auto& [p, c] : d.terms())
    if (!p.is_infinity()) finite.add(p, c);
  EXPECT_EQ(finite.terms(), want.terms());
}

void expect_pipeline_ok(const Embedding& in) {
  auto [out, rep] = smoothing_pipeline(in);
  EXPECT_TRUE(is_fully_faithful(out).ok);
  auto [curve, map] = tropicalize(out);
  EXPECT_TRUE(check_smooth(curve).smooth);
  for (std::size_t i = 1; i < rep.singular_counts.size(); ++i)
    EXPECT_LT(rep.singular_counts[i], rep.singular_counts[i - 1]);
  for (const auto& pi : map) EXPECT_EQ(pi.stretch, Integer(1));
  EXPECT_TRUE(oracle::balanced(curve));
  // The skeleton only gains rays and subdivisions; the finite part keeps its first Betti number.
  EXPECT_EQ(out.skeleton.finite().betti_number(), in.skeleton.finite().betti_number());
}

}  // namespace

TEST(SegmentsMeet, Examples) {
  ImageSegment diag{{R(0), R(0)}, {1, 1}, R(2)};
  ImageSegment cross{{R(0), R(2)}, {1, -1}, R(2)};
  ImageSegment far{{R(5), R(0)}, {0, 1}, std::nullopt};
  EXPECT_TRUE(segments_meet(diag, cross));
  EXPECT_FALSE(segments_meet(diag, far));
  ImageSegment tail{{R(2), R(2)}, {1, 1}, std::nullopt};
  EXPECT_TRUE(segments_meet(diag, tail));
  ImageSegment gap{{R(3), R(3)}, {1, 1}, R(1)};
  EXPECT_FALSE(segments_meet(diag, gap));
  ImageSegment skew{{R(0), R(0), R(1)}, {1, 0, 0}, std::nullopt};
  ImageSegment line{{R(0), R(0), R(0)}, {0, 1, 0}, std::nullopt};
  EXPECT_FALSE(segments_meet(skew, line));
}

TEST(SegmentsMeet, AgreesWithPlaneOracle) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> small(-2, 2);
  int hits = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    auto seg = [&] {
      ImageSegment s{{R(small(rng), 1 + rng() % 2), R(small(rng), 1 + rng() % 2)}, {small(rng), small(rng)}, std::nullopt};
      if (s.slope[0] == 0 && s.slope[1] == 0) s.slope[0] = 1;
      if (rng() % 4) s.length = R(1 + rng() % 4, 1 + rng() % 2);
      return s;
    };
    auto x = seg(), y = seg();
    bool got = segments_meet(x, y);
    EXPECT_EQ(got, meet_2d(x, y));
    EXPECT_EQ(got, segments_meet(y, x));
    hits += got;
  }
  EXPECT_GT(hits, 100);
}

TEST(SelectPillars, TuplesAreValidAndDisjoint) {
  auto g = MetricGraph::build({"a", "b"}, {{"e1", "a", "b", R(1)}, {"e2", "a", "b", R(2)}, {"e3", "a", "b", R(3)}});
  auto emb = bare(g);
  // (f1, f2) maps e3 onto the x-axis and e2 onto the y-axis; e1 is contracted to the origin.
  emb.coords.push_back(PLFunction::from_data(emb.skeleton, {0, 0}, {{}, {}, {{R(1), R(1)}, {R(2), R(1)}}}, {}));
  emb.coords.push_back(PLFunction::from_data(emb.skeleton, {0, 0}, {{}, {{R(1), R(1)}}, {}}, {}));
  PillarState st;
  ImageSegment wall{{R(0), R(1, 2)}, {1, 0}, std::nullopt};
  auto cfgs = select_pillars(emb, {PillarTarget{{wall}, {}}, PillarTarget{}}, st);
  ASSERT_EQ(cfgs.size(), 2u);
  std::vector<std::pair<R, R>> windows;
  const auto& fg = emb.skeleton.finite();
  for (const auto& cfg : cfgs) {
    EXPECT_EQ(cfg.complement.size(), fg.betti_number());
    EXPECT_TRUE(spanning_tree_complement(fg, cfg.complement).ok);
    ASSERT_EQ(cfg.tuples.size(), cfg.complement.size());
    for (const auto& t : cfg.tuples) {
      EXPECT_TRUE(validate_pillar_points(fg, t.edge, t.points));
      windows.push_back({R(t.edge) * 100 + t.points[0].offset, R(t.edge) * 100 + t.points[3].offset});
    }
  }
  for (const auto& t : cfgs[0].tuples)
    for (const auto& s : edge_image(emb, t.edge, t.points[0].offset, t.points[3].offset))
      EXPECT_FALSE(segments_meet(s, wall));
  std::sort(windows.begin(), windows.end());
  for (std::size_t i = 1; i < windows.size(); ++i) EXPECT_LT(windows[i - 1].second, windows[i].first);
}

TEST(SelectPillars, BudgetExhausted) {
  auto emb = bare(circle(R(1)));
  emb.coords.push_back(PLFunction::from_data(emb.skeleton, {0}, {{}}, {}));
  PillarState st;
  st.budget = 0;
  try {
    select_pillars(emb, {PillarTarget{}}, st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PillarSearchExhausted);
  }
}

TEST(EdgeFunction, FiniteBridgeOffTheCore) {
  auto g = lollipop();
  auto emb = bare(g);
  emb.coords.push_back(PLFunction::from_data(emb.skeleton, {0, 0, 0}, {{}, {}, {}}, {}));
  Core core = core_of(emb.skeleton);
  PillarState st;
  auto cfg = select_pillars(emb, {PillarTarget{}}, st).front();
  ASSERT_EQ(cfg.tuples.size(), 1u);
  auto ef = edge_function_finite(emb, *g.find_edge("t"), core, cfg);
  expect_rays_cancel(emb.skeleton, ef);
  EXPECT_EQ(ef.rays.size(), 6u);
  EXPECT_EQ(ef.pillar_rays, 4u);
  // Slope 1 along t away from the core, constant beyond.
  EXPECT_EQ(ef.f.vertex_value(*g.find_vertex("b")), R(0));
  EXPECT_EQ(ef.f.vertex_value(*g.find_vertex("c")), R(2));
  // Each trapezoid rises by the gap between its first two points.
  const auto& t = cfg.tuples[0];
  EXPECT_EQ(ef.f.value_at(t.points[1]).value(), t.points[1].offset - t.points[0].offset);
  EXPECT_EQ(ef.f.value_at(t.points[2]).value(), t.points[1].offset - t.points[0].offset);
  EXPECT_EQ(ef.f.value_at(t.points[3]).value(), R(0));
  auto out = extend_embedding(emb, ef.f, ef.rays);
  EXPECT_NO_THROW(validate_embedding(out));
}

TEST(EdgeFunction, RejectsCycleEdges) {
  auto g = lollipop();
  auto emb = bare(g);
  emb.coords.push_back(PLFunction::from_data(emb.skeleton, {0, 0, 0}, {{}, {}, {}}, {}));
  try {
    edge_function_finite(emb, *g.find_edge("l"), core_of(emb.skeleton), PillarConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSeparated);
  }
}

TEST(EdgeFunction, InfiniteRay) {
  auto g = circle(R(2));
  auto emb = bare(g, {{"r", 0}});
  emb.coords.push_back(PLFunction::from_data(emb.skeleton, {0}, {{}}, {1}));
  PillarState st;
  auto cfg = select_pillars(emb, {PillarTarget{}}, st).front();
  auto ef = edge_function_infinite(emb, 0, cfg);
  EXPECT_EQ(ef.f.ray_slope(0), Integer(1));
  EXPECT_EQ(ef.rays.size(), 5u);
  Divisor d = divisor_of(emb.skeleton, ef.f);
  EXPECT_EQ(d[Point::vertex(0)], 1);
  EXPECT_EQ(d[Point::infinity(0)], -1);
  EXPECT_EQ(d.degree(), 0);
}

TEST(VertexFunction, TentHasSixSimplePoints) {
  auto g = MetricGraph::build({"a", "b", "c"}, {{"x", "a", "b", R(2)}, {"y", "a", "c", R(4)}});
  auto emb = bare(g);
  EdgeEnd e0{*g.find_edge("x"), true}, e1{*g.find_edge("y"), true};
  auto ef = vertex_function(emb, 0, e0, e1, PillarConfig{});
  Divisor d = divisor_of(emb.skeleton, ef.f);
  EXPECT_EQ(d.terms().size(), 6u);
  for (const auto& [p, c] : d.terms()) {
    EXPECT_TRUE(c == 1 || c == -1);
    EXPECT_FALSE(p.is_vertex());
  }
  expect_rays_cancel(emb.skeleton, ef);
  R r = R(2) / 8;
  EXPECT_EQ(ef.f.value_at(Point::interior(e1.edge, 2 * r)).value(), r);
  EXPECT_EQ(ef.f.value_at(Point::interior(e0.edge, 2 * r)).value(), -r);
  EXPECT_EQ(ef.f.vertex_value(0), R(0));
  auto sup = tent_support(g, e0, r);
  EXPECT_EQ(sup.hi, 3 * r);
  try {
    vertex_function(emb, 0, e0, e0, PillarConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EqualEdges);
  }
  EXPECT_THROW(vertex_function(emb, 1, e0, e1, PillarConfig{}), Error);
}

TEST(Pipeline, CircleAndLoop) {
  expect_pipeline_ok(bare(circle(R(1))));
  expect_pipeline_ok(bare(circle(R(7, 3)), {{"r", 0}}));
}

TEST(Pipeline, TreesAndLollipop) {
  expect_pipeline_ok(bare(MetricGraph::build({"a", "b", "c"}, {{"e1", "a", "b", R(1)}, {"e2", "b", "c", R(2)}})));
  expect_pipeline_ok(bare(MetricGraph::build({"a"}, {}), {{"r", 0}, {"s", 0}}));
  expect_pipeline_ok(bare(lollipop()));
}

TEST(Pipeline, FullyFaithfulReport) {
  auto [out, rep] = fully_faithful_pipeline(bare(lollipop()));
  EXPECT_TRUE(is_fully_faithful(out).ok);
  EXPECT_FALSE(rep.steps.empty());
  EXPECT_FALSE(rep.certificates.empty());
  std::size_t coords = 0;
  for (const auto& s : rep.steps) {
    EXPECT_EQ(s.first_coordinate, coords);
    coords += s.added;
  }
  EXPECT_EQ(coords, out.coords.size());
  // Already fully faithful input is returned unchanged.
  auto [again, rep2] = fully_faithful_pipeline(out);
  EXPECT_TRUE(rep2.steps.empty());
  EXPECT_EQ(again.coords.size(), out.coords.size());
}

TEST(Pipeline, TateIsAlreadySmooth) {
  auto [emb, curve] = tate_demo(R(1));
  auto [out, rep] = smoothing_pipeline(emb);
  EXPECT_TRUE(rep.steps.empty());
  ASSERT_EQ(rep.singular_counts.size(), 1u);
  EXPECT_EQ(rep.singular_counts[0], 0u);
  EXPECT_EQ(out.coords.size(), emb.coords.size());
}

TEST(Pipeline, TinyBudgetFails) {
  PipelineOptions opt;
  opt.budget = 1;
  try {
    smoothing_pipeline(bare(circle(R(1))), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PillarSearchExhausted);
  }
}

TEST(Pipeline, ExplicitCore) {
  PipelineOptions opt;
  opt.core_edges = std::vector<std::string>{"l", "s"};
  auto [out, rep] = fully_faithful_pipeline(bare(lollipop()), opt);
  EXPECT_TRUE(is_fully_faithful(out).ok);
  opt.core_edges = std::vector<std::string>{"nope"};
  EXPECT_THROW(fully_faithful_pipeline(bare(lollipop()), opt), Error);
}
