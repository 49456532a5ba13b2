#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tropicurve/error.hpp"
#include "tropicurve/graph.hpp"
#include "tropicurve/pl_function.hpp"
#include "tropicurve/principal.hpp"
#include "tropicurve/rational.hpp"
#include "tropicurve/tropicalize.hpp"

namespace tropicurve {

/// Linear image segment start + s * slope for s in [0, length]; no length means a ray.
struct ImageSegment {
  RatVector start;
  IntVector slope;
  std::optional<Rational> length;
};

/// Exact test whether two image segments share a point.
inline bool segments_meet(const ImageSegment& x, const ImageSegment& y) {
  const std::size_t n = x.start.size();
  std::vector<std::array<Rational, 3>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = {Rational(x.slope[i]), Rational(-y.slope[i]), y.start[i] - x.start[i]};
  std::size_t rank = 0;
  std::array<int, 2> pivot{-1, -1};
  for (int col = 0; col < 2; ++col) {
    std::size_t r = rank;
    while (r < n && rows[r][col] == 0) ++r;
    if (r == n) continue;
    std::swap(rows[r], rows[rank]);
    Rational p = rows[rank][col];
    for (auto& v : rows[rank]) v /= p;
    for (std::size_t q = 0; q < n; ++q) {
      if (q == rank || rows[q][col] == 0) continue;
      Rational f = rows[q][col];
      for (int c = 0; c < 3; ++c) rows[q][c] -= f * rows[rank][c];
    }
    pivot[rank] = col;
    ++rank;
  }
  for (std::size_t r = rank; r < n; ++r)
    if (rows[r][2] != 0) return false;
  auto in = [](const Rational& v, const std::optional<Rational>& len) { return v >= 0 && (!len || v <= *len); };
  if (rank == 2) return in(rows[0][2], x.length) && in(rows[1][2], y.length);
  if (rank == 0) return true;
  const auto& row = rows[0];
  if (pivot[0] == 1) return in(row[2], y.length);
  // s + k t = c with t in [0, len_y] and s in [0, len_x].
  Rational k = row[1], c = row[2];
  if (k == 0) return in(c, x.length);
  // s = c - k t; collect the t-range that keeps s in bounds and intersect with [0, len_y].
  std::optional<Rational> lo = Rational(0), hi = y.length;
  std::optional<Rational> a = c / k;  // s = 0
  std::optional<Rational> b;          // s = len_x
  if (x.length) b = (c - *x.length) / k;
  // t in the closed interval between a and b (b missing means unbounded on its side).
  std::optional<Rational> tlo, thi;
  if (b) {
    tlo = std::min(*a, *b);
    thi = std::max(*a, *b);
  } else if (k > 0) {
    thi = a;  // s >= 0 <=> t <= c / k
  } else {
    tlo = a;
  }
  Rational L = std::max(*lo, tlo ? *tlo : *lo);
  std::optional<Rational> H = hi;
  if (thi) H = H ? std::min(*H, *thi) : *thi;
  return !H || L <= *H;
}

/// Image of the stretch [t0, t1] of finite edge e as linear segments.
inline std::vector<ImageSegment> edge_image(const Embedding& emb, std::size_t e, const Rational& t0, const Rational& t1) {
  std::set<Rational> cuts{t0, t1};
  for (const auto& f : emb.coords)
    for (const auto& b : f.interior(e))
      if (b.offset > t0 && b.offset < t1) cuts.insert(b.offset);
  std::vector<Rational> ts(cuts.begin(), cuts.end());
  std::vector<ImageSegment> out;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    ImageSegment s;
    for (const auto& f : emb.coords) {
      Rational x0 = f.edge_value(e, ts[i]), x1 = f.edge_value(e, ts[i + 1]);
      s.start.push_back(x0);
      s.slope.push_back(num((x1 - x0) / (ts[i + 1] - ts[i])));
    }
    s.length = ts[i + 1] - ts[i];
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<ImageSegment> ray_image(const Embedding& emb, std::size_t r) {
  ImageSegment s;
  for (const auto& f : emb.coords) {
    s.start.push_back(f.vertex_value(emb.skeleton.ray(r).attach));
    s.slope.push_back(f.ray_slope(r));
  }
  return {s};
}

struct PillarTuple {
  std::size_t edge = 0;
  std::array<Point, 4> points;
};

/// Complement edges of a spanning tree of the core together with one pillar tuple on each.
struct PillarConfig {
  std::vector<std::size_t> complement;
  std::vector<PillarTuple> tuples;
};

struct SourceInterval {
  std::size_t edge;
  Rational lo, hi;
};

struct PillarTarget {
  std::vector<ImageSegment> avoid_images;     // the pillar stretch must not meet these
  std::vector<SourceInterval> avoid_support;  // nor overlap these source intervals
};

/// Search state shared across pipeline steps: the budget of candidate windows per search and the
/// pillar tuples already placed (as skeleton vertices once their rays exist).
struct PillarState {
  std::size_t budget = 4096;
  std::size_t attempts = 0;
  std::vector<std::array<std::size_t, 4>> placed;
};

inline Core core_of(const ExtendedGraph& g) {
  return two_core(g.finite(), default_basepoint(g.finite()));
}

inline bool inside_placed(const PillarState& st, const Edge& e) {
  for (const auto& t : st.placed) {
    bool a = std::find(t.begin(), t.end(), e.a) != t.end();
    bool b = std::find(t.begin(), t.end(), e.b) != t.end();
    if (a && b) return true;
  }
  return false;
}

/// Complement of a canonical spanning tree of the core; edges inside earlier pillar tuples are
/// forced into the tree.
inline std::vector<std::size_t> core_complement(const MetricGraph& g, const Core& core, const PillarState& st) {
  std::vector<std::size_t> parent(g.vertex_count());
  for (std::size_t v = 0; v < parent.size(); ++v) parent[v] = v;
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<std::size_t> edges;
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    if (core.edge[e] && inside_placed(st, g.edge(e))) edges.push_back(e);
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    if (core.edge[e] && !inside_placed(st, g.edge(e))) edges.push_back(e);
  std::vector<std::size_t> comp;
  for (auto e : edges) {
    std::size_t a = find(g.edge(e).a), b = find(g.edge(e).b);
    if (a == b) comp.push_back(e);
    else parent[a] = b;
  }
  std::sort(comp.begin(), comp.end());
  return comp;
}

/// Places one pillar tuple on every complement edge of the core for each target. Tuples sit at
/// fractions 1/8, 2/8, 5/8, 6/8 of dyadic windows of the edge; windows shrink until the tuple
/// clears every image and support it must avoid. A complement edge may be exchanged for another
/// free core edge when the result is still the complement of a spanning tree; all candidates are
/// scanned level by level. Tuples of different targets are disjoint.
inline std::vector<PillarConfig> select_pillars(const Embedding& emb, const std::vector<PillarTarget>& targets,
                                                PillarState& st) {
  const MetricGraph& g = emb.skeleton.finite();
  Core core = core_of(emb.skeleton);
  auto comp = core_complement(g, core, st);
  st.attempts = 0;
  for (auto e : comp)
    if (inside_placed(st, g.edge(e)))
      fail(ErrorCode::PillarSearchExhausted, "cycle without free edge for pillars");
  // The core edges outside `c` must form a forest (the core is connected, so then a spanning tree).
  auto tree_complement = [&](const std::vector<std::size_t>& c) {
    std::vector<std::size_t> parent(g.vertex_count());
    for (std::size_t v = 0; v < parent.size(); ++v) parent[v] = v;
    auto find = [&](std::size_t v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      if (!core.edge[e] || std::find(c.begin(), c.end(), e) != c.end()) continue;
      std::size_t a = find(g.edge(e).a), b = find(g.edge(e).b);
      if (a == b) return false;
      parent[a] = b;
    }
    return true;
  };
  std::vector<PillarConfig> out;
  std::vector<SourceInterval> taken;
  for (const auto& target : targets) {
    PillarConfig cfg;
    cfg.complement = comp;
    for (std::size_t k = 0; k < cfg.complement.size(); ++k) {
      std::vector<std::size_t> candidates{cfg.complement[k]};
      for (std::size_t f = 0; f < g.edge_count(); ++f) {
        if (!core.edge[f] || inside_placed(st, g.edge(f))) continue;
        if (std::find(cfg.complement.begin(), cfg.complement.end(), f) != cfg.complement.end()) continue;
        auto swapped = cfg.complement;
        swapped[k] = f;
        if (tree_complement(swapped)) candidates.push_back(f);
      }
      bool found = false;
      for (std::size_t level = 0; !found; ++level) {
        Integer count = Integer(1) << level;
        for (auto e : candidates) {
          const Rational w = g.edge(e).length / Rational(count);
          for (Integer i = 0; i < count && !found; ++i) {
            if (++st.attempts > st.budget)
              fail(ErrorCode::PillarSearchExhausted, "no pillar tuple on " + g.edge(cfg.complement[k]).id +
                                                         " or an exchangeable edge within " +
                                                         std::to_string(st.budget) + " attempts");
            Rational base = Rational(i) * w;
            std::array<Rational, 4> t{base + w / 8, base + w * 2 / 8, base + w * 5 / 8, base + w * 6 / 8};
            auto clash = [&](const SourceInterval& s) { return s.edge == e && !(s.hi < t[0] || t[3] < s.lo); };
            if (std::any_of(taken.begin(), taken.end(), clash)) continue;
            if (std::any_of(target.avoid_support.begin(), target.avoid_support.end(), clash)) continue;
            auto img = edge_image(emb, e, t[0], t[3]);
            bool meets = false;
            for (const auto& a : img)
              for (const auto& b : target.avoid_images) meets = meets || segments_meet(a, b);
            if (meets) continue;
            PillarTuple tup{e, {Point::interior(e, t[0]), Point::interior(e, t[1]), Point::interior(e, t[2]),
                                Point::interior(e, t[3])}};
            if (!validate_pillar_points(g, e, tup.points)) continue;
            taken.push_back({e, t[0], t[3]});
            cfg.tuples.push_back(tup);
            cfg.complement[k] = e;
            found = true;
          }
          if (found) break;
        }
      }
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

/// Coordinate function together with the rays along which it diverges.
struct EdgeFunction {
  PLFunction f;
  std::vector<NewRay> rays;
  std::size_t pillar_rays = 0;  // the last `pillar_rays` rays sit at pillar points
};

namespace detail {

// Adds trapezoids p1 - p2 - p3 + p4 on the pillar tuples and the matching rays.
inline void add_trapezoids(const PillarConfig& cfg, std::vector<std::vector<Breakpoint>>& interior,
                           std::vector<NewRay>& rays, std::size_t& pillar_rays, const std::string& hint) {
  for (const auto& t : cfg.tuples) {
    Rational h = t.points[1].offset - t.points[0].offset;
    auto& row = interior[t.edge];
    row.push_back({t.points[0].offset, Rational(0)});
    row.push_back({t.points[1].offset, h});
    row.push_back({t.points[2].offset, h});
    row.push_back({t.points[3].offset, Rational(0)});
    std::sort(row.begin(), row.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.offset < b.offset; });
    rays.push_back({t.points[0], Integer(-1), hint});
    rays.push_back({t.points[1], Integer(1), hint});
    rays.push_back({t.points[2], Integer(1), hint});
    rays.push_back({t.points[3], Integer(-1), hint});
    pillar_rays += 4;
  }
}

// Vertices reachable from `start` without crossing edge `skip`.
inline std::vector<bool> side_of(const MetricGraph& g, std::size_t skip, std::size_t start) {
  std::vector<bool> seen(g.vertex_count(), false);
  std::queue<std::size_t> q;
  q.push(start);
  seen[start] = true;
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop();
    for (const auto& inc : g.incident(v)) {
      if (inc.edge == skip) continue;
      const Edge& ed = g.edge(inc.edge);
      std::size_t w = inc.at_a ? ed.b : ed.a;
      if (!seen[w]) seen[w] = true, q.push(w);
    }
  }
  return seen;
}

}  // namespace detail

/// Construction for a finite edge e = [v, w] off the core: slope 1 along e from v to w, zero on
/// the core side, constant beyond w, plus pillar trapezoids. Rays at v (to -inf) and w (to +inf).
inline EdgeFunction edge_function_finite(const Embedding& emb, std::size_t e, const Core& core,
                                         const PillarConfig& pillars) {
  const ExtendedGraph& sk = emb.skeleton;
  const MetricGraph& g = sk.finite();
  const Edge& ed = g.edge(e);
  if (ed.is_loop()) fail(ErrorCode::NotSeparated, "loop " + ed.id);
  auto beyond_b = detail::side_of(g, e, ed.b);
  if (beyond_b[ed.a]) fail(ErrorCode::NotSeparated, ed.id + " is not a bridge");
  bool core_on_a = false, core_on_b = false;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (!core.vertex[v]) continue;
    (beyond_b[v] ? core_on_b : core_on_a) = true;
  }
  if (core_on_a && core_on_b) fail(ErrorCode::NotSeparated, ed.id + " separates the core");
  std::size_t v = core_on_b ? ed.b : ed.a;
  std::size_t w = core_on_b ? ed.a : ed.b;
  auto far = core_on_b ? detail::side_of(g, e, ed.a) : beyond_b;

  std::vector<Rational> values(g.vertex_count(), Rational(0));
  for (std::size_t x = 0; x < g.vertex_count(); ++x)
    if (far[x]) values[x] = ed.length;
  std::vector<std::vector<Breakpoint>> interior(g.edge_count());
  EdgeFunction out;
  out.rays.push_back({Point::vertex(v), Integer(-1), "v"});
  out.rays.push_back({Point::vertex(w), Integer(1), "w"});
  detail::add_trapezoids(pillars, interior, out.rays, out.pillar_rays, "x");
  for (const auto& t : pillars.tuples)
    if (far[g.edge(t.edge).a] || far[g.edge(t.edge).b]) fail(ErrorCode::PillarFailure, "pillar tuple beyond " + ed.id);
  out.f = PLFunction::from_data(sk, std::move(values), std::move(interior), std::vector<Integer>(sk.rays().size(), 0));
  return out;
}

/// Construction for a ray e at v: slope 1 along e, zero on the finite part apart from pillar
/// trapezoids, and a new ray at v to -inf.
inline EdgeFunction edge_function_infinite(const Embedding& emb, std::size_t ray, const PillarConfig& pillars) {
  const ExtendedGraph& sk = emb.skeleton;
  const MetricGraph& g = sk.finite();
  std::vector<std::vector<Breakpoint>> interior(g.edge_count());
  EdgeFunction out;
  out.rays.push_back({Point::vertex(sk.ray(ray).attach), Integer(-1), "v"});
  detail::add_trapezoids(pillars, interior, out.rays, out.pillar_rays, "x");
  std::vector<Integer> slopes(sk.rays().size(), 0);
  slopes[ray] = 1;
  out.f = PLFunction::from_data(sk, std::vector<Rational>(g.vertex_count(), Rational(0)), std::move(interior),
                                std::move(slopes));
  return out;
}

/// One end of a finite edge at a vertex.
struct EdgeEnd {
  std::size_t edge;
  bool at_a;
};

/// Tent for smoothing at v: rises into e1 (slope 1 for r, flat for r, slope -1 for r) and
/// mirrors it downward into e0, where r is an eighth of the shorter edge. Six simple divisor
/// points, none at v.
inline EdgeFunction vertex_function(const Embedding& emb, std::size_t v, const EdgeEnd& e0, const EdgeEnd& e1,
                                    const PillarConfig& pillars) {
  const ExtendedGraph& sk = emb.skeleton;
  const MetricGraph& g = sk.finite();
  if (e0.edge == e1.edge && e0.at_a == e1.at_a) fail(ErrorCode::EqualEdges, "e0 and e1 coincide");
  for (const auto* end : {&e0, &e1}) {
    const Edge& ed = g.edge(end->edge);
    if ((end->at_a ? ed.a : ed.b) != v) fail(ErrorCode::InvalidArgument, ed.id + " does not end at the vertex");
  }
  Rational r = std::min(g.edge(e0.edge).length, g.edge(e1.edge).length) / 8;
  std::vector<std::vector<Breakpoint>> interior(g.edge_count());
  EdgeFunction out;
  auto place = [&](const EdgeEnd& end, int sign) {
    const Rational len = g.edge(end.edge).length;
    auto offset = [&](const Rational& d) { return end.at_a ? d : Rational(len - d); };
    auto& row = interior[end.edge];
    row.push_back({offset(r), Rational(sign) * r});
    row.push_back({offset(2 * r), Rational(sign) * r});
    row.push_back({offset(3 * r), Rational(0)});
    out.rays.push_back({Point::interior(end.edge, offset(r)), Integer(sign), "t"});
    out.rays.push_back({Point::interior(end.edge, offset(2 * r)), Integer(sign), "t"});
    out.rays.push_back({Point::interior(end.edge, offset(3 * r)), Integer(-sign), "t"});
  };
  place(e1, 1);
  place(e0, -1);
  for (const auto& t : pillars.tuples)
    for (const auto& p : t.points)
      for (const auto* end : {&e0, &e1}) {
        if (p.index != end->edge) continue;
        Rational d = end->at_a ? p.offset : Rational(g.edge(end->edge).length - p.offset);
        if (d <= 3 * r) fail(ErrorCode::PillarFailure, "pillar point inside the tent");
      }
  detail::add_trapezoids(pillars, interior, out.rays, out.pillar_rays, "x");
  for (auto& row : interior)
    std::sort(row.begin(), row.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.offset < b.offset; });
  out.f = PLFunction::from_data(sk, std::vector<Rational>(g.vertex_count(), Rational(0)), std::move(interior),
                                std::vector<Integer>(sk.rays().size(), 0));
  return out;
}

/// Source interval covered by the tent of vertex_function on one edge end.
inline SourceInterval tent_support(const MetricGraph& g, const EdgeEnd& end, const Rational& r) {
  const Rational len = g.edge(end.edge).length;
  if (end.at_a) return {end.edge, Rational(0), 3 * r};
  return {end.edge, len - 3 * r, len};
}

}  // namespace tropicurve
