#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "tropicurve/error.hpp"
#include "tropicurve/graph.hpp"
#include "tropicurve/pl_function.hpp"
#include "tropicurve/principal.hpp"
#include "tropicurve/synthesis.hpp"
#include "tropicurve/tropical.hpp"
#include "tropicurve/tropicalize.hpp"

namespace tropicurve {

struct PipelineStep {
  std::string construction;
  std::string target;
  std::size_t first_coordinate = 0;
  std::size_t added = 0;
  std::vector<std::string> pillars;  // "edge@offset" descriptions
  std::string status;
  std::size_t singular_after = 0;
};

struct PipelineReport {
  std::vector<PipelineStep> steps;
  std::vector<std::string> certificates;
  std::vector<std::size_t> singular_counts;  // smoothing only: before the first and after each step
};

struct PipelineOptions {
  std::size_t budget = 4096;
  std::optional<std::vector<std::string>> core_edges;  // explicit core; default is the 2-core
};

namespace detail {

inline Core explicit_core(const MetricGraph& g, const std::vector<std::string>& ids) {
  Core c{std::vector<bool>(g.vertex_count(), false), std::vector<bool>(g.edge_count(), false)};
  for (const auto& id : ids) {
    auto e = g.find_edge(id);
    if (!e) fail(ErrorCode::InvalidArgument, "unknown core edge " + id);
    c.edge[*e] = true;
    c.vertex[g.edge(*e).a] = c.vertex[g.edge(*e).b] = true;
  }
  if (ids.empty()) c.vertex[default_basepoint(g)] = true;
  return c;
}

// Whether the coordinates are injective with unit stretching on the core alone.
inline bool core_faithful(const Embedding& emb, const Core& core) {
  const MetricGraph& g = emb.skeleton.finite();
  std::vector<std::string> verts;
  std::vector<EdgeSpec> edges;
  std::vector<std::size_t> vmap(g.vertex_count()), emap;
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    if (core.vertex[v]) vmap[v] = verts.size(), verts.push_back(g.vertex_id(v));
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    if (core.edge[e]) {
      emap.push_back(e);
      edges.push_back({g.edge(e).id, g.vertex_id(g.edge(e).a), g.vertex_id(g.edge(e).b), g.edge(e).length});
    }
  if (edges.empty()) return true;
  if (emb.coords.empty()) return false;
  ExtendedGraph h(MetricGraph::build(verts, edges));
  Embedding sub{h, {}, {}, true};
  for (const auto& f : emb.coords) {
    std::vector<Rational> values;
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
      if (core.vertex[v]) values.push_back(f.vertex_value(v));
    std::vector<std::vector<Breakpoint>> interior;
    for (auto e : emap) interior.push_back(f.interior(e));
    sub.coords.push_back(PLFunction::from_data(h, std::move(values), std::move(interior), {}));
  }
  return arrange(sub, false).faithful.ok;
}

inline std::vector<std::string> describe_pillars(const MetricGraph& g, const PillarConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& t : cfg.tuples)
    for (const auto& p : t.points) out.push_back(g.describe(p));
  return out;
}

// Records the skeleton vertices of freshly attached pillar rays.
inline void remember_pillars(PillarState& st, const std::vector<std::size_t>& attached, std::size_t first,
                             std::size_t count) {
  for (std::size_t i = 0; i + 3 < count + 1 && i < count; i += 4)
    st.placed.push_back({attached[first + i], attached[first + i + 1], attached[first + i + 2], attached[first + i + 3]});
}

// Subdivides the core into pieces of comparable length and adds two cut coordinates per piece.
inline Embedding stage0(Embedding emb, const Core& core0, PipelineReport& rep) {
  std::vector<std::size_t> core_edges;
  for (std::size_t e = 0; e < emb.skeleton.finite().edge_count(); ++e)
    if (core0.edge[e]) core_edges.push_back(e);
  std::optional<Rational> unit;
  for (auto e : core_edges) {
    const Edge& ed = emb.skeleton.finite().edge(e);
    Rational u = ed.is_loop() ? Rational(ed.length / 2) : ed.length;
    if (!unit || u < *unit) unit = u;
  }
  std::vector<bool> core_vertex = core0.vertex;
  std::vector<std::size_t> pieces;
  for (auto e : core_edges) {
    const Edge ed = emb.skeleton.finite().edge(e);
    Integer k = ceil_div(ed.length / *unit);
    if (ed.is_loop() && k < 2) k = 2;
    Rational step = ed.length / Rational(k);
    std::size_t current = e;
    pieces.push_back(e);
    for (Integer j = 1; j < k; ++j) {
      auto [next, sub] = subdivide(emb, current, step);
      emb = std::move(next);
      core_vertex.push_back(true);
      current = sub.new_edge;
      pieces.push_back(current);
    }
  }
  const MetricGraph& g = emb.skeleton.finite();
  std::vector<bool> is_piece(g.edge_count(), false);
  for (auto p : pieces) is_piece[p] = true;

  // Attachment of every vertex to the core through the hanging trees.
  std::vector<std::size_t> anchor(g.vertex_count());
  std::vector<bool> seen(g.vertex_count(), false);
  std::queue<std::size_t> q;
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    if (core_vertex[v]) anchor[v] = v, seen[v] = true, q.push(v);
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop();
    for (const auto& inc : g.incident(v)) {
      if (is_piece[inc.edge]) continue;
      std::size_t w = inc.at_a ? g.edge(inc.edge).b : g.edge(inc.edge).a;
      if (!seen[w]) seen[w] = true, anchor[w] = anchor[v], q.push(w);
    }
  }

  // Spanning tree of the pieces.
  std::size_t root = 0;
  while (!core_vertex[root]) ++root;
  std::vector<bool> in_tree(g.edge_count(), false);
  {
    std::vector<bool> reached(g.vertex_count(), false);
    std::queue<std::size_t> bq;
    bq.push(root);
    reached[root] = true;
    while (!bq.empty()) {
      std::size_t v = bq.front();
      bq.pop();
      for (const auto& inc : g.incident(v)) {
        if (!is_piece[inc.edge]) continue;
        std::size_t w = inc.at_a ? g.edge(inc.edge).b : g.edge(inc.edge).a;
        if (!reached[w]) reached[w] = true, in_tree[inc.edge] = true, bq.push(w);
      }
    }
  }
  auto tree_side = [&](std::size_t skip, std::size_t start) {
    std::vector<bool> s(g.vertex_count(), false);
    std::queue<std::size_t> sq;
    sq.push(start);
    s[start] = true;
    while (!sq.empty()) {
      std::size_t v = sq.front();
      sq.pop();
      for (const auto& inc : g.incident(v)) {
        if (!in_tree[inc.edge] || inc.edge == skip) continue;
        std::size_t w = inc.at_a ? g.edge(inc.edge).b : g.edge(inc.edge).a;
        if (!s[w]) s[w] = true, sq.push(w);
      }
    }
    return s;
  };

  std::vector<CoordinateSpec> specs;
  for (auto pi : pieces) {
    const Edge& ed = g.edge(pi);
    std::size_t cut_edge = pi;
    if (!in_tree[pi]) {
      // Swap the piece into the tree in place of the first tree edge on its cycle.
      auto from_b = tree_side(g.edge_count(), ed.b);
      (void)from_b;
      std::vector<std::optional<std::size_t>> via(g.vertex_count());
      std::vector<bool> r(g.vertex_count(), false);
      std::queue<std::size_t> pq;
      pq.push(ed.a);
      r[ed.a] = true;
      while (!pq.empty()) {
        std::size_t v = pq.front();
        pq.pop();
        for (const auto& inc : g.incident(v)) {
          if (!in_tree[inc.edge]) continue;
          std::size_t w = inc.at_a ? g.edge(inc.edge).b : g.edge(inc.edge).a;
          if (!r[w]) r[w] = true, via[w] = inc.edge, pq.push(w);
        }
      }
      std::size_t x = ed.b;
      while (x != ed.a) {
        cut_edge = *via[x];
        x = g.edge(cut_edge).a == x ? g.edge(cut_edge).b : g.edge(cut_edge).a;
      }
    }
    auto side = tree_side(cut_edge, ed.b);
    Rational h = ed.length / 2;
    for (int variant = 0; variant < 2; ++variant) {
      std::vector<Rational> values(g.vertex_count());
      for (std::size_t v = 0; v < g.vertex_count(); ++v) values[v] = side[anchor[v]] ? h : Rational(0);
      std::vector<std::vector<Breakpoint>> interior(g.edge_count());
      interior[pi].push_back({h, variant == 0 ? h : Rational(0)});
      for (auto rho : pieces) {
        if (rho == pi) continue;
        const Edge& re = g.edge(rho);
        if (side[re.a] == side[re.b]) continue;
        Rational mid = re.length / 2;
        interior[rho].push_back({mid - h / 2, values[re.a]});
        interior[rho].push_back({mid + h / 2, values[re.b]});
      }
      PLFunction f = PLFunction::from_data(emb.skeleton, std::move(values), std::move(interior),
                                           std::vector<Integer>(emb.skeleton.rays().size(), 0));
      CoordinateSpec spec{f, {}};
      Divisor d = divisor_of(emb.skeleton, f);
      for (const auto& [p, c] : d.terms()) {
        if (p.is_infinity()) continue;
        spec.rays.push_back({p, Integer(-c), "s"});
      }
      specs.push_back(std::move(spec));
    }
  }
  std::size_t first = emb.coords.size();
  emb = extend_embedding(std::move(emb), specs, {"stage0", {{"pieces", std::to_string(pieces.size())}}});
  rep.steps.push_back({"stage0", "core", first, specs.size(), {}, "core pieces " + std::to_string(pieces.size()), 0});
  return emb;
}

}  // namespace detail

/// Refines an embedding until it is fully faithful: a bootstrap makes the core injective with
/// unit stretching, then every edge and ray off the core receives its own coordinate.
inline std::pair<Embedding, PipelineReport> fully_faithful_pipeline(Embedding emb, const PipelineOptions& opt = {}) {
  PipelineReport rep;
  validate_embedding(emb);
  if (!emb.coords.empty() && detail::arrange(emb, false).faithful.ok) {
    rep.certificates.push_back("fully faithful on input");
    return {std::move(emb), std::move(rep)};
  }
  const MetricGraph& g0 = emb.skeleton.finite();
  Core core = opt.core_edges ? detail::explicit_core(g0, *opt.core_edges) : core_of(emb.skeleton);
  std::vector<std::string> off_core;
  for (std::size_t e = 0; e < g0.edge_count(); ++e)
    if (!core.edge[e]) off_core.push_back(g0.edge(e).id);
  std::vector<std::string> input_rays;
  for (const auto& r : emb.skeleton.rays()) input_rays.push_back(r.id);

  if (!detail::core_faithful(emb, core)) {
    try {
      emb = detail::stage0(std::move(emb), core, rep);
    } catch (const Error& err) {
      fail(ErrorCode::Stage0Failure, err.what());
    }
    Core now = core_of(emb.skeleton);
    if (opt.core_edges) {
      now = Core{std::vector<bool>(emb.skeleton.finite().vertex_count(), false),
                 std::vector<bool>(emb.skeleton.finite().edge_count(), false)};
      for (std::size_t e = 0; e < emb.skeleton.finite().edge_count(); ++e) {
        const auto& id = emb.skeleton.finite().edge(e).id;
        if (std::find(off_core.begin(), off_core.end(), id) != off_core.end()) continue;
        now.edge[e] = true;
        now.vertex[emb.skeleton.finite().edge(e).a] = now.vertex[emb.skeleton.finite().edge(e).b] = true;
      }
    }
    if (!detail::core_faithful(emb, now)) fail(ErrorCode::Stage0Failure, "core is not injective after bootstrap");
  }

  PillarState st;
  st.budget = opt.budget;
  auto current_core = [&]() {
    const MetricGraph& g = emb.skeleton.finite();
    Core c{std::vector<bool>(g.vertex_count(), false), std::vector<bool>(g.edge_count(), false)};
    bool any = false;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      if (std::find(off_core.begin(), off_core.end(), g.edge(e).id) != off_core.end()) continue;
      c.edge[e] = true;
      c.vertex[g.edge(e).a] = c.vertex[g.edge(e).b] = true;
      any = true;
    }
    if (!any) {
      for (std::size_t v = 0; v < g.vertex_count(); ++v) c.vertex[v] = core.vertex.size() > v && core.vertex[v];
    }
    return c;
  };

  auto add = [&](EdgeFunction ef, const std::string& kind, const std::string& target, const PillarConfig& cfg) {
    std::size_t first = emb.coords.size();
    std::vector<std::size_t> attached;
    auto pillars = detail::describe_pillars(emb.skeleton.finite(), cfg);
    std::size_t nrays = ef.rays.size();
    emb = extend_embedding(std::move(emb), std::vector<CoordinateSpec>{{ef.f, ef.rays}}, {kind, {{"target", target}}}, &attached);
    detail::remember_pillars(st, attached, nrays - ef.pillar_rays, ef.pillar_rays);
    rep.steps.push_back({kind, target, first, 1, std::move(pillars), "lift-assumed", 0});
  };

  for (const auto& id : off_core) {
    auto e = *emb.skeleton.finite().find_edge(id);
    Core c = current_core();
    auto imgs = edge_image(emb, e, Rational(0), emb.skeleton.finite().edge(e).length);
    auto cfg = select_pillars(emb, {PillarTarget{imgs, {}}}, st).front();
    add(edge_function_finite(emb, e, c, cfg), "edge-finite", id, cfg);
  }
  for (const auto& id : input_rays) {
    auto r = *emb.skeleton.find_ray(id);
    auto cfg = select_pillars(emb, {PillarTarget{ray_image(emb, r), {}}}, st).front();
    add(edge_function_infinite(emb, r, cfg), "edge-infinite", id, cfg);
  }
  if (emb.coords.empty()) {
    emb.coords.push_back(PLFunction::constant(emb.skeleton));
    rep.steps.push_back({"constant", "point", 0, 1, {}, "single point", 0});
  }

  auto cert = detail::arrange(emb, false).faithful;
  if (!cert.ok) {
    std::string why;
    for (const auto& r : cert.reasons) why += (why.empty() ? "" : "; ") + r;
    fail(ErrorCode::CertificateFailure, why);
  }
  rep.certificates.push_back("fully faithful");
  emb.raw = false;
  return {std::move(emb), std::move(rep)};
}

namespace detail {

// Skeleton vertex whose image is the given finite point.
inline std::optional<std::size_t> preimage_vertex(const Embedding& emb, const TropVertex& tv) {
  for (std::size_t v = 0; v < emb.skeleton.finite().vertex_count(); ++v) {
    bool same = true;
    for (std::size_t k = 0; k < emb.coords.size() && same; ++k) same = tv.coords[k] == ExtRational(emb.coords[k].vertex_value(v));
    if (same) return v;
  }
  return std::nullopt;
}

// Outgoing image direction of a finite edge end at v (primitive).
inline IntVector end_direction(const Embedding& emb, const EdgeEnd& end) {
  const Rational len = emb.skeleton.finite().edge(end.edge).length;
  IntVector s;
  for (const auto& f : emb.coords) {
    auto sl = f.slopes(end.edge);
    s.push_back(end.at_a ? sl.front() : Integer(-sl.back()));
  }
  (void)len;
  Integer m = content(s);
  if (m != 0)
    for (auto& x : s) x /= m;
  return s;
}

}  // namespace detail

/// Resolves every singular vertex of the tropicalization by adding, for a singular vertex with
/// edges e0..en, the n tent coordinates vertex_function(v, e0, ek).
inline std::pair<Embedding, PipelineReport> smoothing_pipeline(Embedding emb, const PipelineOptions& opt = {}) {
  PipelineReport rep;
  validate_embedding(emb);
  std::optional<detail::Arrangement> start;
  if (!emb.coords.empty()) start = detail::arrange(emb, false);
  if (!start || !start->faithful.ok) {
    auto [ff, ffrep] = fully_faithful_pipeline(std::move(emb), opt);
    emb = std::move(ff);
    rep.steps = std::move(ffrep.steps);
    rep.certificates = std::move(ffrep.certificates);
    start = detail::arrange(emb, false);
  }
  PillarState st;
  st.budget = opt.budget;
  auto arr = std::move(*start);
  const TropicalCurve* curve = &arr.curve;
  if (!check_balancing(*curve).balanced) fail(ErrorCode::CertificateFailure, "tropicalization is not balanced");
  auto report = check_smooth(*curve);
  if (!report.heavy_edges.empty()) fail(ErrorCode::CertificateFailure, "heavy edge in a fully faithful image");
  std::size_t singular = report.singular_vertices.size();
  rep.singular_counts.push_back(singular);
  while (!report.smooth) {
    const TropVertex tv = curve->vertex(report.singular_vertices.front().vertex);
    if (tv.infinite()) fail(ErrorCode::CertificateFailure, "singular vertex at infinity");
    auto src = detail::preimage_vertex(emb, tv);
    if (!src) fail(ErrorCode::CertificateFailure, "singular image vertex without skeleton vertex");
    std::size_t v = *src;

    // Rays at v become short finite edges so tents fit on them.
    Rational shortest = 1;
    bool any_finite = false;
    for (const auto& inc : emb.skeleton.finite().incident(v)) {
      const Rational& l = emb.skeleton.finite().edge(inc.edge).length;
      if (!any_finite || l < shortest) shortest = l;
      any_finite = true;
    }
    for (auto r : emb.skeleton.rays_at(v)) {
      auto [next, split] = split_ray(std::move(emb), r, shortest);
      emb = std::move(next);
    }
    const MetricGraph& g = emb.skeleton.finite();
    std::vector<EdgeEnd> ends;
    for (const auto& inc : g.incident(v)) ends.push_back({inc.edge, inc.at_a});
    std::sort(ends.begin(), ends.end(), [&](const EdgeEnd& x, const EdgeEnd& y) {
      auto dx = detail::end_direction(emb, x), dy = detail::end_direction(emb, y);
      if (dx != dy) return dx < dy;
      return std::tie(x.edge, x.at_a) < std::tie(y.edge, y.at_a);
    });
    const EdgeEnd e0 = ends.front();

    std::vector<SourceInterval> supports;
    for (std::size_t k = 1; k < ends.size(); ++k) {
      Rational r = std::min(g.edge(e0.edge).length, g.edge(ends[k].edge).length) / 8;
      supports.push_back(tent_support(g, e0, r));
      supports.push_back(tent_support(g, ends[k], r));
    }
    std::vector<PillarTarget> targets(ends.size() - 1, PillarTarget{{}, supports});
    auto cfgs = select_pillars(emb, targets, st);
    std::vector<CoordinateSpec> specs;
    std::vector<std::size_t> pillar_first, pillar_count;
    std::size_t offset = 0;
    std::vector<std::string> pillars;
    for (std::size_t k = 1; k < ends.size(); ++k) {
      auto ef = vertex_function(emb, v, e0, ends[k], cfgs[k - 1]);
      pillar_first.push_back(offset + ef.rays.size() - ef.pillar_rays);
      pillar_count.push_back(ef.pillar_rays);
      offset += ef.rays.size();
      for (auto& s : detail::describe_pillars(g, cfgs[k - 1])) pillars.push_back(std::move(s));
      specs.push_back({ef.f, ef.rays});
    }
    std::size_t first = emb.coords.size();
    std::string target = g.vertex_id(v);
    std::vector<std::size_t> attached;
    emb = extend_embedding(std::move(emb), specs, {"vertex", {{"target", target}}}, &attached);
    for (std::size_t k = 0; k < pillar_first.size(); ++k)
      detail::remember_pillars(st, attached, pillar_first[k], pillar_count[k]);

    arr = detail::arrange(emb, false);
    curve = &arr.curve;
    if (!check_balancing(*curve).balanced) fail(ErrorCode::CertificateFailure, "tropicalization is not balanced");
    report = check_smooth(*curve);
    std::size_t now = report.singular_vertices.size();
    if (now >= singular)
      fail(ErrorCode::MonotonicityViolation,
           "singular vertices went from " + std::to_string(singular) + " to " + std::to_string(now));
    singular = now;
    rep.singular_counts.push_back(singular);
    rep.steps.push_back({"vertex", target, first, specs.size(), std::move(pillars), "lift-assumed", singular});
  }
  if (!arr.faithful.ok) fail(ErrorCode::CertificateFailure, "smoothing lost full faithfulness");
  rep.certificates.push_back("smooth");
  return {std::move(emb), std::move(rep)};
}

/// The symmetric honeycomb embedding of a Tate curve: circle of three arcs of length c through
/// q1, q2, q3 with midpoints p6, p4, p5, spokes q_i p_i of length c/2, coordinates with divisors
/// -p1 + p3 - p6 + p4 and -p2 + p3 - p6 + p5 on the finite part and nine rays.
inline std::pair<Embedding, TropicalCurve> tate_demo(const Rational& c = 1) {
  if (c <= 0) fail(ErrorCode::InvalidArgument, "arc length must be positive");
  Rational h = c / 2;
  auto g = MetricGraph::build({"q1", "q2", "q3", "p1", "p2", "p3", "p4", "p5", "p6"},
                              {{"a1", "q1", "p6", h}, {"a2", "p6", "q2", h}, {"a3", "q2", "p4", h},
                               {"a4", "p4", "q3", h}, {"a5", "q3", "p5", h}, {"a6", "p5", "q1", h},
                               {"s1", "q1", "p1", h}, {"s2", "q2", "p2", h}, {"s3", "q3", "p3", h}});
  auto at = [&](const char* id) { return Point::vertex(*g.find_vertex(id)); };
  Divisor d1{{at("p1"), -1}, {at("p3"), 1}, {at("p6"), -1}, {at("p4"), 1}};
  Divisor d2{{at("p2"), -1}, {at("p3"), 1}, {at("p6"), -1}, {at("p5"), 1}};
  PLFunction f1 = construct_pl_with_divisor(g, d1);
  PLFunction f2 = construct_pl_with_divisor(g, d2);
  struct R {
    const char* id;
    const char* at;
    int s1, s2;
  };
  const R rays[] = {{"x11", "p1", 1, 1},  {"x12", "p1", 0, -1}, {"x21", "p2", -1, 0},
                    {"x22", "p2", 1, 1},  {"x31", "p3", -1, 0}, {"x32", "p3", 0, -1},
                    {"x4", "p4", -1, 0},  {"x5", "p5", 0, -1},  {"x6", "p6", 1, 1}};
  std::vector<Ray> rs;
  for (const auto& r : rays) {
    std::size_t v = *g.find_vertex(r.at);
    rs.push_back({r.id, v});
    f1 = f1.with_extra_ray(v, r.s1);
    f2 = f2.with_extra_ray(v, r.s2);
  }
  Embedding emb{ExtendedGraph(g, rs), {f1, f2}, {{"tate", {{"c", format_rational(c)}}}}, false};
  validate_embedding(emb);
  auto [curve, map] = tropicalize(emb);
  return {std::move(emb), std::move(curve)};
}

}  // namespace tropicurve
