#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tropicurve/error.hpp"
#include "tropicurve/rational.hpp"

namespace tropicurve {

struct Edge {
  std::string id;
  std::size_t a = 0;
  std::size_t b = 0;
  Rational length;

  bool is_loop() const { return a == b; }
};

/// One end of an edge as seen from a vertex. `at_a` means the edge leaves the vertex at offset 0.
struct Incidence {
  std::size_t edge;
  bool at_a;
};

struct EdgeSpec {
  std::string id;
  std::string from;
  std::string to;
  Rational length;
};

/// Canonical location on an extended graph. Points at offset 0 or at the full length of an edge
/// are always stored as vertices, so structural equality is point equality.
struct Point {
  enum class Kind { Vertex, Interior, Infinity };
  Kind kind = Kind::Vertex;
  std::size_t index = 0;  // vertex, edge or ray index depending on kind
  Rational offset{0};     // only meaningful for Interior

  static Point vertex(std::size_t v) { return {Kind::Vertex, v, 0}; }
  static Point interior(std::size_t e, Rational t) { return {Kind::Interior, e, std::move(t)}; }
  static Point infinity(std::size_t r) { return {Kind::Infinity, r, 0}; }

  bool is_vertex() const { return kind == Kind::Vertex; }
  bool is_interior() const { return kind == Kind::Interior; }
  bool is_infinity() const { return kind == Kind::Infinity; }

  friend bool operator==(const Point& x, const Point& y) {
    return x.kind == y.kind && x.index == y.index && (x.kind != Kind::Interior || x.offset == y.offset);
  }
  friend bool operator<(const Point& x, const Point& y) {
    if (x.kind != y.kind) return x.kind < y.kind;
    if (x.index != y.index) return x.index < y.index;
    if (x.kind != Kind::Interior) return false;
    return x.offset < y.offset;
  }
};

/// User-facing position: an edge index plus an offset measured from its first endpoint.
struct GraphPoint {
  std::size_t edge = 0;
  Rational offset{0};
};

class MetricGraph {
 public:
  MetricGraph() = default;

  /// Validates and builds. Loops and parallel edges are allowed; the graph must be connected.
  static MetricGraph build(const std::vector<std::string>& vertices, const std::vector<EdgeSpec>& edges) {
    MetricGraph g;
    if (vertices.empty()) fail(ErrorCode::InvalidArgument, "graph has no vertices");
    std::map<std::string, std::size_t> index;
    for (const auto& v : vertices) {
      if (!index.emplace(v, g.vertex_ids_.size()).second) fail(ErrorCode::InvalidArgument, "duplicate vertex " + v);
      g.vertex_ids_.push_back(v);
    }
    std::set<std::string> edge_names;
    for (const auto& e : edges) {
      if (!edge_names.insert(e.id).second) fail(ErrorCode::InvalidArgument, "duplicate edge " + e.id);
      auto ia = index.find(e.from), ib = index.find(e.to);
      if (ia == index.end() || ib == index.end()) fail(ErrorCode::DanglingEndpoint, "edge " + e.id);
      if (e.length <= 0) fail(ErrorCode::NonpositiveLength, "edge " + e.id + " has length " + format_rational(e.length));
      g.edges_.push_back(Edge{e.id, ia->second, ib->second, e.length});
    }
    g.rebuild_incidence();
    if (!g.connected()) fail(ErrorCode::DisconnectedGraph, "graph is not connected");
    return g;
  }

  std::size_t vertex_count() const { return vertex_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const std::string& vertex_id(std::size_t v) const { return vertex_ids_.at(v); }
  const std::vector<std::string>& vertex_ids() const { return vertex_ids_; }
  const std::vector<Incidence>& incident(std::size_t v) const { return incidence_.at(v); }
  std::size_t valence(std::size_t v) const { return incidence_.at(v).size(); }

  std::optional<std::size_t> find_vertex(const std::string& id) const {
    for (std::size_t i = 0; i < vertex_ids_.size(); ++i)
      if (vertex_ids_[i] == id) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> find_edge(const std::string& id) const {
    for (std::size_t i = 0; i < edges_.size(); ++i)
      if (edges_[i].id == id) return i;
    return std::nullopt;
  }

  /// First Betti number |E| - |V| + 1.
  std::size_t betti_number() const { return edges_.size() + 1 - vertex_ids_.size(); }

  Rational total_length() const {
    Rational s = 0;
    for (const auto& e : edges_) s += e.length;
    return s;
  }

  /// Canonical form of (edge, offset); offsets outside [0, length] are rejected.
  Point canonical(const GraphPoint& p) const {
    if (p.edge >= edges_.size()) fail(ErrorCode::InvalidArgument, "no edge with index " + std::to_string(p.edge));
    const Edge& e = edges_[p.edge];
    if (p.offset < 0 || p.offset > e.length)
      fail(ErrorCode::InvalidArgument, "offset " + format_rational(p.offset) + " outside edge " + e.id);
    if (p.offset == 0) return Point::vertex(e.a);
    if (p.offset == e.length) return Point::vertex(e.b);
    return Point::interior(p.edge, p.offset);
  }

  /// Offset of `p` along edge `e`, if `p` lies on the closed edge. Loop endpoints report 0.
  std::optional<Rational> offset_on(const Point& p, std::size_t e) const {
    const Edge& ed = edges_.at(e);
    if (p.is_interior()) {
      if (p.index == e) return p.offset;
      return std::nullopt;
    }
    if (!p.is_vertex()) return std::nullopt;
    if (p.index == ed.a) return Rational(0);
    if (p.index == ed.b) return ed.length;
    return std::nullopt;
  }

  std::string describe(const Point& p) const {
    if (p.is_vertex()) return vertex_ids_.at(p.index);
    if (p.is_interior()) return edges_.at(p.index).id + "@" + format_rational(p.offset);
    return "ray#" + std::to_string(p.index);
  }

  struct Subdivision;
  /// Splits edge e at an interior offset. Fresh ids avoid `reserved` as well as existing ids.
  Subdivision subdivide(std::size_t e, const Rational& offset, const std::set<std::string>& reserved = {}) const;

  struct Pendant;
  /// Attaches a new leaf vertex to v by an edge of the given length.
  Pendant add_pendant(std::size_t v, const Rational& length, const std::string& hint,
                      const std::set<std::string>& reserved = {}) const;

  /// Edge indices of a BFS spanning tree rooted at `root`, in discovery order.
  std::vector<std::size_t> bfs_tree(std::size_t root = 0) const {
    std::vector<bool> seen(vertex_count(), false);
    std::vector<std::size_t> tree;
    std::queue<std::size_t> q;
    seen[root] = true;
    q.push(root);
    while (!q.empty()) {
      std::size_t v = q.front();
      q.pop();
      for (const auto& inc : incident(v)) {
        const Edge& ed = edges_[inc.edge];
        std::size_t w = inc.at_a ? ed.b : ed.a;
        if (seen[w]) continue;
        seen[w] = true;
        tree.push_back(inc.edge);
        q.push(w);
      }
    }
    return tree;
  }

  bool connected() const {
    if (vertex_ids_.empty()) return false;
    return bfs_tree(0).size() + 1 == vertex_count();
  }

  /// Shortest-path distances from a vertex to every vertex.
  std::vector<std::optional<Rational>> vertex_distances(std::size_t source) const {
    std::vector<std::optional<Rational>> dist(vertex_count());
    std::vector<bool> done(vertex_count(), false);
    dist[source] = Rational(0);
    for (;;) {
      std::optional<std::size_t> best;
      for (std::size_t v = 0; v < vertex_count(); ++v)
        if (!done[v] && dist[v] && (!best || *dist[v] < *dist[*best])) best = v;
      if (!best) break;
      done[*best] = true;
      for (const auto& inc : incident(*best)) {
        const Edge& ed = edges_[inc.edge];
        std::size_t w = inc.at_a ? ed.b : ed.a;
        Rational cand = *dist[*best] + ed.length;
        if (!dist[w] || cand < *dist[w]) dist[w] = cand;
      }
    }
    return dist;
  }

 private:
  void rebuild_incidence() {
    incidence_.assign(vertex_ids_.size(), {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      incidence_[edges_[i].a].push_back({i, true});
      incidence_[edges_[i].b].push_back({i, false});
    }
  }

  std::string fresh_vertex_id(const std::string& hint) const {
    std::set<std::string> used(vertex_ids_.begin(), vertex_ids_.end());
    for (std::size_t k = vertex_ids_.size();; ++k) {
      std::string cand = hint + "." + std::to_string(k);
      if (!used.count(cand)) return cand;
    }
  }
  std::string fresh_edge_id(const std::string& hint, const std::set<std::string>& reserved = {}) const {
    std::set<std::string> used = reserved;
    for (const auto& e : edges_) used.insert(e.id);
    for (std::size_t k = edges_.size();; ++k) {
      std::string cand = hint + "." + std::to_string(k);
      if (!used.count(cand)) return cand;
    }
  }

  std::vector<std::string> vertex_ids_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> incidence_;
};

/// Result of splitting an edge: the split edge keeps its index for the part [0, offset],
/// the remainder is appended as a new edge and the cut point becomes a new vertex.
struct MetricGraph::Subdivision {
  MetricGraph graph;
  std::size_t edge = 0;
  std::size_t new_edge = 0;
  std::size_t new_vertex = 0;
  Rational offset;

  Point translate(const Point& p) const {
    if (!p.is_interior() || p.index != edge) return p;
    if (p.offset < offset) return p;
    if (p.offset == offset) return Point::vertex(new_vertex);
    Rational rest = p.offset - offset;
    return Point::interior(new_edge, rest);
  }
};

struct MetricGraph::Pendant {
  MetricGraph graph;
  std::size_t vertex = 0;
  std::size_t edge = 0;
};

inline MetricGraph::Pendant MetricGraph::add_pendant(std::size_t v, const Rational& length, const std::string& hint,
                                                     const std::set<std::string>& reserved) const {
  if (length <= 0) fail(ErrorCode::NonpositiveLength, "pendant edge at " + vertex_ids_.at(v));
  Pendant p;
  p.graph = *this;
  p.vertex = vertex_ids_.size();
  p.edge = edges_.size();
  p.graph.vertex_ids_.push_back(fresh_vertex_id(hint));
  p.graph.edges_.push_back({fresh_edge_id(hint, reserved), v, p.vertex, length});
  p.graph.rebuild_incidence();
  return p;
}

inline MetricGraph::Subdivision MetricGraph::subdivide(std::size_t e, const Rational& offset,
                                                       const std::set<std::string>& reserved) const {
  const Edge& old = edges_.at(e);
  if (offset <= 0 || offset >= old.length)
    fail(ErrorCode::PointIsVertex, "offset " + format_rational(offset) + " is not interior to " + old.id);
  Subdivision s;
  s.graph = *this;
  s.edge = e;
  s.offset = offset;
  s.new_vertex = vertex_ids_.size();
  s.new_edge = edges_.size();
  s.graph.vertex_ids_.push_back(fresh_vertex_id(old.id));
  Edge tail{fresh_edge_id(old.id, reserved), s.new_vertex, old.b, old.length - offset};
  s.graph.edges_[e].b = s.new_vertex;
  s.graph.edges_[e].length = offset;
  s.graph.edges_.push_back(tail);
  s.graph.rebuild_incidence();
  return s;
}

/// Subdivides `graph` at every interior point in `points` and returns the refined graph together
/// with the translated points (same order).
inline std::pair<MetricGraph, std::vector<Point>> refine_at(const MetricGraph& graph, std::vector<Point> points) {
  MetricGraph g = graph;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].is_interior()) continue;
    auto sub = g.subdivide(points[i].index, points[i].offset);
    for (auto& p : points) p = sub.translate(p);
    g = std::move(sub.graph);
  }
  return {std::move(g), std::move(points)};
}

/// Graph distance between two points in the metric realization.
inline Rational distance(const MetricGraph& g, const Point& p, const Point& q) {
  if (p.is_infinity() || q.is_infinity()) fail(ErrorCode::InvalidArgument, "distance needs finite points");
  if (p == q) return 0;
  // Legs from a point to the endpoints of its edge.
  auto legs = [&](const Point& x) {
    std::vector<std::pair<std::size_t, Rational>> out;
    if (x.is_vertex()) {
      out.emplace_back(x.index, Rational(0));
    } else {
      const Edge& e = g.edge(x.index);
      out.emplace_back(e.a, x.offset);
      out.emplace_back(e.b, e.length - x.offset);
    }
    return out;
  };
  std::optional<Rational> best;
  if (p.is_interior() && q.is_interior() && p.index == q.index) best = abs(p.offset - q.offset);
  for (const auto& [u, du] : legs(p)) {
    auto dist = g.vertex_distances(u);
    for (const auto& [w, dw] : legs(q)) {
      Rational cand = du + *dist[w] + dw;
      if (!best || cand < *best) best = cand;
    }
  }
  return *best;
}

/// Distance measured inside the open edge `e`; may exceed the graph distance.
inline Rational edge_distance(const MetricGraph& g, std::size_t e, const Point& p, const Point& q) {
  if (!p.is_interior() || !q.is_interior() || p.index != e || q.index != e)
    fail(ErrorCode::PointsNotOnEdge, "points are not interior to edge " + g.edge(e).id);
  return abs(p.offset - q.offset);
}

struct TreeCertificate {
  bool ok = false;
  std::vector<std::size_t> tree_edges;  // populated when ok
  std::string reason;                   // populated when not ok
};

/// Decides whether removing `chosen` leaves a spanning tree.
inline TreeCertificate spanning_tree_complement(const MetricGraph& g, const std::vector<std::size_t>& chosen) {
  std::set<std::size_t> removed(chosen.begin(), chosen.end());
  if (removed.size() != chosen.size() || chosen.size() != g.betti_number())
    fail(ErrorCode::WrongCardinality, "expected " + std::to_string(g.betti_number()) + " distinct edges, got " +
                                          std::to_string(chosen.size()));
  for (auto e : chosen)
    if (e >= g.edge_count()) fail(ErrorCode::InvalidArgument, "unknown edge index");
  // Union-find over the remaining edges.
  std::vector<std::size_t> parent(g.vertex_count());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  TreeCertificate cert;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (removed.count(e)) continue;
    std::size_t ra = find(g.edge(e).a), rb = find(g.edge(e).b);
    if (ra == rb) {
      cert.reason = "remaining edges contain a cycle through " + g.edge(e).id;
      return cert;
    }
    parent[ra] = rb;
    cert.tree_edges.push_back(e);
  }
  if (cert.tree_edges.size() + 1 != g.vertex_count()) {
    cert.tree_edges.clear();
    cert.reason = "remaining edges do not span";
    return cert;
  }
  cert.ok = true;
  return cert;
}

/// Every set of edges whose removal leaves a spanning tree, in lexicographic order.
inline std::vector<std::vector<std::size_t>> all_tree_complements(const MetricGraph& g) {
  std::vector<std::vector<std::size_t>> out;
  std::size_t m = g.edge_count(), k = g.betti_number();
  std::vector<std::size_t> pick(k);
  // Enumerate k-subsets of {0..m-1}.
  auto rec = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
    if (depth == k) {
      if (spanning_tree_complement(g, pick).ok) out.push_back(pick);
      return;
    }
    for (std::size_t e = start; e + (k - depth) <= m; ++e) {
      pick[depth] = e;
      self(self, e + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return out;
}

/// Checks the four-point pillar pattern on edge `e`: interior, equal outer gaps, strictly monotone.
inline bool validate_pillar_points(const MetricGraph& g, std::size_t e, const std::array<Point, 4>& p) {
  for (const auto& x : p)
    if (!x.is_interior() || x.index != e)
      fail(ErrorCode::PointNotInterior, "pillar point " + g.describe(x) + " is not interior to " + g.edge(e).id);
  const Rational &a = p[0].offset, &b = p[1].offset, &c = p[2].offset, &d = p[3].offset;
  bool increasing = a < b && b < c && c < d;
  bool decreasing = a > b && b > c && c > d;
  if (!increasing && !decreasing) return false;
  return abs(a - b) == abs(c - d);
}

/// Vertices and edges of the 2-core: what survives repeatedly deleting valence-1 vertices.
/// For a tree the core is the single vertex `fallback_root`.
struct Core {
  std::vector<bool> vertex;
  std::vector<bool> edge;
};

inline Core two_core(const MetricGraph& g, std::size_t fallback_root = 0) {
  Core c;
  c.vertex.assign(g.vertex_count(), true);
  c.edge.assign(g.edge_count(), true);
  std::vector<std::size_t> deg(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) deg[v] = g.valence(v);
  std::queue<std::size_t> q;
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    if (deg[v] <= 1) q.push(v);
  std::size_t alive = g.vertex_count();
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop();
    if (!c.vertex[v] || deg[v] > 1) continue;
    c.vertex[v] = false;
    --alive;
    for (const auto& inc : g.incident(v)) {
      if (!c.edge[inc.edge]) continue;
      c.edge[inc.edge] = false;
      const Edge& ed = g.edge(inc.edge);
      std::size_t w = inc.at_a ? ed.b : ed.a;
      if (--deg[w] <= 1 && c.vertex[w]) q.push(w);
    }
  }
  if (alive == 0) c.vertex[fallback_root] = true;
  return c;
}

// ---------------------------------------------------------------------------------------------
// Extended graphs: a finite metric graph with infinite leaf rays attached at vertices.

struct Ray {
  std::string id;
  std::size_t attach = 0;  // vertex of the finite part
};

class ExtendedGraph {
 public:
  ExtendedGraph() = default;
  explicit ExtendedGraph(MetricGraph finite, std::vector<Ray> rays = {}) : finite_(std::move(finite)), rays_(std::move(rays)) {
    std::set<std::string> names;
    for (const auto& e : finite_.edges()) names.insert(e.id);
    for (const auto& r : rays_) {
      if (r.attach >= finite_.vertex_count()) fail(ErrorCode::DanglingEndpoint, "ray " + r.id);
      if (!names.insert(r.id).second) fail(ErrorCode::InvalidArgument, "duplicate edge id " + r.id);
    }
  }

  const MetricGraph& finite() const { return finite_; }
  const std::vector<Ray>& rays() const { return rays_; }
  const Ray& ray(std::size_t r) const { return rays_.at(r); }

  std::vector<std::size_t> rays_at(std::size_t v) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rays_.size(); ++r)
      if (rays_[r].attach == v) out.push_back(r);
    return out;
  }

  /// Valence counting finite edge ends and rays.
  std::size_t valence(std::size_t v) const { return finite_.valence(v) + rays_at(v).size(); }

  std::optional<std::size_t> find_ray(const std::string& id) const {
    for (std::size_t i = 0; i < rays_.size(); ++i)
      if (rays_[i].id == id) return i;
    return std::nullopt;
  }

  ExtendedGraph with_finite(MetricGraph g) const { return ExtendedGraph(std::move(g), rays_); }

  /// Appends a ray at a finite vertex with a fresh id derived from `hint`.
  ExtendedGraph with_ray(std::size_t attach, const std::string& hint) const { return with_rays({{attach, hint}}); }

  /// Appends rays in order, as repeated with_ray would.
  ExtendedGraph with_rays(const std::vector<std::pair<std::size_t, std::string>>& added) const {
    std::set<std::string> used;
    for (const auto& e : finite_.edges()) used.insert(e.id);
    for (const auto& r : rays_) used.insert(r.id);
    auto rays = rays_;
    for (const auto& [attach, hint] : added) {
      std::string id = hint;
      for (std::size_t k = rays.size(); used.count(id); ++k) id = hint + "." + std::to_string(k);
      used.insert(id);
      rays.push_back({id, attach});
    }
    return ExtendedGraph(finite_, std::move(rays));
  }

  std::set<std::string> ray_ids() const {
    std::set<std::string> out;
    for (const auto& r : rays_) out.insert(r.id);
    return out;
  }

  /// Subdivides a finite edge; ray attachments keep their vertices.
  MetricGraph::Subdivision subdivide(std::size_t e, const Rational& offset) const {
    return finite_.subdivide(e, offset, ray_ids());
  }

  struct RaySplit;
  /// Turns the first `t` units of ray r into a finite edge; the ray keeps its id and index.
  RaySplit split_ray(std::size_t r, const Rational& t) const;

  std::string describe(const Point& p) const {
    if (p.is_infinity()) return rays_.at(p.index).id + "@inf";
    return finite_.describe(p);
  }

 private:
  MetricGraph finite_;
  std::vector<Ray> rays_;
};

struct ExtendedGraph::RaySplit {
  ExtendedGraph graph;
  std::size_t vertex = 0;
  std::size_t edge = 0;
};

inline ExtendedGraph::RaySplit ExtendedGraph::split_ray(std::size_t r, const Rational& t) const {
  auto p = finite_.add_pendant(rays_.at(r).attach, t, rays_[r].id, ray_ids());
  auto rays = rays_;
  rays[r].attach = p.vertex;
  return {ExtendedGraph(std::move(p.graph), std::move(rays)), p.vertex, p.edge};
}

}  // namespace tropicurve
