#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tropicurve/error.hpp"
#include "tropicurve/linalg.hpp"
#include "tropicurve/rational.hpp"

namespace tropicurve {

/// A point of the tropical toric space. Infinite vertices also remember the primitive direction
/// of the rays reaching them and the line they lie on (`anchor` is the point of that line whose
/// first non-zero direction coordinate vanishes), so rays meet at infinity only when collinear.
struct TropVertex {
  std::string id;
  std::vector<ExtRational> coords;
  std::optional<IntVector> direction;
  RatVector anchor;

  bool infinite() const { return direction.has_value(); }
};

/// Edge from vertex a to vertex b with primitive direction pointing from a into the edge.
/// An infinite endpoint is always b and such an edge has no finite length.
struct TropEdge {
  std::string id;
  std::size_t a = 0;
  std::size_t b = 0;
  IntVector direction;
  Integer weight = 1;
  std::optional<Rational> length;
};

class TropicalCurve {
 public:
  TropicalCurve() = default;
  TropicalCurve(std::size_t dim, std::vector<TropVertex> vertices, std::vector<TropEdge> edges)
      : dim_(dim), vertices_(std::move(vertices)), edges_(std::move(edges)) {
    validate();
  }

  std::size_t dim() const { return dim_; }
  const std::vector<TropVertex>& vertices() const { return vertices_; }
  const std::vector<TropEdge>& edges() const { return edges_; }
  const TropVertex& vertex(std::size_t v) const { return vertices_.at(v); }
  const TropEdge& edge(std::size_t e) const { return edges_.at(e); }

  std::vector<std::size_t> adjacent(std::size_t v) const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (edges_[e].a == v || edges_[e].b == v) out.push_back(e);
    return out;
  }

  /// Primitive direction of e pointing away from its endpoint v.
  IntVector outgoing(std::size_t v, std::size_t e) const {
    const TropEdge& ed = edges_.at(e);
    if (ed.a == v) return ed.direction;
    IntVector w = ed.direction;
    for (auto& x : w) x = -x;
    return w;
  }

  std::size_t finite_vertex_count() const {
    return static_cast<std::size_t>(
        std::count_if(vertices_.begin(), vertices_.end(), [](const TropVertex& v) { return !v.infinite(); }));
  }

  std::size_t ray_count() const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [](const TropEdge& e) { return !e.length.has_value(); }));
  }

  /// First Betti number of the bounded part.
  std::size_t bounded_betti() const {
    std::size_t fe = edges_.size() - ray_count();
    std::size_t fv = finite_vertex_count();
    return fe + 1 - fv;
  }

 private:
  void validate() const {
    for (const auto& v : vertices_) {
      if (v.coords.size() != dim_) fail(ErrorCode::InvalidArgument, "vertex " + v.id + " has wrong dimension");
      for (const auto& c : v.coords)
        if (!v.infinite() && !c.finite()) fail(ErrorCode::InvalidArgument, "finite vertex " + v.id + " has an infinite coordinate");
    }
    for (const auto& e : edges_) {
      if (e.a >= vertices_.size() || e.b >= vertices_.size()) fail(ErrorCode::DanglingEndpoint, "edge " + e.id);
      if (e.direction.size() != dim_) fail(ErrorCode::InvalidArgument, "edge " + e.id + " has wrong dimension");
      if (content(e.direction) != 1) fail(ErrorCode::InvalidArgument, "direction of " + e.id + " is not primitive");
      if (e.weight < 1) fail(ErrorCode::InvalidArgument, "weight of " + e.id + " is not positive");
      const TropVertex& va = vertices_[e.a];
      const TropVertex& vb = vertices_[e.b];
      if (va.infinite()) fail(ErrorCode::InvalidArgument, "edge " + e.id + " starts at an infinite vertex");
      if (vb.infinite()) {
        if (e.length) fail(ErrorCode::InvalidArgument, "edge " + e.id + " to infinity has finite length");
        for (std::size_t i = 0; i < dim_; ++i) {
          const auto& x = vb.coords[i];
          bool ok = e.direction[i] > 0   ? x == ExtRational::plus_infinity()
                    : e.direction[i] < 0 ? x == ExtRational::minus_infinity()
                                         : x == va.coords[i];
          if (!ok) fail(ErrorCode::InvalidArgument, "edge " + e.id + " does not reach its infinite endpoint");
        }
      } else {
        if (!e.length || *e.length <= 0) fail(ErrorCode::InvalidArgument, "finite edge " + e.id + " needs a positive length");
        for (std::size_t i = 0; i < dim_; ++i)
          if (vb.coords[i].value() - va.coords[i].value() != *e.length * Rational(e.direction[i]))
            fail(ErrorCode::InvalidArgument, "edge " + e.id + " is inconsistent with its endpoints");
      }
    }
  }

  std::size_t dim_ = 0;
  std::vector<TropVertex> vertices_;
  std::vector<TropEdge> edges_;
};

struct BalancingEntry {
  std::size_t vertex;
  IntVector defect;
};

struct BalancingReport {
  bool balanced = true;
  std::vector<BalancingEntry> vertices;  // every finite vertex, in order
};

inline BalancingReport check_balancing(const TropicalCurve& c) {
  BalancingReport rep;
  for (std::size_t v = 0; v < c.vertices().size(); ++v) {
    if (c.vertex(v).infinite()) continue;
    IntVector sum(c.dim(), 0);
    for (auto e : c.adjacent(v)) {
      auto w = c.outgoing(v, e);
      for (std::size_t i = 0; i < c.dim(); ++i) sum[i] += c.edge(e).weight * w[i];
    }
    if (!is_zero(sum)) rep.balanced = false;
    rep.vertices.push_back({v, std::move(sum)});
  }
  return rep;
}

struct VertexSmoothness {
  bool smooth = false;
  std::size_t valence = 0;
  std::size_t rank = 0;
  std::vector<Integer> elementary_divisors;
  std::string reason;  // empty when smooth
};

/// Directions spanned by the adjacent edges of a finite vertex must form a saturated lattice of
/// rank valence - 1. An infinite vertex is smooth iff exactly one edge reaches it.
inline VertexSmoothness check_vertex_smooth(const TropicalCurve& c, std::size_t v) {
  VertexSmoothness out;
  auto adj = c.adjacent(v);
  out.valence = adj.size();
  if (c.vertex(v).infinite()) {
    out.smooth = adj.size() == 1;
    if (!out.smooth) out.reason = "infinite vertex of valence " + std::to_string(adj.size());
    return out;
  }
  IntMatrix m;
  for (auto e : adj) m.push_back(c.outgoing(v, e));
  auto snf = smith_normal_form(m);
  out.rank = snf.rank;
  out.elementary_divisors = snf.divisors;
  if (out.valence == 0 || out.rank != out.valence - 1) {
    out.reason = "rank " + std::to_string(out.rank) + " but valence " + std::to_string(out.valence);
    return out;
  }
  for (const auto& d : snf.divisors) {
    if (d != 1) {
      out.reason = "elementary divisor " + d.str();
      return out;
    }
  }
  out.smooth = true;
  return out;
}

inline bool check_edge_smooth(const TropicalCurve& c, std::size_t e) { return c.edge(e).weight == 1; }

struct SingularVertex {
  std::size_t vertex;
  std::string reason;
};

struct SmoothnessReport {
  bool smooth = true;
  std::vector<SingularVertex> singular_vertices;
  std::vector<std::size_t> heavy_edges;
};

inline SmoothnessReport check_smooth(const TropicalCurve& c) {
  SmoothnessReport rep;
  for (std::size_t v = 0; v < c.vertices().size(); ++v) {
    auto s = check_vertex_smooth(c, v);
    if (!s.smooth) rep.singular_vertices.push_back({v, s.reason});
  }
  for (std::size_t e = 0; e < c.edges().size(); ++e)
    if (!check_edge_smooth(c, e)) rep.heavy_edges.push_back(e);
  rep.smooth = rep.singular_vertices.empty() && rep.heavy_edges.empty();
  return rep;
}

/// One-dimensional weighted fan at a finite vertex; coincident rays are merged by summing weights.
inline std::vector<std::pair<IntVector, Integer>> local_cone(const TropicalCurve& c, std::size_t v) {
  if (c.vertex(v).infinite()) fail(ErrorCode::InvalidArgument, "local cone at an infinite vertex");
  std::map<IntVector, Integer> rays;
  for (auto e : c.adjacent(v)) rays[c.outgoing(v, e)] += c.edge(e).weight;
  return {rays.begin(), rays.end()};
}

}  // namespace tropicurve
