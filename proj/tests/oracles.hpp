#pragma once

// Independent reference computations for tests and the acceptance binary.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "tropicurve/graph.hpp"
#include "tropicurve/pl_function.hpp"
#include "tropicurve/tropical.hpp"
#include "tropicurve/tropicalize.hpp"

namespace oracle {

using namespace tropicurve;

// Plain Gauss-Jordan over Q; returns nullopt when singular.
inline std::optional<std::vector<Rational>> gauss(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      Rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

// The graph cut at every support point: nodes are vertices plus one node per distinct interior
// point; each original edge becomes a chain of pieces.
struct Chains {
  std::size_t nodes = 0;
  struct Piece {
    std::size_t u, w;
    Rational length;
  };
  std::vector<Piece> pieces;
  std::vector<std::size_t> first_piece;  // per original edge, the piece starting at endpoint a
  std::map<Point, std::size_t> node_of;
};

inline Chains chains(const MetricGraph& g, const std::vector<Point>& points) {
  Chains c;
  c.nodes = g.vertex_count();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) c.node_of[Point::vertex(v)] = v;
  std::map<std::size_t, std::set<Rational>> cuts;
  for (const auto& p : points)
    if (p.is_interior()) cuts[p.index].insert(p.offset);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    std::size_t prev = ed.a;
    Rational at = 0;
    c.first_piece.push_back(c.pieces.size());
    for (const auto& t : cuts[e]) {
      std::size_t n = c.nodes++;
      c.node_of[Point::interior(e, t)] = n;
      c.pieces.push_back({prev, n, t - at});
      prev = n;
      at = t;
    }
    c.pieces.push_back({prev, ed.b, ed.length - at});
  }
  return c;
}

// Potentials solving sum_w (F(w) - F(v)) / l = D(v) with F(node 0) = 0, and the slope of every piece.
struct Potential {
  Chains c;
  std::vector<Rational> value;
  std::vector<Rational> slope;
};

inline Potential potential(const MetricGraph& g, const Divisor& d) {
  Potential out;
  out.c = chains(g, d.support());
  const std::size_t n = out.c.nodes;
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n, 0));
  std::vector<Rational> b(n, 0);
  for (const auto& p : out.c.pieces) {
    if (p.u == p.w) continue;
    Rational k = 1 / p.length;
    a[p.u][p.u] -= k, a[p.u][p.w] += k;
    a[p.w][p.w] -= k, a[p.w][p.u] += k;
  }
  for (const auto& [pt, coef] : d.terms()) b[out.c.node_of.at(pt)] = coef;
  // Replace the redundant first equation by F(0) = 0.
  std::fill(a[0].begin(), a[0].end(), Rational(0));
  a[0][0] = 1;
  b[0] = 0;
  out.value = *gauss(a, b);
  for (const auto& p : out.c.pieces) out.slope.push_back((out.value[p.w] - out.value[p.u]) / p.length);
  return out;
}

inline bool principal(const MetricGraph& g, const Divisor& d) {
  auto p = potential(g, d);
  return std::all_of(p.slope.begin(), p.slope.end(), [](const Rational& s) { return is_integer(s); });
}

// Slope leaving endpoint a of every original edge; jumps inside an edge are integers, so two
// degree-0 divisors differ by a principal one iff these vectors differ by an integer vector.
inline std::vector<Rational> reference_slopes(const MetricGraph& g, const Divisor& d) {
  auto p = potential(g, d);
  std::vector<Rational> out;
  for (std::size_t e = 0; e < g.edge_count(); ++e) out.push_back(p.slope[p.c.first_piece[e]]);
  return out;
}

inline std::vector<Rational> fractional(std::vector<Rational> v) {
  for (auto& x : v) x -= Rational(floor_div(x));
  return v;
}

// Every point whose offset has denominator at most `maxden`, vertices once.
inline std::vector<Point> lattice_points(const MetricGraph& g, int maxden) {
  std::set<Point> pts;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) pts.insert(Point::vertex(v));
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    for (int q = 1; q <= maxden; ++q)
      for (Integer p = 1; Rational(p, q) < g.edge(e).length; ++p) pts.insert(Point::interior(e, Rational(p, q)));
  return {pts.begin(), pts.end()};
}

// Saturation by enumeration: every integer vector of [-box, box]^n in the Q-span of the rows must
// be an integer combination with coefficients in [-coef, coef].
inline bool saturated_bruteforce(const IntMatrix& rows, int box, int coef) {
  const std::size_t n = rows.empty() ? 0 : rows[0].size();
  if (n == 0) return true;
  // Rational row echelon to test membership in the Q-span.
  auto in_qspan = [&](const std::vector<Rational>& x) {
    std::vector<std::vector<Rational>> m;
    for (const auto& r : rows) {
      std::vector<Rational> rr;
      for (const auto& v : r) rr.emplace_back(v);
      m.push_back(rr);
    }
    auto rank = [](std::vector<std::vector<Rational>> a) {
      std::size_t r = 0;
      const std::size_t cols = a.empty() ? 0 : a[0].size();
      for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
        std::size_t p = r;
        while (p < a.size() && a[p][c] == 0) ++p;
        if (p == a.size()) continue;
        std::swap(a[p], a[r]);
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (i == r || a[i][c] == 0) continue;
          Rational f = a[i][c] / a[r][c];
          for (std::size_t k = c; k < cols; ++k) a[i][k] -= f * a[r][k];
        }
        ++r;
      }
      return r;
    };
    std::size_t r0 = rank(m);
    m.push_back(x);
    return rank(m) == r0;
  };
  // Z-span membership by bounded search on coefficients.
  auto in_zspan = [&](const IntVector& x) {
    const std::size_t k = rows.size();
    std::vector<int> c(k, -coef);
    while (true) {
      IntVector s(n, 0);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) s[j] += c[i] * rows[i][j];
      if (s == x) return true;
      std::size_t i = 0;
      while (i < k && c[i] == coef) c[i++] = -coef;
      if (i == k) return false;
      ++c[i];
    }
  };
  IntVector x(n, -box);
  while (true) {
    std::vector<Rational> xr(x.begin(), x.end());
    if (in_qspan(xr) && !in_zspan(x)) return false;
    std::size_t i = 0;
    while (i < n && x[i] == box) x[i++] = -box;
    if (i == n) return true;
    ++x[i];
  }
}

// Balancing recomputed from the edge list.
inline bool balanced(const TropicalCurve& c) {
  for (std::size_t v = 0; v < c.vertices().size(); ++v) {
    if (c.vertex(v).infinite()) continue;
    IntVector s(c.dim(), 0);
    for (const auto& e : c.edges()) {
      for (std::size_t i = 0; i < c.dim(); ++i) {
        if (e.a == v) s[i] += e.weight * e.direction[i];
        if (e.b == v) s[i] -= e.weight * e.direction[i];
      }
    }
    for (const auto& x : s)
      if (x != 0) return false;
  }
  return true;
}

// A random connected graph with at most `max_edges` edges and small rational lengths.
inline MetricGraph random_graph(std::mt19937& rng, std::size_t max_edges) {
  std::uniform_int_distribution<int> len(1, 8);
  std::size_t nv = 1 + rng() % std::max<std::size_t>(1, max_edges);
  std::vector<std::string> ids;
  for (std::size_t v = 0; v < nv; ++v) ids.push_back("v" + std::to_string(v));
  std::vector<EdgeSpec> edges;
  for (std::size_t v = 1; v < nv; ++v)
    edges.push_back({"e" + std::to_string(edges.size()), ids[rng() % v], ids[v], Rational(len(rng), 1 + rng() % 2)});
  while (edges.size() < max_edges && (edges.empty() || rng() % 3 != 0))
    edges.push_back({"e" + std::to_string(edges.size()), ids[rng() % nv], ids[rng() % nv], Rational(len(rng), 1 + rng() % 2)});
  return MetricGraph::build(ids, edges);
}

// A random PL function on the finite graph: tree edges get a single integer slope, other edges one
// interior breakpoint with integer slopes on both sides.
inline PLFunction random_function(std::mt19937& rng, const MetricGraph& g) {
  std::uniform_int_distribution<int> slope(-2, 2);
  std::vector<std::optional<Rational>> val(g.vertex_count());
  std::vector<std::vector<Breakpoint>> interior(g.edge_count());
  std::vector<bool> tree(g.edge_count(), false);
  for (auto e : g.bfs_tree(0)) tree[e] = true;
  val[0] = Rational(0);
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      if (!tree[e]) continue;
      const Edge& ed = g.edge(e);
      if (val[ed.a] && !val[ed.b]) val[ed.b] = *val[ed.a] + g.edge(e).length * slope(rng), grew = true;
      if (val[ed.b] && !val[ed.a]) val[ed.a] = *val[ed.b] - g.edge(e).length * slope(rng), grew = true;
    }
  }
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (tree[e]) continue;
    const Edge& ed = g.edge(e);
    Rational delta = *val[ed.b] - *val[ed.a];
    // Choose s1 > mean > s2 so that the breakpoint lands inside the edge.
    Rational mean = delta / ed.length;
    Integer s1 = floor_div(mean) + 1 + rng() % 2, s2 = ceil_div(mean) - 1 - rng() % 2;
    Rational t = (delta - Rational(s2) * ed.length) / Rational(s1 - s2);
    interior[e].push_back({t, *val[ed.a] + Rational(s1) * t});
  }
  std::vector<Rational> values;
  for (auto& v : val) values.push_back(*v);
  return PLFunction::from_data(ExtendedGraph(g), values, interior, {});
}

// A valid embedding: each random function is made harmonic by unit-slope rays at its divisor.
inline Embedding random_embedding(std::mt19937& rng, std::size_t max_edges, std::size_t coords) {
  MetricGraph g = random_graph(rng, max_edges);
  Embedding emb{ExtendedGraph(g), {}, {}, true};
  std::vector<CoordinateSpec> specs;
  for (std::size_t k = 0; k < coords; ++k) {
    PLFunction f = random_function(rng, g);
    CoordinateSpec spec{f, {}};
    Divisor d = divisor_of(emb.skeleton, f);
    for (const auto& [p, c] : d.terms())
      for (std::int64_t i = 0; i < (c < 0 ? -c : c); ++i) spec.rays.push_back({p, Integer(c > 0 ? -1 : 1), "r"});
    specs.push_back(std::move(spec));
  }
  return extend_embedding(emb, specs);
}

}  // namespace oracle
