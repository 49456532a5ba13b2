#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tropicurve/error.hpp"
#include "tropicurve/graph.hpp"
#include "tropicurve/linalg.hpp"
#include "tropicurve/pl_function.hpp"
#include "tropicurve/rational.hpp"

namespace tropicurve {

/// Spanning tree rooted at `root` together with the fundamental cycles of its complement.
/// Cycle j runs forward along complement edge j and returns along the tree path.
class CycleFrame {
 public:
  CycleFrame(const MetricGraph& g, std::size_t root, std::vector<std::size_t> tree_edges) : g_(&g), root_(root) {
    std::vector<bool> in_tree(g.edge_count(), false);
    for (auto e : tree_edges) in_tree[e] = true;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      if (!in_tree[e]) complement_.push_back(e);

    parent_edge_.assign(g.vertex_count(), std::nullopt);
    depth_.assign(g.vertex_count(), 0);
    std::vector<bool> seen(g.vertex_count(), false);
    seen[root] = true;
    order_.push_back(root);
    for (std::size_t i = 0; i < order_.size(); ++i) {
      std::size_t v = order_[i];
      for (const auto& inc : g.incident(v)) {
        if (!in_tree[inc.edge]) continue;
        const Edge& ed = g.edge(inc.edge);
        std::size_t w = inc.at_a ? ed.b : ed.a;
        if (seen[w]) continue;
        seen[w] = true;
        parent_edge_[w] = inc.edge;
        depth_[w] = depth_[v] + 1;
        order_.push_back(w);
      }
    }
    if (order_.size() != g.vertex_count()) fail(ErrorCode::InvalidArgument, "edge set is not a spanning tree");

    sigma_.assign(g.edge_count(), {});
    for (std::size_t j = 0; j < complement_.size(); ++j) {
      const Edge& f = g.edge(complement_[j]);
      sigma_[complement_[j]].push_back({j, 1});
      for (auto [e, s] : tree_path(f.b, f.a)) sigma_[e].push_back({j, s});
    }
    std::size_t k = complement_.size();
    gram_.assign(k, RatVector(k, Rational(0)));
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      for (auto [i, si] : sigma_[e])
        for (auto [j, sj] : sigma_[e]) gram_[i][j] += Rational(si * sj) * g.edge(e).length;
  }

  /// Frame from the BFS tree at `root`.
  static CycleFrame bfs(const MetricGraph& g, std::size_t root = 0) { return CycleFrame(g, root, g.bfs_tree(root)); }

  const MetricGraph& graph() const { return *g_; }
  std::size_t root() const { return root_; }
  const std::vector<std::size_t>& complement() const { return complement_; }
  const std::vector<std::size_t>& order() const { return order_; }
  const std::optional<std::size_t>& parent_edge(std::size_t v) const { return parent_edge_.at(v); }
  const RatMatrix& gram() const { return gram_; }
  const std::vector<std::pair<std::size_t, int>>& cycles_through(std::size_t e) const { return sigma_.at(e); }

  /// Tree path from u to w as (edge, +1 if traversed a->b else -1).
  std::vector<std::pair<std::size_t, int>> tree_path(std::size_t u, std::size_t w) const {
    std::vector<std::pair<std::size_t, int>> up, down;
    while (u != w) {
      if (depth_[u] >= depth_[w]) {
        std::size_t e = *parent_edge_[u];
        const Edge& ed = g_->edge(e);
        up.push_back({e, ed.a == u ? 1 : -1});
        u = ed.a == u ? ed.b : ed.a;
      } else {
        std::size_t e = *parent_edge_[w];
        const Edge& ed = g_->edge(e);
        down.push_back({e, ed.b == w ? 1 : -1});
        w = ed.a == w ? ed.b : ed.a;
      }
    }
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
  }

  /// Pairing of the path root -> p with every fundamental cycle.
  RatVector period(const Point& p) const {
    RatVector out(complement_.size(), Rational(0));
    std::size_t v = p.is_vertex() ? p.index : g_->edge(p.index).a;
    for (auto [e, s] : tree_path(root_, v))
      for (auto [j, sj] : sigma_[e]) out[j] += Rational(s * sj) * g_->edge(e).length;
    if (p.is_interior())
      for (auto [j, sj] : sigma_[p.index]) out[j] += Rational(sj) * p.offset;
    return out;
  }

  RatVector period(const Divisor& d) const {
    RatVector out(complement_.size(), Rational(0));
    for (const auto& [p, c] : d.terms()) {
      auto v = period(p);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += Rational(c) * v[j];
    }
    return out;
  }

 private:
  const MetricGraph* g_;
  std::size_t root_;
  std::vector<std::size_t> complement_;
  std::vector<std::size_t> order_;
  std::vector<std::optional<std::size_t>> parent_edge_;
  std::vector<std::size_t> depth_;
  std::vector<std::vector<std::pair<std::size_t, int>>> sigma_;
  RatMatrix gram_;
};

inline std::size_t default_basepoint(const MetricGraph& g) {
  std::size_t best = 0;
  for (std::size_t v = 1; v < g.vertex_count(); ++v)
    if (g.vertex_id(v) < g.vertex_id(best)) best = v;
  return best;
}

struct PrincipalResult {
  bool principal = false;
  PLFunction witness;           // set when principal; F(basepoint) = 0
  std::string obstruction;      // set otherwise
};

namespace detail {

inline void require_finite_support(const Divisor& d) {
  for (const auto& [p, c] : d.terms())
    if (p.is_infinity()) fail(ErrorCode::InvalidArgument, "divisor on a finite graph has a point at infinity");
}

}  // namespace detail

/// Decides whether D is div(F) for some PL function F with integer slopes. The graph is refined at
/// the support of D, edge slopes are solved exactly over Q (tree flow plus cycle correction) and
/// integrality is checked. The witness lives on the original graph.
inline PrincipalResult is_principal(const MetricGraph& g, const Divisor& d, std::optional<std::size_t> basepoint = {}) {
  detail::require_finite_support(d);
  if (d.degree() != 0) fail(ErrorCode::NonzeroDegree, "degree " + std::to_string(d.degree()));
  std::size_t base = basepoint.value_or(default_basepoint(g));

  auto support = d.support();
  auto [h, moved] = refine_at(g, support);
  std::vector<Integer> coeff(h.vertex_count(), 0);
  for (std::size_t i = 0; i < support.size(); ++i) coeff[moved[i].index] += d[support[i]];

  CycleFrame frame = CycleFrame::bfs(h, base);
  RatVector slope(h.edge_count(), Rational(0));
  const auto& order = frame.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::size_t v = *it;
    auto pe = frame.parent_edge(v);
    if (!pe) continue;
    Rational rest = Rational(coeff[v]);
    for (const auto& inc : h.incident(v)) {
      if (inc.edge == *pe) continue;
      if (h.edge(inc.edge).is_loop()) continue;
      rest -= inc.at_a ? slope[inc.edge] : Rational(-slope[inc.edge]);
    }
    slope[*pe] = h.edge(*pe).a == v ? rest : Rational(-rest);
  }

  const auto& comp = frame.complement();
  if (!comp.empty()) {
    RatVector w(comp.size(), Rational(0));
    for (std::size_t e = 0; e < h.edge_count(); ++e)
      for (auto [j, s] : frame.cycles_through(e)) w[j] -= Rational(s) * h.edge(e).length * slope[e];
    auto k = solve(frame.gram(), w);
    if (!k) fail(ErrorCode::InvalidArgument, "singular cycle Gram matrix");
    for (std::size_t e = 0; e < h.edge_count(); ++e)
      for (auto [j, s] : frame.cycles_through(e)) slope[e] += Rational(s) * (*k)[j];
  }

  PrincipalResult out;
  for (std::size_t e = 0; e < h.edge_count(); ++e) {
    if (!is_integer(slope[e])) {
      out.obstruction = "slope " + format_rational(slope[e]) + " on " + h.edge(e).id + " is not an integer";
      return out;
    }
  }

  std::vector<Rational> value(h.vertex_count(), Rational(0));
  for (std::size_t v : order) {
    auto pe = frame.parent_edge(v);
    if (!pe) continue;
    const Edge& ed = h.edge(*pe);
    if (ed.b == v) value[v] = value[ed.a] + slope[*pe] * ed.length;
    else value[v] = value[ed.b] - slope[*pe] * ed.length;
  }

  std::vector<Rational> vertex_values(value.begin(), value.begin() + static_cast<std::ptrdiff_t>(g.vertex_count()));
  std::vector<std::vector<Breakpoint>> interior(g.edge_count());
  for (std::size_t i = 0; i < support.size(); ++i)
    if (support[i].is_interior()) interior[support[i].index].push_back({support[i].offset, value[moved[i].index]});
  for (auto& row : interior)
    std::sort(row.begin(), row.end(), [](const Breakpoint& x, const Breakpoint& y) { return x.offset < y.offset; });
  out.principal = true;
  out.witness = PLFunction::from_data(ExtendedGraph(g), std::move(vertex_values), std::move(interior), {});
  return out;
}

/// The unique PL function with divisor D taking `value` at `basepoint`.
inline PLFunction construct_pl_with_divisor(const MetricGraph& g, const Divisor& d, const Point& basepoint,
                                            const Rational& value = 0) {
  auto res = is_principal(g, d);
  if (!res.principal) fail(ErrorCode::NotPrincipal, res.obstruction);
  return res.witness.plus_constant(value - res.witness.finite_value(basepoint));
}

inline PLFunction construct_pl_with_divisor(const MetricGraph& g, const Divisor& d) {
  return construct_pl_with_divisor(g, d, Point::vertex(default_basepoint(g)));
}

/// Principality through the Abel-Jacobi map: D is principal iff Q^-1 P(D) is integral.
inline bool abel_jacobi_principal(const MetricGraph& g, const Divisor& d) {
  detail::require_finite_support(d);
  if (d.degree() != 0) fail(ErrorCode::NonzeroDegree, "degree " + std::to_string(d.degree()));
  CycleFrame frame = CycleFrame::bfs(g, 0);
  if (frame.complement().empty()) return true;
  auto k = solve(frame.gram(), frame.period(d));
  for (const auto& x : *k)
    if (!is_integer(x)) return false;
  return true;
}

struct BreakCertificate {
  bool ok = false;
  std::vector<std::size_t> edges;  // complement edges, one per point (with multiplicity)
};

/// B is a break divisor iff it is effective of degree g and its points can be matched to the edges
/// of some spanning tree complement, each point lying on its (closed) edge.
inline BreakCertificate is_break_divisor(const MetricGraph& g, const Divisor& b) {
  BreakCertificate cert;
  detail::require_finite_support(b);
  if (!b.effective() || b.degree() != static_cast<std::int64_t>(g.betti_number())) return cert;
  std::vector<Point> slots;
  for (const auto& [p, c] : b.terms())
    for (std::int64_t i = 0; i < c; ++i) slots.push_back(p);
  auto on_edge = [&](const Point& p, std::size_t e) {
    if (p.is_interior()) return p.index == e;
    return g.edge(e).a == p.index || g.edge(e).b == p.index;
  };
  for (const auto& comp : all_tree_complements(g)) {
    std::vector<std::optional<std::size_t>> owner(comp.size());
    std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t s, std::vector<bool>& used) {
      for (std::size_t j = 0; j < comp.size(); ++j) {
        if (used[j] || !on_edge(slots[s], comp[j])) continue;
        used[j] = true;
        if (!owner[j] || augment(*owner[j], used)) {
          owner[j] = s;
          return true;
        }
      }
      return false;
    };
    bool all = true;
    for (std::size_t s = 0; s < slots.size() && all; ++s) {
      std::vector<bool> used(comp.size(), false);
      all = augment(s, used);
    }
    if (all) {
      cert.ok = true;
      cert.edges = comp;
      return cert;
    }
  }
  return cert;
}

struct BreakDecomposition {
  Divisor b;
  PLFunction f;  // div(f) = D - B
};

/// Mikhalkin-Zharkov decomposition of a degree-g divisor. For each spanning tree complement the
/// break divisors supported on it form a parallelotope in the Abel-Jacobi coordinates; the lattice
/// translates meeting it are enumerated exactly.
inline BreakDecomposition break_divisor_decompose(const MetricGraph& g, const Divisor& d) {
  detail::require_finite_support(d);
  const std::size_t genus = g.betti_number();
  if (d.degree() != static_cast<std::int64_t>(genus))
    fail(ErrorCode::WrongDegree, "degree " + std::to_string(d.degree()) + " but genus " + std::to_string(genus));
  if (genus == 0) return {Divisor{}, construct_pl_with_divisor(g, d)};

  for (const auto& comp : all_tree_complements(g)) {
    auto cert = spanning_tree_complement(g, comp);
    CycleFrame frame(g, 0, cert.tree_edges);
    const auto& ce = frame.complement();
    RatVector c = frame.period(d);
    for (auto e : ce) {
      auto pa = frame.period(Point::vertex(g.edge(e).a));
      for (std::size_t j = 0; j < genus; ++j) c[j] -= pa[j];
    }
    // t = c - Q k with 0 <= t_i <= len_i, so Q k ranges over the box [c - len, c].
    RatMatrix qinv = *inverse(frame.gram());
    std::vector<Integer> lo(genus), hi(genus);
    for (std::size_t i = 0; i < genus; ++i) {
      Rational mn = 0, mx = 0;
      for (std::size_t j = 0; j < genus; ++j) {
        Rational x = qinv[i][j] * (c[j] - g.edge(ce[j]).length), y = qinv[i][j] * c[j];
        mn += std::min(x, y);
        mx += std::max(x, y);
      }
      lo[i] = ceil_div(mn);
      hi[i] = floor_div(mx);
    }
    std::vector<Integer> k = lo;
    bool empty = false;
    for (std::size_t i = 0; i < genus; ++i) empty = empty || lo[i] > hi[i];
    while (!empty) {
      RatVector t = c;
      for (std::size_t i = 0; i < genus; ++i)
        for (std::size_t j = 0; j < genus; ++j) t[i] -= frame.gram()[i][j] * Rational(k[j]);
      bool inside = true;
      for (std::size_t i = 0; i < genus && inside; ++i) inside = t[i] >= 0 && t[i] <= g.edge(ce[i]).length;
      if (inside) {
        Divisor b;
        for (std::size_t i = 0; i < genus; ++i) b.add(g.canonical({ce[i], t[i]}), 1);
        return {b, construct_pl_with_divisor(g, d - b)};
      }
      std::size_t i = 0;
      while (i < genus && k[i] == hi[i]) k[i] = lo[i], ++i;
      if (i == genus) break;
      ++k[i];
    }
  }
  fail(ErrorCode::InvalidArgument, "no break divisor found");
}

/// Graph-side certificate for fixing pillar points: returns the witness of
/// D + sum(p_i1 + p_i4) - sum(p_i2 + p_i3).
inline PLFunction cor34_certificate(const MetricGraph& g, const Divisor& d, const std::vector<std::size_t>& edges,
                                    const std::vector<std::array<Point, 4>>& pillars) {
  auto cert = spanning_tree_complement(g, edges);
  if (!cert.ok) fail(ErrorCode::NotComplement, cert.reason);
  if (pillars.size() != edges.size()) fail(ErrorCode::InvalidPillars, "one pillar tuple per edge required");
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (!validate_pillar_points(g, edges[i], pillars[i]))
      fail(ErrorCode::InvalidPillars, "pillar tuple on " + g.edge(edges[i]).id);
  if (d.degree() != 0) fail(ErrorCode::NonzeroDegree, "degree " + std::to_string(d.degree()));
  Divisor total = d;
  for (const auto& p : pillars) {
    total.add(p[0], 1);
    total.add(p[1], -1);
    total.add(p[2], -1);
    total.add(p[3], 1);
  }
  return construct_pl_with_divisor(g, total);
}

}  // namespace tropicurve
