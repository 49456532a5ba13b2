#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tropicurve/error.hpp"
#include "tropicurve/graph.hpp"
#include "tropicurve/pl_function.hpp"
#include "tropicurve/rational.hpp"
#include "tropicurve/tropical.hpp"

namespace tropicurve {

struct ProvenanceEntry {
  std::string step;
  std::vector<std::pair<std::string, std::string>> params;
};

/// Extended skeleton together with an ordered tuple of coordinate functions.
struct Embedding {
  ExtendedGraph skeleton;
  std::vector<PLFunction> coords;
  std::vector<ProvenanceEntry> provenance;
  bool raw = false;
};

/// A coordinate must be harmonic on the finite part; its divisor lives at the infinite ends.
inline void check_coordinate(const ExtendedGraph& g, const PLFunction& f) {
  f.validate(g);
  Divisor d = divisor_of(g, f);
  for (const auto& [p, c] : d.terms())
    if (!p.is_infinity()) fail(ErrorCode::InvalidFunction, "coordinate is not harmonic at " + g.describe(p));
}

inline void validate_embedding(const Embedding& emb) {
  for (const auto& f : emb.coords) check_coordinate(emb.skeleton, f);
}

/// Subdivides a finite skeleton edge and transports every coordinate.
inline std::pair<Embedding, MetricGraph::Subdivision> subdivide(const Embedding& emb, std::size_t e, const Rational& t) {
  auto sub = emb.skeleton.subdivide(e, t);
  Embedding out = emb;
  out.skeleton = emb.skeleton.with_finite(sub.graph);
  for (auto& f : out.coords) f.transport(sub);
  return {std::move(out), std::move(sub)};
}

/// Moves the start of ray r out by t, creating a finite edge and a vertex.
inline std::pair<Embedding, ExtendedGraph::RaySplit> split_ray(Embedding emb, std::size_t r, const Rational& t) {
  auto split = emb.skeleton.split_ray(r, t);
  Embedding out = std::move(emb);
  out.skeleton = split.graph;
  for (auto& f : out.coords) f.split_ray(r, t, split);
  return {std::move(out), std::move(split)};
}

/// Stretching factor of a piece with slope vector s: the content of s.
inline Integer stretching_factor(const IntVector& slope) {
  if (is_zero(slope)) fail(ErrorCode::ContractedEdge, "all coordinates are constant on this piece");
  return content(slope);
}

/// Maximal linear piece of a skeleton edge or ray under the coordinate map.
struct Piece {
  bool ray = false;
  std::size_t index = 0;  // finite edge or ray index
  Rational t0;            // source offset of the start
  Rational t1;            // source offset of the end (finite pieces only)
  RatVector start;        // image of the start
  IntVector slope;
};

struct PieceImage {
  Piece piece;
  Integer stretch = 0;  // 0 when contracted
  std::vector<std::size_t> image_edges;
};

using EdgeMap = std::vector<PieceImage>;

inline std::vector<Piece> linear_pieces(const Embedding& emb) {
  const MetricGraph& g = emb.skeleton.finite();
  const std::size_t n = emb.coords.size();
  std::vector<Piece> out;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    std::set<Rational> cuts{Rational(0), g.edge(e).length};
    for (const auto& f : emb.coords)
      for (const auto& b : f.interior(e)) cuts.insert(b.offset);
    std::vector<Rational> ts(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      Piece p;
      p.index = e;
      p.t0 = ts[i];
      p.t1 = ts[i + 1];
      for (std::size_t k = 0; k < n; ++k) {
        Rational x0 = emb.coords[k].edge_value(e, ts[i]);
        Rational x1 = emb.coords[k].edge_value(e, ts[i + 1]);
        p.start.push_back(x0);
        p.slope.push_back(num((x1 - x0) / (ts[i + 1] - ts[i])));
      }
      out.push_back(std::move(p));
    }
  }
  for (std::size_t r = 0; r < emb.skeleton.rays().size(); ++r) {
    Piece p;
    p.ray = true;
    p.index = r;
    for (std::size_t k = 0; k < n; ++k) {
      p.start.push_back(emb.coords[k].vertex_value(emb.skeleton.ray(r).attach));
      p.slope.push_back(emb.coords[k].ray_slope(r));
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// Image of a skeleton point; infinite ends get +-inf where the ray slope is non-zero.
inline std::vector<ExtRational> image_point(const Embedding& emb, const Point& p) {
  std::vector<ExtRational> out;
  for (const auto& f : emb.coords) out.push_back(f.value_at(p));
  return out;
}

struct FaithfulnessReport {
  bool ok = true;
  std::vector<std::string> reasons;
};

namespace detail {

// Source point identity: (kind, index, offset) with kinds vertex, edge interior, ray interior, ray end.
using SourceKey = std::tuple<int, std::size_t, Rational>;

struct Arrangement {
  TropicalCurve curve;
  EdgeMap edge_map;
  FaithfulnessReport faithful;
};

struct LinePiece {
  std::size_t piece;
  int sigma;            // +1 when the piece runs along the canonical direction
  Rational mu0;         // parameter of the piece start
  std::optional<Rational> lo, hi;  // covered parameter range; nullopt = unbounded
};

struct Line {
  IntVector u;
  RatVector base;
  std::size_t i0 = 0;
  std::vector<LinePiece> pieces;
  std::optional<Rational> lo, hi;
  std::set<Rational> breaks;
  std::vector<double> box_lo, box_hi;  // widened outward, so the box test never rejects a meeting pair
};

inline bool in_range(const Rational& x, const std::optional<Rational>& lo, const std::optional<Rational>& hi) {
  return (!lo || *lo <= x) && (!hi || x <= *hi);
}

inline bool on_piece(const Line& l, const Rational& mu) {
  for (const auto& lp : l.pieces)
    if (in_range(mu, lp.lo, lp.hi)) return true;
  return false;
}

inline RatVector at(const Line& l, const Rational& mu) {
  RatVector p = l.base;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += mu * Rational(l.u[i]);
  return p;
}

inline void bounding_box(Line& l) {
  const std::size_t n = l.u.size();
  const double inf = std::numeric_limits<double>::infinity();
  l.box_lo.assign(n, -inf);
  l.box_hi.assign(n, inf);
  auto down = [&](const Rational& x) { return std::nextafter(x.convert_to<double>(), -inf); };
  auto up = [&](const Rational& x) { return std::nextafter(x.convert_to<double>(), inf); };
  for (std::size_t i = 0; i < n; ++i) {
    if (l.u[i] == 0) {
      l.box_lo[i] = down(l.base[i]);
      l.box_hi[i] = up(l.base[i]);
      continue;
    }
    std::optional<Rational> a, b;
    if (l.lo) a = l.base[i] + *l.lo * Rational(l.u[i]);
    if (l.hi) b = l.base[i] + *l.hi * Rational(l.u[i]);
    if (l.u[i] < 0) std::swap(a, b);
    if (a) l.box_lo[i] = down(*a);
    if (b) l.box_hi[i] = up(*b);
  }
}

inline bool boxes_meet(const Line& x, const Line& y) {
  for (std::size_t i = 0; i < x.u.size(); ++i)
    if (x.box_hi[i] < y.box_lo[i] || y.box_hi[i] < x.box_lo[i]) return false;
  return true;
}

// Parameters (mu, nu) of the crossing of two non-parallel lines, if they meet on covered parts.
inline std::optional<std::pair<Rational, Rational>> crossing(const Line& x, const Line& y) {
  const std::size_t n = x.u.size();
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < n; ++i) {
    if (x.u[i] != 0 || y.u[i] != 0) support.push_back(i);
    else if (x.base[i] != y.base[i]) return std::nullopt;
  }
  for (std::size_t a = 0; a < support.size(); ++a) {
    for (std::size_t b = a + 1; b < support.size(); ++b) {
      const std::size_t i = support[a], j = support[b];
      Integer det = x.u[j] * y.u[i] - x.u[i] * y.u[j];
      if (det == 0) continue;
      Rational di = y.base[i] - x.base[i], dj = y.base[j] - x.base[j];
      Rational mu = (Rational(y.u[i]) * dj - Rational(y.u[j]) * di) / Rational(det);
      Rational nu = (Rational(x.u[i]) * dj - Rational(x.u[j]) * di) / Rational(det);
      if (!on_piece(x, mu) || !on_piece(y, nu)) return std::nullopt;
      // lhs = x.base + mu x.u, rhs = y.base + nu y.u, without per-coordinate allocation
      Rational lhs, rhs, t;
      for (std::size_t k : support) {
        if (k == i || k == j) continue;
        mpq_set_z(t.backend().data(), x.u[k].backend().data());
        mpq_mul(lhs.backend().data(), t.backend().data(), mu.backend().data());
        mpq_add(lhs.backend().data(), lhs.backend().data(), x.base[k].backend().data());
        mpq_set_z(t.backend().data(), y.u[k].backend().data());
        mpq_mul(rhs.backend().data(), t.backend().data(), nu.backend().data());
        mpq_add(rhs.backend().data(), rhs.backend().data(), y.base[k].backend().data());
        if (!mpq_equal(lhs.backend().data(), rhs.backend().data())) return std::nullopt;
      }
      return std::make_pair(std::move(mu), std::move(nu));
    }
  }
  return std::nullopt;
}

struct RawEdge {
  std::size_t a, b;
  IntVector dir;
  Integer weight;
  std::optional<Rational> length;
  std::set<std::size_t> pieces;
  bool alive = true;
};

inline Arrangement arrange(const Embedding& emb, bool validate = true) {
  if (emb.coords.empty()) fail(ErrorCode::EmptyCoordinates, "embedding has no coordinates");
  if (validate) validate_embedding(emb);
  const MetricGraph& g = emb.skeleton.finite();
  const std::size_t n = emb.coords.size();
  auto pieces = linear_pieces(emb);

  Arrangement out;
  FaithfulnessReport& rep = out.faithful;
  std::vector<Integer> stretch(pieces.size(), 0);

  std::map<std::pair<IntVector, RatVector>, std::size_t> line_index;
  std::vector<Line> lines;
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const Piece& pc = pieces[p];
    if (is_zero(pc.slope)) {
      rep.ok = false;
      rep.reasons.push_back(std::string(pc.ray ? "ray " + emb.skeleton.ray(pc.index).id : "edge " + g.edge(pc.index).id) +
                            " is contracted");
      continue;
    }
    Integer m = content(pc.slope);
    stretch[p] = m;
    IntVector u = pc.slope;
    for (auto& x : u) x /= m;
    std::size_t i0 = 0;
    while (u[i0] == 0) ++i0;
    int sigma = u[i0] > 0 ? 1 : -1;
    if (sigma < 0)
      for (auto& x : u) x = -x;
    Rational mu0 = pc.start[i0] / Rational(u[i0]);
    RatVector base = pc.start;
    for (std::size_t i = 0; i < n; ++i) base[i] -= mu0 * Rational(u[i]);
    auto [it, fresh] = line_index.try_emplace({u, base}, lines.size());
    if (fresh) {
      Line l;
      l.u = u;
      l.base = base;
      l.i0 = i0;
      lines.push_back(std::move(l));
    }
    Line& l = lines[it->second];
    LinePiece lp{p, sigma, mu0, mu0, mu0};
    if (pc.ray) {
      if (sigma > 0) lp.hi.reset();
      else lp.lo.reset();
    } else {
      Rational mu1 = mu0 + Rational(sigma) * (pc.t1 - pc.t0) * Rational(m);
      lp.lo = std::min(mu0, mu1);
      lp.hi = std::max(mu0, mu1);
      l.breaks.insert(mu1);
    }
    l.breaks.insert(mu0);
    if (l.pieces.empty()) {
      l.lo = lp.lo;
      l.hi = lp.hi;
    } else {
      if (!lp.lo || !l.lo) l.lo.reset();
      else l.lo = std::min(*l.lo, *lp.lo);
      if (!lp.hi || !l.hi) l.hi.reset();
      else l.hi = std::max(*l.hi, *lp.hi);
    }
    l.pieces.push_back(lp);
  }
  for (auto& l : lines) bounding_box(l);

  for (std::size_t x = 0; x < lines.size(); ++x) {
    for (std::size_t y = x + 1; y < lines.size(); ++y) {
      if (lines[x].u == lines[y].u || !boxes_meet(lines[x], lines[y])) continue;
      auto c = crossing(lines[x], lines[y]);
      if (!c) continue;
      lines[x].breaks.insert(c->first);
      lines[y].breaks.insert(c->second);
    }
  }

  std::map<RatVector, std::size_t> finite_index;
  std::map<std::pair<IntVector, RatVector>, std::size_t> infinite_index;
  std::vector<TropVertex> verts;
  auto finite_vertex = [&](const RatVector& p) {
    auto [it, fresh] = finite_index.try_emplace(p, verts.size());
    if (fresh) {
      TropVertex v;
      for (const auto& x : p) v.coords.emplace_back(x);
      verts.push_back(std::move(v));
    }
    return it->second;
  };
  auto infinite_vertex = [&](const IntVector& dir, const RatVector& base) {
    auto [it, fresh] = infinite_index.try_emplace({dir, base}, verts.size());
    if (fresh) {
      TropVertex v;
      v.direction = dir;
      v.anchor = base;
      for (std::size_t i = 0; i < dir.size(); ++i)
        v.coords.push_back(dir[i] > 0   ? ExtRational::plus_infinity()
                           : dir[i] < 0 ? ExtRational::minus_infinity()
                                        : ExtRational(base[i]));
      verts.push_back(std::move(v));
    }
    return it->second;
  };

  std::map<std::size_t, std::set<SourceKey>> sources;
  auto source_of = [&](const LinePiece& lp, const Rational& mu) -> SourceKey {
    const Piece& pc = pieces[lp.piece];
    Rational lambda = abs(mu - lp.mu0) / Rational(stretch[lp.piece]);
    if (pc.ray) {
      if (lambda == 0) return {0, emb.skeleton.ray(pc.index).attach, Rational(0)};
      return {2, pc.index, lambda};
    }
    Point q = g.canonical({pc.index, pc.t0 + lambda});
    if (q.is_vertex()) return {0, q.index, Rational(0)};
    return {1, q.index, q.offset};
  };

  std::vector<RawEdge> raw;
  for (const auto& l : lines) {
    std::vector<Rational> b(l.breaks.begin(), l.breaks.end());
    std::vector<std::size_t> vid;
    for (const auto& mu : b) {
      std::size_t v = finite_vertex(at(l, mu));
      vid.push_back(v);
      for (const auto& lp : l.pieces)
        if (in_range(mu, lp.lo, lp.hi)) sources[v].insert(source_of(lp, mu));
    }
    auto add_edge = [&](std::size_t a, std::size_t bb, IntVector dir, std::optional<Rational> len,
                        const std::optional<Rational>& from, const std::optional<Rational>& to) {
      RawEdge re{a, bb, std::move(dir), Integer(0), std::move(len), {}, true};
      std::size_t count = 0;
      for (const auto& lp : l.pieces) {
        bool covers = (!lp.lo || (from && *lp.lo <= *from)) && (!lp.hi || (to && *to <= *lp.hi));
        if (!covers) continue;
        re.weight += stretch[lp.piece];
        re.pieces.insert(lp.piece);
        ++count;
      }
      if (count == 0) return;
      if (count > 1) {
        rep.ok = false;
        rep.reasons.push_back("image segment is covered " + std::to_string(count) + " times");
      }
      raw.push_back(std::move(re));
    };
    for (std::size_t i = 0; i + 1 < b.size(); ++i) add_edge(vid[i], vid[i + 1], l.u, b[i + 1] - b[i], b[i], b[i + 1]);
    IntVector neg = l.u;
    for (auto& x : neg) x = -x;
    if (!l.hi) {
      std::size_t iv = infinite_vertex(l.u, l.base);
      add_edge(vid.back(), iv, l.u, std::nullopt, b.back(), std::nullopt);
      for (const auto& lp : l.pieces)
        if (!lp.hi) sources[iv].insert({3, pieces[lp.piece].index, Rational(0)});
    }
    if (!l.lo) {
      std::size_t iv = infinite_vertex(neg, l.base);
      add_edge(vid.front(), iv, neg, std::nullopt, std::nullopt, b.front());
      for (const auto& lp : l.pieces)
        if (!lp.lo) sources[iv].insert({3, pieces[lp.piece].index, Rational(0)});
    }
  }

  if (verts.empty()) {
    RatVector p;
    for (const auto& f : emb.coords) p.push_back(f.vertex_value(0));
    finite_vertex(p);
  }

  for (const auto& [v, src] : sources) {
    if (src.size() > 1) {
      rep.ok = false;
      rep.reasons.push_back("image point has " + std::to_string(src.size()) + " preimages");
    }
  }
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    if (stretch[p] > 1) {
      rep.ok = false;
      rep.reasons.push_back("stretching factor " + stretch[p].str() + " on " +
                            (pieces[p].ray ? emb.skeleton.ray(pieces[p].index).id : g.edge(pieces[p].index).id));
    }
  }
  for (const auto& re : raw) {
    if (re.weight > 1) {
      rep.ok = false;
      rep.reasons.push_back("image edge of weight " + re.weight.str());
    }
  }

  // Remove two-valent vertices where the curve continues straight with the same weight.
  std::vector<std::vector<std::size_t>> inc(verts.size());
  for (std::size_t e = 0; e < raw.size(); ++e) {
    inc[raw[e].a].push_back(e);
    inc[raw[e].b].push_back(e);
  }
  std::vector<bool> vertex_alive(verts.size(), true);
  auto outgoing = [&](std::size_t v, const RawEdge& re) {
    IntVector d = re.dir;
    if (re.b == v)
      for (auto& x : d) x = -x;
    return d;
  };
  for (std::size_t v = 0; v < verts.size(); ++v) {
    if (verts[v].infinite() || inc[v].size() != 2) continue;
    std::size_t e1 = inc[v][0], e2 = inc[v][1];
    RawEdge &r1 = raw[e1], &r2 = raw[e2];
    if (r1.weight != r2.weight) continue;
    IntVector d1 = outgoing(v, r1), d2 = outgoing(v, r2);
    for (auto& x : d1) x = -x;
    if (d1 != d2) continue;
    std::size_t far1 = r1.a == v ? r1.b : r1.a, far2 = r2.a == v ? r2.b : r2.a;
    if (verts[far1].infinite() && verts[far2].infinite()) continue;
    if (verts[far1].infinite()) {
      std::swap(far1, far2);
      std::swap(e1, e2);
      d2 = outgoing(v, raw[e2]);
    }
    RawEdge merged{far1, far2, d2, raw[e1].weight, std::nullopt, raw[e1].pieces, true};
    merged.pieces.insert(raw[e2].pieces.begin(), raw[e2].pieces.end());
    if (raw[e1].length && raw[e2].length) merged.length = *raw[e1].length + *raw[e2].length;
    raw[e1].alive = raw[e2].alive = false;
    std::size_t ne = raw.size();
    raw.push_back(std::move(merged));
    std::replace(inc[far1].begin(), inc[far1].end(), e1, ne);
    std::replace(inc[far2].begin(), inc[far2].end(), e2, ne);
    inc[v].clear();
    vertex_alive[v] = false;
  }

  // Canonical ordering: finite vertices by coordinates, then infinite ones by direction and line.
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < verts.size(); ++v)
    if (vertex_alive[v]) order.push_back(v);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto &vx = verts[x], &vy = verts[y];
    if (vx.infinite() != vy.infinite()) return !vx.infinite();
    if (!vx.infinite()) return vx.coords < vy.coords;
    return std::tie(*vx.direction, vx.anchor) < std::tie(*vy.direction, vy.anchor);
  });
  std::vector<std::size_t> vnew(verts.size());
  std::vector<TropVertex> final_verts;
  std::size_t fcount = 0, icount = 0;
  for (auto v : order) {
    vnew[v] = final_verts.size();
    TropVertex tv = verts[v];
    tv.id = tv.infinite() ? "inf" + std::to_string(icount++) : "v" + std::to_string(fcount++);
    final_verts.push_back(std::move(tv));
  }
  std::vector<std::size_t> alive_edges;
  for (std::size_t e = 0; e < raw.size(); ++e)
    if (raw[e].alive) alive_edges.push_back(e);
  std::sort(alive_edges.begin(), alive_edges.end(), [&](std::size_t x, std::size_t y) {
    return std::tie(vnew[raw[x].a], vnew[raw[x].b], raw[x].dir) < std::tie(vnew[raw[y].a], vnew[raw[y].b], raw[y].dir);
  });
  std::vector<std::size_t> enew(raw.size());
  std::vector<TropEdge> final_edges;
  for (auto e : alive_edges) {
    enew[e] = final_edges.size();
    final_edges.push_back({"t" + std::to_string(final_edges.size()), vnew[raw[e].a], vnew[raw[e].b], raw[e].dir,
                           raw[e].weight, raw[e].length});
  }
  out.curve = TropicalCurve(n, std::move(final_verts), std::move(final_edges));

  std::vector<std::set<std::size_t>> images(pieces.size());
  for (auto e : alive_edges)
    for (auto p : raw[e].pieces) images[p].insert(enew[e]);
  for (std::size_t p = 0; p < pieces.size(); ++p)
    out.edge_map.push_back({pieces[p], stretch[p], {images[p].begin(), images[p].end()}});
  return out;
}

}  // namespace detail

/// Image of the skeleton under the coordinate tuple, with weights from summed stretching factors.
inline std::pair<TropicalCurve, EdgeMap> tropicalize(const Embedding& emb) {
  auto arr = detail::arrange(emb);
  auto bal = check_balancing(arr.curve);
  if (!bal.balanced) fail(ErrorCode::InvalidArgument, "tropicalization is not balanced");
  return {std::move(arr.curve), std::move(arr.edge_map)};
}

/// Stretching factor of the piece of the edge map at index `piece`.
inline Integer stretching_factor(const EdgeMap& map, std::size_t piece) { return stretching_factor(map.at(piece).piece.slope); }

/// Injective on the skeleton with all weights and stretching factors equal to one.
inline FaithfulnessReport is_fully_faithful(const Embedding& emb) {
  auto arr = detail::arrange(emb);
  std::sort(arr.faithful.reasons.begin(), arr.faithful.reasons.end());
  arr.faithful.reasons.erase(std::unique(arr.faithful.reasons.begin(), arr.faithful.reasons.end()),
                             arr.faithful.reasons.end());
  return arr.faithful;
}

/// All zeros and poles of F sit at distinct infinite ends and are simple.
inline bool is_faithful_function(const Embedding& emb, const PLFunction& f) {
  Divisor d = divisor_of(emb.skeleton, f);
  for (const auto& [p, c] : d.terms()) {
    if (!p.is_infinity()) return false;
    if (c != 1 && c != -1) return false;
  }
  return true;
}

struct NewRay {
  Point attach;  // finite point of the skeleton
  Integer slope;  // slope of the new coordinate toward infinity
  std::string hint;
};

struct CoordinateSpec {
  PLFunction f;  // on the current skeleton, including its rays
  std::vector<NewRay> rays;
};

/// Adds several coordinates defined on the same skeleton. Each new ray belongs to one coordinate,
/// which diverges along it with unit slope; every other coordinate is constant there.
inline Embedding extend_embedding(Embedding emb, const std::vector<CoordinateSpec>& specs,
                                  ProvenanceEntry step = {}, std::vector<std::size_t>* attached = nullptr) {
  Embedding out = std::move(emb);
  const std::size_t first = out.coords.size();
  std::vector<Point> attach;
  std::vector<std::pair<std::size_t, std::size_t>> owner;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    specs[s].f.validate(out.skeleton);
    out.coords.push_back(specs[s].f);
    for (std::size_t r = 0; r < specs[s].rays.size(); ++r) {
      const NewRay& nr = specs[s].rays[r];
      if (nr.attach.is_infinity()) fail(ErrorCode::InvalidArgument, "new rays attach at finite points");
      if (nr.slope != 1 && nr.slope != -1) fail(ErrorCode::NonSimplePoint, "new ray slope " + nr.slope.str());
      attach.push_back(nr.attach);
      owner.push_back({s, r});
    }
  }
  std::optional<MetricGraph> cur;
  const auto reserved = out.skeleton.ray_ids();
  for (std::size_t i = 0; i < attach.size(); ++i) {
    if (!attach[i].is_interior()) continue;
    if (!cur) cur = out.skeleton.finite();
    auto sub = cur->subdivide(attach[i].index, attach[i].offset, reserved);
    for (auto& f : out.coords) f.transport(sub);
    for (auto& p : attach) p = sub.translate(p);
    cur = std::move(sub.graph);
  }
  if (cur) out.skeleton = out.skeleton.with_finite(std::move(*cur));
  std::vector<std::pair<std::size_t, std::string>> added;
  for (std::size_t i = 0; i < attach.size(); ++i) {
    const NewRay& nr = specs[owner[i].first].rays[owner[i].second];
    std::size_t v = attach[i].index;
    added.push_back({v, nr.hint.empty() ? "ray" : nr.hint});
    for (std::size_t k = 0; k < out.coords.size(); ++k)
      out.coords[k].add_ray(v, k == first + owner[i].first ? nr.slope : Integer(0));
  }
  out.skeleton = out.skeleton.with_rays(added);
  for (std::size_t k = first; k < out.coords.size(); ++k) check_coordinate(out.skeleton, out.coords[k]);
  if (!step.step.empty()) out.provenance.push_back(std::move(step));
  if (attached) {
    attached->clear();
    for (const auto& p : attach) attached->push_back(p.index);
  }
  return out;
}

/// Adds coordinate F (given on the whole current skeleton) and new rays along which F diverges
/// with the given unit slopes. Old coordinates are constant on the new rays.
inline Embedding extend_embedding(const Embedding& emb, const PLFunction& f, const std::vector<NewRay>& rays,
                                  ProvenanceEntry step = {}) {
  return extend_embedding(emb, std::vector<CoordinateSpec>{{f, rays}}, std::move(step));
}

/// Adds coordinate F given on the finite part. Every point of div(F) must be simple and away from
/// existing ray attachments; each receives a new ray along which F has the opposite sign.
inline Embedding extend_embedding(const Embedding& emb, const PLFunction& f_finite, ProvenanceEntry step = {}) {
  ExtendedGraph bare(emb.skeleton.finite());
  f_finite.validate(bare);
  std::vector<NewRay> rays;
  Divisor d = divisor_of(bare, f_finite);
  for (const auto& [p, c] : d.terms()) {
    if (c != 1 && c != -1) fail(ErrorCode::NonSimplePoint, "coefficient " + std::to_string(c) + " at " + bare.describe(p));
    if (p.is_vertex() && !emb.skeleton.rays_at(p.index).empty())
      fail(ErrorCode::DivisorCollision, "divisor point " + bare.describe(p) + " carries a ray already");
    rays.push_back({p, Integer(-c), "x"});
  }
  PLFunction f = f_finite;
  for (const auto& r : emb.skeleton.rays()) f = f.with_extra_ray(r.attach, 0);
  return extend_embedding(emb, f, rays, std::move(step));
}

}  // namespace tropicurve
