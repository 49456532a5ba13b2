#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tropicurve/error.hpp"
#include "tropicurve/graph.hpp"
#include "tropicurve/pipeline.hpp"
#include "tropicurve/pl_function.hpp"
#include "tropicurve/rational.hpp"
#include "tropicurve/tropical.hpp"
#include "tropicurve/tropicalize.hpp"

namespace tropicurve::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "tropicurve/1";

/// Parses JSON text; errors carry line and column.
inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file and a rename.
inline void write_file(const std::string& path, const std::string& text) {
  std::filesystem::path tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::ParseError, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline std::string text(const Json& j, const char* what) {
  if (!j.is_string()) fail(ErrorCode::ParseError, std::string(what) + " must be a string");
  return j.get<std::string>();
}

inline Rational rational(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  fail(ErrorCode::ParseError, "expected a rational, got " + j.dump());
}

inline ExtRational ext(const Json& j) {
  if (j.is_string()) return parse_ext(j.get<std::string>());
  return ExtRational(rational(j));
}

inline Integer integer(const Json& j) {
  if (j.is_number_integer()) return Integer(j.get<std::int64_t>());
  if (j.is_string()) {
    Rational q = parse_rational(j.get<std::string>());
    if (!is_integer(q)) fail(ErrorCode::ParseError, "expected an integer, got " + j.dump());
    return num(q);
  }
  fail(ErrorCode::ParseError, "expected an integer, got " + j.dump());
}

inline Json integer_json(const Integer& x) {
  if (x >= std::numeric_limits<std::int64_t>::min() && x <= std::numeric_limits<std::int64_t>::max())
    return Json(x.convert_to<std::int64_t>());
  return Json(x.str());
}

inline Json int_vector(const IntVector& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(integer_json(x));
  return a;
}

inline IntVector int_vector(const Json& j) {
  if (!j.is_array()) fail(ErrorCode::ParseError, "expected an integer array");
  IntVector v;
  for (const auto& x : j) v.push_back(integer(x));
  return v;
}

inline void check_schema(const Json& j) {
  if (j.is_object() && j.contains("schema") && j.at("schema") != kSchema)
    fail(ErrorCode::ParseError, "unsupported schema " + j.at("schema").dump());
}

// A ray attached at an interior point waits for the subdivision that creates its vertex.
struct PendingRay {
  std::string id;
  std::size_t edge;
  Rational offset;
};

struct SkeletonParse {
  ExtendedGraph graph;
  std::vector<PendingRay> pending;
  std::set<std::string> ids;
};

inline SkeletonParse parse_skeleton(const Json& j) {
  check_schema(j);
  std::vector<std::string> vertices;
  for (const auto& v : field(j, "vertices")) vertices.push_back(text(v, "vertex id"));
  std::vector<EdgeSpec> edges;
  if (j.contains("edges"))
    for (const auto& e : j.at("edges"))
      edges.push_back({text(field(e, "id"), "edge id"), text(field(e, "from"), "edge endpoint"),
                       text(field(e, "to"), "edge endpoint"), rational(field(e, "length"))});
  MetricGraph g = MetricGraph::build(vertices, edges);
  SkeletonParse out;
  for (const auto& v : vertices) out.ids.insert(v);
  for (const auto& e : edges) out.ids.insert(e.id);
  std::vector<Ray> rays;
  const char* key = j.contains("infinite_edges") ? "infinite_edges" : "rays";
  if (j.contains(key)) {
    for (const auto& r : j.at(key)) {
      std::string id = text(field(r, "id"), "ray id");
      if (!out.ids.insert(id).second) fail(ErrorCode::ParseError, "duplicate id " + id);
      const Json& at = field(r, "attach");
      if (at.is_object() && at.contains("vertex")) {
        auto v = g.find_vertex(text(at.at("vertex"), "vertex id"));
        if (!v) fail(ErrorCode::DanglingEndpoint, "ray " + id + " at unknown vertex " + at.dump());
        rays.push_back({id, *v});
        continue;
      }
      auto e = g.find_edge(text(field(at, "edge"), "edge id"));
      if (!e) fail(ErrorCode::DanglingEndpoint, "ray " + id + " on unknown edge " + at.dump());
      Point p = g.canonical({*e, rational(field(at, "offset"))});
      if (p.is_vertex()) rays.push_back({id, p.index});
      else out.pending.push_back({id, p.index, p.offset});
    }
  }
  out.graph = ExtendedGraph(std::move(g), std::move(rays));
  return out;
}

struct FunctionData {
  std::vector<Rational> values;
  std::vector<std::vector<Breakpoint>> interior;
  std::map<std::string, Integer> slopes;
};

inline FunctionData parse_function_data(const MetricGraph& g, const Json& j) {
  FunctionData d;
  d.values.assign(g.vertex_count(), 0);
  d.interior.assign(g.edge_count(), {});
  std::vector<bool> seen(g.vertex_count(), false);
  for (const auto& [id, val] : field(j, "values").items()) {
    auto v = g.find_vertex(id);
    if (!v) fail(ErrorCode::ParseError, "value at unknown vertex " + id);
    d.values[*v] = rational(val);
    seen[*v] = true;
  }
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    if (!seen[v]) fail(ErrorCode::ParseError, "no value at vertex " + g.vertex_id(v));
  if (j.contains("breakpoints"))
    for (const auto& [id, list] : j.at("breakpoints").items()) {
      auto e = g.find_edge(id);
      if (!e) fail(ErrorCode::ParseError, "breakpoints on unknown edge " + id);
      for (const auto& b : list) {
        if (!b.is_array() || b.size() != 2) fail(ErrorCode::ParseError, "breakpoint must be [offset, value]");
        d.interior[*e].push_back({rational(b[0]), rational(b[1])});
      }
    }
  if (j.contains("infinite_edges"))
    for (const auto& [id, r] : j.at("infinite_edges").items()) d.slopes[id] = integer(field(r, "eventual_slope"));
  return d;
}

}  // namespace detail

inline Json graph_to_json(const ExtendedGraph& g) {
  const MetricGraph& f = g.finite();
  Json j;
  j["schema"] = kSchema;
  j["vertices"] = Json::array();
  for (std::size_t v = 0; v < f.vertex_count(); ++v) j["vertices"].push_back(f.vertex_id(v));
  j["edges"] = Json::array();
  for (const auto& e : f.edges())
    j["edges"].push_back({{"id", e.id}, {"from", f.vertex_id(e.a)}, {"to", f.vertex_id(e.b)},
                          {"length", format_rational(e.length)}});
  j["infinite_edges"] = Json::array();
  for (const auto& r : g.rays())
    j["infinite_edges"].push_back({{"id", r.id}, {"attach", {{"vertex", f.vertex_id(r.attach)}}}});
  return j;
}

/// Reads a skeleton; rays attached inside an edge subdivide it.
inline ExtendedGraph graph_from_json(const Json& j) {
  auto sp = detail::parse_skeleton(j);
  ExtendedGraph g = sp.graph;
  auto pending = sp.pending;
  std::sort(pending.begin(), pending.end(), [](const auto& x, const auto& y) {
    return x.edge != y.edge ? x.edge < y.edge : x.offset > y.offset;
  });
  std::optional<std::pair<std::size_t, Rational>> last;
  std::size_t vertex = 0;
  for (const auto& p : pending) {
    if (!last || last->first != p.edge || last->second != p.offset) {
      auto sub = g.finite().subdivide(p.edge, p.offset, sp.ids);
      vertex = sub.new_vertex;
      g = g.with_finite(std::move(sub.graph));
      last = {p.edge, p.offset};
    }
    auto rays = g.rays();
    rays.push_back({p.id, vertex});
    g = ExtendedGraph(g.finite(), std::move(rays));
  }
  return g;
}

inline Json point_to_json(const ExtendedGraph& g, const Point& p) {
  if (p.is_vertex()) return {{"vertex", g.finite().vertex_id(p.index)}};
  if (p.is_infinity()) return {{"ray", g.ray(p.index).id}};
  return {{"edge", g.finite().edge(p.index).id}, {"offset", format_rational(p.offset)}};
}

inline Point point_from_json(const ExtendedGraph& g, const Json& j) {
  if (j.contains("vertex")) {
    auto v = g.finite().find_vertex(detail::text(j.at("vertex"), "vertex id"));
    if (!v) fail(ErrorCode::ParseError, "unknown vertex " + j.dump());
    return Point::vertex(*v);
  }
  if (j.contains("ray")) {
    auto r = g.find_ray(detail::text(j.at("ray"), "ray id"));
    if (!r) fail(ErrorCode::ParseError, "unknown ray " + j.dump());
    return Point::infinity(*r);
  }
  auto e = g.finite().find_edge(detail::text(detail::field(j, "edge"), "edge id"));
  if (!e) fail(ErrorCode::ParseError, "unknown edge " + j.dump());
  return g.finite().canonical({*e, detail::rational(detail::field(j, "offset"))});
}

inline Json divisor_to_json(const ExtendedGraph& g, const Divisor& d) {
  Json a = Json::array();
  for (const auto& [p, c] : d.terms()) a.push_back({{"point", point_to_json(g, p)}, {"coeff", c}});
  return a;
}

inline Divisor divisor_from_json(const ExtendedGraph& g, const Json& j) {
  if (!j.is_array()) fail(ErrorCode::ParseError, "divisor must be an array");
  Divisor d;
  for (const auto& t : j) d.add(point_from_json(g, detail::field(t, "point")), detail::field(t, "coeff").get<std::int64_t>());
  return d;
}

inline Json function_to_json(const ExtendedGraph& g, const PLFunction& f) {
  const MetricGraph& m = g.finite();
  Json j;
  j["values"] = Json::object();
  for (std::size_t v = 0; v < m.vertex_count(); ++v) j["values"][m.vertex_id(v)] = format_rational(f.vertex_value(v));
  j["breakpoints"] = Json::object();
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    if (f.interior(e).empty()) continue;
    Json list = Json::array();
    for (const auto& b : f.interior(e)) list.push_back({format_rational(b.offset), format_rational(b.value)});
    j["breakpoints"][m.edge(e).id] = std::move(list);
  }
  j["infinite_edges"] = Json::object();
  for (std::size_t r = 0; r < g.rays().size(); ++r)
    j["infinite_edges"][g.ray(r).id] = {{"eventual_slope", detail::integer_json(f.ray_slope(r))}};
  return j;
}

inline PLFunction function_from_json(const ExtendedGraph& g, const Json& j) {
  auto d = detail::parse_function_data(g.finite(), j);
  std::vector<Integer> slopes(g.rays().size(), 0);
  for (const auto& [id, s] : d.slopes) {
    auto r = g.find_ray(id);
    if (!r) fail(ErrorCode::ParseError, "slope on unknown ray " + id);
    slopes[*r] = s;
  }
  return PLFunction::from_data(g, std::move(d.values), std::move(d.interior), std::move(slopes));
}

inline Json embedding_to_json(const Embedding& emb) {
  Json j;
  j["schema"] = kSchema;
  j["skeleton"] = graph_to_json(emb.skeleton);
  j["skeleton"].erase("schema");
  j["coordinates"] = Json::array();
  for (const auto& f : emb.coords) j["coordinates"].push_back(function_to_json(emb.skeleton, f));
  j["raw"] = emb.raw;
  j["provenance"] = Json::array();
  for (const auto& p : emb.provenance) {
    Json params = Json::object();
    for (const auto& [k, v] : p.params) params[k] = v;
    j["provenance"].push_back({{"step", p.step}, {"params", std::move(params)}});
  }
  return j;
}

/// Reads an embedding. Coordinates refer to the skeleton as written; interior ray attachments are
/// resolved afterwards by subdividing and transporting every coordinate.
inline Embedding embedding_from_json(const Json& j) {
  detail::check_schema(j);
  auto sp = detail::parse_skeleton(detail::field(j, "skeleton"));
  std::vector<detail::FunctionData> data;
  if (j.contains("coordinates"))
    for (const auto& c : j.at("coordinates")) data.push_back(detail::parse_function_data(sp.graph.finite(), c));
  ExtendedGraph g = sp.graph;
  std::vector<PLFunction> coords;
  for (auto& d : data) {
    std::vector<Integer> slopes(g.rays().size(), 0);
    for (const auto& [id, s] : d.slopes) {
      auto r = g.find_ray(id);
      if (r) slopes[*r] = s;
      else if (std::none_of(sp.pending.begin(), sp.pending.end(), [&](const auto& p) { return p.id == id; }))
        fail(ErrorCode::ParseError, "slope on unknown ray " + id);
    }
    coords.push_back(PLFunction::from_data(g, d.values, d.interior, std::move(slopes)));
  }
  auto pending = sp.pending;
  std::sort(pending.begin(), pending.end(), [](const auto& x, const auto& y) {
    return x.edge != y.edge ? x.edge < y.edge : x.offset > y.offset;
  });
  std::optional<std::pair<std::size_t, Rational>> last;
  std::size_t vertex = 0;
  for (const auto& p : pending) {
    if (!last || last->first != p.edge || last->second != p.offset) {
      auto sub = g.finite().subdivide(p.edge, p.offset, sp.ids);
      vertex = sub.new_vertex;
      for (auto& f : coords) f.transport(sub);
      g = g.with_finite(std::move(sub.graph));
      last = {p.edge, p.offset};
    }
    auto rays = g.rays();
    rays.push_back({p.id, vertex});
    g = ExtendedGraph(g.finite(), std::move(rays));
    for (std::size_t k = 0; k < coords.size(); ++k) {
      auto it = data[k].slopes.find(p.id);
      coords[k].add_ray(vertex, it == data[k].slopes.end() ? Integer(0) : it->second);
    }
  }
  Embedding emb{std::move(g), std::move(coords), {}, j.value("raw", false)};
  if (j.contains("provenance"))
    for (const auto& p : j.at("provenance")) {
      ProvenanceEntry e{detail::text(detail::field(p, "step"), "step"), {}};
      if (p.contains("params"))
        for (const auto& [k, v] : p.at("params").items()) e.params.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
      emb.provenance.push_back(std::move(e));
    }
  for (const auto& f : emb.coords) check_coordinate(emb.skeleton, f);
  return emb;
}

inline Json curve_to_json(const TropicalCurve& c) {
  Json j;
  j["schema"] = kSchema;
  j["dimension"] = c.dim();
  j["vertices"] = Json::array();
  for (const auto& v : c.vertices()) {
    Json jv{{"id", v.id}};
    jv["coords"] = Json::array();
    for (const auto& x : v.coords) jv["coords"].push_back(format_ext(x));
    if (v.infinite()) {
      jv["direction"] = detail::int_vector(*v.direction);
      jv["anchor"] = Json::array();
      for (const auto& x : v.anchor) jv["anchor"].push_back(format_rational(x));
    }
    j["vertices"].push_back(std::move(jv));
  }
  j["edges"] = Json::array();
  for (const auto& e : c.edges()) {
    Json je{{"id", e.id}, {"from", c.vertex(e.a).id}, {"to", c.vertex(e.b).id}, {"direction", detail::int_vector(e.direction)},
            {"weight", detail::integer_json(e.weight)}};
    je["length"] = e.length ? Json(format_rational(*e.length)) : Json(nullptr);
    j["edges"].push_back(std::move(je));
  }
  return j;
}

/// Reads a curve. Infinite vertices without a recorded direction take it from their edge.
inline TropicalCurve curve_from_json(const Json& j) {
  detail::check_schema(j);
  const std::size_t dim = detail::field(j, "dimension").get<std::size_t>();
  std::vector<TropVertex> verts;
  std::map<std::string, std::size_t> index;
  for (const auto& jv : detail::field(j, "vertices")) {
    TropVertex v;
    v.id = detail::text(detail::field(jv, "id"), "vertex id");
    for (const auto& x : detail::field(jv, "coords")) v.coords.push_back(detail::ext(x));
    if (jv.contains("direction")) v.direction = detail::int_vector(jv.at("direction"));
    if (jv.contains("anchor"))
      for (const auto& x : jv.at("anchor")) v.anchor.push_back(detail::rational(x));
    if (!index.emplace(v.id, verts.size()).second) fail(ErrorCode::ParseError, "duplicate vertex " + v.id);
    verts.push_back(std::move(v));
  }
  std::vector<TropEdge> edges;
  for (const auto& je : detail::field(j, "edges")) {
    TropEdge e;
    e.id = detail::text(detail::field(je, "id"), "edge id");
    auto a = index.find(detail::text(detail::field(je, "from"), "endpoint"));
    auto b = index.find(detail::text(detail::field(je, "to"), "endpoint"));
    if (a == index.end() || b == index.end()) fail(ErrorCode::DanglingEndpoint, "edge " + e.id);
    e.a = a->second;
    e.b = b->second;
    e.direction = detail::int_vector(detail::field(je, "direction"));
    e.weight = je.contains("weight") ? detail::integer(je.at("weight")) : Integer(1);
    if (je.contains("length") && !je.at("length").is_null()) e.length = detail::rational(je.at("length"));
    edges.push_back(std::move(e));
  }
  for (const auto& e : edges) {
    TropVertex& vb = verts[e.b];
    bool infinite = std::any_of(vb.coords.begin(), vb.coords.end(), [](const ExtRational& x) { return !x.finite(); });
    if (!infinite || vb.direction) continue;
    if (e.direction.size() != dim || verts[e.a].coords.size() != dim) continue;
    vb.direction = e.direction;
    std::size_t i0 = 0;
    while (i0 < dim && e.direction[i0] == 0) ++i0;
    if (i0 == dim) continue;
    RatVector anchor;
    for (const auto& x : verts[e.a].coords) anchor.push_back(x.finite() ? x.value() : Rational(0));
    Rational mu = anchor[i0] / Rational(e.direction[i0]);
    for (std::size_t i = 0; i < dim; ++i) anchor[i] -= mu * Rational(e.direction[i]);
    vb.anchor = std::move(anchor);
  }
  return TropicalCurve(dim, std::move(verts), std::move(edges));
}

inline Json lint_to_json(const TropicalCurve& c) {
  auto smooth = check_smooth(c);
  auto bal = check_balancing(c);
  Json j;
  j["schema"] = kSchema;
  j["smooth"] = smooth.smooth;
  j["balanced"] = bal.balanced;
  j["vertices"] = Json::array();
  std::map<std::size_t, IntVector> defects;
  for (const auto& b : bal.vertices) defects[b.vertex] = b.defect;
  for (std::size_t v = 0; v < c.vertices().size(); ++v) {
    auto s = check_vertex_smooth(c, v);
    Json jv{{"id", c.vertex(v).id}, {"valence", s.valence}, {"smooth", s.smooth}};
    if (!c.vertex(v).infinite()) {
      jv["rank"] = s.rank;
      jv["elementary_divisors"] = detail::int_vector(s.elementary_divisors);
      jv["balancing_defect"] = detail::int_vector(defects[v]);
    }
    if (!s.reason.empty()) jv["reason"] = s.reason;
    j["vertices"].push_back(std::move(jv));
  }
  j["heavy_edges"] = Json::array();
  for (auto e : smooth.heavy_edges)
    j["heavy_edges"].push_back({{"id", c.edge(e).id}, {"weight", detail::integer_json(c.edge(e).weight)}});
  return j;
}

/// Human-readable summary of a lint report.
inline std::string lint_text(const TropicalCurve& c) {
  auto smooth = check_smooth(c);
  auto bal = check_balancing(c);
  std::ostringstream out;
  out << (smooth.smooth ? "smooth" : "not smooth") << ", " << (bal.balanced ? "balanced" : "not balanced") << "\n";
  for (const auto& s : smooth.singular_vertices) out << "  vertex " << c.vertex(s.vertex).id << ": " << s.reason << "\n";
  for (auto e : smooth.heavy_edges) out << "  edge " << c.edge(e).id << ": weight " << c.edge(e).weight << "\n";
  for (const auto& b : bal.vertices)
    if (!is_zero(b.defect)) out << "  vertex " << c.vertex(b.vertex).id << ": unbalanced\n";
  return out.str();
}

inline Json faithfulness_to_json(const FaithfulnessReport& r) {
  Json j{{"fully_faithful", r.ok}};
  j["reasons"] = Json::array();
  for (const auto& s : r.reasons) j["reasons"].push_back(s);
  return j;
}

/// Pipeline report; every step carries the coordinates it added, on the final skeleton.
inline Json report_to_json(const Embedding& emb, const PipelineReport& rep) {
  Json j;
  j["schema"] = kSchema;
  j["steps"] = Json::array();
  for (const auto& s : rep.steps) {
    Json js{{"construction", s.construction}, {"target", s.target}, {"first_coordinate", s.first_coordinate},
            {"added", s.added}, {"status", s.status}};
    js["pillars"] = s.pillars;
    if (s.construction == "vertex") js["singular_after"] = s.singular_after;
    js["functions"] = Json::array();
    for (std::size_t k = s.first_coordinate; k < s.first_coordinate + s.added && k < emb.coords.size(); ++k)
      js["functions"].push_back(function_to_json(emb.skeleton, emb.coords[k]));
    j["steps"].push_back(std::move(js));
  }
  j["certificates"] = rep.certificates;
  if (!rep.singular_counts.empty()) j["singular_counts"] = rep.singular_counts;
  return j;
}

}  // namespace tropicurve::io
