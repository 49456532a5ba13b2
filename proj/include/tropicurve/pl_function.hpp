#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tropicurve/error.hpp"
#include "tropicurve/graph.hpp"
#include "tropicurve/rational.hpp"

namespace tropicurve {

/// Finite formal integer combination of points. Zero coefficients are never stored.
class Divisor {
 public:
  Divisor() = default;
  Divisor(std::initializer_list<std::pair<Point, std::int64_t>> terms) {
    for (const auto& [p, c] : terms) add(p, c);
  }

  void add(const Point& p, std::int64_t c) {
    if (c == 0) return;
    auto& slot = terms_[p];
    slot += c;
    if (slot == 0) terms_.erase(p);
  }

  std::int64_t operator[](const Point& p) const {
    auto it = terms_.find(p);
    return it == terms_.end() ? 0 : it->second;
  }

  const std::map<Point, std::int64_t>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  std::int64_t degree() const {
    std::int64_t d = 0;
    for (const auto& [p, c] : terms_) d += c;
    return d;
  }

  bool effective() const {
    for (const auto& [p, c] : terms_)
      if (c < 0) return false;
    return true;
  }

  std::vector<Point> support() const {
    std::vector<Point> out;
    for (const auto& [p, c] : terms_) out.push_back(p);
    return out;
  }

  Divisor& operator+=(const Divisor& o) {
    for (const auto& [p, c] : o.terms_) add(p, c);
    return *this;
  }
  Divisor& operator-=(const Divisor& o) {
    for (const auto& [p, c] : o.terms_) add(p, -c);
    return *this;
  }
  friend Divisor operator+(Divisor a, const Divisor& b) { return a += b; }
  friend Divisor operator-(Divisor a, const Divisor& b) { return a -= b; }
  friend bool operator==(const Divisor& a, const Divisor& b) { return a.terms_ == b.terms_; }

  /// Maps every point through `f` (used to transport divisors across subdivisions).
  template <typename F>
  Divisor transported(F&& f) const {
    Divisor out;
    for (const auto& [p, c] : terms_) out.add(f(p), c);
    return out;
  }

 private:
  std::map<Point, std::int64_t> terms_;
};

struct Breakpoint {
  Rational offset;
  Rational value;
};

/// Piecewise-linear function with integer slopes on an extended graph. Values live on vertices,
/// each finite edge carries its strictly interior breakpoints, and each ray is linear with a
/// single slope measured toward the infinite end. Continuity holds by construction. The function
/// keeps a copy of the edge endpoints and lengths so it can be evaluated on its own.
class PLFunction {
 public:
  PLFunction() = default;

  static PLFunction constant(const ExtendedGraph& g, const Rational& c = 0) {
    PLFunction f;
    f.bind(g);
    f.vertex_values_.assign(g.finite().vertex_count(), c);
    f.interior_.assign(g.finite().edge_count(), {});
    f.ray_slopes_.assign(g.rays().size(), 0);
    return f;
  }

  /// Builds from explicit data; throws InvalidFunction when shapes or slopes are wrong.
  static PLFunction from_data(const ExtendedGraph& g, std::vector<Rational> vertex_values,
                              std::vector<std::vector<Breakpoint>> interior, std::vector<Integer> ray_slopes) {
    PLFunction f;
    f.bind(g);
    f.vertex_values_ = std::move(vertex_values);
    f.interior_ = std::move(interior);
    f.ray_slopes_ = std::move(ray_slopes);
    f.validate(g);
    f.simplify();
    return f;
  }

  std::size_t vertex_count() const { return vertex_values_.size(); }
  std::size_t edge_count() const { return interior_.size(); }
  std::size_t ray_count() const { return ray_slopes_.size(); }

  const Rational& vertex_value(std::size_t v) const { return vertex_values_.at(v); }
  const std::vector<Rational>& vertex_values() const { return vertex_values_; }
  const std::vector<Breakpoint>& interior(std::size_t e) const { return interior_.at(e); }
  const Integer& ray_slope(std::size_t r) const { return ray_slopes_.at(r); }
  const std::vector<Integer>& ray_slopes() const { return ray_slopes_; }

  static const Rational& zero_offset() {
    static const Rational z(0);
    return z;
  }

  /// Breakpoints of edge e including both endpoints.
  std::vector<Breakpoint> profile(std::size_t e) const {
    const Shape& s = shape_.at(e);
    std::vector<Breakpoint> out;
    out.reserve(interior_[e].size() + 2);
    out.push_back({Rational(0), vertex_values_.at(s.a)});
    for (const auto& b : interior_[e]) out.push_back(b);
    out.push_back({s.length, vertex_values_.at(s.b)});
    return out;
  }

  /// Integer slope on each piece of edge e, oriented from endpoint a to endpoint b.
  std::vector<Integer> slopes(std::size_t e) const {
    const Shape& s = shape_.at(e);
    const auto& in = interior_[e];
    std::vector<Integer> out;
    out.reserve(in.size() + 1);
    const Rational* t = &zero_offset();
    const Rational* x = &vertex_values_.at(s.a);
    for (const auto& b : in) {
      out.push_back(num((b.value - *x) / (b.offset - *t)));
      t = &b.offset;
      x = &b.value;
    }
    out.push_back(num((vertex_values_.at(s.b) - *x) / (s.length - *t)));
    return out;
  }

  Rational edge_value(std::size_t e, const Rational& t) const {
    const Shape& s = shape_.at(e);
    const auto& in = interior_[e];
    const Rational* t0 = &zero_offset();
    const Rational* x0 = &vertex_values_.at(s.a);
    for (const auto& b : in) {
      if (t == b.offset) return b.value;
      if (t < b.offset) return *x0 + (b.value - *x0) / (b.offset - *t0) * (t - *t0);
      t0 = &b.offset;
      x0 = &b.value;
    }
    const Rational& x1 = vertex_values_.at(s.b);
    if (t >= s.length) return x1;
    return *x0 + (x1 - *x0) / (s.length - *t0) * (t - *t0);
  }

  ExtRational value_at(const Point& p) const {
    if (p.is_vertex()) return vertex_values_.at(p.index);
    if (p.is_infinity()) {
      const Integer& s = ray_slopes_.at(p.index);
      if (s > 0) return ExtRational::plus_infinity();
      if (s < 0) return ExtRational::minus_infinity();
      return vertex_values_.at(ray_attach_.at(p.index));
    }
    return edge_value(p.index, p.offset);
  }

  /// Finite value at a finite point.
  Rational finite_value(const Point& p) const {
    if (p.is_infinity()) fail(ErrorCode::InvalidArgument, "finite_value at an infinite point");
    return value_at(p).value();
  }

  /// Value at distance t along ray r.
  Rational ray_value(std::size_t r, const Rational& t) const {
    return vertex_values_.at(ray_attach_.at(r)) + Rational(ray_slopes_.at(r)) * t;
  }

  /// Checks shapes against `g`, sorted interior offsets and integrality of every slope.
  void validate(const ExtendedGraph& g) const {
    const MetricGraph& fg = g.finite();
    if (vertex_values_.size() != fg.vertex_count() || interior_.size() != fg.edge_count() ||
        ray_slopes_.size() != g.rays().size())
      fail(ErrorCode::InvalidFunction, "function shape does not match its graph");
    for (std::size_t e = 0; e < fg.edge_count(); ++e) {
      auto prof = profile(e);
      for (std::size_t i = 0; i + 1 < prof.size(); ++i) {
        if (!(prof[i].offset < prof[i + 1].offset))
          fail(ErrorCode::InvalidFunction, "breakpoints on " + fg.edge(e).id + " are not strictly increasing");
        Rational s = (prof[i + 1].value - prof[i].value) / (prof[i + 1].offset - prof[i].offset);
        if (!is_integer(s))
          fail(ErrorCode::InvalidFunction, "non-integer slope " + format_rational(s) + " on " + fg.edge(e).id);
      }
    }
  }

  PLFunction operator+(const PLFunction& o) const { return combine(o, 1); }
  PLFunction operator-(const PLFunction& o) const { return combine(o, -1); }

  PLFunction plus_constant(const Rational& c) const {
    PLFunction f = *this;
    for (auto& v : f.vertex_values_) v += c;
    for (auto& edge : f.interior_)
      for (auto& b : edge) b.value += c;
    return f;
  }

  /// Re-expresses the function on the refined graph `sub.graph`; the cut becomes a vertex.
  PLFunction transported(const MetricGraph::Subdivision& sub) const {
    PLFunction f = *this;
    f.transport(sub);
    return f;
  }

  void transport(const MetricGraph::Subdivision& sub) {
    vertex_values_.push_back(edge_value(sub.edge, sub.offset));
    std::vector<Breakpoint> head, tail;
    for (auto& b : interior_[sub.edge]) {
      if (b.offset < sub.offset) head.push_back(std::move(b));
      else if (b.offset > sub.offset) tail.push_back({b.offset - sub.offset, std::move(b.value)});
    }
    interior_[sub.edge] = std::move(head);
    interior_.push_back(std::move(tail));
    const Edge& cut = sub.graph.edge(sub.edge);
    const Edge& rest = sub.graph.edge(sub.new_edge);
    shape_[sub.edge] = {cut.a, cut.b, cut.length};
    shape_.push_back({rest.a, rest.b, rest.length});
  }

  /// Adds a ray at `attach` with the given slope toward infinity.
  PLFunction with_extra_ray(std::size_t attach, const Integer& slope) const {
    PLFunction f = *this;
    f.add_ray(attach, slope);
    return f;
  }

  void add_ray(std::size_t attach, const Integer& slope) {
    ray_slopes_.push_back(slope);
    ray_attach_.push_back(attach);
  }

  /// Re-expresses the function after the first `t` units of ray r became a finite edge.
  void split_ray(std::size_t r, const Rational& t, const ExtendedGraph::RaySplit& split) {
    vertex_values_.push_back(ray_value(r, t));
    interior_.emplace_back();
    const Edge& ed = split.graph.finite().edge(split.edge);
    shape_.push_back({ed.a, ed.b, ed.length});
    ray_attach_[r] = split.vertex;
  }

  PLFunction ray_split(std::size_t r, const Rational& t, const ExtendedGraph::RaySplit& split) const {
    PLFunction f = *this;
    f.split_ray(r, t, split);
    return f;
  }

  PLFunction with_ray_slope(std::size_t r, const Integer& slope) const {
    PLFunction f = *this;
    f.ray_slopes_.at(r) = slope;
    return f;
  }

  /// Drops interior breakpoints where the slope does not change.
  void simplify() {
    for (std::size_t e = 0; e < interior_.size(); ++e) {
      auto prof = profile(e);
      std::vector<Breakpoint> kept;
      for (std::size_t i = 1; i + 1 < prof.size(); ++i) {
        const auto& prev = kept.empty() ? prof[0] : kept.back();
        Rational s1 = (prof[i].value - prev.value) / (prof[i].offset - prev.offset);
        Rational s2 = (prof[i + 1].value - prof[i].value) / (prof[i + 1].offset - prof[i].offset);
        if (s1 != s2) kept.push_back(prof[i]);
      }
      interior_[e] = std::move(kept);
    }
  }

  friend bool operator==(const PLFunction& a, const PLFunction& b) {
    if (a.vertex_values_ != b.vertex_values_ || a.ray_slopes_ != b.ray_slopes_) return false;
    if (a.interior_.size() != b.interior_.size()) return false;
    for (std::size_t e = 0; e < a.interior_.size(); ++e) {
      if (a.interior_[e].size() != b.interior_[e].size()) return false;
      for (std::size_t i = 0; i < a.interior_[e].size(); ++i)
        if (a.interior_[e][i].offset != b.interior_[e][i].offset || a.interior_[e][i].value != b.interior_[e][i].value)
          return false;
    }
    return true;
  }

 private:
  struct Shape {
    std::size_t a;
    std::size_t b;
    Rational length;
  };

  void bind(const ExtendedGraph& g) {
    shape_.clear();
    for (const auto& e : g.finite().edges()) shape_.push_back({e.a, e.b, e.length});
    ray_attach_.clear();
    for (const auto& r : g.rays()) ray_attach_.push_back(r.attach);
  }

  PLFunction combine(const PLFunction& o, int sign) const {
    if (vertex_values_.size() != o.vertex_values_.size() || interior_.size() != o.interior_.size() ||
        ray_slopes_.size() != o.ray_slopes_.size())
      fail(ErrorCode::InvalidFunction, "functions live on different graphs");
    PLFunction f;
    f.shape_ = shape_;
    f.ray_attach_ = ray_attach_;
    for (std::size_t v = 0; v < vertex_values_.size(); ++v)
      f.vertex_values_.push_back(vertex_values_[v] + sign * o.vertex_values_[v]);
    for (std::size_t r = 0; r < ray_slopes_.size(); ++r)
      f.ray_slopes_.push_back(ray_slopes_[r] + sign * o.ray_slopes_[r]);
    f.interior_.resize(interior_.size());
    for (std::size_t e = 0; e < interior_.size(); ++e) {
      std::map<Rational, int> offsets;
      for (const auto& b : interior_[e]) offsets[b.offset];
      for (const auto& b : o.interior_[e]) offsets[b.offset];
      for (const auto& [t, unused] : offsets)
        f.interior_[e].push_back({t, edge_value(e, t) + sign * o.edge_value(e, t)});
    }
    f.simplify();
    return f;
  }

  std::vector<Shape> shape_;
  std::vector<std::size_t> ray_attach_;
  std::vector<Rational> vertex_values_;
  std::vector<std::vector<Breakpoint>> interior_;
  std::vector<Integer> ray_slopes_;
};

/// Divisor of F: at every point, the sum of outgoing slopes. The infinite end of a ray with slope
/// s toward infinity carries coefficient -s.
inline Divisor divisor_of(const ExtendedGraph& g, const PLFunction& f) {
  const MetricGraph& fg = g.finite();
  Divisor d;
  std::vector<Integer> at_vertex(fg.vertex_count(), 0);
  for (std::size_t e = 0; e < fg.edge_count(); ++e) {
    auto prof = f.profile(e);
    auto s = f.slopes(e);
    at_vertex[fg.edge(e).a] += s.front();
    at_vertex[fg.edge(e).b] -= s.back();
    for (std::size_t i = 1; i + 1 < prof.size(); ++i) {
      Integer c = s[i] - s[i - 1];
      if (c != 0) d.add(Point::interior(e, prof[i].offset), c.convert_to<std::int64_t>());
    }
  }
  for (std::size_t r = 0; r < g.rays().size(); ++r) {
    at_vertex[g.ray(r).attach] += f.ray_slope(r);
    d.add(Point::infinity(r), (-f.ray_slope(r)).convert_to<std::int64_t>());
  }
  for (std::size_t v = 0; v < fg.vertex_count(); ++v) d.add(Point::vertex(v), at_vertex[v].convert_to<std::int64_t>());
  return d;
}

/// Re-expresses a function on a graph obtained by subdividing at interior points.
inline PLFunction transport(PLFunction f, const std::vector<MetricGraph::Subdivision>& steps) {
  for (const auto& s : steps) f = f.transported(s);
  return f;
}

}  // namespace tropicurve
