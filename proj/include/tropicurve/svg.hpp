#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "tropicurve/error.hpp"
#include "tropicurve/tropical.hpp"

namespace tropicurve {

/// Draws coordinates (i, j) of a curve: finite edges as segments, rays as open arrows of length
/// 1.5 times the median projected edge length, weights above 1 as labels.
inline std::string render_svg(const TropicalCurve& c, std::size_t i = 0, std::size_t j = 1) {
  if (i == j || i >= c.dim() || j >= c.dim())
    fail(ErrorCode::InvalidArgument, "projection axes must be distinct and below " + std::to_string(c.dim()));
  struct P {
    double x, y;
  };
  auto proj = [&](std::size_t v) {
    const auto& p = c.vertex(v).coords;
    return P{p[i].value().convert_to<double>(), p[j].value().convert_to<double>()};
  };
  std::vector<double> lengths;
  for (const auto& e : c.edges()) {
    if (!e.length) continue;
    P a = proj(e.a), b = proj(e.b);
    double l = std::hypot(b.x - a.x, b.y - a.y);
    if (l > 0) lengths.push_back(l);
  }
  double ray_len = 1;
  if (!lengths.empty()) {
    std::nth_element(lengths.begin(), lengths.begin() + lengths.size() / 2, lengths.end());
    ray_len = 1.5 * lengths[lengths.size() / 2];
  }

  struct Seg {
    P a, b;
    bool arrow;
    std::string label;
  };
  std::vector<Seg> segs;
  std::vector<P> dots;
  for (const auto& e : c.edges()) {
    P a = proj(e.a), b;
    if (e.length) {
      b = proj(e.b);
    } else {
      double dx = e.direction[i].convert_to<double>(), dy = e.direction[j].convert_to<double>();
      double n = std::hypot(dx, dy);
      if (n == 0) {
        dots.push_back(a);
        continue;
      }
      b = {a.x + ray_len * dx / n, a.y + ray_len * dy / n};
    }
    segs.push_back({a, b, !e.length, e.weight > 1 ? e.weight.str() : std::string()});
  }
  for (std::size_t v = 0; v < c.vertices().size(); ++v)
    if (!c.vertex(v).infinite()) dots.push_back(proj(v));

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  auto grow = [&](P p) {
    if (first) x0 = x1 = p.x, y0 = y1 = p.y, first = false;
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  };
  for (const auto& s : segs) grow(s.a), grow(s.b);
  for (const auto& d : dots) grow(d);
  double span = std::max({x1 - x0, y1 - y0, 1e-9});
  const double size = 480, pad = 20, scale = size / span;
  auto X = [&](double x) { return pad + (x - x0) * scale; };
  auto Y = [&](double y) { return pad + (y1 - y) * scale; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };

  std::ostringstream out;
  double w = (x1 - x0) * scale + 2 * pad, h = (y1 - y0) * scale + 2 * pad;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h) << "\">\n";
  out << "<g stroke=\"black\" stroke-width=\"1.5\" fill=\"none\">\n";
  for (const auto& s : segs) {
    out << "<line x1=\"" << num(X(s.a.x)) << "\" y1=\"" << num(Y(s.a.y)) << "\" x2=\"" << num(X(s.b.x)) << "\" y2=\""
        << num(Y(s.b.y)) << "\"/>\n";
    if (s.arrow) {
      double dx = X(s.b.x) - X(s.a.x), dy = Y(s.b.y) - Y(s.a.y), n = std::hypot(dx, dy);
      double ux = dx / n, uy = dy / n, head = 8;
      out << "<polyline points=\"" << num(X(s.b.x) - head * (ux - 0.5 * uy)) << "," << num(Y(s.b.y) - head * (uy + 0.5 * ux))
          << " " << num(X(s.b.x)) << "," << num(Y(s.b.y)) << " " << num(X(s.b.x) - head * (ux + 0.5 * uy)) << ","
          << num(Y(s.b.y) - head * (uy - 0.5 * ux)) << "\"/>\n";
    }
  }
  out << "</g>\n<g fill=\"black\">\n";
  for (const auto& d : dots) out << "<circle cx=\"" << num(X(d.x)) << "\" cy=\"" << num(Y(d.y)) << "\" r=\"2.5\"/>\n";
  for (const auto& s : segs)
    if (!s.label.empty())
      out << "<text class=\"weight\" x=\"" << num((X(s.a.x) + X(s.b.x)) / 2 + 4) << "\" y=\""
          << num((Y(s.a.y) + Y(s.b.y)) / 2 - 4) << "\" font-size=\"12\">" << s.label << "</text>\n";
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace tropicurve
