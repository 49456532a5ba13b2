// Acceptance checks: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tropicurve/io.hpp"
#include "tropicurve/pipeline.hpp"
#include "tropicurve/principal.hpp"

using namespace tropicurve;
using R = Rational;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.ok) {
    o.ok = false;
    o.detail = what;
  }
}

std::string data(const std::string& name) { return std::string(TROPICURVE_DATA) + "/" + name; }

// ---- criterion 1

Outcome tate() {
  Outcome o;
  auto [emb, curve] = tate_demo(R(1));
  std::map<IntVector, int> rays;
  for (const auto& e : curve.edges()) {
    require(o, e.weight == 1, "edge " + e.id + " has weight " + e.weight.str());
    if (!e.length) ++rays[e.direction];
  }
  require(o, curve.dim() == 2, "ambient dimension");
  require(o, curve.ray_count() == 9, "ray count " + std::to_string(curve.ray_count()));
  require(o, rays == std::map<IntVector, int>{{{1, 1}, 3}, {{-1, 0}, 3}, {{0, -1}, 3}}, "ray directions");
  require(o, curve.bounded_betti() == 1, "bounded Betti number");
  require(o, check_smooth(curve).smooth, "not smooth");
  require(o, is_fully_faithful(emb).ok, "not fully faithful");
  auto golden = io::parse_json(io::read_file(data("tate_c1.json")));
  require(o, io::dump(io::curve_to_json(curve)) == io::dump(golden["curve"]), "differs from golden curve");
  if (o.ok)
    o.detail = std::to_string(curve.finite_vertex_count()) + " finite vertices, " +
               std::to_string(curve.edges().size() - curve.ray_count()) + " bounded edges, 9 rays";
  return o;
}

// ---- criterion 2

Outcome figure_one() {
  Outcome o;
  auto load = [](const char* f) { return io::curve_from_json(io::parse_json(io::read_file(data(f)))); };
  auto left = check_vertex_smooth(load("fig1_left.json"), 0);
  auto mid = check_vertex_smooth(load("fig1_middle.json"), 0);
  auto right = check_vertex_smooth(load("fig1_right.json"), 0);
  require(o, left.smooth && left.rank == 2 && left.elementary_divisors == std::vector<Integer>{1, 1}, "left vertex");
  require(o, !mid.smooth && mid.rank == 2 && mid.valence == 4 && mid.reason == "rank 2 but valence 4", "middle vertex");
  require(o, !right.smooth && right.reason == "elementary divisor 3", "right vertex");
  if (o.ok) o.detail = "smooth / " + mid.reason + " / " + right.reason;
  return o;
}

// ---- criterion 3

// Points of g with offsets in (1/m) Z, vertices once.
std::vector<Point> grid(const MetricGraph& g, int m) {
  std::set<Point> pts;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) pts.insert(Point::vertex(v));
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    for (Integer k = 1; R(k, m) < g.edge(e).length; ++k) pts.insert(Point::interior(e, R(k, m)));
  return {pts.begin(), pts.end()};
}

// Break divisor test by enumeration: the points can be matched to distinct edges containing them
// whose removal leaves a spanning tree.
bool break_bruteforce(const MetricGraph& g, const std::vector<Point>& pts) {
  const std::size_t m = g.edge_count(), n = g.vertex_count(), k = pts.size();
  auto on = [&](const Point& p, std::size_t e) {
    if (p.is_interior()) return p.index == e;
    return g.edge(e).a == p.index || g.edge(e).b == p.index;
  };
  auto tree_complement = [&](const std::vector<std::size_t>& out) {
    std::vector<std::size_t> comp(n);
    for (std::size_t v = 0; v < n; ++v) comp[v] = v;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t v) { return comp[v] == v ? v : comp[v] = find(comp[v]); };
    std::size_t joined = 0;
    for (std::size_t e = 0; e < m; ++e) {
      if (std::find(out.begin(), out.end(), e) != out.end()) continue;
      std::size_t a = find(g.edge(e).a), b = find(g.edge(e).b);
      if (a == b) return false;
      comp[a] = b;
      ++joined;
    }
    return joined + 1 == n;
  };
  std::vector<std::size_t> pick(k, 0);
  while (true) {
    bool distinct = true, fits = true;
    for (std::size_t i = 0; i < k; ++i) {
      fits &= on(pts[i], pick[i]);
      for (std::size_t j = 0; j < i; ++j) distinct &= pick[i] != pick[j];
    }
    if (distinct && fits && tree_complement(pick)) return true;
    std::size_t i = 0;
    while (i < k && pick[i] == m - 1) pick[i++] = 0;
    if (i == k) return false;
    ++pick[i];
  }
}

// Two degree-g divisors are equivalent iff their reference slopes against g times vertex 0 agree modulo Z.
std::vector<R> class_key(const MetricGraph& g, const Divisor& d) {
  Divisor x = d;
  x.add(Point::vertex(0), -d.degree());
  return oracle::fractional(oracle::reference_slopes(g, x));
}

struct BreakCheck {
  std::size_t divisors = 0;
};

bool break_uniqueness(const MetricGraph& g, const std::vector<Divisor>& ds, int fine, Outcome& o, BreakCheck& stats) {
  const std::size_t genus = g.betti_number();
  auto pts = grid(g, fine);
  std::map<std::vector<R>, std::vector<Divisor>> by_class;
  std::vector<std::size_t> idx(genus, 0);
  while (true) {
    std::vector<Point> chosen;
    for (auto i : idx) chosen.push_back(pts[i]);
    if (break_bruteforce(g, chosen)) {
      Divisor b;
      for (const auto& p : chosen) b.add(p, 1);
      by_class[class_key(g, b)].push_back(b);
    }
    // Next non-decreasing index tuple.
    std::size_t i = genus;
    while (i > 0 && idx[i - 1] == pts.size() - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < genus; ++j) idx[j] = idx[i - 1];
  }
  for (const auto& d : ds) {
    ++stats.divisors;
    auto it = by_class.find(class_key(g, d));
    std::size_t hits = it == by_class.end() ? 0 : it->second.size();
    if (hits != 1) {
      require(o, false, std::to_string(hits) + " break divisors equivalent to a divisor of degree " + std::to_string(d.degree()));
      return false;
    }
    auto bd = break_divisor_decompose(g, d);
    if (bd.b != it->second.front()) {
      require(o, false, "decomposition disagrees with enumeration");
      return false;
    }
  }
  return true;
}

Outcome break_divisors() {
  Outcome o;
  BreakCheck stats;
  // Candidate break divisors live on the 1/48 grid, which contains every answer for these inputs.
  for (int len = 1; len <= 4; ++len) {
    auto g = MetricGraph::build({"o"}, {{"l", "o", "o", R(len)}});
    auto pts = oracle::lattice_points(g, 4);
    std::vector<Divisor> ds;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i; j < pts.size(); ++j)
        for (std::size_t k = 0; k < pts.size(); ++k) {
          Divisor d{{pts[i], 1}, {pts[j], 1}};
          d.add(pts[k], -1);
          ds.push_back(d);
        }
    if (!break_uniqueness(g, ds, 48, o, stats)) return o;
  }
  auto theta = MetricGraph::build({"a", "b"}, {{"e1", "a", "b", R(1)}, {"e2", "a", "b", R(3, 2)}, {"e3", "a", "b", R(7, 4)}});
  auto pts = oracle::lattice_points(theta, 4);
  std::vector<Divisor> ds;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i; j < pts.size(); ++j) ds.push_back(Divisor{{pts[i], 1}, {pts[j], 1}});
  if (!break_uniqueness(theta, ds, 48, o, stats)) return o;
  o.detail = std::to_string(stats.divisors) + " divisors, each with exactly one break divisor";
  return o;
}

// ---- criterion 4

Outcome round_trip() {
  Outcome o;
  std::mt19937 rng(4);
  int n = 0;
  for (; n < 1000; ++n) {
    auto g = oracle::random_graph(rng, 1 + rng() % 6);
    ExtendedGraph x(g);
    Divisor d = divisor_of(x, oracle::random_function(rng, g));
    require(o, divisor_of(x, construct_pl_with_divisor(g, d)) == d, "round trip failed at trial " + std::to_string(n));
    if (!o.ok) return o;
  }
  o.detail = std::to_string(n) + " principal divisors";
  return o;
}

// ---- criterion 5

struct Fixture {
  std::string name;
  Embedding emb;
};

std::vector<Fixture> fixtures() {
  auto bare = [](const MetricGraph& g, std::vector<Ray> rays = {}) { return Embedding{ExtendedGraph(g, std::move(rays)), {}, {}, true}; };
  std::vector<Fixture> f;
  auto edge = [](std::string id, std::string a, std::string b, R l) { return EdgeSpec{std::move(id), std::move(a), std::move(b), l}; };
  // trees
  f.push_back({"point with two rays", bare(MetricGraph::build({"a"}, {}), {{"r", 0}, {"s", 0}})});
  f.push_back({"segment", bare(MetricGraph::build({"a", "b"}, {edge("e", "a", "b", R(2))}))});
  f.push_back({"path", bare(MetricGraph::build({"a", "b", "c"}, {edge("e1", "a", "b", R(1)), edge("e2", "b", "c", R(2))}))});
  f.push_back({"tripod", bare(MetricGraph::build({"o", "x", "y", "z"}, {edge("1", "o", "x", R(1)), edge("2", "o", "y", R(1, 2)),
                                                                        edge("3", "o", "z", R(3))}))});
  f.push_back({"tripod with rays", bare(MetricGraph::build({"o", "x", "y", "z"}, {edge("1", "o", "x", R(1)), edge("2", "o", "y", R(2)),
                                                                                  edge("3", "o", "z", R(1))}),
                                        {{"rx", 1}, {"ry", 2}})});
  f.push_back({"star", bare(MetricGraph::build({"o", "a", "b", "c", "d"}, {edge("1", "o", "a", R(1)), edge("2", "o", "b", R(1)),
                                                                           edge("3", "o", "c", R(2)), edge("4", "o", "d", R(1, 3))}))});
  f.push_back({"path with end rays", bare(MetricGraph::build({"a", "b", "c"}, {edge("e1", "a", "b", R(2)), edge("e2", "b", "c", R(1))}),
                                          {{"r", 0}, {"s", 2}})});
  // circles, with spokes
  f.push_back({"circle", bare(MetricGraph::build({"o"}, {edge("l", "o", "o", R(1))}))});
  f.push_back({"circle with ray", bare(MetricGraph::build({"o"}, {edge("l", "o", "o", R(7, 3))}), {{"r", 0}})});
  f.push_back({"circle with two rays", bare(MetricGraph::build({"o"}, {edge("l", "o", "o", R(2))}), {{"r", 0}, {"s", 0}})});
  f.push_back({"circle of two edges", bare(MetricGraph::build({"a", "b"}, {edge("e1", "a", "b", R(1)), edge("e2", "b", "a", R(3, 2))}))});
  f.push_back({"lollipop", bare(MetricGraph::build({"a", "b", "c"}, {edge("l", "a", "a", R(4)), edge("s", "a", "b", R(1)),
                                                                      edge("t", "b", "c", R(2))}))});
  f.push_back({"circle with two spokes", bare(MetricGraph::build({"a", "b", "x", "y"}, {edge("e1", "a", "b", R(2)), edge("e2", "b", "a", R(2)),
                                                                                       edge("s1", "a", "x", R(1)), edge("s2", "b", "y", R(1))}))});
  f.push_back({"circle with spoke and ray", bare(MetricGraph::build({"o", "x"}, {edge("l", "o", "o", R(3)), edge("s", "o", "x", R(1, 2))}),
                                                 {{"r", 1}})});
  f.push_back({"circle with three spokes",
               bare(MetricGraph::build({"a", "b", "c", "x", "y", "z"},
                                       {edge("e1", "a", "b", R(1)), edge("e2", "b", "c", R(1)), edge("e3", "c", "a", R(1)),
                                        edge("s1", "a", "x", R(1)), edge("s2", "b", "y", R(1)), edge("s3", "c", "z", R(1))}))});
  f.push_back({"lollipop with ray", bare(MetricGraph::build({"a", "b"}, {edge("l", "a", "a", R(2)), edge("s", "a", "b", R(1))}),
                                         {{"r", 1}})});
  // theta graphs
  f.push_back({"theta", bare(MetricGraph::build({"a", "b"}, {edge("e1", "a", "b", R(1)), edge("e2", "a", "b", R(2)),
                                                              edge("e3", "a", "b", R(3))}))});
  f.push_back({"theta with ray", bare(MetricGraph::build({"a", "b"}, {edge("e1", "a", "b", R(1)), edge("e2", "a", "b", R(3, 2)),
                                                                       edge("e3", "a", "b", R(2))}),
                                      {{"r", 0}})});
  // dumbbells
  f.push_back({"dumbbell", bare(MetricGraph::build({"a", "b"}, {edge("l1", "a", "a", R(2)), edge("bar", "a", "b", R(1)),
                                                                 edge("l2", "b", "b", R(3))}))});
  f.push_back({"dumbbell with rays", bare(MetricGraph::build({"a", "b"}, {edge("l1", "a", "a", R(1)), edge("bar", "a", "b", R(2)),
                                                                           edge("l2", "b", "b", R(1))}),
                                          {{"r", 0}, {"s", 1}})});
  // raw embeddings with given coordinates
  auto [tate, tate_curve] = tate_demo(R(1));
  f.push_back({"Tate honeycomb", tate});
  f.push_back({"Tate honeycomb c=3/2", tate_demo(R(3, 2)).first});
  std::mt19937 rng(55);
  for (int k = 0; k < 4; ++k) {
    auto emb = oracle::random_embedding(rng, 2, 1 + k % 2);
    f.push_back({"random embedding " + std::to_string(k), emb});
  }
  return f;
}

Outcome pipelines() {
  Outcome o;
  auto fs = fixtures();
  std::size_t steps = 0;
  const bool verbose = std::getenv("ACCEPTANCE_VERBOSE") != nullptr;
  for (const auto& fx : fs) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      auto [ff, ffrep] = fully_faithful_pipeline(fx.emb);
      require(o, is_fully_faithful(ff).ok, fx.name + ": fully faithful certificate failed");
      auto [sm, rep] = smoothing_pipeline(ff);
      auto [curve, map] = tropicalize(sm);
      require(o, check_smooth(curve).smooth, fx.name + ": not smooth");
      for (std::size_t i = 1; i < rep.singular_counts.size(); ++i)
        require(o, rep.singular_counts[i] < rep.singular_counts[i - 1], fx.name + ": singular count not decreasing");
      for (const auto& pi : map) require(o, pi.stretch == 1, fx.name + ": stretching factor " + pi.stretch.str());
      steps += ffrep.steps.size() + rep.steps.size();
      if (verbose)
        std::cerr << "  " << fx.name << ": " << ffrep.steps.size() << " + " << rep.steps.size() << " steps, "
                  << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    } catch (const Error& e) {
      require(o, false, fx.name + ": " + e.what());
    }
    if (!o.ok) return o;
  }
  std::size_t bare_count = 0;
  for (const auto& fx : fs) bare_count += fx.emb.coords.empty();
  o.detail = std::to_string(bare_count) + " skeleta, " + std::to_string(fs.size() - bare_count) + " raw embeddings, " +
             std::to_string(steps) + " steps";
  return o;
}

// ---- criterion 6

Outcome balancing() {
  Outcome o;
  std::mt19937 rng(6);
  int n = 0;
  for (; n < 500; ++n) {
    auto emb = oracle::random_embedding(rng, 5, 1 + rng() % 3);
    auto curve = tropicalize(emb).first;
    require(o, check_balancing(curve).balanced && oracle::balanced(curve), "unbalanced image at trial " + std::to_string(n));
    if (!o.ok) return o;
  }
  o.detail = std::to_string(n) + " embeddings";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    Outcome (*run)();
  };
  const Criterion all[] = {{1, "Tate curve reproduction", 1.0, tate},
                           {2, "smoothness lint on the three vertices", 0.1, figure_one},
                           {3, "break divisor uniqueness", 30.0, break_divisors},
                           {4, "principality round trip", 10.0, round_trip},
                           {5, "pipeline certificates", 60.0, pipelines},
                           {6, "balancing conservation", 20.0, balancing}};
  bool all_ok = true;
  for (const auto& c : all) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.ok && secs >= c.limit) o = {false, "took longer than the limit"};
    all_ok &= o.ok;
    std::cout << "criterion " << c.id << ": " << (o.ok ? "PASS" : "FAIL") << "  " << c.name << "  (" << std::fixed
              << std::setprecision(3) << secs << " s, limit " << std::setprecision(1) << c.limit << " s)  " << o.detail
              << "\n";
  }
  std::cout << "criterion 7: NOTE  analytic statements (equivalence with Mumford curves, the converse, lifting over "
               "the valued field) are not checked; criteria 1-6 cover their combinatorial content\n";
  return all_ok ? 0 : 1;
}
