#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "tropicurve/io.hpp"
#include "tropicurve/pipeline.hpp"
#include "tropicurve/svg.hpp"

using namespace tropicurve;
using R = Rational;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(TROPICURVE_DATA) + "/" + name; }

fs::path scratch() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("tropicurve_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int code;
  std::string out;  // stdout and stderr together
};

Run cli(const std::string& args) {
  std::string cmd = std::string(TROPICURVE_CLI) + " " + args + " 2>&1";
  Run r{-1, ""};
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tmp(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST(Lint, FigureOneFixtures) {
  auto left = cli("lint --in " + data("fig1_left.json"));
  EXPECT_EQ(left.code, 0) << left.out;
  EXPECT_NE(left.out.find("\"smooth\": true"), std::string::npos);

  auto mid = cli("lint --in " + data("fig1_middle.json"));
  EXPECT_EQ(mid.code, 1);
  EXPECT_NE(mid.out.find("rank 2 but valence 4"), std::string::npos);

  auto right = cli("lint --in " + data("fig1_right.json") + " --out " + tmp("right.json"));
  EXPECT_EQ(right.code, 1);
  auto rep = io::parse_json(io::read_file(tmp("right.json")));
  EXPECT_FALSE(rep["smooth"].get<bool>());
  EXPECT_TRUE(rep["balanced"].get<bool>());
  EXPECT_EQ(rep["vertices"][0]["reason"], "elementary divisor 3");
  EXPECT_EQ(rep["vertices"][0]["elementary_divisors"], io::Json::parse("[1, 3]"));
}

TEST(Lint, MalformedInput) {
  auto bad = cli("lint --in " + data("bad_rational.json"));
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("ParseError"), std::string::npos);
  auto broken = cli("lint --in " + data("broken.json"));
  EXPECT_EQ(broken.code, 2);
  EXPECT_NE(broken.out.find("line 4, column"), std::string::npos);
  EXPECT_EQ(cli("lint --in " + tmp("missing.json")).code, 2);
}

TEST(Parse, ReportsLineAndColumn) {
  try {
    io::parse_json("{\n  \"a\": [1,\n  2,, 3]\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::curve_from_json(io::parse_json(io::read_file(data("bad_rational.json")))), Error);
  EXPECT_THROW(io::graph_from_json(io::Json::parse(R"({"schema":"tropicurve/2","vertices":[],"edges":[]})")), Error);
}

TEST(Tropicalize, FoldSvgHasWeightLabel) {
  auto r = cli("tropicalize --in " + data("fold.json") + " --out " + tmp("fold_curve.json") + " --svg " + tmp("fold.svg"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto svg = io::read_file(tmp("fold.svg"));
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("class=\"weight\""), std::string::npos);
  EXPECT_NE(svg.find(">2</text>"), std::string::npos);
  auto curve = io::curve_from_json(io::parse_json(io::read_file(tmp("fold_curve.json"))));
  for (const auto& e : curve.edges()) EXPECT_EQ(e.weight, Integer(2));
  EXPECT_EQ(cli("lint --in " + tmp("fold_curve.json")).code, 1);
}

TEST(Tropicalize, Errors) {
  EXPECT_EQ(cli("tropicalize --in " + data("empty_coords.json")).code, 2);
  EXPECT_EQ(cli("tropicalize --in " + data("fold.json") + " --svg " + tmp("x.svg") + " --proj 0,0").code, 2);
  EXPECT_EQ(cli("tropicalize --in " + data("fold.json") + " --svg " + tmp("x.svg") + " --proj 0,5").code, 2);
}

TEST(Determinism, ByteIdenticalOutput) {
  for (const auto& args : {"tropicalize --in " + data("fold.json"), "smooth --in " + data("circle_ray.json"),
                           std::string("demo-tate 3/2")}) {
    auto a = cli(args), b = cli(args);
    EXPECT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}

TEST(RoundTrip, TropicalizeThenLint) {
  auto [emb, curve] = tate_demo(R(1));
  io::write_file(tmp("tate_emb.json"), io::dump(io::embedding_to_json(emb)));
  auto r = cli("tropicalize --in " + tmp("tate_emb.json") + " --out " + tmp("tate_curve.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto text = io::read_file(tmp("tate_curve.json"));
  EXPECT_EQ(io::dump(io::curve_to_json(io::curve_from_json(io::parse_json(text)))), text);
  EXPECT_EQ(cli("lint --in " + tmp("tate_curve.json")).code, 0);
}

TEST(RoundTrip, JsonObjects) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto emb = oracle::random_embedding(rng, 4, 2);
    auto j = io::embedding_to_json(emb);
    auto back = io::embedding_from_json(io::parse_json(io::dump(j)));
    EXPECT_EQ(io::dump(io::embedding_to_json(back)), io::dump(j));
    ASSERT_EQ(back.coords.size(), emb.coords.size());
    for (std::size_t k = 0; k < emb.coords.size(); ++k) EXPECT_TRUE(back.coords[k] == emb.coords[k]);

    auto g = emb.skeleton;
    auto d = divisor_of(g, emb.coords[0]);
    EXPECT_EQ(io::divisor_from_json(g, io::divisor_to_json(g, d)).terms(), d.terms());
    EXPECT_TRUE(io::function_from_json(g, io::function_to_json(g, emb.coords[1])) == emb.coords[1]);
    EXPECT_EQ(io::dump(io::graph_to_json(io::graph_from_json(io::graph_to_json(g)))), io::dump(io::graph_to_json(g)));
  }
}

TEST(RoundTrip, InteriorAttachSubdivides) {
  auto g = io::graph_from_json(io::parse_json(io::read_file(data("circle_ray.json"))));
  EXPECT_EQ(g.finite().vertex_count(), 2u);
  EXPECT_EQ(g.finite().edge_count(), 2u);
  ASSERT_EQ(g.rays().size(), 1u);
  EXPECT_EQ(g.ray(0).id, "r");
  std::vector<R> lengths{g.finite().edge(0).length, g.finite().edge(1).length};
  std::sort(lengths.begin(), lengths.end());
  EXPECT_EQ(lengths, (std::vector<R>{R(1, 2), R(1)}));
}

TEST(Pipelines, SmoothWithReport) {
  auto r = cli("smooth --in " + data("circle_ray.json") + " --out " + tmp("smooth.json") + " --report " +
               tmp("report.json") + " --svg " + tmp("smooth.svg"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto emb = io::embedding_from_json(io::parse_json(io::read_file(tmp("smooth.json"))));
  EXPECT_TRUE(is_fully_faithful(emb).ok);
  EXPECT_TRUE(check_smooth(tropicalize(emb).first).smooth);
  auto rep = io::parse_json(io::read_file(tmp("report.json")));
  ASSERT_TRUE(rep.contains("singular_counts"));
  auto counts = rep["singular_counts"].get<std::vector<std::size_t>>();
  for (std::size_t i = 1; i < counts.size(); ++i) EXPECT_LT(counts[i], counts[i - 1]);
  EXPECT_FALSE(rep["steps"].empty());
}

TEST(Pipelines, FaithfulizeWithExplicitCore) {
  auto r = cli("faithfulize --in " + data("lollipop.json") + " --core " + data("core.json") + " --out " + tmp("ff.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto emb = io::embedding_from_json(io::parse_json(io::read_file(tmp("ff.json"))));
  EXPECT_TRUE(is_fully_faithful(emb).ok);
  EXPECT_EQ(cli("faithfulize --in " + data("lollipop.json") + " --core " + data("fig1_left.json")).code, 2);
}

TEST(Pipelines, BudgetFailureExitsThree) {
  auto r = cli("smooth --in " + data("lollipop.json") + " --budget 1");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("PillarSearchExhausted"), std::string::npos);
}

TEST(DemoTate, MatchesGoldenFile) {
  auto r = cli("demo-tate 1 --out " + tmp("tate.json") + " --svg " + tmp("tate.svg"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(io::read_file(tmp("tate.json")), io::read_file(data("tate_c1.json")));
  auto j = io::parse_json(io::read_file(tmp("tate.json")));
  EXPECT_TRUE(j["smooth"].get<bool>());
  EXPECT_TRUE(j["faithfulness"]["fully_faithful"].get<bool>());
  EXPECT_NE(io::read_file(tmp("tate.svg")).find("<svg"), std::string::npos);
}

TEST(DemoTate, DoublingScalesTheCurve) {
  auto one = io::curve_from_json(io::parse_json(cli("demo-tate 1").out)["curve"]);
  auto two = io::curve_from_json(io::parse_json(cli("demo-tate 2").out)["curve"]);
  ASSERT_EQ(one.vertices().size(), two.vertices().size());
  ASSERT_EQ(one.edges().size(), two.edges().size());
  for (std::size_t v = 0; v < one.vertices().size(); ++v)
    for (std::size_t i = 0; i < 2; ++i) {
      const auto &x = one.vertex(v).coords[i], &y = two.vertex(v).coords[i];
      if (x.finite()) EXPECT_EQ(y.value(), 2 * x.value());
      else EXPECT_EQ(x, y);
    }
  for (std::size_t e = 0; e < one.edges().size(); ++e) {
    EXPECT_EQ(one.edge(e).direction, two.edge(e).direction);
    EXPECT_EQ(one.edge(e).a, two.edge(e).a);
    if (one.edge(e).length) EXPECT_EQ(*two.edge(e).length, 2 * *one.edge(e).length);
  }
}

TEST(DemoTate, RejectsNonPositive) {
  EXPECT_EQ(cli("demo-tate 0").code, 2);
  EXPECT_EQ(cli("demo-tate -- -1").code, 2);
  EXPECT_EQ(cli("demo-tate 1/0").code, 2);
}

TEST(Svg, RejectsBadAxes) {
  auto [emb, curve] = tate_demo(R(1));
  EXPECT_THROW(render_svg(curve, 0, 0), Error);
  EXPECT_THROW(render_svg(curve, 0, 2), Error);
  auto svg = render_svg(curve, 1, 0);
  EXPECT_EQ(svg.find("class=\"weight\""), std::string::npos);
}
