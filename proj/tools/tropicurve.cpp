// Command-line front end: lint, tropicalize, faithfulize, smooth, demo-tate.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tropicurve/io.hpp"
#include "tropicurve/pipeline.hpp"
#include "tropicurve/svg.hpp"

using namespace tropicurve;

namespace {

enum Exit { Ok = 0, Negative = 1, InputError = 2, SearchFailure = 3 };

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::PillarSearchExhausted:
    case ErrorCode::PillarFailure:
    case ErrorCode::NotSeparated:
    case ErrorCode::NoRoom:
    case ErrorCode::Stage0Failure:
    case ErrorCode::CertificateFailure:
    case ErrorCode::MonotonicityViolation:
      return SearchFailure;
    default:
      return InputError;
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else io::write_file(path, text);
}

std::pair<std::size_t, std::size_t> parse_proj(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) fail(ErrorCode::InvalidArgument, "--proj expects i,j");
  try {
    return {std::stoul(s.substr(0, comma)), std::stoul(s.substr(comma + 1))};
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "--proj expects i,j");
  }
}

PipelineOptions options(std::size_t budget, const std::string& core) {
  PipelineOptions opt;
  opt.budget = budget;
  if (core != "auto") {
    auto j = io::parse_json(io::read_file(core));
    std::vector<std::string> ids;
    for (const auto& e : io::detail::field(j, "edges")) ids.push_back(io::detail::text(e, "edge id"));
    opt.core_edges = std::move(ids);
  }
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tropicurve: faithful and smooth tropicalizations of metric graphs"};
  app.require_subcommand(1);
  std::string in, out, svg, proj = "0,1", core = "auto", report;
  std::size_t budget = 4096;
  std::string c_text = "1";

  auto* lint = app.add_subcommand("lint", "smoothness and balancing of a curve file");
  lint->add_option("--in", in, "curve JSON")->required();
  lint->add_option("--out", out, "report JSON (default stdout)");

  auto* trop = app.add_subcommand("tropicalize", "image curve of an embedding");
  trop->add_option("--in", in, "embedding JSON")->required();
  trop->add_option("--out", out, "curve JSON (default stdout)");
  trop->add_option("--svg", svg, "SVG drawing of a 2-D projection");
  trop->add_option("--proj", proj, "projection axes i,j")->capture_default_str();

  auto* faith = app.add_subcommand("faithfulize", "refine an embedding until it is fully faithful");
  auto* smooth = app.add_subcommand("smooth", "refine an embedding until its image is smooth");
  for (auto* sub : {faith, smooth}) {
    sub->add_option("--in", in, "embedding or skeleton JSON")->required();
    sub->add_option("--out", out, "refined embedding JSON (default stdout)");
    sub->add_option("--report", report, "pipeline report JSON");
    sub->add_option("--svg", svg, "SVG drawing of the image");
    sub->add_option("--proj", proj, "projection axes i,j")->capture_default_str();
    sub->add_option("--budget", budget, "pillar candidate budget")->capture_default_str();
    sub->add_option("--core", core, "auto, or a JSON file {\"edges\": [...]} naming the core")->capture_default_str();
  }

  auto* tate = app.add_subcommand("demo-tate", "honeycomb embedding of a Tate curve");
  tate->add_option("c", c_text, "arc length (rational)")->capture_default_str();
  tate->add_option("--out", out, "embedding and curve JSON (default stdout)");
  tate->add_option("--svg", svg, "SVG drawing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (lint->parsed()) {
      auto curve = io::curve_from_json(io::parse_json(io::read_file(in)));
      emit(out, io::dump(io::lint_to_json(curve)));
      std::cerr << io::lint_text(curve);
      bool good = check_smooth(curve).smooth && check_balancing(curve).balanced;
      return good ? Ok : Negative;
    }
    if (trop->parsed()) {
      auto emb = io::embedding_from_json(io::parse_json(io::read_file(in)));
      auto [curve, map] = tropicalize(emb);
      emit(out, io::dump(io::curve_to_json(curve)));
      if (!svg.empty()) {
        auto [i, j] = parse_proj(proj);
        io::write_file(svg, render_svg(curve, i, j));
      }
      return Ok;
    }
    if (faith->parsed() || smooth->parsed()) {
      auto j = io::parse_json(io::read_file(in));
      Embedding emb = j.contains("skeleton") ? io::embedding_from_json(j)
                                             : Embedding{io::graph_from_json(j), {}, {}, true};
      auto opt = options(budget, core);
      auto [res, rep] = faith->parsed() ? fully_faithful_pipeline(std::move(emb), opt)
                                        : smoothing_pipeline(std::move(emb), opt);
      emit(out, io::dump(io::embedding_to_json(res)));
      if (!report.empty()) io::write_file(report, io::dump(io::report_to_json(res, rep)));
      if (!svg.empty()) {
        auto [i, k] = parse_proj(proj);
        io::write_file(svg, render_svg(tropicalize(res).first, i, k));
      }
      for (const auto& c : rep.certificates) std::cerr << "certificate: " << c << "\n";
      return Ok;
    }
    if (tate->parsed()) {
      auto [emb, curve] = tate_demo(parse_rational(c_text));
      io::Json j;
      j["schema"] = io::kSchema;
      j["embedding"] = io::embedding_to_json(emb);
      j["curve"] = io::curve_to_json(curve);
      j["smooth"] = check_smooth(curve).smooth;
      j["faithfulness"] = io::faithfulness_to_json(is_fully_faithful(emb));
      emit(out, io::dump(j));
      if (!svg.empty()) io::write_file(svg, render_svg(curve));
      return Ok;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return InputError;
  }
  return Ok;
}
