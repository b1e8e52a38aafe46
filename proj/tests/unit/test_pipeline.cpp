#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "jspkdm/pipeline.hpp"
#include "oracles.hpp"

using namespace jspkdm;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = JSPKDM_FIXTURES;

// A scratch web application that is removed on scope exit.
struct TempApp {
  fs::path root;
  explicit TempApp(const std::string& tag) {
    root = fs::temp_directory_path() / ("jspkdm-test-" + tag + "-" + std::to_string(std::random_device{}()));
    fs::create_directories(root);
  }
  ~TempApp() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  void write(const std::string& rel, const std::string& text) const {
    fs::create_directories((root / rel).parent_path());
    std::ofstream(root / rel, std::ios::binary) << text;
  }
};

using Triple = std::tuple<std::string, std::string, std::string>;

// (from page, to page-or-class, kind) for every model relationship.
std::set<Triple> model_triples(const kdm::KdmModel& m) {
  std::set<Triple> out;
  auto id_of = [&](kdm::ClassId id) {
    const auto& c = m.at(id);
    return c.source_page ? *c.source_page : c.name;
  };
  for (const auto& r : m.relationships) out.emplace(id_of(r.from), id_of(r.to), r.kind);
  return out;
}

std::set<Triple> internal_edges(const DependencyGraph& g) {
  std::set<Triple> out;
  for (const auto& e : g.edges) {
    if (e.target == TargetKind::InternalPage || e.target == TargetKind::InternalServletClass) {
      out.emplace(e.from, e.to, e.tag_kind);
    }
  }
  return out;
}

std::size_t count_lines(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) n += line.find(needle) != std::string::npos;
  return n;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("glob matching") {
    CHECK(glob_match("**/test/**", "a/test/x.jsp"));
    CHECK(glob_match("**/test/**", "test/x.jsp"));
    CHECK_FALSE(glob_match("**/test/**", "tests/x.jsp"));
    CHECK(glob_match("*.jsp", "a.jsp"));
    CHECK_FALSE(glob_match("*.jsp", "d/a.jsp"));
    CHECK(glob_match("**/*.jsp", "d/e/a.jsp"));
    CHECK(glob_match("**/*.jsp", "a.jsp"));
    CHECK(glob_match("catalog/?tem.jsp", "catalog/item.jsp"));
    CHECK_FALSE(glob_match("catalog?item.jsp", "catalog/item.jsp"));
  }

  TEST_CASE("inventory of the fixture application") {
    auto inv = scan_webapp(kFixtures / "twopage");
    CHECK(inv.jsp_pages == std::vector<std::string>{"/a.jsp", "/b.jsp"});
    REQUIRE(inv.web_xml);
    CHECK(inv.web_xml->filename() == "web.xml");

    auto shop = scan_webapp(kFixtures / "webapp");
    CHECK(std::is_sorted(shop.jsp_pages.begin(), shop.jsp_pages.end()));
    CHECK(shop.jsp_pages.size() == 5);
    CHECK(shop.java_sources.size() == 1);
  }

  TEST_CASE("inventory edge cases") {
    TempApp empty("empty");
    auto inv = scan_webapp(empty.root);
    CHECK(inv.jsp_pages.empty());
    CHECK(inv.java_sources.empty());
    CHECK_FALSE(inv.web_xml);
    CHECK(inv.diagnostics.empty());

    CHECK_THROWS_AS(scan_webapp(empty.root / "missing"), PipelineError);

    TempApp app("globs");
    app.write("a.jsp", "a");
    app.write("test/b.jsp", "b");
    app.write("x/test/c.jspf", "c");
    app.write("d.html", "d");
    auto all = scan_webapp(app.root);
    ScanOptions opts;
    opts.exclude = {"**/test/**"};
    auto filtered = scan_webapp(app.root, opts);
    std::vector<std::string> expected;
    for (const auto& p : all.jsp_pages) {
      if (!glob_match("**/test/**", p.substr(1))) expected.push_back(p);
    }
    CHECK(filtered.jsp_pages == expected);
    CHECK(filtered.jsp_pages == std::vector<std::string>{"/a.jsp"});
    CHECK(all.jsp_pages.size() == 3);
  }

  TEST_CASE("a forward through a jsp-file mapping") {
    auto res = run_pipeline(scan_webapp(kFixtures / "twopage"));
    REQUIRE(res.model.relationships.size() == 1);
    CHECK(model_triples(res.model) == std::set<Triple>{{"/a.jsp", "/b.jsp", "jsp:forward"}});
    REQUIRE(res.graph.edges.size() == 1);
    CHECK(res.graph.edges[0] == GraphEdge{"/a.jsp", "/b.jsp", "jsp:forward", TargetKind::InternalPage});
  }

  TEST_CASE("a page without dependencies") {
    auto res = run_pipeline(scan_webapp(kFixtures / "powers"));
    CHECK(res.model.class_units.size() == 1);
    CHECK(res.model.relationships.empty());
    CHECK(res.graph.edges.empty());
    CHECK(res.report.problem_count() == 0);
  }

  TEST_CASE("external links stay out of the model") {
    TempApp app("external");
    app.write("a.jsp", "<a href=\"https://www.uqam.ca\">UQAM</a>");
    auto res = run_pipeline(scan_webapp(app.root));
    CHECK(res.model.relationships.empty());
    REQUIRE(res.graph.edges.size() == 1);
    CHECK(res.graph.edges[0].target == TargetKind::External);
    CHECK(res.graph.nodes.at("https://www.uqam.ca") == GraphNodeKind::External);
  }

  TEST_CASE("model and graph agree on the shop application") {
    PipelineConfig cfg;
    cfg.context_path = "/shop";
    auto res = run_pipeline(scan_webapp(kFixtures / "webapp"), cfg);
    CHECK(model_triples(res.model) == internal_edges(res.graph));
    CHECK(res.model.relationships.size() == 10);
    CHECK(kdm::validate(res.model).empty());
    for (const auto& e : res.graph.edges) {
      CHECK(res.graph.nodes.contains(e.from));
      CHECK(res.graph.nodes.contains(e.to));
    }
  }

  TEST_CASE("repeated links collapse into one relationship") {
    TempApp app("dups");
    app.write("a.jsp", "<a href=\"b.jsp\">1</a><a href=\"b.jsp\">2</a><a href=\"/b.jsp#x\">3</a>");
    app.write("b.jsp", "b");
    auto res = run_pipeline(scan_webapp(app.root));
    CHECK(res.model.relationships.size() == 1);
    CHECK(res.graph.edges.size() == 1);
    const auto& refs = res.report.pages[0].refs;
    REQUIRE(refs.size() == 3);
    CHECK(refs[1].mutation == kdm::MutationOutcome::Duplicate);
    CHECK(count_lines(emit_dot(res.graph), " -> ") == res.graph.edges.size());
  }

  TEST_CASE("a broken page is isolated") {
    TempApp good("iso-good"), bad("iso-bad");
    for (const auto* app : {&good, &bad}) {
      app->write("a.jsp", "<a href=\"b.jsp\">b</a><a href=\"c.jsp\">c</a>");
      app->write("b.jsp", "<jsp:forward page=\"/a.jsp\"/>");
      app->write("c.jsp", "<a href=\"a.jsp\">a</a>");
    }
    bad.write("c.jsp", "<a href=\"a.jsp\">a</a><% never closed");
    PipelineConfig cfg;
    cfg.jobs = 2;
    auto r1 = run_pipeline(scan_webapp(good.root), cfg);
    auto r2 = run_pipeline(scan_webapp(bad.root), cfg);
    auto j1 = nlohmann::json::parse(report_to_json(r1.report));
    auto j2 = nlohmann::json::parse(report_to_json(r2.report));
    CHECK(j1["pages"][0] == j2["pages"][0]);
    CHECK(j1["pages"][1] == j2["pages"][1]);
    CHECK(j1["pages"][2] != j2["pages"][2]);
    CHECK(j2["pages"][2]["status"] == "failed");
    // the failed page still exists as a target
    CHECK(r2.model.class_units.size() == 3);
    CHECK(model_triples(r2.model).contains({"/a.jsp", "/c.jsp", "a-href"}));
    CHECK(r2.report.problem_count() == 1);
  }

  TEST_CASE("runs are deterministic regardless of worker count") {
    PipelineConfig one, many;
    one.jobs = 1;
    many.jobs = 4;
    one.context_path = many.context_path = "/shop";
    auto inv = scan_webapp(kFixtures / "webapp");
    auto a = run_pipeline(inv, one);
    auto b = run_pipeline(inv, many);
    CHECK(kdm::serialize_model(a.model, kdm::Format::Xmi) == kdm::serialize_model(b.model, kdm::Format::Xmi));
    CHECK(kdm::serialize_model(a.model, kdm::Format::Json) == kdm::serialize_model(b.model, kdm::Format::Json));
    CHECK(emit_dot(a.graph) == emit_dot(b.graph));
    CHECK(report_to_json(a.report) == report_to_json(b.report));
  }

  TEST_CASE("dot output") {
    DependencyGraph empty;
    CHECK(emit_dot(empty) == "digraph deps {\n}\n");

    DependencyGraph g;
    CHECK(g.add_edge({"/a.jsp", "/b.jsp", "jsp:include", TargetKind::InternalPage}, GraphNodeKind::Page));
    CHECK_FALSE(g.add_edge({"/a.jsp", "/b.jsp", "jsp:include", TargetKind::InternalPage}, GraphNodeKind::Page));
    g.add_unresolved({"/a.jsp", "${x}", "dynamic", "a-href"});
    const std::string dot = emit_dot(g);
    CHECK(count_lines(dot, "\"/a.jsp\" -> \"/b.jsp\" [label=\"jsp:include\"]") == 1);
    CHECK(count_lines(dot, "style=dashed") == 1);
    CHECK(count_lines(dot, "label=\"dynamic") == 1);
  }
}
