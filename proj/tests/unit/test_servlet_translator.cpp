#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "jspkdm/servlet_translator.hpp"
#include "oracles.hpp"

using namespace jspkdm;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(JSPKDM_FIXTURES) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ServletUnit translate(std::string_view src, const TranslationOptions& opts = {}) {
  return translate_page(parse_jsp(src, "/t.jsp"), opts);
}

std::string templates_of(const ServletUnit& u) {
  std::string s;
  for (const auto& st : u.service_body) {
    if (st.kind == StatementKind::TemplateEmit) s += st.text;
  }
  return s;
}

std::size_t count(const ServletUnit& u, StatementKind k) {
  return std::count_if(u.service_body.begin(), u.service_body.end(), [&](auto& s) { return s.kind == k; });
}

}  // namespace

TEST_SUITE("servlet_translator") {
  TEST_CASE("declarations become class-level code") {
    auto u = translate("<%!int i=0;%>");
    REQUIRE(u.declarations.size() == 1);
    CHECK(u.declarations[0].kind == StatementKind::InlineCode);
    CHECK(u.declarations[0].text == "int i=0;");
    CHECK(u.service_body.empty());
  }

  TEST_CASE("scriptlets and expressions") {
    auto u = translate("a<% x(); %>b<%= y %>c");
    REQUIRE(u.service_body.size() == 5);
    CHECK(u.service_body[1].kind == StatementKind::InlineCode);
    CHECK(u.service_body[1].text == " x(); ");
    CHECK(u.service_body[3].kind == StatementKind::ExpressionEmit);
    CHECK(u.service_body[3].text == " y ");
    CHECK(templates_of(u) == "abc");
  }

  TEST_CASE("useBean and property access") {
    auto u = translate(
        "<jsp:useBean id=\"myBeans\" class=\"package.BeansClass\" scope=\"session\">"
        "<jsp:setProperty name=\"myBeans\" property=\"*\"/></jsp:useBean>"
        "<jsp:getProperty name=\"myBeans\" property=\"firstName\"/>"
        "<jsp:setProperty name=\"myBeans\" property=\"lastName\" value=\"Doe\"/>");
    REQUIRE(u.service_body.size() == 4);
    const auto& bean = u.service_body[0];
    CHECK(bean.kind == StatementKind::BeanInstantiation);
    CHECK(bean.metadata->bean_id == "myBeans");
    CHECK(bean.metadata->class_name == "package.BeansClass");
    CHECK(u.service_body[1].kind == StatementKind::PropertySet);
    CHECK(u.service_body[1].metadata->property == "*");
    const auto& get = u.service_body[2];
    CHECK(get.kind == StatementKind::PropertyGet);
    CHECK(get.metadata->bean_id == "myBeans");
    CHECK(get.metadata->method == "getFirstName");
    CHECK(u.service_body[3].metadata->method == "setLastName");
    CHECK(u.diagnostics.empty());

    const std::string java = render_servlet_source(u);
    CHECK(java.find("package.BeansClass myBeans = new package.BeansClass();") != std::string::npos);
    CHECK(java.find("out.print(myBeans.getFirstName());") != std::string::npos);
    CHECK(java.find("introspect(myBeans, request)") != std::string::npos);
  }

  TEST_CASE("useBean without class is kept as template text") {
    auto u = translate("<jsp:useBean id=\"b\"/>");
    REQUIRE(u.service_body.size() == 1);
    CHECK(u.service_body[0].kind == StatementKind::TemplateEmit);
    REQUIRE(u.diagnostics.size() == 1);
    CHECK(u.diagnostics[0].code == "UseBeanMissingClassAttr");
  }

  TEST_CASE("unknown bean classes are recorded verbatim") {
    auto u = translate("<jsp:useBean id=\"b\" class=\"no.such.Type\"/>");
    CHECK(u.service_body[0].metadata->class_name == "no.such.Type");
    CHECK(u.diagnostics.empty());
  }

  TEST_CASE("include action is template text") {
    const std::string tag = "<jsp:include page=\"/myPage.jsp.\" flush=\"true\" />";
    auto u = translate(tag);
    REQUIRE(u.service_body.size() == 1);
    CHECK(u.service_body[0].kind == StatementKind::TemplateEmit);
    CHECK(u.service_body[0].text == tag);
    CHECK(render_servlet_source(u).find(R"(out.write("<jsp:include page=\"/myPage.jsp.\" flush=\"true\" />");)") !=
          std::string::npos);
  }

  TEST_CASE("known tag handlers become handler calls") {
    TranslationOptions opts;
    opts.known_tag_handlers = {"c:forEach"};
    auto u = translate("<c:forEach items=\"${list}\" var=\"x\">row</c:forEach>", opts);
    std::vector<std::string> methods;
    for (const auto& s : u.service_body) {
      if (s.kind == StatementKind::TagHandlerCall) methods.push_back(s.metadata->method);
    }
    CHECK(methods == std::vector<std::string>{"setItems", "setVar", "doStartTag", "doEndTag"});
    CHECK(templates_of(u) == "row");
    for (std::size_t i = 1; i < u.service_body.size(); ++i) {
      CHECK(u.service_body[i - 1].origin_span.begin < u.service_body[i].origin_span.begin);
    }
    // without the option the same tag is plain template text
    CHECK(count(translate("<c:forEach items=\"${list}\">row</c:forEach>"), StatementKind::TagHandlerCall) == 0);
  }

  TEST_CASE("page imports are collected") {
    auto u = translate("<%@ page import=\"java.util.*, java.io.File\" %>");
    CHECK(std::find(u.imports.begin(), u.imports.end(), "java.util.*") != u.imports.end());
    CHECK(std::find(u.imports.begin(), u.imports.end(), "java.io.File") != u.imports.end());
  }

  TEST_CASE("powers page: templates equal the page without scripting") {
    const std::string src = slurp("powers/powers.jsp");
    auto u = translate_page(parse_jsp(src, "/powers.jsp"));
    CHECK(u.class_name == "jsp_powers_jsp");
    CHECK(templates_of(u) == oracle::remove_scripting(src));
    CHECK(count(u, StatementKind::InlineCode) == 2);
    CHECK(count(u, StatementKind::ExpressionEmit) == 2);

    const std::string java = render_servlet_source(u);
    std::string joined;
    for (const auto& lit : oracle::emitted_literals(java)) joined += lit;
    CHECK(joined == oracle::remove_scripting(src));
  }

  TEST_CASE("mangled class names") {
    CHECK(mangle_class_name("/powers.jsp") == "jsp_powers_jsp");
    CHECK(mangle_class_name("/a/b.jsp") != mangle_class_name("/a_b.jsp"));
    CHECK(mangle_class_name("/a/b.jsp") != mangle_class_name("/a.b.jsp"));
    CHECK(mangle_class_name("/admin/user_list.jsp") == "jsp_admin$_user$5flist_jsp");
    std::mt19937 rng(7);
    std::set<std::string> paths, names;
    while (paths.size() < 100) paths.insert(oracle::random_path(rng));
    for (const auto& p : paths) names.insert(mangle_class_name(p));
    CHECK(names.size() == 100);
  }

  TEST_CASE("empty unit renders a skeleton") {
    ServletUnit u;
    u.class_name = "Empty";
    const std::string java = render_servlet_source(u);
    CHECK(java.find("public final class Empty extends javax.servlet.http.HttpServlet") != std::string::npos);
    CHECK(java.find("public void _jspInit() {\n  }") != std::string::npos);
    CHECK(java.find("public void _jspDestroy() {\n  }") != std::string::npos);
    CHECK(java.find("_jspService(") != std::string::npos);
    CHECK(java.find("out.") == std::string::npos);
  }

  TEST_CASE("escaping round-trips through an unescape oracle") {
    for (std::string raw : {std::string("say \"hi\""), std::string("back\\slash\n\ttab\r"),
                            std::string("bell\x07 nul\x01"), std::string("é ünïcode")}) {
      CHECK(oracle::unescape_java(escape_java_string(raw)) == raw);
    }
    ServletUnit u = translate("<p title=\"a\">say \"hi\"</p>");
    auto lits = oracle::emitted_literals(render_servlet_source(u));
    REQUIRE(lits.size() == 1);
    CHECK(lits[0] == u.service_body[0].text);
  }

  TEST_CASE("rendering is deterministic") {
    const std::string src = slurp("webapp/index.jsp");
    CHECK(render_servlet_source(translate(src)) == render_servlet_source(translate(src)));
  }
}
