#include "jspkdm/servlet_translator.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "jspkdm/paths.hpp"

namespace jspkdm {

namespace {

constexpr std::array<std::pair<StatementKind, const char*>, 7> kStatementNames{{
    {StatementKind::InlineCode, "InlineCode"},
    {StatementKind::TemplateEmit, "TemplateEmit"},
    {StatementKind::BeanInstantiation, "BeanInstantiation"},
    {StatementKind::PropertyGet, "PropertyGet"},
    {StatementKind::PropertySet, "PropertySet"},
    {StatementKind::TagHandlerCall, "TagHandlerCall"},
    {StatementKind::ExpressionEmit, "ExpressionEmit"},
}};

const std::array<const char*, 3> kDefaultImports{"javax.servlet.*", "javax.servlet.http.*", "javax.servlet.jsp.*"};

bool is_alnum(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }

std::string hex_escape(unsigned char c) {
  static const char* digits = "0123456789abcdef";
  return {'$', digits[c >> 4], digits[c & 0xF]};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

// Java source for an attribute value: request-time expressions pass
// through, anything else becomes a string literal.
std::string java_value(const Attribute& a) {
  std::string_view v = trim(a.value);
  if (v.starts_with("<%=") && v.ends_with("%>") && v.find("<%", 2) == std::string_view::npos) {
    return std::string(trim(v.substr(3, v.size() - 5)));
  }
  return "\"" + escape_java_string(a.value) + "\"";
}

class Translator {
 public:
  Translator(const JspDocument& doc, const TranslationOptions& options, ServletUnit& unit)
      : doc_(doc), options_(options), unit_(unit) {}

  void run() {
    translate(doc_.nodes);
    flush();
  }

 private:
  void append_template(Span s) {
    if (s.size() == 0) return;
    if (!run_) {
      run_ = CodeStatement{StatementKind::TemplateEmit, {}, std::nullopt, {s.begin, s.begin}};
    }
    run_->text += doc_.text(s);
    run_->origin_span.end = s.end;
  }

  void flush() {
    if (run_) unit_.service_body.push_back(std::move(*run_));
    run_.reset();
  }

  void emit(StatementKind kind, std::string text, Span origin, std::optional<StatementMetadata> meta = {}) {
    flush();
    unit_.service_body.push_back(CodeStatement{kind, std::move(text), std::move(meta), origin});
  }

  void diagnose(const JspNode& n, std::string code, std::string message) {
    unit_.diagnostics.push_back({Severity::Warning, std::move(code), std::move(message), doc_.page_path, n.span});
  }

  // Open tag, translated children, close tag.
  void translate_generic(const JspNode& n) {
    if (n.children.empty()) {
      append_template(n.span);
      return;
    }
    append_template({n.span.begin, n.children.front().span.begin});
    translate(n.children);
    append_template({n.children.back().span.end, n.span.end});
  }

  Span close_tag_span(const JspNode& n) const {
    return {n.children.empty() ? n.tag_end : n.children.back().span.end, n.span.end};
  }

  void translate(const std::vector<JspNode>& nodes) {
    for (const auto& n : nodes) translate(n);
  }

  void translate(const JspNode& n) {
    switch (n.kind) {
      case NodeKind::TemplateText:
        append_template(n.span);
        return;
      case NodeKind::Comment:
        flush();
        return;
      case NodeKind::Scriptlet:
        emit(StatementKind::InlineCode, n.body, n.span);
        return;
      case NodeKind::Expression:
        emit(StatementKind::ExpressionEmit, n.body, n.span);
        return;
      case NodeKind::Declaration:
        flush();
        unit_.declarations.push_back(CodeStatement{StatementKind::InlineCode, n.body, std::nullopt, n.span});
        return;
      case NodeKind::Directive:
        collect_imports(n);
        translate_generic(n);
        return;
      case NodeKind::HtmlElement:
        translate_generic(n);
        return;
      case NodeKind::StandardAction:
        translate_standard_action(n);
        return;
      case NodeKind::CustomAction:
        if (!n.closing && options_.known_tag_handlers.contains(n.name)) {
          translate_tag_handler(n);
        } else {
          translate_generic(n);
        }
        return;
    }
  }

  void collect_imports(const JspNode& n) {
    if (n.name != "page" && n.name != "jsp:directive.page") return;
    const Attribute* imp = n.attribute("import");
    if (!imp) return;
    std::string_view list = imp->value;
    while (!list.empty()) {
      auto comma = list.find(',');
      std::string_view item = trim(list.substr(0, comma));
      if (!item.empty()) {
        std::string s(item);
        if (std::find(unit_.imports.begin(), unit_.imports.end(), s) == unit_.imports.end()) unit_.imports.push_back(s);
      }
      if (comma == std::string_view::npos) break;
      list.remove_prefix(comma + 1);
    }
  }

  void translate_standard_action(const JspNode& n) {
    if (n.closing) {
      translate_generic(n);
      return;
    }
    const Span open_tag{n.span.begin, n.tag_end};
    if (n.name == "jsp:useBean") {
      const Attribute* id = n.attribute("id");
      const Attribute* cls = n.attribute("class");
      if (!cls || cls->value.empty()) {
        diagnose(n, "UseBeanMissingClassAttr", "jsp:useBean without a class attribute kept as template text");
        translate_generic(n);
        return;
      }
      if (!id || id->value.empty()) {
        diagnose(n, "missing-attribute", "jsp:useBean without an id attribute kept as template text");
        translate_generic(n);
        return;
      }
      StatementMetadata meta;
      meta.bean_id = id->value;
      meta.class_name = cls->value;
      emit(StatementKind::BeanInstantiation, std::string(doc_.text(open_tag)), open_tag, meta);
      // Body runs on creation; the end tag itself produces no output.
      translate(n.children);
      flush();
      return;
    }
    if (n.name == "jsp:getProperty" || n.name == "jsp:setProperty") {
      const bool getter = n.name == "jsp:getProperty";
      const Attribute* name = n.attribute("name");
      const Attribute* prop = n.attribute("property");
      if (!name || !prop || name->value.empty() || prop->value.empty()) {
        diagnose(n, "missing-attribute", n.name + " needs name and property attributes");
        translate_generic(n);
        return;
      }
      StatementMetadata meta;
      meta.bean_id = name->value;
      meta.property = prop->value;
      if (getter) {
        meta.method = "get" + capitalize(prop->value);
      } else if (prop->value != "*") {
        meta.method = "set" + capitalize(prop->value);
        if (const Attribute* value = n.attribute("value")) {
          meta.value = java_value(*value);
        } else {
          const Attribute* param = n.attribute("param");
          meta.value = "request.getParameter(\"" + escape_java_string(param ? param->value : prop->value) + "\")";
        }
      }
      emit(getter ? StatementKind::PropertyGet : StatementKind::PropertySet, std::string(doc_.text(open_tag)),
           open_tag, meta);
      translate(n.children);
      flush();
      return;
    }
    translate_generic(n);
  }

  void translate_tag_handler(const JspNode& n) {
    std::string var = "_jspx_th_";
    for (char c : n.name) var += is_alnum(c) ? c : '_';
    var += "_" + std::to_string(handler_count_++);
    auto call = [&](std::string method, std::string property, std::string value, Span origin) {
      StatementMetadata meta;
      meta.bean_id = var;
      meta.class_name = n.name;
      meta.property = std::move(property);
      meta.method = std::move(method);
      meta.value = std::move(value);
      emit(StatementKind::TagHandlerCall, std::string(doc_.text(origin)), origin, std::move(meta));
    };
    for (const auto& a : n.attributes) call("set" + capitalize(a.name), a.name, java_value(a), a.span);
    // doStartTag is anchored on the start tag's closing delimiter, doEndTag
    // on the end tag ("/>" is split between the two for empty tags).
    if (n.self_closing) {
      call("doStartTag", {}, {}, {n.tag_end - 2, n.tag_end - 1});
      call("doEndTag", {}, {}, {n.tag_end - 1, n.tag_end});
      return;
    }
    call("doStartTag", {}, {}, {n.tag_end - 1, n.tag_end});
    if (!n.has_close_tag()) {
      diagnose(n, "unclosed-tag", "<" + n.name + "> has no end tag; doEndTag not emitted");
      return;
    }
    translate(n.children);
    call("doEndTag", {}, {}, close_tag_span(n));
  }

  const JspDocument& doc_;
  const TranslationOptions& options_;
  ServletUnit& unit_;
  std::optional<CodeStatement> run_;
  int handler_count_ = 0;
};

}  // namespace

const char* to_string(StatementKind k) {
  for (const auto& [kind, name] : kStatementNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<StatementKind> statement_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kStatementNames) {
    if (s == name) return kind;
  }
  return std::nullopt;
}

std::string mangle_class_name(std::string_view page_path) {
  std::string out = "jsp_";
  if (page_path.starts_with('/')) page_path.remove_prefix(1);
  for (char ch : page_path) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_alnum(ch)) {
      out += ch;
    } else if (ch == '.') {
      out += '_';
    } else if (ch == '/') {
      out += "$_";
    } else {
      out += hex_escape(c);
    }
  }
  return out;
}

std::string package_for_page(std::string_view page_path, std::string_view base_package) {
  std::string pkg(base_package);
  std::string dir = paths::directory_of(page_path);
  std::string_view rest(dir);
  rest.remove_prefix(1);
  while (!rest.empty()) {
    auto slash = rest.find('/');
    std::string_view seg = rest.substr(0, slash);
    std::string mangled;
    for (char ch : seg) mangled += is_alnum(ch) ? std::string(1, ch) : hex_escape(static_cast<unsigned char>(ch));
    if (!mangled.empty() && mangled[0] >= '0' && mangled[0] <= '9') mangled.insert(0, "_");
    pkg += "." + mangled;
    rest.remove_prefix(slash + 1);
  }
  return pkg;
}

std::string escape_java_string(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char ch : raw) {
    switch (ch) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          static const char* digits = "0123456789abcdef";
          out += "\\u00";
          out += digits[(ch >> 4) & 0xF];
          out += digits[ch & 0xF];
        } else {
          out += ch;
        }
    }
  }
  return out;
}

ServletUnit translate_page(const JspDocument& doc, const TranslationOptions& options) {
  ServletUnit unit;
  unit.source_page = doc.page_path;
  unit.class_name = mangle_class_name(doc.page_path);
  unit.package_name = package_for_page(doc.page_path, options.base_package);
  for (const char* imp : kDefaultImports) unit.imports.emplace_back(imp);
  Translator(doc, options, unit).run();
  return unit;
}

namespace {

void render_statement(std::ostringstream& os, const CodeStatement& s) {
  constexpr const char* ind = "    ";
  const StatementMetadata empty;
  const StatementMetadata& m = s.metadata ? *s.metadata : empty;
  switch (s.kind) {
    case StatementKind::InlineCode:
      os << ind << trim(s.text) << "\n";
      break;
    case StatementKind::TemplateEmit:
      os << ind << "out.write(\"" << escape_java_string(s.text) << "\");\n";
      break;
    case StatementKind::ExpressionEmit:
      os << ind << "out.print(" << trim(s.text) << ");\n";
      break;
    case StatementKind::BeanInstantiation:
      os << ind << m.class_name << " " << m.bean_id << " = new " << m.class_name << "();\n";
      break;
    case StatementKind::PropertyGet:
      os << ind << "out.print(" << m.bean_id << "." << m.method << "());\n";
      break;
    case StatementKind::PropertySet:
      if (m.property == "*") {
        os << ind << "org.apache.jasper.runtime.JspRuntimeLibrary.introspect(" << m.bean_id << ", request);\n";
      } else {
        os << ind << m.bean_id << "." << m.method << "(" << m.value << ");\n";
      }
      break;
    case StatementKind::TagHandlerCall:
      if (m.method == "doStartTag") os << ind << "// <" << m.class_name << ">\n";
      os << ind << m.bean_id << "." << m.method << "(" << m.value << ");\n";
      break;
  }
}

}  // namespace

std::string render_servlet_source(const ServletUnit& unit) {
  std::ostringstream os;
  if (!unit.package_name.empty()) os << "package " << unit.package_name << ";\n\n";
  for (const auto& imp : unit.imports) os << "import " << imp << ";\n";
  if (!unit.imports.empty()) os << "\n";
  if (!unit.source_page.empty()) os << "// Generated from " << unit.source_page << "\n";
  os << "public final class " << unit.class_name << " extends javax.servlet.http.HttpServlet {\n";
  for (const auto& d : unit.declarations) os << "\n  " << trim(d.text) << "\n";
  os << "\n  public void _jspInit() {\n";
  for (const auto& s : unit.init_body) render_statement(os, s);
  os << "  }\n\n  public void _jspDestroy() {\n";
  for (const auto& s : unit.destroy_body) render_statement(os, s);
  os << "  }\n\n"
     << "  public void _jspService(HttpServletRequest request, HttpServletResponse response)\n"
     << "      throws java.io.IOException, ServletException {\n";
  if (!unit.service_body.empty()) {
    os << "    response.setContentType(\"text/html\");\n"
       << "    PageContext pageContext = JspFactory.getDefaultFactory().getPageContext(\n"
       << "        this, request, response, null, true, 8192, true);\n"
       << "    JspWriter out = pageContext.getOut();\n";
  }
  for (const auto& s : unit.service_body) render_statement(os, s);
  os << "  }\n}\n";
  return os.str();
}

}  // namespace jspkdm
