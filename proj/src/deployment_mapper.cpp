#include "jspkdm/deployment_mapper.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "jspkdm/paths.hpp"

namespace jspkdm {

namespace pt = boost::property_tree;

const char* to_string(DeclSource s) { return s == DeclSource::WebXml ? "web-xml" : "annotation"; }

const char* to_string(PatternKind k) {
  switch (k) {
    case PatternKind::Exact: return "exact";
    case PatternKind::PathPrefix: return "path-prefix";
    case PatternKind::Extension: return "extension";
    case PatternKind::Default: return "default";
  }
  return "?";
}

const char* to_string(TargetKind k) {
  switch (k) {
    case TargetKind::InternalPage: return "internal-page";
    case TargetKind::InternalServletClass: return "internal-servlet-class";
    case TargetKind::External: return "external";
    case TargetKind::Unresolved: return "unresolved";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n\f";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string_view local_name(std::string_view qname) {
  auto colon = qname.rfind(':');
  return colon == std::string_view::npos ? qname : qname.substr(colon + 1);
}

bool is_markup_key(std::string_view key) { return key.starts_with('<'); }

}  // namespace

// ---------------------------------------------------------------------------
// web.xml

WebXmlContents parse_web_xml(std::string_view content) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(content)};
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw XmlSyntaxError(std::string("web.xml: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  const pt::ptree* root = nullptr;
  for (const auto& [key, child] : tree) {
    if (is_markup_key(key)) continue;
    if (root) throw XmlSyntaxError("web.xml: more than one root element");
    root = &child;
  }
  if (!root) throw XmlSyntaxError("web.xml: no root element");

  WebXmlContents out;
  auto text_of = [](const pt::ptree& parent, std::string_view name) -> std::optional<std::string> {
    for (const auto& [key, child] : parent) {
      if (local_name(key) == name) return trim(child.data());
    }
    return std::nullopt;
  };
  for (const auto& [key, child] : *root) {
    const auto name = local_name(key);
    if (name == "servlet") {
      auto servlet_name = text_of(child, "servlet-name");
      if (!servlet_name || servlet_name->empty()) {
        out.diagnostics.push_back({Severity::Warning, "MissingServletName", "<servlet> without <servlet-name> skipped",
                                   "WEB-INF/web.xml", {}});
        continue;
      }
      ServletDecl d;
      d.servlet_name = *servlet_name;
      d.servlet_class = text_of(child, "servlet-class");
      d.jsp_file = text_of(child, "jsp-file");
      if (d.servlet_class && d.servlet_class->empty()) d.servlet_class.reset();
      if (d.jsp_file && d.jsp_file->empty()) d.jsp_file.reset();
      if (d.servlet_class.has_value() == d.jsp_file.has_value()) {
        out.diagnostics.push_back({Severity::Warning, "invalid-servlet",
                                   "servlet '" + d.servlet_name + "' needs exactly one of servlet-class/jsp-file",
                                   "WEB-INF/web.xml", {}});
        continue;
      }
      out.decls.push_back(std::move(d));
    } else if (name == "servlet-mapping") {
      auto servlet_name = text_of(child, "servlet-name");
      if (!servlet_name || servlet_name->empty()) {
        out.diagnostics.push_back({Severity::Warning, "MissingServletName",
                                   "<servlet-mapping> without <servlet-name> skipped", "WEB-INF/web.xml", {}});
        continue;
      }
      for (const auto& [mkey, m] : child) {
        if (local_name(mkey) == "url-pattern") out.mappings.push_back({trim(m.data()), *servlet_name});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// @WebServlet

namespace {

enum class Tok { String, Ident, Punct, End };

struct Token {
  Tok type = Tok::End;
  std::string text;  // unescaped for strings
};

// Java tokenizer reduced to what annotation scanning needs: comments are
// skipped, string/char literals are single tokens.
class JavaLexer {
 public:
  explicit JavaLexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_trivia();
    if (pos_ >= src_.size()) return {};
    const char c = src_[pos_];
    if (c == '"') return string_literal();
    if (c == '\'') {
      ++pos_;
      while (pos_ < src_.size() && src_[pos_] != '\'') pos_ += src_[pos_] == '\\' ? 2 : 1;
      ++pos_;
      return {Tok::Punct, "'"};
    }
    if (is_ident_start(c)) {
      std::size_t b = pos_;
      while (pos_ < src_.size() && (is_ident_start(src_[pos_]) || (src_[pos_] >= '0' && src_[pos_] <= '9'))) ++pos_;
      return {Tok::Ident, std::string(src_.substr(b, pos_ - b))};
    }
    ++pos_;
    return {Tok::Punct, std::string(1, c)};
  }

 private:
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
        ++pos_;
      } else if (src_.substr(pos_).starts_with("//")) {
        auto nl = src_.find('\n', pos_);
        pos_ = nl == std::string_view::npos ? src_.size() : nl + 1;
      } else if (src_.substr(pos_).starts_with("/*")) {
        auto end = src_.find("*/", pos_ + 2);
        pos_ = end == std::string_view::npos ? src_.size() : end + 2;
      } else {
        return;
      }
    }
  }

  Token string_literal() {
    if (src_.substr(pos_).starts_with("\"\"\"")) {
      auto end = src_.find("\"\"\"", pos_ + 3);
      std::size_t b = pos_ + 3;
      pos_ = end == std::string_view::npos ? src_.size() : end + 3;
      return {Tok::String, std::string(src_.substr(b, (end == std::string_view::npos ? src_.size() : end) - b))};
    }
    ++pos_;
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
      char c = src_[pos_++];
      if (c == '\\' && pos_ < src_.size()) {
        char e = src_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          default: out += e;
        }
      } else {
        out += c;
      }
    }
    ++pos_;
    return {Tok::String, out};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

struct AnnotationArgs {
  std::vector<std::string> patterns;
  std::string name;
  std::vector<std::string> problems;
};

// Reads an element value: a string, or {string, ...}. Non-literal parts are
// reported and skipped to the next ',' or ')' at depth zero.
std::vector<std::string> read_value(JavaLexer& lex, Token& tok, std::vector<std::string>& problems) {
  std::vector<std::string> values;
  auto skip_expr = [&](int depth) {
    problems.push_back("non-literal annotation value near '" + tok.text + "'");
    while (tok.type != Tok::End) {
      if (tok.type == Tok::Punct && (tok.text == "(" || tok.text == "{")) ++depth;
      if (tok.type == Tok::Punct && (tok.text == ")" || tok.text == "}")) {
        if (depth == 0) return;
        --depth;
      }
      if (tok.type == Tok::Punct && tok.text == "," && depth == 0) return;
      tok = lex.next();
    }
  };
  if (tok.type == Tok::String) {
    values.push_back(tok.text);
    tok = lex.next();
    if (tok.type == Tok::Punct && tok.text == "+") {
      values.clear();
      skip_expr(0);
    }
    return values;
  }
  if (tok.type == Tok::Punct && tok.text == "{") {
    tok = lex.next();
    while (tok.type != Tok::End && !(tok.type == Tok::Punct && tok.text == "}")) {
      if (tok.type == Tok::String) {
        values.push_back(tok.text);
        tok = lex.next();
      } else if (tok.type == Tok::Punct && tok.text == ",") {
        tok = lex.next();
      } else {
        skip_expr(0);
      }
    }
    if (tok.type != Tok::End) tok = lex.next();
    return values;
  }
  skip_expr(0);
  return values;
}

AnnotationArgs read_annotation_args(JavaLexer& lex, Token& tok) {
  AnnotationArgs args;
  if (!(tok.type == Tok::Punct && tok.text == "(")) return args;
  tok = lex.next();
  if (tok.type == Tok::Punct && tok.text == ")") {
    tok = lex.next();
    return args;
  }
  // Either a bare element value or a list of name = value pairs.
  if (tok.type != Tok::Ident) {
    args.patterns = read_value(lex, tok, args.problems);
  } else {
    while (tok.type == Tok::Ident) {
      std::string key = tok.text;
      tok = lex.next();
      if (!(tok.type == Tok::Punct && tok.text == "=")) {
        args.problems.push_back("expected '=' after " + key);
        break;
      }
      tok = lex.next();
      auto values = read_value(lex, tok, args.problems);
      if (key == "value" || key == "urlPatterns") {
        args.patterns.insert(args.patterns.end(), values.begin(), values.end());
      } else if (key == "name" && !values.empty()) {
        args.name = values.front();
      }
      if (tok.type == Tok::Punct && tok.text == ",") tok = lex.next();
    }
  }
  int depth = 0;
  while (tok.type != Tok::End) {
    if (tok.type == Tok::Punct && tok.text == "(") ++depth;
    if (tok.type == Tok::Punct && tok.text == ")" && depth-- == 0) break;
    tok = lex.next();
  }
  if (tok.type != Tok::End) tok = lex.next();
  return args;
}

}  // namespace

AnnotationScan scan_webservlet_annotations(std::string_view java_source, std::string_view class_qualified_name) {
  AnnotationScan out;
  JavaLexer lex(java_source);
  Token tok = lex.next();
  while (tok.type != Tok::End) {
    if (!(tok.type == Tok::Punct && tok.text == "@")) {
      tok = lex.next();
      continue;
    }
    tok = lex.next();
    std::string last;
    while (tok.type == Tok::Ident) {
      last = tok.text;
      tok = lex.next();
      if (tok.type == Tok::Punct && tok.text == ".") {
        tok = lex.next();
      } else {
        break;
      }
    }
    if (last != "WebServlet") continue;
    AnnotationArgs args = read_annotation_args(lex, tok);
    for (const auto& p : args.problems) {
      out.diagnostics.push_back({Severity::Warning, "annotation-value", p, std::string(class_qualified_name), {}});
    }
    if (args.patterns.empty()) {
      out.diagnostics.push_back({Severity::Warning, "annotation-no-patterns",
                                 "@WebServlet without literal URL patterns", std::string(class_qualified_name), {}});
    }
    ServletDecl decl;
    decl.servlet_name = args.name.empty() ? std::string(class_qualified_name) : args.name;
    decl.servlet_class = std::string(class_qualified_name);
    decl.source = DeclSource::Annotation;
    for (auto& p : args.patterns) out.mappings.push_back({std::move(p), decl});
  }
  return out;
}

std::string qualified_class_name(std::string_view java_source, std::string_view file_stem) {
  JavaLexer lex(java_source);
  Token tok = lex.next();
  while (tok.type != Tok::End) {
    if (tok.type == Tok::Ident && tok.text == "package") {
      std::string pkg;
      tok = lex.next();
      while (tok.type == Tok::Ident || (tok.type == Tok::Punct && tok.text == ".")) {
        pkg += tok.text;
        tok = lex.next();
      }
      if (!pkg.empty()) return pkg + "." + std::string(file_stem);
      break;
    }
    if (tok.type == Tok::Ident && (tok.text == "class" || tok.text == "import" || tok.text == "interface")) break;
    tok = lex.next();
  }
  return std::string(file_stem);
}

// ---------------------------------------------------------------------------
// Lookup table

std::optional<PatternKind> classify_pattern(std::string_view p) {
  if (p == "/") return PatternKind::Default;
  if (p.starts_with("*.")) {
    if (p.size() > 2 && p.find_first_of("/*", 2) == std::string_view::npos) return PatternKind::Extension;
    return std::nullopt;
  }
  if (!p.starts_with('/')) return std::nullopt;
  if (p.ends_with("/*") && p.find('*') == p.size() - 1) return PatternKind::PathPrefix;
  if (p.find('*') == std::string_view::npos) return PatternKind::Exact;
  return std::nullopt;
}

const ServletDecl* UrlMappingTable::decl(std::string_view servlet_name) const {
  for (const auto& d : decls) {
    if (d.servlet_name == servlet_name) return &d;
  }
  return nullptr;
}

UrlMappingTable build_lookup_table(const std::vector<ServletDecl>& decls, const std::vector<UrlMapping>& mappings,
                                   std::string_view context_path, std::set<std::string, std::less<>> known_pages) {
  UrlMappingTable table;
  table.known_pages = std::move(known_pages);
  std::string ctx = trim(context_path);
  if (!ctx.empty()) {
    ctx = paths::normalize(ctx);
    if (ctx.ends_with('/')) ctx.pop_back();
  }
  table.context_path = ctx;
  auto note = [&](std::string code, std::string msg) {
    table.diagnostics.push_back({Severity::Warning, std::move(code), std::move(msg), {}, {}});
  };

  for (const auto& d : decls) {
    if (d.servlet_class.has_value() == d.jsp_file.has_value()) {
      note("invalid-servlet", "servlet '" + d.servlet_name + "' needs exactly one of servlet-class/jsp-file");
      continue;
    }
    auto existing = std::find_if(table.decls.begin(), table.decls.end(),
                                 [&](const ServletDecl& e) { return e.servlet_name == d.servlet_name; });
    if (existing == table.decls.end()) {
      table.decls.push_back(d);
    } else if (existing->source == DeclSource::Annotation && d.source == DeclSource::WebXml) {
      note("shadowed-servlet", "web.xml servlet '" + d.servlet_name + "' overrides its @WebServlet declaration");
      *existing = d;
    } else {
      note("shadowed-servlet", "duplicate servlet '" + d.servlet_name + "' from " + to_string(d.source) + " ignored");
    }
  }

  for (const auto& m : mappings) {
    auto kind = classify_pattern(m.url_pattern);
    if (!kind) {
      note("invalid-pattern", "url-pattern '" + m.url_pattern + "' is not exact, /prefix/*, *.ext or /");
      continue;
    }
    const ServletDecl* d = table.decl(m.servlet_name);
    if (!d) {
      note("dangling-mapping", "url-pattern '" + m.url_pattern + "' maps to undeclared servlet '" + m.servlet_name + "'");
      continue;
    }
    auto existing = std::find_if(table.entries.begin(), table.entries.end(),
                                 [&](const MappingEntry& e) { return e.url_pattern == m.url_pattern; });
    if (existing == table.entries.end()) {
      table.entries.push_back({m.url_pattern, m.servlet_name, *kind});
      continue;
    }
    if (existing->servlet_name == m.servlet_name) continue;
    const ServletDecl* held = table.decl(existing->servlet_name);
    if (held->source == DeclSource::Annotation && d->source == DeclSource::WebXml) {
      note("shadowed-mapping", "'" + m.url_pattern + "': web.xml servlet '" + m.servlet_name +
                                   "' shadows @WebServlet '" + existing->servlet_name + "'");
      existing->servlet_name = m.servlet_name;
    } else {
      note("shadowed-mapping", "'" + m.url_pattern + "': servlet '" + m.servlet_name + "' shadowed by '" +
                                   existing->servlet_name + "'");
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Resolution

bool has_scheme(std::string_view url) {
  if (url.starts_with("//")) return true;
  if (url.empty() || !std::isalpha(static_cast<unsigned char>(url[0]))) return false;
  for (std::size_t i = 1; i < url.size(); ++i) {
    const char c = url[i];
    if (c == ':') return true;
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.')) return false;
  }
  return false;
}

namespace {

struct Match {
  const MappingEntry* entry;
  int tier;        // 0 exact, 1 prefix, 2 extension, 3 default
  std::size_t len; // prefix length for tier 1
};

std::optional<Match> match_entry(const MappingEntry& e, std::string_view path) {
  switch (e.kind) {
    case PatternKind::Exact:
      if (path == e.url_pattern) return Match{&e, 0, e.url_pattern.size()};
      return std::nullopt;
    case PatternKind::PathPrefix: {
      std::string_view base = std::string_view(e.url_pattern).substr(0, e.url_pattern.size() - 2);
      if (path == base || (path.starts_with(base) && path.size() > base.size() && path[base.size()] == '/')) {
        return Match{&e, 1, base.size()};
      }
      return std::nullopt;
    }
    case PatternKind::Extension: {
      std::string_view last = path.substr(path.rfind('/') + 1);
      auto dot = last.rfind('.');
      if (dot != std::string_view::npos && last.substr(dot + 1) == std::string_view(e.url_pattern).substr(2)) {
        return Match{&e, 2, 0};
      }
      return std::nullopt;
    }
    case PatternKind::Default:
      return Match{&e, 3, 0};
  }
  return std::nullopt;
}

}  // namespace

const MappingEntry* match_pattern(const UrlMappingTable& table, std::string_view path,
                                  std::vector<std::string>* shadowed) {
  std::optional<Match> best;
  std::vector<const MappingEntry*> all;
  for (const auto& e : table.entries) {
    auto m = match_entry(e, path);
    if (!m) continue;
    all.push_back(&e);
    if (!best || m->tier < best->tier || (m->tier == best->tier && m->len > best->len)) best = m;
  }
  if (!best) return nullptr;
  if (shadowed) {
    for (const auto* e : all) {
      if (e != best->entry) shadowed->push_back(e->url_pattern);
    }
  }
  return best->entry;
}

ResolvedTarget resolve_url(const UrlMappingTable& table, const UrlRef& ref, std::string_view source_page) {
  ResolvedTarget out;
  std::string url = trim(ref.raw_url);
  out.normalized_url = url;
  if (ref.dynamic || is_dynamic_url(url)) {
    out.reason = "dynamic";
    return out;
  }
  if (has_scheme(url)) {
    out.kind = TargetKind::External;
    return out;
  }
  if (auto hash = url.find('#'); hash != std::string::npos) url.erase(hash);
  if (auto q = url.find('?'); q != std::string::npos) url.erase(q);
  if (url.empty()) {
    out.reason = "same-document reference";
    return out;
  }
  {
    std::string_view last = std::string_view(url).substr(url.rfind('/') + 1);
    if (last.ends_with('.') && last != "." && last != "..") {
      while (url.ends_with('.')) url.pop_back();
      out.notes.push_back("trailing '.' trimmed");
    }
  }
  if (!url.starts_with('/')) url = paths::directory_of(source_page) + url;
  bool clamped = false;
  std::string path = paths::normalize(url, &clamped);
  if (clamped) out.notes.push_back("'..' above the context root clamped");
  const std::string& ctx = table.context_path;
  if (!ctx.empty() && (path == ctx || path.starts_with(ctx + "/"))) {
    path = path.substr(ctx.size());
    if (path.empty()) path = "/";
  }
  out.normalized_url = path;

  const bool known_page = table.known_pages.contains(path);
  if (const MappingEntry* e = match_pattern(table, path, &out.shadowed)) {
    out.matched_pattern = e->url_pattern;
    if (e->kind == PatternKind::Default && known_page) {
      out.kind = TargetKind::InternalPage;
      out.page_path = path;
      out.notes.push_back("implicit JSP mapping outranks the default servlet");
      return out;
    }
    const ServletDecl* d = table.decl(e->servlet_name);
    if (d && d->jsp_file) {
      out.kind = TargetKind::InternalPage;
      out.page_path = paths::normalize(*d->jsp_file);
    } else if (d && d->servlet_class) {
      out.kind = TargetKind::InternalServletClass;
      out.class_name = *d->servlet_class;
    } else {
      out.reason = "mapping to undeclared servlet '" + e->servlet_name + "'";
    }
    return out;
  }
  if (known_page) {
    out.kind = TargetKind::InternalPage;
    out.page_path = path;
    return out;
  }
  out.reason = "no mapping for " + path;
  return out;
}

}  // namespace jspkdm
