#include "jspkdm/dependency_extractor.hpp"

#include "jspkdm/paths.hpp"

namespace jspkdm {

namespace {

struct Row {
  TagKind kind;
  const char* name;
  const char* attribute;
};

constexpr std::array<Row, 10> kRows{{
    {TagKind::Form, "form", "action"},
    {TagKind::JspInclude, "jsp:include", "page"},
    {TagKind::IncludeDirective, "include-directive", "file"},
    {TagKind::JspDirectiveInclude, "jsp:directive.include", "file"},
    {TagKind::JspForward, "jsp:forward", "page"},
    {TagKind::PageDirectiveErrorPage, "page-directive-errorPage", "errorPage"},
    {TagKind::JspDirectivePageErrorPage, "jsp:directive.page-errorPage", "errorPage"},
    {TagKind::AHref, "a-href", "href"},
    {TagKind::CRedirect, "c:redirect", "url"},
    {TagKind::CUrl, "c:url", "value"},
}};

const Row& row(TagKind k) { return kRows[static_cast<std::size_t>(k)]; }

std::optional<TagKind> tag_kind_of(const JspNode& n) {
  if (n.closing) return std::nullopt;
  switch (n.kind) {
    case NodeKind::HtmlElement:
      if (paths::iequals(n.name, "form")) return TagKind::Form;
      if (paths::iequals(n.name, "a")) return TagKind::AHref;
      return std::nullopt;
    case NodeKind::StandardAction:
      if (n.name == "jsp:include") return TagKind::JspInclude;
      if (n.name == "jsp:forward") return TagKind::JspForward;
      return std::nullopt;
    case NodeKind::Directive:
      if (n.name == "include") return TagKind::IncludeDirective;
      if (n.name == "jsp:directive.include") return TagKind::JspDirectiveInclude;
      if (n.name == "page") return TagKind::PageDirectiveErrorPage;
      if (n.name == "jsp:directive.page") return TagKind::JspDirectivePageErrorPage;
      return std::nullopt;
    case NodeKind::CustomAction:
      if (n.name == "c:redirect") return TagKind::CRedirect;
      if (n.name == "c:url") return TagKind::CUrl;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

void walk(const std::vector<JspNode>& nodes, const JspDocument& doc, Extraction& out) {
  for (const auto& n : nodes) {
    if (auto kind = tag_kind_of(n)) {
      const char* attr_name = designated_attribute(*kind);
      const Attribute* attr = n.attribute(attr_name);
      const bool page_directive =
          *kind == TagKind::PageDirectiveErrorPage || *kind == TagKind::JspDirectivePageErrorPage;
      if (attr && !attr->value.empty()) {
        UrlRef ref;
        ref.source_page = doc.page_path;
        ref.tag_kind = *kind;
        ref.attribute = attr_name;
        ref.raw_url = attr->value;
        ref.dynamic = is_dynamic_url(attr->value);
        ref.span = n.span;
        if (*kind == TagKind::Form) {
          const Attribute* method = n.attribute("method");
          const std::string m = method ? paths::to_lower(method->value) : "get";
          if (m == "get") {
            ref.http_method = HttpMethod::Get;
          } else if (m == "post") {
            ref.http_method = HttpMethod::Post;
          } else if (m == "put") {
            ref.http_method = HttpMethod::Put;
          } else {
            out.diagnostics.push_back({Severity::Note, "unknown-form-method",
                                       "form method '" + method->value + "' is not get/post/put", doc.page_path,
                                       n.span});
          }
        }
        out.refs.push_back(std::move(ref));
      } else if (!page_directive) {
        out.diagnostics.push_back({Severity::Note, "missing-url-attribute",
                                   "<" + n.name + "> has no " + attr_name + " value", doc.page_path, n.span});
      }
    }
    walk(n.children, doc, out);
  }
}

}  // namespace

const char* to_string(TagKind k) { return row(k).name; }

std::optional<TagKind> tag_kind_from_string(std::string_view s) {
  for (const auto& r : kRows) {
    if (s == r.name) return r.kind;
  }
  return std::nullopt;
}

const char* designated_attribute(TagKind k) { return row(k).attribute; }

const char* to_string(HttpMethod m) {
  switch (m) {
    case HttpMethod::Get: return "get";
    case HttpMethod::Post: return "post";
    case HttpMethod::Put: return "put";
  }
  return "?";
}

bool is_dynamic_url(std::string_view raw_url) {
  return raw_url.find("<%=") != std::string_view::npos || raw_url.find("${") != std::string_view::npos;
}

std::optional<TagClassification> classify_tag(const JspNode& node) {
  auto kind = tag_kind_of(node);
  if (!kind) return std::nullopt;
  return TagClassification{*kind, designated_attribute(*kind)};
}

Extraction extract_url_refs(const JspDocument& doc) {
  Extraction out;
  walk(doc.nodes, doc, out);
  return out;
}

}  // namespace jspkdm
