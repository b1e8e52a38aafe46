#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jspkdm/diagnostics.hpp"
#include "jspkdm/jsp_parser.hpp"

namespace jspkdm {

/// The tag/attribute pairs that carry page-to-page dependencies.
enum class TagKind : std::uint8_t {
  Form,                 // <form action>
  JspInclude,           // <jsp:include page>
  IncludeDirective,     // <%@ include file %>
  JspDirectiveInclude,  // <jsp:directive.include file>
  JspForward,           // <jsp:forward page>
  PageDirectiveErrorPage,     // <%@ page errorPage %>
  JspDirectivePageErrorPage,  // <jsp:directive.page errorPage>
  AHref,                // <a href>
  CRedirect,            // <c:redirect url>
  CUrl,                 // <c:url value>
};

inline constexpr std::array<TagKind, 10> kAllTagKinds{
    TagKind::Form,       TagKind::JspInclude,
    TagKind::IncludeDirective, TagKind::JspDirectiveInclude,
    TagKind::JspForward, TagKind::PageDirectiveErrorPage,
    TagKind::JspDirectivePageErrorPage, TagKind::AHref,
    TagKind::CRedirect,  TagKind::CUrl,
};

/// Stable external name, e.g. "jsp:include", "a-href".
const char* to_string(TagKind k);
std::optional<TagKind> tag_kind_from_string(std::string_view s);
/// The attribute that designates the URL for this tag kind.
const char* designated_attribute(TagKind k);

enum class HttpMethod : std::uint8_t { Get, Post, Put };
const char* to_string(HttpMethod m);

struct TagClassification {
  TagKind kind;
  std::string attribute;

  friend bool operator==(const TagClassification&, const TagClassification&) = default;
};

struct UrlRef {
  std::string source_page;
  TagKind tag_kind = TagKind::AHref;
  std::string attribute;
  std::string raw_url;
  std::optional<HttpMethod> http_method;
  bool dynamic = false;
  Span span;

  friend bool operator==(const UrlRef&, const UrlRef&) = default;
};

struct Extraction {
  std::vector<UrlRef> refs;
  Diagnostics diagnostics;
};

/// Table row for an element-like node, or nullopt. HTML names compare
/// case-insensitively, JSP names exactly. End tags never classify.
std::optional<TagClassification> classify_tag(const JspNode& node);

/// Every URL reference in document order (depth-first).
Extraction extract_url_refs(const JspDocument& doc);

bool is_dynamic_url(std::string_view raw_url);

}  // namespace jspkdm
