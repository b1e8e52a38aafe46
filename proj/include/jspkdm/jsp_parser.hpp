#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jspkdm/diagnostics.hpp"

namespace jspkdm {

enum class NodeKind : std::uint8_t {
  TemplateText,
  Scriptlet,    // <% ... %>
  Declaration,  // <%! ... %>
  Expression,   // <%= ... %>
  Directive,    // <%@ ... %> and <jsp:directive.* />
  StandardAction,
  CustomAction,
  HtmlElement,
  Comment,  // <%-- ... --%>
};

const char* to_string(NodeKind k);

struct Attribute {
  std::string name;
  std::string value;
  bool value_is_dynamic = false;
  Span span;  // name through end of value

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// One node of the tag-level page model.
///
/// Element-like nodes (directives, actions, HTML tags) carry a name and
/// attributes. Scripting elements and template text carry `body`. A JSP
/// action whose close tag was found owns the nodes between its tags as
/// `children`; `tag_end` marks where its opening tag stops. HTML tags are
/// never nested: an end tag such as `</form>` is its own node with
/// `closing` set.
struct JspNode {
  NodeKind kind = NodeKind::TemplateText;
  std::string name;
  std::vector<Attribute> attributes;
  std::string body;
  std::vector<JspNode> children;
  Span span;
  std::size_t tag_end = 0;
  bool closing = false;
  bool self_closing = false;

  bool is_element() const;
  bool has_close_tag() const { return is_element() && !closing && !self_closing && tag_end < span.end; }

  /// Attribute lookup. HTML elements match names ASCII case-insensitively,
  /// JSP constructs match exactly. Returns nullptr when absent.
  const Attribute* attribute(std::string_view attr_name) const;

  friend bool operator==(const JspNode&, const JspNode&) = default;
};

struct JspDocument {
  std::string page_path;
  std::vector<JspNode> nodes;
  std::size_t source_length = 0;
  std::string source;  // decoded text the spans index into

  std::string_view text(Span s) const { return std::string_view(source).substr(s.begin, s.size()); }

  friend bool operator==(const JspDocument&, const JspDocument&) = default;
};

enum class ParseErrorKind { UnterminatedScriptlet, MalformedAttribute, DuplicateAttribute, InvalidPagePath };

const char* to_string(ParseErrorKind k);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what);

  ParseErrorKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

/// Parses one JSP page. `page_path` is normalized to a context-relative
/// path with a leading "/". Throws ParseError.
JspDocument parse_jsp(std::string_view source, std::string_view page_path);

/// All nodes whose kind is in `kinds`, depth-first in document order.
std::vector<const JspNode*> elements_of(const JspDocument& doc, std::initializer_list<NodeKind> kinds);
std::vector<const JspNode*> elements_of(const JspDocument& doc, const std::vector<NodeKind>& kinds);

enum class SourceEncoding { Utf8, Latin1 };

/// Converts raw file bytes to the UTF-8 text the parser consumes.
std::string decode_source(std::string_view bytes, SourceEncoding encoding);

}  // namespace jspkdm
