#include "jspkdm/jsp_parser.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "jspkdm/paths.hpp"

namespace jspkdm {

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::TemplateText: return "TemplateText";
    case NodeKind::Scriptlet: return "Scriptlet";
    case NodeKind::Declaration: return "Declaration";
    case NodeKind::Expression: return "Expression";
    case NodeKind::Directive: return "Directive";
    case NodeKind::StandardAction: return "StandardAction";
    case NodeKind::CustomAction: return "CustomAction";
    case NodeKind::HtmlElement: return "HtmlElement";
    case NodeKind::Comment: return "Comment";
  }
  return "?";
}

const char* to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::UnterminatedScriptlet: return "UnterminatedScriptlet";
    case ParseErrorKind::MalformedAttribute: return "MalformedAttribute";
    case ParseErrorKind::DuplicateAttribute: return "DuplicateAttribute";
    case ParseErrorKind::InvalidPagePath: return "InvalidPagePath";
  }
  return "?";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " at offset " + std::to_string(offset) + ": " + what),
      kind_(kind),
      offset_(offset) {}

bool JspNode::is_element() const {
  return kind == NodeKind::Directive || kind == NodeKind::StandardAction || kind == NodeKind::CustomAction ||
         kind == NodeKind::HtmlElement;
}

const Attribute* JspNode::attribute(std::string_view attr_name) const {
  const bool fold = kind == NodeKind::HtmlElement;
  for (const auto& a : attributes) {
    if (fold ? paths::iequals(a.name, attr_name) : a.name == attr_name) return &a;
  }
  return nullptr;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_name_char(char c) {
  return is_alpha(c) || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == ':' || c == '.';
}

bool is_dynamic_value(std::string_view v) {
  return v.find("<%=") != std::string_view::npos || v.find("${") != std::string_view::npos;
}

NodeKind kind_for_tag(std::string_view name) {
  auto colon = name.find(':');
  if (colon == std::string_view::npos || colon == 0) return NodeKind::HtmlElement;
  if (name.substr(0, colon) == "jsp") {
    return name.substr(colon + 1).starts_with("directive.") ? NodeKind::Directive : NodeKind::StandardAction;
  }
  return NodeKind::CustomAction;
}

bool is_jsp_tag(NodeKind k) {
  return k == NodeKind::Directive || k == NodeKind::StandardAction || k == NodeKind::CustomAction;
}

struct TagScan {
  std::string name;
  std::vector<Attribute> attributes;
  std::vector<Span> scripting;  // <% ... %> regions inside an HTML tag
  std::size_t end = 0;
  bool self_closing = false;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  std::vector<JspNode> parse_document() {
    auto nodes = parse_sequence();
    // Stray close tags never stop the top level, so parse_sequence only returns at EOF.
    return nodes;
  }

 private:
  bool at(std::size_t p, std::string_view s) const { return src_.substr(p).starts_with(s); }

  bool at_ci(std::size_t p, std::string_view s) const {
    return p + s.size() <= src_.size() && paths::iequals(src_.substr(p, s.size()), s);
  }

  void flush_text(std::vector<JspNode>& out, std::size_t& text_start, std::size_t upto) const {
    if (text_start == std::string_view::npos) return;
    if (upto > text_start) {
      JspNode n;
      n.kind = NodeKind::TemplateText;
      n.body = std::string(src_.substr(text_start, upto - text_start));
      n.span = {text_start, upto};
      n.tag_end = upto;
      out.push_back(std::move(n));
    }
    text_start = std::string_view::npos;
  }

  // Parses a <% construct starting at p.
  JspNode parse_scripting(std::size_t p) {
    JspNode n;
    std::size_t body_begin = 0;
    std::string_view terminator = "%>";
    if (at(p, "<%--")) {
      n.kind = NodeKind::Comment;
      body_begin = p + 4;
      terminator = "--%>";
    } else if (at(p, "<%!")) {
      n.kind = NodeKind::Declaration;
      body_begin = p + 3;
    } else if (at(p, "<%=")) {
      n.kind = NodeKind::Expression;
      body_begin = p + 3;
    } else if (at(p, "<%@")) {
      return parse_directive(p);
    } else {
      n.kind = NodeKind::Scriptlet;
      body_begin = p + 2;
    }
    std::size_t close = src_.find(terminator, body_begin);
    if (close == std::string_view::npos) {
      throw ParseError(ParseErrorKind::UnterminatedScriptlet, p,
                       std::string("no closing '") + std::string(terminator) + "' for " + to_string(n.kind));
    }
    n.body = std::string(src_.substr(body_begin, close - body_begin));
    n.span = {p, close + terminator.size()};
    n.tag_end = n.span.end;
    return n;
  }

  JspNode parse_directive(std::size_t p) {
    std::size_t close = src_.find("%>", p + 3);
    if (close == std::string_view::npos) {
      throw ParseError(ParseErrorKind::UnterminatedScriptlet, p, "no closing '%>' for directive");
    }
    JspNode n;
    n.kind = NodeKind::Directive;
    n.span = {p, close + 2};
    n.tag_end = n.span.end;
    std::size_t q = p + 3;
    while (q < close && is_space(src_[q])) ++q;
    std::size_t name_begin = q;
    while (q < close && is_name_char(src_[q])) ++q;
    n.name = std::string(src_.substr(name_begin, q - name_begin));
    auto scan = scan_attributes(q, close, /*directive=*/true);
    if (scan) n.attributes = std::move(scan->attributes);
    check_duplicates(n, p);
    return n;
  }

  // Reads a quoted or unquoted attribute value starting at q. Returns the
  // position after the value. Records embedded <% %> regions in `scripting`.
  // nullopt when the value holds a nested JSP tag: the outer text is then
  // read as template text and the nested tag is parsed on its own.
  std::optional<std::size_t> scan_value(std::size_t q, std::size_t limit, std::string& value, std::vector<Span>& scripting) {
    if (src_[q] == '"' || src_[q] == '\'') {
      const char quote = src_[q];
      const std::size_t open = q;
      ++q;
      const std::size_t begin = q;
      while (true) {
        if (q >= limit) {
          throw ParseError(ParseErrorKind::MalformedAttribute, open, "unclosed attribute quote");
        }
        if (at(q, "<%")) {
          std::size_t close = src_.find("%>", q + 2);
          if (close == std::string_view::npos || close + 2 > limit) {
            throw ParseError(ParseErrorKind::MalformedAttribute, open, "unterminated expression in attribute value");
          }
          scripting.push_back({q, close + 2});
          q = close + 2;
          continue;
        }
        if (at(q, "${")) {
          std::size_t close = src_.find('}', q + 2);
          if (close != std::string_view::npos && close < limit) {
            q = close + 1;
            continue;
          }
        }
        if (src_[q] == '<' && q + 1 < limit && is_alpha(src_[q + 1])) {
          std::size_t e = q + 1;
          while (e < limit && is_name_char(src_[e])) ++e;
          if (kind_for_tag(src_.substr(q + 1, e - q - 1)) != NodeKind::HtmlElement) return std::nullopt;
        }
        if (src_[q] == quote) break;
        ++q;
      }
      value = std::string(src_.substr(begin, q - begin));
      return q + 1;
    }
    const std::size_t begin = q;
    while (q < limit && !is_space(src_[q]) && src_[q] != '>') {
      if (at(q, "<%")) {
        std::size_t close = src_.find("%>", q + 2);
        if (close == std::string_view::npos || close + 2 > limit) break;
        scripting.push_back({q, close + 2});
        q = close + 2;
        continue;
      }
      if (at(q, "%>")) break;
      ++q;
    }
    value = std::string(src_.substr(begin, q - begin));
    return q;
  }

  // Attribute list up to '>' / "/>" (tags) or up to `limit` (directives).
  // nullopt means the text is not a well-formed tag and should be read as
  // template text.
  std::optional<TagScan> scan_attributes(std::size_t q, std::size_t limit, bool directive) {
    TagScan t;
    while (true) {
      while (q < limit && is_space(src_[q])) ++q;
      if (q >= limit) {
        if (directive) {
          t.end = limit + 2;
          return t;
        }
        return std::nullopt;
      }
      const char c = src_[q];
      if (!directive && c == '>') {
        t.end = q + 1;
        return t;
      }
      if (!directive && c == '/' && q + 1 < limit && src_[q + 1] == '>') {
        t.self_closing = true;
        t.end = q + 2;
        return t;
      }
      if (at(q, "<%")) {
        std::size_t close = src_.find("%>", q + 2);
        if (close == std::string_view::npos || close + 2 > limit) return std::nullopt;
        t.scripting.push_back({q, close + 2});
        q = close + 2;
        continue;
      }
      if (c == '/') {
        ++q;
        continue;
      }
      if (c == '"' || c == '\'' || c == '<' || c == '=' || c == '>') return std::nullopt;
      const std::size_t name_begin = q;
      while (q < limit && !is_space(src_[q]) && src_[q] != '=' && src_[q] != '>' && src_[q] != '/' &&
             src_[q] != '"' && src_[q] != '\'' && src_[q] != '<') {
        ++q;
      }
      Attribute a;
      a.name = std::string(src_.substr(name_begin, q - name_begin));
      std::size_t r = q;
      while (r < limit && is_space(src_[r])) ++r;
      if (r < limit && src_[r] == '=') {
        ++r;
        while (r < limit && is_space(src_[r])) ++r;
        if (r >= limit) return std::nullopt;
        auto after = scan_value(r, limit, a.value, t.scripting);
        if (!after) return std::nullopt;
        q = *after;
      }
      a.span = {name_begin, q};
      a.value_is_dynamic = is_dynamic_value(a.value);
      t.attributes.push_back(std::move(a));
    }
  }

  static void check_duplicates(const JspNode& n, std::size_t offset) {
    std::set<std::string> seen;
    for (const auto& a : n.attributes) {
      if (!seen.insert(paths::to_lower(a.name)).second) {
        throw ParseError(ParseErrorKind::DuplicateAttribute, offset,
                         "attribute '" + a.name + "' repeated on <" + n.name + ">");
      }
    }
  }

  std::optional<TagScan> try_open_tag(std::size_t p) {
    std::size_t q = p + 1;
    while (q < src_.size() && is_name_char(src_[q])) ++q;
    std::string_view name = src_.substr(p + 1, q - p - 1);
    if (q < src_.size() && !is_space(src_[q]) && src_[q] != '>' && src_[q] != '/' && !at(q, "<%")) {
      return std::nullopt;
    }
    auto scan = scan_attributes(q, src_.size(), false);
    if (scan) scan->name = std::string(name);
    return scan;
  }

  // "</name>" at p, returns the position after '>'.
  std::optional<std::size_t> try_close_tag(std::size_t p, std::string& name) const {
    std::size_t q = p + 2;
    if (q >= src_.size() || !is_alpha(src_[q])) return std::nullopt;
    while (q < src_.size() && is_name_char(src_[q])) ++q;
    name = std::string(src_.substr(p + 2, q - p - 2));
    while (q < src_.size() && is_space(src_[q])) ++q;
    if (q >= src_.size() || src_[q] != '>') return std::nullopt;
    return q + 1;
  }

  // Template text in which only <% constructs are recognised, up to (and
  // optionally including) `terminator`.
  void raw_text(std::vector<JspNode>& out, std::string_view terminator, bool consume) {
    std::size_t text_start = pos_;
    while (pos_ < src_.size()) {
      if (at(pos_, "<%")) {
        flush_text(out, text_start, pos_);
        out.push_back(parse_scripting(pos_));
        pos_ = out.back().span.end;
        text_start = pos_;
        continue;
      }
      if (at_ci(pos_, terminator)) {
        if (consume) pos_ += terminator.size();
        break;
      }
      ++pos_;
    }
    flush_text(out, text_start, pos_);
  }

  JspNode make_element(std::size_t p, TagScan&& scan) {
    JspNode n;
    n.kind = kind_for_tag(scan.name);
    n.name = std::move(scan.name);
    n.attributes = std::move(scan.attributes);
    n.self_closing = scan.self_closing;
    n.span = {p, scan.end};
    n.tag_end = scan.end;
    check_duplicates(n, p);
    if (n.kind == NodeKind::HtmlElement && !scan.scripting.empty()) {
      // Split the tag text around its scripting regions so they remain
      // first-class nodes.
      std::size_t cursor = p;
      for (const auto& s : scan.scripting) {
        if (s.begin > cursor) {
          JspNode t;
          t.kind = NodeKind::TemplateText;
          t.body = std::string(src_.substr(cursor, s.begin - cursor));
          t.span = {cursor, s.begin};
          t.tag_end = s.begin;
          n.children.push_back(std::move(t));
        }
        n.children.push_back(parse_scripting(s.begin));
        cursor = s.end;
      }
      if (scan.end > cursor) {
        JspNode t;
        t.kind = NodeKind::TemplateText;
        t.body = std::string(src_.substr(cursor, scan.end - cursor));
        t.span = {cursor, scan.end};
        t.tag_end = scan.end;
        n.children.push_back(std::move(t));
      }
    }
    return n;
  }

  bool closes_open_element(std::string_view name) const {
    return std::find(open_.begin(), open_.end(), name) != open_.end();
  }

  std::vector<JspNode> parse_sequence() {
    std::vector<JspNode> out;
    std::size_t text_start = std::string_view::npos;
    while (pos_ < src_.size()) {
      if (src_[pos_] != '<') {
        if (text_start == std::string_view::npos) text_start = pos_;
        ++pos_;
        continue;
      }
      const std::size_t p = pos_;
      if (at(p, "<%")) {
        flush_text(out, text_start, p);
        out.push_back(parse_scripting(p));
        pos_ = out.back().span.end;
        continue;
      }
      if (at(p, "<!--")) {
        flush_text(out, text_start, p);
        raw_text(out, "-->", true);
        continue;
      }
      if (at(p, "</")) {
        std::string name;
        if (auto end = try_close_tag(p, name)) {
          const NodeKind kind = kind_for_tag(name);
          if (is_jsp_tag(kind) && closes_open_element(name)) {
            flush_text(out, text_start, p);
            return out;
          }
          flush_text(out, text_start, p);
          JspNode n;
          n.kind = kind;
          n.name = std::move(name);
          n.closing = true;
          n.span = {p, *end};
          n.tag_end = *end;
          out.push_back(std::move(n));
          pos_ = *end;
          continue;
        }
      } else if (p + 1 < src_.size() && is_alpha(src_[p + 1])) {
        if (auto scan = try_open_tag(p)) {
          flush_text(out, text_start, p);
          JspNode n = make_element(p, std::move(*scan));
          pos_ = n.span.end;
          if (is_jsp_tag(n.kind) && !n.self_closing) {
            open_.push_back(n.name);
            auto children = parse_sequence();
            open_.pop_back();
            std::string close_name;
            auto close_end = at(pos_, "</") ? try_close_tag(pos_, close_name) : std::nullopt;
            if (close_end && close_name == n.name) {
              n.children = std::move(children);
              n.span.end = *close_end;
              pos_ = *close_end;
              out.push_back(std::move(n));
            } else {
              out.push_back(std::move(n));
              for (auto& c : children) out.push_back(std::move(c));
            }
            continue;
          }
          const bool raw = n.kind == NodeKind::HtmlElement && !n.self_closing &&
                           (paths::iequals(n.name, "script") || paths::iequals(n.name, "style"));
          const std::string raw_close = "</" + n.name;
          out.push_back(std::move(n));
          if (raw) raw_text(out, raw_close, false);
          continue;
        }
      }
      if (text_start == std::string_view::npos) text_start = p;
      ++pos_;
    }
    flush_text(out, text_start, pos_);
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<std::string> open_;
};

void collect(const std::vector<JspNode>& nodes, const std::vector<NodeKind>& kinds,
             std::vector<const JspNode*>& out) {
  for (const auto& n : nodes) {
    if (std::find(kinds.begin(), kinds.end(), n.kind) != kinds.end()) out.push_back(&n);
    collect(n.children, kinds, out);
  }
}

}  // namespace

JspDocument parse_jsp(std::string_view source, std::string_view page_path) {
  if (page_path.empty()) throw ParseError(ParseErrorKind::InvalidPagePath, 0, "empty page path");
  JspDocument doc;
  doc.page_path = paths::normalize(page_path);
  doc.source_length = source.size();
  doc.source = std::string(source);
  doc.nodes = Parser(source).parse_document();
  return doc;
}

std::vector<const JspNode*> elements_of(const JspDocument& doc, const std::vector<NodeKind>& kinds) {
  std::vector<const JspNode*> out;
  collect(doc.nodes, kinds, out);
  return out;
}

std::vector<const JspNode*> elements_of(const JspDocument& doc, std::initializer_list<NodeKind> kinds) {
  return elements_of(doc, std::vector<NodeKind>(kinds));
}

std::string decode_source(std::string_view bytes, SourceEncoding encoding) {
  if (encoding == SourceEncoding::Utf8) {
    if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);
    return std::string(bytes);
  }
  std::string out;
  out.reserve(bytes.size());
  for (unsigned char c : bytes) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

}  // namespace jspkdm
