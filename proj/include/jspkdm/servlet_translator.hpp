#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jspkdm/diagnostics.hpp"
#include "jspkdm/jsp_parser.hpp"

namespace jspkdm {

enum class StatementKind : std::uint8_t {
  InlineCode,
  TemplateEmit,
  BeanInstantiation,
  PropertyGet,
  PropertySet,
  TagHandlerCall,
  ExpressionEmit,
};

const char* to_string(StatementKind k);
std::optional<StatementKind> statement_kind_from_string(std::string_view s);

struct StatementMetadata {
  std::string bean_id;
  std::string class_name;  // qualified bean class, or tag name for TagHandlerCall
  std::string property;
  std::string method;      // e.g. "getFirstName", "doStartTag", "setItems"
  std::string value;       // setter argument source, may be empty

  friend bool operator==(const StatementMetadata&, const StatementMetadata&) = default;
};

struct CodeStatement {
  StatementKind kind = StatementKind::InlineCode;
  std::string text;
  std::optional<StatementMetadata> metadata;
  Span origin_span;

  friend bool operator==(const CodeStatement&, const CodeStatement&) = default;
};

/// Servlet-shaped translation of one page.
struct ServletUnit {
  std::string class_name;
  std::string package_name;
  std::string source_page;
  std::vector<std::string> imports;
  std::vector<CodeStatement> declarations;
  std::vector<CodeStatement> init_body;
  std::vector<CodeStatement> service_body;
  std::vector<CodeStatement> destroy_body;
  Diagnostics diagnostics;

  friend bool operator==(const ServletUnit&, const ServletUnit&) = default;
};

struct TranslationOptions {
  std::string base_package = "org.apache.jsp";
  // Custom action names (e.g. "c:forEach") translated as tag-handler calls
  // instead of template text.
  std::set<std::string, std::less<>> known_tag_handlers;
};

ServletUnit translate_page(const JspDocument& doc, const TranslationOptions& options = {});

/// Injective mapping from a context-relative page path to a Java
/// identifier. Letters and digits are kept, "." becomes "_", "/" becomes
/// "$_", and any other byte b becomes "$" followed by two lowercase hex
/// digits. The leading "/" is dropped and "jsp_" prepended:
/// "/admin/user_list.jsp" -> "jsp_admin$_user$5flist_jsp".
std::string mangle_class_name(std::string_view page_path);

/// Package for the page's directory below `base_package`, each directory
/// segment mangled like a class name.
std::string package_for_page(std::string_view page_path, std::string_view base_package);

std::string escape_java_string(std::string_view raw);

std::string render_servlet_source(const ServletUnit& unit);

}  // namespace jspkdm
