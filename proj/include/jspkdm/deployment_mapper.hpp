#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jspkdm/dependency_extractor.hpp"
#include "jspkdm/diagnostics.hpp"

namespace jspkdm {

enum class DeclSource : std::uint8_t { WebXml, Annotation };
const char* to_string(DeclSource s);

struct ServletDecl {
  std::string servlet_name;
  std::optional<std::string> servlet_class;  // exactly one of these is set
  std::optional<std::string> jsp_file;
  DeclSource source = DeclSource::WebXml;

  friend bool operator==(const ServletDecl&, const ServletDecl&) = default;
};

struct UrlMapping {
  std::string url_pattern;
  std::string servlet_name;

  friend bool operator==(const UrlMapping&, const UrlMapping&) = default;
};

struct WebXmlContents {
  std::vector<ServletDecl> decls;
  std::vector<UrlMapping> mappings;
  Diagnostics diagnostics;
};

class XmlSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads <servlet>, <servlet-mapping>, <servlet-name>, <servlet-class>,
/// <jsp-file> and <url-pattern>; everything else is ignored. Element names
/// are matched on their local part. Throws XmlSyntaxError.
WebXmlContents parse_web_xml(std::string_view content);

struct AnnotationMapping {
  std::string url_pattern;
  ServletDecl decl;

  friend bool operator==(const AnnotationMapping&, const AnnotationMapping&) = default;
};

struct AnnotationScan {
  std::vector<AnnotationMapping> mappings;
  Diagnostics diagnostics;
};

/// Lexical scan of a Java source for @WebServlet. The decl's servlet name
/// is the annotation's `name` element when present, otherwise the class
/// name.
AnnotationScan scan_webservlet_annotations(std::string_view java_source, std::string_view class_qualified_name);

/// "package a.b;" + file stem, or just the stem for the default package.
std::string qualified_class_name(std::string_view java_source, std::string_view file_stem);

enum class PatternKind : std::uint8_t { Exact, PathPrefix, Extension, Default };
const char* to_string(PatternKind k);
std::optional<PatternKind> classify_pattern(std::string_view pattern);

struct MappingEntry {
  std::string url_pattern;
  std::string servlet_name;
  PatternKind kind = PatternKind::Exact;

  friend bool operator==(const MappingEntry&, const MappingEntry&) = default;
};

struct UrlMappingTable {
  std::vector<MappingEntry> entries;
  std::vector<ServletDecl> decls;
  std::string context_path;
  std::set<std::string, std::less<>> known_pages;  // context-relative JSP paths
  Diagnostics diagnostics;

  const ServletDecl* decl(std::string_view servlet_name) const;
};

/// Merges descriptor and annotation declarations. The descriptor wins on
/// servlet-name and url-pattern collisions; invalid patterns and mappings
/// to undeclared servlets are dropped with diagnostics.
UrlMappingTable build_lookup_table(const std::vector<ServletDecl>& decls, const std::vector<UrlMapping>& mappings,
                                   std::string_view context_path,
                                   std::set<std::string, std::less<>> known_pages = {});

enum class TargetKind : std::uint8_t { InternalPage, InternalServletClass, External, Unresolved };
const char* to_string(TargetKind k);

struct ResolvedTarget {
  TargetKind kind = TargetKind::Unresolved;
  std::string page_path;    // InternalPage
  std::string class_name;   // InternalServletClass
  std::string reason;       // Unresolved
  std::string normalized_url;
  std::string matched_pattern;
  std::vector<std::string> shadowed;  // other patterns that also matched
  std::vector<std::string> notes;     // trailing dots trimmed, ".." clamped, ...

  friend bool operator==(const ResolvedTarget&, const ResolvedTarget&) = default;
};

/// True when the URL starts with a scheme ("https:", "mailto:") or is
/// network-path relative ("//host/...").
bool has_scheme(std::string_view url);

/// The best-matching entry for a context-relative path, using
/// exact > longest path-prefix > extension > default. Other matches are
/// appended to `shadowed` when provided.
const MappingEntry* match_pattern(const UrlMappingTable& table, std::string_view path,
                                  std::vector<std::string>* shadowed = nullptr);

ResolvedTarget resolve_url(const UrlMappingTable& table, const UrlRef& ref, std::string_view source_page);

}  // namespace jspkdm
