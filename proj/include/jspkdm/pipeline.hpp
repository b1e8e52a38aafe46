#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jspkdm/code_model.hpp"
#include "jspkdm/dependency_extractor.hpp"
#include "jspkdm/deployment_mapper.hpp"
#include "jspkdm/diagnostics.hpp"
#include "jspkdm/jsp_parser.hpp"
#include "jspkdm/servlet_translator.hpp"

namespace jspkdm {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScanOptions {
  std::vector<std::string> include;  // globs over root-relative paths; empty = everything
  std::vector<std::string> exclude;
  std::vector<std::filesystem::path> source_roots;  // extra directories scanned for *.java
};

struct WebAppInventory {
  std::filesystem::path root;
  std::vector<std::string> jsp_pages;  // "/index.jsp", sorted
  std::vector<std::filesystem::path> java_sources;
  std::optional<std::filesystem::path> web_xml;
  Diagnostics diagnostics;
};

/// `**` spans directories ("**/" also matches nothing), `*` and `?` stay
/// within one path segment.
bool glob_match(std::string_view pattern, std::string_view path);

/// Lists pages (*.jsp, *.jspf), Java sources and WEB-INF/web.xml under
/// root. Throws PipelineError when root is not a readable directory.
WebAppInventory scan_webapp(const std::filesystem::path& root, const ScanOptions& options = {});

enum class GraphNodeKind { Page, ServletClass, External, Unresolved };
const char* to_string(GraphNodeKind k);

struct GraphEdge {
  std::string from;
  std::string to;
  std::string tag_kind;
  TargetKind target = TargetKind::InternalPage;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct UnresolvedRef {
  std::string from;
  std::string raw_url;
  std::string reason;
  std::string tag_kind;

  friend bool operator==(const UnresolvedRef&, const UnresolvedRef&) = default;
};

struct DependencyGraph {
  std::map<std::string, GraphNodeKind> nodes;
  std::vector<GraphEdge> edges;
  std::vector<UnresolvedRef> unresolved;

  /// False when (from, to, tag_kind) is already present.
  bool add_edge(GraphEdge edge, GraphNodeKind to_kind);
  bool add_unresolved(UnresolvedRef ref);
};

struct PipelineConfig {
  std::string context_path;
  SourceEncoding encoding = SourceEncoding::Utf8;
  TranslationOptions translation;
  unsigned jobs = 0;  // 0 = hardware concurrency
  std::string model_name = "jsp-webapp";
};

struct RefOutcome {
  UrlRef ref;
  ResolvedTarget target;
  std::optional<kdm::MutationOutcome> mutation;
};

struct PageReport {
  std::string page;
  std::string class_name;
  bool parsed = false;
  std::string error;
  std::size_t statements = 0;
  std::vector<RefOutcome> refs;
  Diagnostics diagnostics;
};

struct AnnotationReport {
  std::string source;  // root-relative path
  std::string class_name;
  std::vector<std::string> patterns;
};

struct PipelineReport {
  std::vector<PageReport> pages;
  std::optional<std::string> web_xml;
  std::vector<ServletDecl> servlets;
  std::vector<MappingEntry> mappings;
  std::vector<AnnotationReport> annotations;
  Diagnostics diagnostics;  // inventory, descriptor, annotation and table findings

  /// Warnings and errors across pages and global findings.
  std::size_t problem_count() const;
};

struct PipelineResult {
  kdm::KdmModel model;
  DependencyGraph graph;
  PipelineReport report;
  std::vector<ServletUnit> units;
};

/// Parse, translate and discover the model, then extract, resolve and
/// inject every internal dependency. Per-file failures are recorded in the
/// report and never abort the run.
PipelineResult run_pipeline(const WebAppInventory& inventory, const PipelineConfig& config = {});

std::string emit_dot(const DependencyGraph& graph);
std::string report_to_json(const PipelineReport& report);

}  // namespace jspkdm
