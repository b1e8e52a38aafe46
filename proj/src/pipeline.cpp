#include "jspkdm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "jspkdm/paths.hpp"

namespace jspkdm {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const char* to_string(GraphNodeKind k) {
  switch (k) {
    case GraphNodeKind::Page: return "page";
    case GraphNodeKind::ServletClass: return "class";
    case GraphNodeKind::External: return "external";
    case GraphNodeKind::Unresolved: return "unresolved";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Inventory

namespace {

bool glob_impl(std::string_view p, std::string_view s) {
  while (!p.empty()) {
    if (p.starts_with("**")) {
      std::string_view rest = p.substr(2);
      if (rest.starts_with('/') && glob_impl(rest.substr(1), s)) return true;
      for (std::size_t i = 0; i <= s.size(); ++i) {
        if (glob_impl(rest, s.substr(i))) return true;
      }
      return false;
    }
    if (p.front() == '*') {
      std::string_view rest = p.substr(1);
      for (std::size_t i = 0; i <= s.size(); ++i) {
        if (glob_impl(rest, s.substr(i))) return true;
        if (i < s.size() && s[i] == '/') break;
      }
      return false;
    }
    if (s.empty()) return false;
    if (p.front() == '?' ? s.front() == '/' : p.front() != s.front()) return false;
    p.remove_prefix(1);
    s.remove_prefix(1);
  }
  return s.empty();
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

bool has_extension(const fs::path& p, std::initializer_list<std::string_view> exts) {
  const std::string ext = p.extension().string();
  return std::any_of(exts.begin(), exts.end(), [&](std::string_view e) { return ext == e; });
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) { return glob_impl(pattern, path); }

WebAppInventory scan_webapp(const fs::path& root, const ScanOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw PipelineError("RootNotFound: " + root.string() + " is not a directory");
  WebAppInventory inv;
  inv.root = root;
  auto selected = [&](const std::string& rel) {
    if (!options.include.empty() &&
        std::none_of(options.include.begin(), options.include.end(), [&](auto& g) { return glob_match(g, rel); })) {
      return false;
    }
    return std::none_of(options.exclude.begin(), options.exclude.end(), [&](auto& g) { return glob_match(g, rel); });
  };
  auto walk = [&](const fs::path& dir, bool pages) {
    fs::recursive_directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec);
    if (ec) {
      inv.diagnostics.push_back({Severity::Warning, "UnreadableEntry", ec.message(), dir.string(), {}});
      return;
    }
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) {
        inv.diagnostics.push_back({Severity::Warning, "UnreadableEntry", ec.message(), it->path().string(), {}});
        ec.clear();
        continue;
      }
      std::error_code fec;
      if (!it->is_regular_file(fec)) continue;
      const fs::path& p = it->path();
      const std::string rel = p.lexically_relative(dir).generic_string();
      if (!selected(rel)) continue;
      if (pages && has_extension(p, {".jsp", ".jspf"})) {
        inv.jsp_pages.push_back("/" + rel);
      } else if (has_extension(p, {".java"})) {
        inv.java_sources.push_back(p);
      } else if (pages && rel == "WEB-INF/web.xml") {
        inv.web_xml = p;
      }
    }
  };
  walk(root, true);
  for (const auto& src : options.source_roots) {
    if (!fs::is_directory(src, ec)) {
      inv.diagnostics.push_back(
          {Severity::Warning, "UnreadableEntry", "source root is not a directory", src.string(), {}});
      continue;
    }
    walk(src, false);
  }
  std::sort(inv.jsp_pages.begin(), inv.jsp_pages.end());
  std::sort(inv.java_sources.begin(), inv.java_sources.end());
  inv.java_sources.erase(std::unique(inv.java_sources.begin(), inv.java_sources.end()), inv.java_sources.end());
  return inv;
}

// ---------------------------------------------------------------------------
// Graph

bool DependencyGraph::add_edge(GraphEdge edge, GraphNodeKind to_kind) {
  for (const auto& e : edges) {
    if (e.from == edge.from && e.to == edge.to && e.tag_kind == edge.tag_kind) return false;
  }
  nodes.try_emplace(edge.from, GraphNodeKind::Page);
  nodes.try_emplace(edge.to, to_kind);
  edges.push_back(std::move(edge));
  return true;
}

bool DependencyGraph::add_unresolved(UnresolvedRef ref) {
  if (std::find(unresolved.begin(), unresolved.end(), ref) != unresolved.end()) return false;
  nodes.try_emplace(ref.from, GraphNodeKind::Page);
  unresolved.push_back(std::move(ref));
  return true;
}

std::size_t PipelineReport::problem_count() const {
  auto count = [](const Diagnostics& ds) {
    return static_cast<std::size_t>(
        std::count_if(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity != Severity::Note; }));
  };
  std::size_t n = count(diagnostics);
  for (const auto& p : pages) n += count(p.diagnostics);
  return n;
}

// ---------------------------------------------------------------------------
// Run

namespace {

struct PageWork {
  PageReport report;
  ServletUnit unit;
  Extraction extraction;
};

PageWork process_page(const WebAppInventory& inv, const std::string& page, const PipelineConfig& config) {
  PageWork w;
  w.report.page = page;
  w.report.class_name = mangle_class_name(page);
  auto bytes = read_file(inv.root / page.substr(1));
  if (!bytes) {
    w.report.error = "UnreadableEntry: cannot read file";
    w.report.diagnostics.push_back({Severity::Error, "UnreadableEntry", "cannot read file", page, {}});
  } else {
    try {
      JspDocument doc = parse_jsp(decode_source(*bytes, config.encoding), page);
      w.unit = translate_page(doc, config.translation);
      w.extraction = extract_url_refs(doc);
      w.report.parsed = true;
      w.report.statements = w.unit.service_body.size() + w.unit.declarations.size();
      w.report.diagnostics = w.unit.diagnostics;
      w.report.diagnostics.insert(w.report.diagnostics.end(), w.extraction.diagnostics.begin(),
                                  w.extraction.diagnostics.end());
      return w;
    } catch (const ParseError& e) {
      w.report.error = e.what();
      w.report.diagnostics.push_back({Severity::Error, to_string(e.kind()), e.what(), page, {e.offset(), e.offset()}});
    }
  }
  // Failed pages keep their identity in the model so edges into them still resolve.
  w.unit = ServletUnit{};
  w.unit.source_page = paths::normalize(page);
  w.unit.class_name = mangle_class_name(w.unit.source_page);
  w.unit.package_name = package_for_page(w.unit.source_page, config.translation.base_package);
  return w;
}

std::vector<PageWork> process_pages(const WebAppInventory& inv, const PipelineConfig& config) {
  std::vector<PageWork> work(inv.jsp_pages.size());
  unsigned jobs = config.jobs ? config.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, work.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) work[i] = process_page(inv, inv.jsp_pages[i], config);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  return work;
}

std::string relative_name(const WebAppInventory& inv, const fs::path& p) {
  fs::path rel = p.lexically_proximate(inv.root);
  return rel.generic_string();
}

}  // namespace

PipelineResult run_pipeline(const WebAppInventory& inv, const PipelineConfig& config) {
  PipelineResult result;
  PipelineReport& report = result.report;
  report.diagnostics = inv.diagnostics;

  // Step 1: pages to servlet units to code model.
  auto work = process_pages(inv, config);
  result.units.reserve(work.size());
  for (auto& w : work) result.units.push_back(w.unit);
  result.model = kdm::discover_model(result.units, config.model_name);

  // Step 2: deployment metadata.
  std::vector<ServletDecl> decls;
  std::vector<UrlMapping> mappings;
  if (inv.web_xml) {
    report.web_xml = relative_name(inv, *inv.web_xml);
    if (auto text = read_file(*inv.web_xml)) {
      try {
        WebXmlContents wx = parse_web_xml(*text);
        decls = std::move(wx.decls);
        mappings = std::move(wx.mappings);
        report.diagnostics.insert(report.diagnostics.end(), wx.diagnostics.begin(), wx.diagnostics.end());
      } catch (const XmlSyntaxError& e) {
        report.diagnostics.push_back({Severity::Error, "XmlSyntaxError", e.what(), *report.web_xml, {}});
      }
    } else {
      report.diagnostics.push_back({Severity::Error, "UnreadableEntry", "cannot read file", *report.web_xml, {}});
    }
  }
  for (const auto& src : inv.java_sources) {
    const std::string rel = relative_name(inv, src);
    auto text = read_file(src);
    if (!text) {
      report.diagnostics.push_back({Severity::Warning, "UnreadableEntry", "cannot read file", rel, {}});
      continue;
    }
    const std::string cls = qualified_class_name(*text, src.stem().string());
    AnnotationScan scan = scan_webservlet_annotations(*text, cls);
    for (auto d : scan.diagnostics) {
      d.file = rel;
      report.diagnostics.push_back(std::move(d));
    }
    if (scan.mappings.empty()) continue;
    AnnotationReport ar{rel, cls, {}};
    for (const auto& m : scan.mappings) {
      ar.patterns.push_back(m.url_pattern);
      if (std::find(decls.begin(), decls.end(), m.decl) == decls.end()) decls.push_back(m.decl);
      mappings.push_back({m.url_pattern, m.decl.servlet_name});
    }
    report.annotations.push_back(std::move(ar));
  }
  std::set<std::string, std::less<>> known(inv.jsp_pages.begin(), inv.jsp_pages.end());
  UrlMappingTable table = build_lookup_table(decls, mappings, config.context_path, known);
  report.diagnostics.insert(report.diagnostics.end(), table.diagnostics.begin(), table.diagnostics.end());
  report.servlets = table.decls;
  report.mappings = table.entries;

  std::map<std::string, kdm::ClassId, std::less<>> servlet_classes;
  for (const auto& d : table.decls) {
    if (!d.servlet_class || servlet_classes.contains(*d.servlet_class)) continue;
    if (auto existing = kdm::find_class_by_name(result.model, *d.servlet_class);
        existing && result.model.at(*existing).source_page) {
      report.diagnostics.push_back({Severity::Warning, "class-name-collision",
                                    "servlet class " + *d.servlet_class + " collides with a translated page", {}, {}});
      continue;
    }
    servlet_classes.emplace(*d.servlet_class, kdm::add_servlet_class(result.model, *d.servlet_class));
  }

  // Step 3: resolve and inject.
  DependencyGraph& graph = result.graph;
  for (const auto& page : inv.jsp_pages) graph.nodes.emplace(page, GraphNodeKind::Page);
  for (auto& w : work) {
    const std::string& page = w.report.page;
    const auto caller = kdm::find_class_unit(result.model, page);
    for (auto& ref : w.extraction.refs) {
      RefOutcome outcome{ref, resolve_url(table, ref, page), std::nullopt};
      const std::string kind = to_string(ref.tag_kind);
      ResolvedTarget& t = outcome.target;
      std::optional<kdm::ClassId> target;
      std::string target_node;
      GraphNodeKind target_kind = GraphNodeKind::Page;
      switch (t.kind) {
        case TargetKind::External:
          graph.add_edge({page, t.normalized_url, kind, TargetKind::External}, GraphNodeKind::External);
          break;
        case TargetKind::Unresolved:
          graph.add_unresolved({page, ref.raw_url, t.reason, kind});
          break;
        case TargetKind::InternalPage:
          target = kdm::find_class_unit(result.model, t.page_path);
          target_node = t.page_path;
          if (!target) {
            t.kind = TargetKind::Unresolved;
            t.reason = "target page " + t.page_path + " is not part of the application";
            graph.add_unresolved({page, ref.raw_url, t.reason, kind});
          }
          break;
        case TargetKind::InternalServletClass:
          if (auto it = servlet_classes.find(t.class_name); it != servlet_classes.end()) target = it->second;
          target_node = t.class_name;
          target_kind = GraphNodeKind::ServletClass;
          if (!target) {
            t.kind = TargetKind::Unresolved;
            t.reason = "servlet class " + t.class_name + " is not in the model";
            graph.add_unresolved({page, ref.raw_url, t.reason, kind});
          }
          break;
      }
      if (target && caller) {
        auto rep = kdm::add_method_call(result.model, *caller, *target, kind);
        outcome.mutation = rep.outcome;
        if (rep.outcome != kdm::MutationOutcome::MissingServiceMethod) {
          graph.add_edge({page, target_node, kind, t.kind}, target_kind);
        } else {
          w.report.diagnostics.push_back({Severity::Error, "MissingServiceMethod", rep.message, page, ref.span});
        }
      }
      w.report.refs.push_back(std::move(outcome));
    }
    report.pages.push_back(std::move(w.report));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

ordered_json diagnostics_json(const Diagnostics& ds) {
  ordered_json a = ordered_json::array();
  for (const auto& d : ds) {
    a.push_back({{"severity", to_string(d.severity)},
                 {"code", d.code},
                 {"message", d.message},
                 {"file", d.file},
                 {"span", {d.span.begin, d.span.end}}});
  }
  return a;
}

}  // namespace

const char* to_string(Severity s) {
  switch (s) {
    case Severity::Note: return "note";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "?";
}

std::string emit_dot(const DependencyGraph& graph) {
  std::ostringstream os;
  os << "digraph deps {\n";
  for (const auto& [id, kind] : graph.nodes) {
    os << "  " << dot_quote(id);
    switch (kind) {
      case GraphNodeKind::Page: os << " [shape=box]"; break;
      case GraphNodeKind::ServletClass: os << " [shape=component]"; break;
      case GraphNodeKind::External: os << " [shape=ellipse, style=dotted]"; break;
      case GraphNodeKind::Unresolved: break;
    }
    os << ";\n";
  }
  for (const auto& e : graph.edges) {
    os << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to) << " [label=" << dot_quote(e.tag_kind) << "];\n";
  }
  for (std::size_t i = 0; i < graph.unresolved.size(); ++i) {
    const auto& u = graph.unresolved[i];
    const std::string placeholder = "unresolved#" + std::to_string(i);
    os << "  " << dot_quote(placeholder) << " [label=" << dot_quote(u.reason + "\n" + u.raw_url)
       << ", shape=note];\n";
    os << "  " << dot_quote(u.from) << " -> " << dot_quote(placeholder) << " [label=" << dot_quote(u.tag_kind)
       << ", style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

std::string report_to_json(const PipelineReport& report) {
  ordered_json j;
  j["format"] = "jspkdm-report";
  j["version"] = 1;

  std::size_t failed = 0, statements = 0, refs = 0, relationships = 0, duplicates = 0;
  std::map<std::string, std::size_t> by_kind{{"internal-page", 0}, {"internal-servlet-class", 0},
                                             {"external", 0}, {"unresolved", 0}};
  for (const auto& p : report.pages) {
    if (!p.parsed) ++failed;
    statements += p.statements;
    refs += p.refs.size();
    for (const auto& r : p.refs) {
      ++by_kind[to_string(r.target.kind)];
      if (r.mutation == kdm::MutationOutcome::Added) ++relationships;
      if (r.mutation == kdm::MutationOutcome::Duplicate) ++duplicates;
    }
  }
  std::size_t diagnostics = report.diagnostics.size();
  for (const auto& p : report.pages) diagnostics += p.diagnostics.size();
  ordered_json summary;
  summary["pages"] = report.pages.size();
  summary["pages_failed"] = failed;
  summary["statements"] = statements;
  summary["url_refs"] = refs;
  summary["resolutions"] = by_kind;
  summary["relationships_added"] = relationships;
  summary["duplicate_refs"] = duplicates;
  summary["diagnostics"] = diagnostics;
  summary["problems"] = report.problem_count();
  j["summary"] = summary;

  j["pages"] = ordered_json::array();
  for (const auto& p : report.pages) {
    ordered_json pj;
    pj["page"] = p.page;
    pj["class"] = p.class_name;
    pj["status"] = p.parsed ? "ok" : "failed";
    if (!p.parsed) pj["error"] = p.error;
    pj["statements"] = p.statements;
    pj["url_refs"] = ordered_json::array();
    for (const auto& r : p.refs) {
      ordered_json rj;
      rj["tag_kind"] = to_string(r.ref.tag_kind);
      rj["attribute"] = r.ref.attribute;
      rj["raw_url"] = r.ref.raw_url;
      rj["dynamic"] = r.ref.dynamic;
      rj["http_method"] = r.ref.http_method ? ordered_json(to_string(*r.ref.http_method)) : ordered_json(nullptr);
      rj["span"] = {r.ref.span.begin, r.ref.span.end};
      ordered_json res;
      res["kind"] = to_string(r.target.kind);
      res["normalized_url"] = r.target.normalized_url;
      if (r.target.kind == TargetKind::InternalPage) res["page"] = r.target.page_path;
      if (r.target.kind == TargetKind::InternalServletClass) res["class"] = r.target.class_name;
      if (r.target.kind == TargetKind::Unresolved) res["reason"] = r.target.reason;
      if (!r.target.matched_pattern.empty()) res["pattern"] = r.target.matched_pattern;
      if (!r.target.shadowed.empty()) res["shadowed"] = r.target.shadowed;
      if (!r.target.notes.empty()) res["notes"] = r.target.notes;
      if (r.mutation) res["model"] = kdm::to_string(*r.mutation);
      rj["resolution"] = std::move(res);
      pj["url_refs"].push_back(std::move(rj));
    }
    pj["diagnostics"] = diagnostics_json(p.diagnostics);
    j["pages"].push_back(std::move(pj));
  }

  ordered_json dj;
  dj["web_xml"] = report.web_xml ? ordered_json(*report.web_xml) : ordered_json(nullptr);
  dj["servlets"] = ordered_json::array();
  for (const auto& s : report.servlets) {
    ordered_json sj;
    sj["name"] = s.servlet_name;
    sj["source"] = to_string(s.source);
    if (s.servlet_class) sj["servlet_class"] = *s.servlet_class;
    if (s.jsp_file) sj["jsp_file"] = *s.jsp_file;
    dj["servlets"].push_back(std::move(sj));
  }
  dj["mappings"] = ordered_json::array();
  for (const auto& m : report.mappings) {
    dj["mappings"].push_back({{"url_pattern", m.url_pattern}, {"servlet", m.servlet_name}, {"kind", to_string(m.kind)}});
  }
  dj["annotations"] = ordered_json::array();
  for (const auto& a : report.annotations) {
    dj["annotations"].push_back({{"source", a.source}, {"class", a.class_name}, {"patterns", a.patterns}});
  }
  j["deployment"] = std::move(dj);
  j["diagnostics"] = diagnostics_json(report.diagnostics);
  return j.dump(2) + "\n";
}

}  // namespace jspkdm
