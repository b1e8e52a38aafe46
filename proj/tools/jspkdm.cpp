// jspkdm analyze <webapp-root> — recover a KDM code model and dependency graph
// from a JSP web application.
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "jspkdm/pipeline.hpp"

namespace fs = std::filesystem;
using namespace jspkdm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitFatal = 2;

struct Settings {
  std::string root;
  std::string out = "jspkdm-out";
  std::vector<std::string> formats{"xmi", "json", "dot"};
  std::string context_path;
  std::vector<std::string> source_roots;
  std::vector<std::string> include;
  std::vector<std::string> exclude;
  std::vector<std::string> tag_handlers;
  std::string servlet_src_out;
  std::string encoding = "utf-8";
  std::string config;
  unsigned jobs = 0;
  bool strict = false;
};

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::size_t start = 0;
    while (start <= item.size()) {
      std::size_t comma = item.find(',', start);
      if (comma == std::string::npos) comma = item.size();
      if (comma > start) out.push_back(item.substr(start, comma - start));
      start = comma + 1;
    }
  }
  return out;
}

// Values from the config file apply only where the flag was not given.
void apply_config(Settings& s, const CLI::App& cmd) {
  std::ifstream in(s.config);
  if (!in) throw PipelineError("cannot read config file " + s.config);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError("config file " + s.config + ": " + e.what());
  }
  const fs::path base = fs::path(s.config).parent_path();
  auto rel = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };
  auto take = [&](const char* flag, const char* key, auto& target) {
    if (cmd.count(flag) == 0 && j.contains(key)) j.at(key).get_to(target);
  };
  try {
    take("--out", "out", s.out);
    take("--format", "formats", s.formats);
    take("--context-path", "context_path", s.context_path);
    take("--source-root", "source_roots", s.source_roots);
    take("--include", "include", s.include);
    take("--exclude", "exclude", s.exclude);
    take("--tag-handler", "tag_handlers", s.tag_handlers);
    take("--servlet-src-out", "servlet_src_out", s.servlet_src_out);
    take("--encoding", "encoding", s.encoding);
    take("--jobs", "jobs", s.jobs);
    if (cmd.count("--strict") == 0 && j.contains("strict")) s.strict = j.at("strict").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError("config file " + s.config + ": " + e.what());
  }
  if (cmd.count("--out") == 0 && j.contains("out")) s.out = rel(s.out);
  if (cmd.count("--source-root") == 0) {
    for (auto& r : s.source_roots) r = rel(r);
  }
  if (cmd.count("--servlet-src-out") == 0 && !s.servlet_src_out.empty()) s.servlet_src_out = rel(s.servlet_src_out);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw PipelineError("cannot write " + path.string());
}

int analyze(Settings s, const CLI::App& cmd) {
  if (!s.config.empty()) apply_config(s, cmd);
  s.formats = split_list(s.formats);
  const std::set<std::string> allowed{"xmi", "json", "dot"};
  for (const auto& f : s.formats) {
    if (!allowed.contains(f)) throw PipelineError("unknown output format '" + f + "'");
  }

  PipelineConfig config;
  config.context_path = s.context_path;
  config.jobs = s.jobs;
  if (s.encoding == "latin-1" || s.encoding == "latin1" || s.encoding == "iso-8859-1") {
    config.encoding = SourceEncoding::Latin1;
  } else if (s.encoding != "utf-8" && s.encoding != "utf8") {
    throw PipelineError("unsupported encoding '" + s.encoding + "'");
  }
  for (const auto& h : split_list(s.tag_handlers)) config.translation.known_tag_handlers.insert(h);

  ScanOptions scan;
  scan.include = s.include;
  scan.exclude = s.exclude;
  for (const auto& r : s.source_roots) scan.source_roots.emplace_back(r);

  WebAppInventory inventory = scan_webapp(s.root, scan);
  PipelineResult result = run_pipeline(inventory, config);

  const fs::path out = s.out;
  fs::create_directories(out);
  for (const auto& f : s.formats) {
    if (f == "xmi") write_file(out / "model.xmi", kdm::serialize_model(result.model, kdm::Format::Xmi));
    if (f == "json") write_file(out / "model.json", kdm::serialize_model(result.model, kdm::Format::Json));
    if (f == "dot") write_file(out / "deps.dot", emit_dot(result.graph));
  }
  write_file(out / "report.json", report_to_json(result.report));

  if (!s.servlet_src_out.empty()) {
    fs::create_directories(s.servlet_src_out);
    for (std::size_t i = 0; i < result.units.size(); ++i) {
      if (!result.report.pages[i].parsed) continue;
      const ServletUnit& u = result.units[i];
      write_file(fs::path(s.servlet_src_out) / (u.class_name + ".java"), render_servlet_source(u));
    }
  }

  std::size_t edges = result.graph.edges.size();
  std::cerr << "jspkdm: " << result.report.pages.size() << " pages, " << result.model.relationships.size()
            << " relationships, " << edges << " graph edges, " << result.graph.unresolved.size() << " unresolved\n";

  auto print = [](const Diagnostic& d) {
    if (d.severity == Severity::Note) return;
    std::cerr << (d.file.empty() ? "<app>" : d.file) << ": " << to_string(d.severity) << ": [" << d.code << "] "
              << d.message << '\n';
  };
  for (const auto& d : result.report.diagnostics) print(d);
  for (const auto& p : result.report.pages) {
    for (const auto& d : p.diagnostics) print(d);
  }

  if (result.report.problem_count() == 0) return kExitOk;
  return s.strict ? kExitFatal : kExitDiagnostics;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover a KDM code model and page dependency graph from a JSP web application"};
  app.require_subcommand(1);

  Settings s;
  CLI::App* cmd = app.add_subcommand("analyze", "Analyze a web application directory");
  cmd->add_option("root", s.root, "Web application root (the directory holding WEB-INF)")->required();
  cmd->add_option("--out", s.out, "Output directory")->capture_default_str();
  cmd->add_option("--format", s.formats, "Comma-separated model formats: xmi,json,dot")->delimiter(',');
  cmd->add_option("--context-path", s.context_path, "Deployment context path, e.g. /app");
  cmd->add_option("--source-root", s.source_roots, "Extra directory scanned for @WebServlet classes");
  cmd->add_option("--include", s.include, "Only analyze files matching this glob");
  cmd->add_option("--exclude", s.exclude, "Skip files matching this glob");
  cmd->add_option("--tag-handler", s.tag_handlers, "Custom action translated as a tag-handler call (e.g. c:forEach)");
  cmd->add_option("--servlet-src-out", s.servlet_src_out, "Also write the translated servlet sources here");
  cmd->add_option("--encoding", s.encoding, "Page encoding: utf-8 or latin-1")->capture_default_str();
  cmd->add_option("--jobs", s.jobs, "Worker threads for per-page work (0 = all cores)");
  cmd->add_option("--config", s.config, "JSON file with defaults for the options above");
  cmd->add_flag("--strict", s.strict, "Exit with 2 when any warning or error is reported");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitFatal;
  }

  try {
    return analyze(s, *cmd);
  } catch (const std::exception& e) {
    std::cerr << "jspkdm: fatal: " << e.what() << '\n';
    return kExitFatal;
  }
}
