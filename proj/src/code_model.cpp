#include "jspkdm/code_model.hpp"

#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "jspkdm/paths.hpp"

namespace jspkdm::kdm {

using ordered_json = nlohmann::ordered_json;

MethodUnit* ClassUnit::method(std::string_view method_name) {
  for (auto& m : code_elements) {
    if (m.name == method_name) return &m;
  }
  return nullptr;
}

const MethodUnit* ClassUnit::method(std::string_view method_name) const {
  return const_cast<ClassUnit*>(this)->method(method_name);
}

const char* to_string(MutationOutcome o) {
  switch (o) {
    case MutationOutcome::Added: return "added";
    case MutationOutcome::Duplicate: return "duplicate";
    case MutationOutcome::MissingServiceMethod: return "missing-service-method";
  }
  return "?";
}

namespace {

std::string element_name(const CodeStatement& s) {
  switch (s.kind) {
    case StatementKind::InlineCode: return "scriptlet";
    case StatementKind::TemplateEmit: return "out.write";
    case StatementKind::ExpressionEmit: return "out.print";
    case StatementKind::BeanInstantiation:
      return s.metadata ? "new " + s.metadata->class_name : "new";
    case StatementKind::PropertyGet:
    case StatementKind::PropertySet:
    case StatementKind::TagHandlerCall:
      return s.metadata ? s.metadata->bean_id + "." + s.metadata->method : to_string(s.kind);
  }
  return "statement";
}

BlockUnit block_from(const std::vector<CodeStatement>& statements) {
  BlockUnit b;
  b.elements.reserve(statements.size());
  for (const auto& s : statements) {
    b.elements.push_back(CodeElement{element_name(s), to_string(s.kind), s.origin_span, {}});
  }
  return b;
}

PackageUnit& package_named(KdmModel& model, std::string_view name) {
  for (auto& p : model.packages) {
    if (p.name == name) return p;
  }
  model.packages.push_back(PackageUnit{std::string(name), {}});
  return model.packages.back();
}

}  // namespace

KdmModel discover_model(const std::vector<ServletUnit>& units, std::string model_name) {
  KdmModel model;
  model.name = std::move(model_name);
  std::set<std::string, std::less<>> names;
  for (const auto& u : units) {
    if (!names.insert(u.class_name).second) {
      throw ModelError("DuplicateClassName: " + u.class_name + " (" + u.source_page + ")");
    }
    ClassUnit cu;
    cu.name = u.class_name;
    cu.source_page = paths::normalize(u.source_page);
    cu.code_elements.push_back(MethodUnit{std::string(kInitMethod), block_from(u.init_body)});
    cu.code_elements.push_back(MethodUnit{std::string(kServiceMethod), block_from(u.service_body)});
    cu.code_elements.push_back(MethodUnit{std::string(kDestroyMethod), block_from(u.destroy_body)});
    ClassId id{model.class_units.size()};
    model.class_units.push_back(std::move(cu));
    package_named(model, u.package_name).classes.push_back(id);
  }
  return model;
}

ClassId add_servlet_class(KdmModel& model, std::string_view qualified_name) {
  if (auto existing = find_class_by_name(model, qualified_name)) return *existing;
  ClassUnit cu;
  cu.name = std::string(qualified_name);
  cu.code_elements.push_back(MethodUnit{"service", {}});
  ClassId id{model.class_units.size()};
  model.class_units.push_back(std::move(cu));
  auto dot = qualified_name.rfind('.');
  package_named(model, dot == std::string_view::npos ? std::string_view{} : qualified_name.substr(0, dot))
      .classes.push_back(id);
  return id;
}

std::optional<ClassId> find_class_unit(const KdmModel& model, std::string_view source_page) {
  const std::string wanted = paths::normalize(source_page);
  for (std::size_t i = 0; i < model.class_units.size(); ++i) {
    const auto& page = model.class_units[i].source_page;
    if (page && *page == wanted) return ClassId{i};
  }
  return std::nullopt;
}

std::optional<ClassId> find_class_by_name(const KdmModel& model, std::string_view name) {
  for (std::size_t i = 0; i < model.class_units.size(); ++i) {
    if (model.class_units[i].name == name) return ClassId{i};
  }
  return std::nullopt;
}

MutationReport add_method_call(KdmModel& model, ClassId caller, ClassId target, std::string_view kind) {
  if (caller.value >= model.class_units.size() || target.value >= model.class_units.size()) {
    throw ModelError("add_method_call: class id outside the model");
  }
  MethodUnit* service = model.at(caller).method(kServiceMethod);
  if (!service) {
    return {MutationOutcome::MissingServiceMethod, std::nullopt,
            model.at(caller).name + " has no " + std::string(kServiceMethod) + " method"};
  }
  for (std::size_t i = 0; i < model.relationships.size(); ++i) {
    const auto& r = model.relationships[i];
    if (r.from == caller && r.to == target && r.kind == kind) {
      return {MutationOutcome::Duplicate, RelationshipId{i}, "relationship already present"};
    }
  }
  RelationshipId rid{model.relationships.size()};
  model.relationships.push_back(CodeRelationship{caller, target, std::string(kind), std::string(kNewCallLabel)});
  service->block.elements.push_back(CodeElement{std::string(kNewCallLabel), "ActionElement", std::nullopt, {rid}});
  service->block.relations.push_back(rid);
  return {MutationOutcome::Added, rid, {}};
}

std::vector<std::string> validate(const KdmModel& model) {
  std::vector<std::string> problems;
  const std::size_t nclasses = model.class_units.size();
  const std::size_t nrels = model.relationships.size();
  std::set<std::string> names;
  for (const auto& c : model.class_units) {
    if (!names.insert(c.name).second) problems.push_back("duplicate class name " + c.name);
    if (c.source_page && !c.method(kServiceMethod)) problems.push_back(c.name + " lacks _jspService");
    for (const auto& m : c.code_elements) {
      for (auto r : m.block.relations) {
        if (r.value >= nrels) problems.push_back(c.name + "." + m.name + " block references missing relationship");
      }
      for (const auto& e : m.block.elements) {
        for (auto r : e.relations) {
          if (r.value >= nrels) problems.push_back(c.name + "." + m.name + " element references missing relationship");
        }
      }
    }
  }
  for (const auto& p : model.packages) {
    for (auto id : p.classes) {
      if (id.value >= nclasses) problems.push_back("package " + p.name + " references missing class");
    }
  }
  std::set<std::tuple<std::size_t, std::size_t, std::string>> triples;
  for (const auto& r : model.relationships) {
    if (r.from.value >= nclasses || r.to.value >= nclasses) problems.push_back("relationship endpoint missing");
    if (!triples.emplace(r.from.value, r.to.value, r.kind).second) problems.push_back("duplicate relationship");
  }
  return problems;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ordered_json ids_to_json(const std::vector<RelationshipId>& ids) {
  ordered_json a = ordered_json::array();
  for (auto id : ids) a.push_back(id.value);
  return a;
}

std::string to_json(const KdmModel& model) {
  ordered_json j;
  j["format"] = "jspkdm-model";
  j["version"] = 1;
  j["name"] = model.name;
  j["packages"] = ordered_json::array();
  for (const auto& p : model.packages) {
    ordered_json pj;
    pj["name"] = p.name;
    pj["classes"] = ordered_json::array();
    for (auto c : p.classes) pj["classes"].push_back(c.value);
    j["packages"].push_back(std::move(pj));
  }
  j["classes"] = ordered_json::array();
  for (const auto& c : model.class_units) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["sourcePage"] = c.source_page ? ordered_json(*c.source_page) : ordered_json(nullptr);
    cj["methods"] = ordered_json::array();
    for (const auto& m : c.code_elements) {
      ordered_json mj;
      mj["name"] = m.name;
      ordered_json elements = ordered_json::array();
      for (const auto& e : m.block.elements) {
        ordered_json ej;
        ej["name"] = e.name;
        ej["kind"] = e.kind;
        ej["span"] = e.origin_span ? ordered_json::array({e.origin_span->begin, e.origin_span->end})
                                   : ordered_json(nullptr);
        ej["relations"] = ids_to_json(e.relations);
        elements.push_back(std::move(ej));
      }
      mj["block"] = {{"elements", std::move(elements)}, {"relations", ids_to_json(m.block.relations)}};
      cj["methods"].push_back(std::move(mj));
    }
    j["classes"].push_back(std::move(cj));
  }
  j["relationships"] = ordered_json::array();
  for (const auto& r : model.relationships) {
    j["relationships"].push_back(
        {{"from", r.from.value}, {"to", r.to.value}, {"kind", r.kind}, {"label", r.label}});
  }
  return j.dump(2) + "\n";
}

std::vector<RelationshipId> ids_from_json(const ordered_json& a) {
  std::vector<RelationshipId> out;
  for (const auto& v : a) out.push_back(RelationshipId{v.get<std::size_t>()});
  return out;
}

}  // namespace

KdmModel deserialize_json(std::string_view text) {
  KdmModel model;
  try {
    const auto j = ordered_json::parse(text);
    if (j.at("format") != "jspkdm-model") throw ModelError("not a jspkdm model document");
    model.name = j.at("name").get<std::string>();
    for (const auto& pj : j.at("packages")) {
      PackageUnit p;
      p.name = pj.at("name").get<std::string>();
      for (const auto& c : pj.at("classes")) p.classes.push_back(ClassId{c.get<std::size_t>()});
      model.packages.push_back(std::move(p));
    }
    for (const auto& cj : j.at("classes")) {
      ClassUnit c;
      c.name = cj.at("name").get<std::string>();
      if (!cj.at("sourcePage").is_null()) c.source_page = cj.at("sourcePage").get<std::string>();
      for (const auto& mj : cj.at("methods")) {
        MethodUnit m;
        m.name = mj.at("name").get<std::string>();
        const auto& bj = mj.at("block");
        for (const auto& ej : bj.at("elements")) {
          CodeElement e;
          e.name = ej.at("name").get<std::string>();
          e.kind = ej.at("kind").get<std::string>();
          if (!ej.at("span").is_null()) {
            e.origin_span = Span{ej.at("span").at(0).get<std::size_t>(), ej.at("span").at(1).get<std::size_t>()};
          }
          e.relations = ids_from_json(ej.at("relations"));
          m.block.elements.push_back(std::move(e));
        }
        m.block.relations = ids_from_json(bj.at("relations"));
        c.code_elements.push_back(std::move(m));
      }
      model.class_units.push_back(std::move(c));
    }
    for (const auto& rj : j.at("relationships")) {
      model.relationships.push_back(CodeRelationship{ClassId{rj.at("from").get<std::size_t>()},
                                                     ClassId{rj.at("to").get<std::size_t>()},
                                                     rj.at("kind").get<std::string>(),
                                                     rj.at("label").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model JSON: ") + e.what());
  }
  if (auto problems = validate(model); !problems.empty()) throw ModelError("invalid model: " + problems.front());
  return model;
}

// ---------------------------------------------------------------------------
// XMI

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          out += "&#" + std::to_string(static_cast<int>(ch)) + ";";
        } else {
          out += ch;
        }
    }
  }
  return out;
}

std::string class_xmi_id(ClassId id) { return "c" + std::to_string(id.value); }
std::string rel_xmi_id(RelationshipId id) { return "r" + std::to_string(id.value); }

class XmiWriter {
 public:
  explicit XmiWriter(const KdmModel& model) : model_(model) {}

  std::string write() {
    os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<xmi:XMI xmi:version=\"2.1\" xmlns:xmi=\"http://www.omg.org/XMI\""
        << " xmlns:kdm=\"http://www.omg.org/spec/KDM/1.3/kdm\""
        << " xmlns:code=\"http://www.omg.org/spec/KDM/1.3/code\">\n";
    os_ << "  <kdm:Segment xmi:id=\"s0\" name=\"" << xml_escape(model_.name) << "\">\n";
    os_ << "    <model xmi:id=\"m0\" xmi:type=\"code:CodeModel\" name=\"" << xml_escape(model_.name) << "\">\n";
    std::set<std::size_t> placed;
    for (std::size_t p = 0; p < model_.packages.size(); ++p) {
      const auto& pkg = model_.packages[p];
      os_ << "      <codeElement xmi:id=\"p" << p << "\" xmi:type=\"code:Package\" name=\"" << xml_escape(pkg.name)
          << "\">\n";
      for (auto id : pkg.classes) {
        write_class(id, "        ");
        placed.insert(id.value);
      }
      os_ << "      </codeElement>\n";
    }
    for (std::size_t i = 0; i < model_.class_units.size(); ++i) {
      if (!placed.contains(i)) write_class(ClassId{i}, "      ");
    }
    for (std::size_t r = 0; r < model_.relationships.size(); ++r) {
      if (!owned_.contains(r)) write_relationship(RelationshipId{r}, "      ");
    }
    os_ << "    </model>\n  </kdm:Segment>\n</xmi:XMI>\n";
    return os_.str();
  }

 private:
  void write_relationship(RelationshipId id, const std::string& ind) {
    const auto& r = model_.relationships.at(id.value);
    os_ << ind << "<codeRelation xmi:id=\"" << rel_xmi_id(id) << "\" xmi:type=\"code:CodeRelationship\" from=\""
        << class_xmi_id(r.from) << "\" to=\"" << class_xmi_id(r.to) << "\" kind=\"" << xml_escape(r.kind)
        << "\" label=\"" << xml_escape(r.label) << "\"/>\n";
  }

  void write_class(ClassId id, const std::string& ind) {
    const auto& c = model_.at(id);
    const std::string cid = class_xmi_id(id);
    os_ << ind << "<codeElement xmi:id=\"" << cid << "\" xmi:type=\"code:ClassUnit\" name=\"" << xml_escape(c.name)
        << "\"";
    if (c.source_page) os_ << " sourcePage=\"" << xml_escape(*c.source_page) << "\"";
    os_ << ">\n";
    for (std::size_t m = 0; m < c.code_elements.size(); ++m) {
      const auto& method = c.code_elements[m];
      const std::string mid = cid + ".m" + std::to_string(m);
      os_ << ind << "  <codeElement xmi:id=\"" << mid << "\" xmi:type=\"code:MethodUnit\" name=\""
          << xml_escape(method.name) << "\">\n";
      os_ << ind << "    <codeElement xmi:id=\"" << mid << ".b\" xmi:type=\"code:BlockUnit\"";
      if (!method.block.relations.empty()) {
        os_ << " codeRelation=\"";
        for (std::size_t k = 0; k < method.block.relations.size(); ++k) {
          os_ << (k ? " " : "") << rel_xmi_id(method.block.relations[k]);
        }
        os_ << "\"";
      }
      if (method.block.elements.empty()) {
        os_ << "/>\n";
      } else {
        os_ << ">\n";
        for (std::size_t e = 0; e < method.block.elements.size(); ++e) {
          const auto& el = method.block.elements[e];
          os_ << ind << "      <codeElement xmi:id=\"" << mid << ".b.e" << e << "\" xmi:type=\"code:CodeElement\" name=\""
              << xml_escape(el.name) << "\" kind=\"" << xml_escape(el.kind) << "\"";
          if (el.origin_span) os_ << " span=\"" << el.origin_span->begin << " " << el.origin_span->end << "\"";
          if (el.relations.empty()) {
            os_ << "/>\n";
            continue;
          }
          os_ << ">\n";
          for (auto r : el.relations) {
            if (owned_.insert(r.value).second) {
              write_relationship(r, ind + "        ");
            } else {
              os_ << ind << "        <codeRelation href=\"#" << rel_xmi_id(r) << "\"/>\n";
            }
          }
          os_ << ind << "      </codeElement>\n";
        }
        os_ << ind << "    </codeElement>\n";
      }
      os_ << ind << "  </codeElement>\n";
    }
    os_ << ind << "</codeElement>\n";
  }

  const KdmModel& model_;
  std::ostringstream os_;
  std::set<std::size_t> owned_;
};

}  // namespace

std::string serialize_model(const KdmModel& model, Format format) {
  if (format == Format::Json) return to_json(model);
  return XmiWriter(model).write();
}

}  // namespace jspkdm::kdm
