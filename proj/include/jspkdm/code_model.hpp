#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jspkdm/diagnostics.hpp"
#include "jspkdm/servlet_translator.hpp"

namespace jspkdm::kdm {

/// Index of a ClassUnit in KdmModel::class_units.
struct ClassId {
  std::size_t value = 0;
  friend auto operator<=>(const ClassId&, const ClassId&) = default;
};

/// Index of a CodeRelationship in KdmModel::relationships.
struct RelationshipId {
  std::size_t value = 0;
  friend auto operator<=>(const RelationshipId&, const RelationshipId&) = default;
};

inline constexpr std::string_view kServiceMethod = "_jspService";
inline constexpr std::string_view kInitMethod = "_jspInit";
inline constexpr std::string_view kDestroyMethod = "_jspDestroy";
inline constexpr std::string_view kNewCallLabel = "newCall";

struct CodeElement {
  std::string name;
  std::string kind;  // statement kind, or "ActionElement" for injected calls
  std::optional<Span> origin_span;
  std::vector<RelationshipId> relations;

  friend bool operator==(const CodeElement&, const CodeElement&) = default;
};

struct BlockUnit {
  std::vector<CodeElement> elements;
  std::vector<RelationshipId> relations;

  friend bool operator==(const BlockUnit&, const BlockUnit&) = default;
};

struct MethodUnit {
  std::string name;
  BlockUnit block;

  friend bool operator==(const MethodUnit&, const MethodUnit&) = default;
};

struct ClassUnit {
  std::string name;
  std::optional<std::string> source_page;
  std::vector<MethodUnit> code_elements;

  MethodUnit* method(std::string_view method_name);
  const MethodUnit* method(std::string_view method_name) const;

  friend bool operator==(const ClassUnit&, const ClassUnit&) = default;
};

struct PackageUnit {
  std::string name;
  std::vector<ClassId> classes;

  friend bool operator==(const PackageUnit&, const PackageUnit&) = default;
};

struct CodeRelationship {
  ClassId from;
  ClassId to;
  std::string kind;   // dependency tag kind, or "call"
  std::string label;

  friend bool operator==(const CodeRelationship&, const CodeRelationship&) = default;
};

struct KdmModel {
  std::string name;
  std::vector<PackageUnit> packages;
  std::vector<ClassUnit> class_units;
  std::vector<CodeRelationship> relationships;

  const ClassUnit& at(ClassId id) const { return class_units.at(id.value); }
  ClassUnit& at(ClassId id) { return class_units.at(id.value); }

  friend bool operator==(const KdmModel&, const KdmModel&) = default;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One ClassUnit per servlet unit, with _jspInit/_jspService/_jspDestroy
/// methods mirroring the unit's statement lists. Throws ModelError
/// (DuplicateClassName) when two units share a class name.
KdmModel discover_model(const std::vector<ServletUnit>& units, std::string model_name = "jsp-webapp");

/// Adds a ClassUnit for a plain servlet class (no source page) in the
/// package named by its qualified name. Returns the existing unit when
/// one with that name is already present.
ClassId add_servlet_class(KdmModel& model, std::string_view qualified_name);

/// Sequential search by source page; the argument is normalized first.
std::optional<ClassId> find_class_unit(const KdmModel& model, std::string_view source_page);
std::optional<ClassId> find_class_by_name(const KdmModel& model, std::string_view name);

enum class MutationOutcome { Added, Duplicate, MissingServiceMethod };

const char* to_string(MutationOutcome o);

struct MutationReport {
  MutationOutcome outcome = MutationOutcome::Added;
  std::optional<RelationshipId> relationship;  // new or pre-existing edge
  std::string message;
};

/// Records a dependency from `caller` to `target` as a "newCall" element in
/// the caller's _jspService block, carrying a new CodeRelationship. An
/// existing (from, to, kind) triple is left alone and reported as Duplicate.
MutationReport add_method_call(KdmModel& model, ClassId caller, ClassId target, std::string_view kind);

enum class Format { Xmi, Json };

std::string serialize_model(const KdmModel& model, Format format);

/// Inverse of serialize_model(model, Format::Json). Throws ModelError on
/// malformed input or dangling references.
KdmModel deserialize_json(std::string_view text);

/// Checks the referential invariants; returns human-readable violations.
std::vector<std::string> validate(const KdmModel& model);

}  // namespace jspkdm::kdm
