#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace jspkdm {

/// Half-open byte range [begin, end) into a page's source text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class Severity { Note, Warning, Error };

const char* to_string(Severity s);

/// A non-fatal finding produced while analysing a page or a descriptor.
struct Diagnostic {
  Severity severity = Severity::Warning;
  std::string code;  // short machine-readable tag, e.g. "missing-attribute"
  std::string message;
  std::string file;  // page path or descriptor path, may be empty
  Span span;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace jspkdm
