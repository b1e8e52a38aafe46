#pragma once

#include <string>
#include <string_view>

namespace jspkdm::paths {

/// Context-relative form of `path`: leading "/", "//" collapsed, "." and
/// ".." segments removed. A ".." above the root is dropped and sets
/// `*clamped` when provided. Idempotent.
std::string normalize(std::string_view path, bool* clamped = nullptr);

/// Directory part of a normalized page path, always ending in "/".
std::string directory_of(std::string_view page_path);

bool iequals(std::string_view a, std::string_view b);
std::string to_lower(std::string_view s);

}  // namespace jspkdm::paths
