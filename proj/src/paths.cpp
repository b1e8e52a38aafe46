#include "jspkdm/paths.hpp"

#include <algorithm>
#include <vector>

namespace jspkdm::paths {

std::string normalize(std::string_view path, bool* clamped) {
  std::vector<std::string_view> segments;
  bool trailing_slash = false;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    std::size_t next = path.find('/', pos);
    if (next == std::string_view::npos) next = path.size();
    std::string_view seg = path.substr(pos, next - pos);
    const bool last = next == path.size();
    if (seg == "..") {
      if (segments.empty()) {
        if (clamped) *clamped = true;
      } else {
        segments.pop_back();
      }
      trailing_slash = last;
    } else if (seg == ".") {
      trailing_slash = last;
    } else if (!seg.empty()) {
      segments.push_back(seg);
      trailing_slash = false;
    } else {
      trailing_slash = last && !segments.empty();
    }
    pos = next + 1;
  }
  std::string out;
  for (auto seg : segments) {
    out += '/';
    out += seg;
  }
  if (out.empty() || trailing_slash) out += '/';
  return out;
}

std::string directory_of(std::string_view page_path) {
  std::string norm = normalize(page_path);
  return norm.substr(0, norm.rfind('/') + 1);
}

static char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return lower(x) == lower(y); });
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

}  // namespace jspkdm::paths
