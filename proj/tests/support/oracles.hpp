// Independent reference implementations the tests compare the library
// against. Only the random generators touch the library, and only its
// construction API.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jspkdm/code_model.hpp"

namespace oracle {

struct DelimiterCounts {
  std::size_t scriptlets = 0;
  std::size_t declarations = 0;
  std::size_t expressions = 0;
  std::size_t directives = 0;
  std::size_t comments = 0;
};

/// Counts `<% %>`, `<%! %>`, `<%= %>`, `<%@ %>` and `<%-- --%>` regions by a
/// plain left-to-right scan for the delimiters.
DelimiterCounts scan_delimiters(const std::string& text);

/// `text` with every scriptlet, declaration, expression and JSP comment
/// region cut out. Directives stay.
std::string remove_scripting(const std::string& text);

/// Table rows found by regular expressions over raw page text, as
/// (tag kind name, raw url) pairs sorted.
std::vector<std::pair<std::string, std::string>> regex_table_refs(const std::string& text);

/// Java string-literal unescaping for the escapes the renderer produces.
std::string unescape_java(const std::string& literal_body);

/// The string literals of every `out.write("...")` call in rendered source,
/// unescaped.
std::vector<std::string> emitted_literals(const std::string& java_source);

/// Brute-force servlet pattern ranking: every pattern is tested, and the
/// winner is the best by (exact, longest prefix, extension, default).
/// Returns the winning pattern's index.
std::optional<std::size_t> best_pattern(const std::vector<std::string>& patterns, const std::string& path);

/// Prefix "/" and collapse repeated slashes.
std::string slash_normalize(const std::string& path);

/// A syntactically plausible JSP page assembled from random constructs, with
/// no delimiters inside string literals.
std::string random_page(std::mt19937& rng);

/// Random context-relative path made of short segments.
std::string random_path(std::mt19937& rng);

/// Random small model built through the public construction API.
jspkdm::kdm::KdmModel random_model(std::mt19937& rng);

struct XmiCheck {
  std::size_t relationships = 0;
  std::size_t class_units = 0;
  std::vector<std::string> problems;
};

/// Re-parses XMI text with an XML reader and checks that every relationship's
/// from/to ids name a ClassUnit element.
XmiCheck check_xmi(const std::string& xmi);

}  // namespace oracle
