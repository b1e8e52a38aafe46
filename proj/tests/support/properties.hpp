// Randomized property suites. Each returns how many cases ran and the first
// few failures, so both the unit runner and the acceptance runner can use
// them.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace props {

struct Outcome {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::vector<std::string> samples;  // first few failure descriptions

  bool ok() const { return cases > 0 && failures == 0; }
  void fail(std::string what);
};

Outcome span_coverage(std::uint32_t seed, std::size_t cases);
Outcome kind_counts(std::uint32_t seed, std::size_t cases);
Outcome translation_conservation(std::uint32_t seed, std::size_t cases);
Outcome normalization_idempotence(std::uint32_t seed, std::size_t cases);
Outcome mangle_injectivity(std::uint32_t seed, std::size_t cases);
Outcome parser_robustness(std::uint32_t seed, std::size_t cases);
Outcome url_precedence(std::uint32_t seed, std::size_t cases);
Outcome json_round_trip(std::uint32_t seed, std::size_t cases);
Outcome xmi_references(std::uint32_t seed, std::size_t cases);

}  // namespace props
