#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigflow/domain.hpp"

namespace sigflow {

/// A problem found while reading a scenario document, with its location.
struct ParseError {
  int line = 0;  ///< 1-based; 0 when unknown
  int column = 0;
  std::string field;
  std::string message;

  std::string to_string() const;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<ParseError> errors;

  bool ok() const { return scenario.has_value() && errors.empty(); }
};

/// Parses a YAML scenario document and runs validate_scenario on the result.
ParseResult parse_scenario(const std::string& text, bool oracle_requested = false);
ParseResult load_scenario(const std::string& path, bool oracle_requested = false);

/// YAML text that parse_scenario reads back into an equivalent Scenario.
/// Throws std::logic_error for programmatic (custom) profiles.
std::string serialize_scenario(const Scenario& s);

}  // namespace sigflow
