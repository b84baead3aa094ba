#pragma once

#include <string>

#include "hyopf/network.hpp"

namespace hyopf {

// Parses the JSON case format. Powers in the file are MW/Mvar/MVA and are
// converted to per-unit on base_mva; voltages and admittances are already
// per-unit. Throws ParseError on malformed input, ValidationError when a
// structural invariant fails. The returned case is validated and has
// normalize_wind applied.
NetworkCase parse_case(const std::string& text);

// Inverse of parse_case (modulo float formatting): emits the same JSON
// schema with powers back in MW.
std::string serialize_case(const NetworkCase& cs);

// Importer for MATPOWER-convention matrix data given as JSON arrays under
// keys baseMVA / bus / gen / branch / gencost. AC side only.
NetworkCase import_matpower(const std::string& text);

}  // namespace hyopf
