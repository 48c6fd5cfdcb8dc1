#pragma once

// Reader and writer for `.carxmi` model instance documents.
//
// Dialect summary (see docs/carxmi-format.md for the full description):
//   <CarServer xmi:version="2.0">
//     <ZoneController id="front" memoryCapacity="4096" ... containers="a b"/>
//     <Camera id="camera1" width="1920" ...>
//       <param key="sensor_tick" value="0.05"/>
//     </Camera>
//   </CarServer>
// Attribute names are the metamodel field names. References are
// space-separated id lists; scalar lists are comma-separated; key/value maps
// are <param> children.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carserver/metamodel.hpp"
#include "carserver/schema.hpp"

namespace carserver::xmi {

enum class Severity { Error, Warning };

struct ParseDiagnostic {
  Severity severity = Severity::Error;
  int line = 1;
  int column = 1;
  std::string message;
};

struct ParseResult {
  /// Present iff no diagnostic has Error severity.
  std::optional<metamodel::ModelInstance> instance;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return instance.has_value(); }
  std::string format_diagnostics(std::string_view source_name = "<input>") const;
};

ParseResult parse_instance(std::string_view text);

/// Deterministic document: elements ordered by type then id, attributes in
/// declaration order. Throws InvalidInstance when the instance has
/// violations that a reader would reject (identity, reference, domain) or
/// list values that cannot be encoded.
std::string serialize_instance(const metamodel::ModelInstance& instance);

/// Canonical string form of one attribute. Lists are comma-joined, maps are
/// `key=value` pairs comma-joined. Falls back to the element's parameter map
/// when `attribute` is not a declared field.
/// Throws UnknownId, UnknownAttribute, or MissingValue for an absent optional.
std::string get_attribute(const metamodel::ModelInstance& instance, std::string_view element_id,
                          std::string_view attribute);

std::string format_value(const metamodel::FieldValue& value);

/// Reads and parses a file; throws InvalidInstance with formatted diagnostics.
metamodel::ModelInstance load_instance(const std::filesystem::path& path);

}  // namespace carserver::xmi
