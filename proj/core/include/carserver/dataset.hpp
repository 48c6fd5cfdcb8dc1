#pragma once

// Requirements dataset stored as RFC-4180 CSV (CRLF records, header row).
// Columns: Requirement text, Feature, Scenario, Metamodel, OCL rule,
// Model instance. An empty OCL rule or model instance cell means "absent".

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace carserver::dataset {

inline constexpr std::string_view kHeader =
    "Requirement text,Feature,Scenario,Metamodel,OCL rule,Model instance";

struct DatasetRow {
  std::string requirementText;
  std::string feature;
  std::string scenario;
  /// Path to the metamodel description, or inline text.
  std::string metamodel;
  std::optional<std::string> oclRule;
  std::optional<std::string> modelInstance;

  bool operator==(const DatasetRow&) const = default;
};

/// Appends one record, writing the header first when the file is new or
/// empty. Returns the 0-based index of the row. Throws EmptyRequirement,
/// MalformedCsv (existing file is not a dataset) or Io.
std::size_t append_row(const std::filesystem::path& path, const DatasetRow& row);

/// Throws OutOfRange, MalformedCsv or Io.
DatasetRow get_row(const std::filesystem::path& path, std::size_t index);

std::vector<DatasetRow> read_rows(const std::filesystem::path& path);

/// Trims the requirement; throws EmptyRequirement when nothing is left.
DatasetRow from_user_form(std::string_view requirementText, std::string_view feature,
                          std::string_view scenario, std::string_view metamodelRef);

/// One CSV field, quoted when it contains a comma, quote, CR or LF.
std::string encode_field(std::string_view field);
std::string encode_record(const std::vector<std::string>& fields);
/// Parses a whole CSV document into records. Accepts CRLF or LF record
/// separators. Throws MalformedCsv with a 1-based line number.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace carserver::dataset
