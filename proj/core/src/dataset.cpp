#include "carserver/dataset.hpp"

#include <fstream>

#include "carserver/error.hpp"
#include "carserver/text.hpp"

namespace carserver::dataset {

namespace {

constexpr std::size_t kColumns = 6;

std::vector<std::string> header_fields() { return text::split(kHeader, ','); }

std::vector<std::vector<std::string>> load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::Io, "dataset " + path.string() + " does not exist");
  auto records = parse_csv(text::read_file(path));
  if (records.empty()) return records;
  if (records.front() != header_fields())
    throw Error(ErrorCode::MalformedCsv, path.string() + ": first record is not the dataset header");
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].size() != kColumns)
      throw Error(ErrorCode::MalformedCsv,
                  path.string() + ": row " + std::to_string(i - 1) + " has " +
                      std::to_string(records[i].size()) + " fields, expected 6");
  records.erase(records.begin());
  return records;
}

DatasetRow to_row(std::vector<std::string> f) {
  DatasetRow r;
  r.requirementText = std::move(f[0]);
  r.feature = std::move(f[1]);
  r.scenario = std::move(f[2]);
  r.metamodel = std::move(f[3]);
  if (!f[4].empty()) r.oclRule = std::move(f[4]);
  if (!f[5].empty()) r.modelInstance = std::move(f[5]);
  return r;
}

}  // namespace

std::string encode_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string encode_record(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += encode_field(fields[i]);
  }
  return out + "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  std::size_t i = 0;
  std::size_t line = 1;
  bool quoted_field = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    quoted_field = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"' && field.empty() && !quoted_field) {
      quoted_field = true;
      const std::size_t start_line = line;
      ++i;
      for (;;) {
        if (i >= text.size())
          throw Error(ErrorCode::MalformedCsv,
                      "unterminated quoted field starting on line " + std::to_string(start_line));
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        field += text[i++];
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\r' && text[i] != '\n')
        throw Error(ErrorCode::MalformedCsv,
                    "unexpected character after closing quote on line " + std::to_string(line));
      continue;
    }
    if (c == '"')
      throw Error(ErrorCode::MalformedCsv,
                  "quote inside unquoted field on line " + std::to_string(line));
    if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      i += 2;
      ++line;
    } else if (c == '\n') {
      end_record();
      ++i;
      ++line;
    } else if (c == '\r') {
      throw Error(ErrorCode::MalformedCsv, "bare CR on line " + std::to_string(line));
    } else {
      field += c;
      ++i;
    }
  }
  if (!field.empty() || !record.empty() || quoted_field) end_record();
  return records;
}

std::size_t append_row(const std::filesystem::path& path, const DatasetRow& row) {
  if (text::trim(row.requirementText).empty())
    throw Error(ErrorCode::EmptyRequirement, "requirement text is empty");
  std::size_t existing = 0;
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (!fresh) existing = load(path).size();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for appending");
  if (fresh) out << encode_record(header_fields());
  out << encode_record({row.requirementText, row.feature, row.scenario, row.metamodel,
                        row.oclRule.value_or(""), row.modelInstance.value_or("")});
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
  return existing;
}

std::vector<DatasetRow> read_rows(const std::filesystem::path& path) {
  std::vector<DatasetRow> rows;
  for (auto& f : load(path)) rows.push_back(to_row(std::move(f)));
  return rows;
}

DatasetRow get_row(const std::filesystem::path& path, std::size_t index) {
  auto records = load(path);
  if (index >= records.size())
    throw Error(ErrorCode::OutOfRange, "row " + std::to_string(index) + " requested, dataset has " +
                                           std::to_string(records.size()) + " rows");
  return to_row(std::move(records[index]));
}

DatasetRow from_user_form(std::string_view requirementText, std::string_view feature,
                          std::string_view scenario, std::string_view metamodelRef) {
  const auto text = text::trim(requirementText);
  if (text.empty()) throw Error(ErrorCode::EmptyRequirement, "requirement text is empty");
  return DatasetRow{std::string(text), std::string(text::trim(feature)),
                    std::string(text::trim(scenario)), std::string(text::trim(metamodelRef)),
                    std::nullopt, std::nullopt};
}

}  // namespace carserver::dataset
