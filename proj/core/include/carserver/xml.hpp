#pragma once

// Minimal non-validating XML reader with source positions. Supports
// elements, attributes, character data, comments, CDATA, processing
// instructions and the predefined/numeric entities. DTDs are rejected.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace carserver::xml {

struct SourcePos {
  int line = 1;
  int column = 1;
};

struct Attribute {
  std::string name;
  std::string value;
  SourcePos pos;
};

struct Element {
  std::string name;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  /// Concatenated character data directly inside this element.
  std::string text;
  SourcePos pos;

  const Attribute* attribute(std::string_view attr_name) const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, SourcePos pos)
      : std::runtime_error(message), pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

/// Parses a complete document (optional prolog, exactly one root element,
/// trailing comments/whitespace). Throws ParseError.
Element parse_document(std::string_view text);

struct Fragment {
  Element root;
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the closing '>'
};

/// Parses one element starting at `offset`, which must point at '<'.
/// Returns nullopt if no well-formed element starts there.
std::optional<Fragment> parse_element_at(std::string_view text, std::size_t offset);

/// Escapes a value for use inside a double-quoted attribute.
std::string escape_attribute(std::string_view value);

}  // namespace carserver::xml
