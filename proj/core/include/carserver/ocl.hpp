#pragma once

// OCL subset: `context T inv Name: expr` blocks evaluated natively over a
// ModelInstance.
//
// Grammar (lowest to highest precedence):
//   expr      := implies
//   implies   := or ('implies' or)*
//   or        := and ('or' and)*
//   and       := equality ('and' equality)*
//   equality  := relational (('=' | '<>') relational)*
//   relational:= additive (('<' | '<=' | '>' | '>=') additive)*
//   additive  := mult (('+' | '-') mult)*
//   mult      := unary (('*' | '/') unary)*
//   unary     := ('not' | '-') unary | postfix
//   postfix   := primary ('.' name | '->' collop)*
//   collop    := size() | isEmpty() | notEmpty() | forAll(v | expr)
//   primary   := integer | decimal | true | false | 'string' | self | name | '(' expr ')'
// `--` starts a comment running to end of line.

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "carserver/decimal.hpp"
#include "carserver/metamodel.hpp"
#include "carserver/schema.hpp"

namespace carserver::ocl {

/// Exact rational with an int64 fast path. Operations that would overflow
/// the fast path fall back to arbitrary precision.
class Number {
 public:
  using Rational = boost::multiprecision::cpp_rational;

  Number() = default;
  Number(std::int64_t v) : small_(v) {}  // NOLINT(google-explicit-constructor)
  static Number from_rational(const Rational& r);
  static Number from_decimal(Decimal d);
  /// `digits[.digits]`; nullopt on anything else.
  static std::optional<Number> parse(std::string_view literal);

  bool is_integer() const;
  Rational to_rational() const;
  std::string to_string() const;

  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b);
  friend Number operator*(const Number& a, const Number& b);
  Number operator-() const;
  /// nullopt on division by zero.
  static std::optional<Number> divide(const Number& a, const Number& b);

  friend bool operator==(const Number& a, const Number& b);
  friend std::strong_ordering operator<=>(const Number& a, const Number& b);

 private:
  std::optional<std::int64_t> small_{0};
  Rational big_;
};

struct Position {
  int line = 1;
  int column = 1;
};

struct Diagnostic {
  Position pos;
  std::string message;
};

/// Static type of an expression.
struct Type {
  enum class Kind { Integer, Real, Boolean, String, Object, Collection };
  Kind kind = Kind::Boolean;
  /// Element kind for collections.
  Kind element = Kind::Object;
  /// Metamodel type or category name for Object values and object collections.
  std::string objectType;

  bool is_numeric() const { return kind == Kind::Integer || kind == Kind::Real; }
  std::string to_string() const;
  bool operator==(const Type&) const = default;
};

struct Expr {
  enum class Kind {
    Number,
    Boolean,
    String,
    Self,
    Variable,
    Navigate,   // operands[0].text
    Size,       // operands[0]->size()
    IsEmpty,
    NotEmpty,
    ForAll,     // operands[0]->forAll(text | operands[1])
    Not,
    Negate,
    Binary,     // operands[0] op operands[1]
  };

  Kind kind = Kind::Boolean;
  Position pos;
  Type type;
  Number number;
  bool boolean = false;
  /// String literal value, variable name, attribute name, or operator token.
  std::string text;
  /// For Navigate: field kind of the attribute and whether it may be absent.
  metamodel::FieldKind fieldKind = metamodel::FieldKind::String;
  bool optionalField = false;
  std::vector<std::shared_ptr<const Expr>> operands;
};

struct Invariant {
  std::string contextType;
  std::string name;
  std::shared_ptr<const Expr> body;
  Position pos;

  /// "Context::Name", the key used in reports.
  std::string qualified_name() const { return contextType + "::" + name; }
};

struct Document {
  std::vector<Invariant> invariants;
};

struct ParseResult {
  std::optional<Document> document;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return document.has_value(); }
  std::string format_diagnostics(std::string_view source_name = "<input>") const;
};

/// Full parse including name resolution and type checking.
ParseResult parse_ocl(std::string_view text);

/// Grammar-only check: true when `text` is a sequence of syntactically valid
/// invariant blocks (possibly none). Does not resolve types or attributes.
bool is_syntactically_valid(std::string_view text);

enum class Verdict { Pass, Fail, Error };
std::string_view to_string(Verdict v);

struct ElementVerdict {
  std::string invariant;  // qualified name
  std::string elementId;
  Verdict verdict = Verdict::Pass;
  /// Reason for Error verdicts; empty otherwise.
  std::string detail;

  bool operator==(const ElementVerdict&) const = default;
};

/// One verdict per element whose type conforms to the invariant's context,
/// in elements_of() order. Empty when no element conforms.
std::vector<ElementVerdict> evaluate(const Invariant& invariant,
                                     const metamodel::ModelInstance& instance);

struct CheckReport {
  /// Sorted by (invariant, elementId).
  std::vector<ElementVerdict> verdicts;
  /// True iff no verdict is Fail or Error.
  bool overall = true;

  std::size_t count(Verdict v) const;
  /// Qualified names of invariants with at least one verdict of kind `v`, sorted.
  std::vector<std::string> invariants_with(Verdict v) const;
  const ElementVerdict* find(std::string_view invariant, std::string_view element_id) const;
  /// Human-readable listing, one line per non-pass verdict plus a summary.
  std::string format() const;
};

CheckReport check_all(const Document& doc, const metamodel::ModelInstance& instance);

}  // namespace carserver::ocl
