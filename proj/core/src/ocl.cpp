#include "carserver/ocl.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace carserver::ocl {

using metamodel::ElementRef;
using metamodel::FieldKind;
using metamodel::ModelInstance;

// ---------------------------------------------------------------------------
// Number

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

std::optional<std::int64_t> fit_int64(const cpp_int& v) {
  if (v < std::numeric_limits<std::int64_t>::min() || v > std::numeric_limits<std::int64_t>::max())
    return std::nullopt;
  return v.convert_to<std::int64_t>();
}

}  // namespace

Number Number::from_rational(const Rational& r) {
  Number n;
  if (denominator(r) == 1) {
    if (auto v = fit_int64(numerator(r))) {
      n.small_ = *v;
      return n;
    }
  }
  n.small_.reset();
  n.big_ = r;
  return n;
}

Number Number::from_decimal(Decimal d) {
  if (d.is_integral()) return Number(d.integral_part());
  return from_rational(Rational(cpp_int(d.raw()), cpp_int(Decimal::kScale)));
}

std::optional<Number> Number::parse(std::string_view literal) {
  if (literal.empty()) return std::nullopt;
  cpp_int digits = 0;
  cpp_int scale = 1;
  bool seen_point = false;
  bool seen_digit_after_point = false;
  bool seen_digit = false;
  for (char c : literal) {
    if (c == '.') {
      if (seen_point || !seen_digit) return std::nullopt;
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits = digits * 10 + (c - '0');
      if (seen_point) {
        scale *= 10;
        seen_digit_after_point = true;
      }
      seen_digit = true;
    } else {
      return std::nullopt;
    }
  }
  if (seen_point && !seen_digit_after_point) return std::nullopt;
  return from_rational(Rational(digits, scale));
}

bool Number::is_integer() const { return small_.has_value() || denominator(big_) == 1; }

Number::Rational Number::to_rational() const {
  return small_ ? Rational(cpp_int(*small_)) : big_;
}

std::string Number::to_string() const {
  if (small_) return std::to_string(*small_);
  const Rational r = big_;
  cpp_int num = numerator(r);
  const cpp_int den = denominator(r);
  if (den == 1) return num.str();
  const bool negative = num < 0;
  if (negative) num = -num;
  cpp_int pow10 = 1;
  for (int k = 1; k <= 64; ++k) {
    pow10 *= 10;
    if (pow10 % den == 0) {
      std::string s = cpp_int(num * (pow10 / den)).str();
      if (s.size() <= static_cast<std::size_t>(k)) s.insert(0, static_cast<std::size_t>(k) - s.size() + 1, '0');
      s.insert(s.size() - static_cast<std::size_t>(k), ".");
      while (s.back() == '0') s.pop_back();
      return (negative ? "-" : "") + s;
    }
  }
  return (negative ? "-" : "") + num.str() + "/" + den.str();
}

Number operator+(const Number& a, const Number& b) {
  std::int64_t r;
  if (a.small_ && b.small_ && !__builtin_add_overflow(*a.small_, *b.small_, &r)) return Number(r);
  return Number::from_rational(a.to_rational() + b.to_rational());
}

Number operator-(const Number& a, const Number& b) {
  std::int64_t r;
  if (a.small_ && b.small_ && !__builtin_sub_overflow(*a.small_, *b.small_, &r)) return Number(r);
  return Number::from_rational(a.to_rational() - b.to_rational());
}

Number operator*(const Number& a, const Number& b) {
  std::int64_t r;
  if (a.small_ && b.small_ && !__builtin_mul_overflow(*a.small_, *b.small_, &r)) return Number(r);
  return Number::from_rational(a.to_rational() * b.to_rational());
}

Number Number::operator-() const { return Number(0) - *this; }

std::optional<Number> Number::divide(const Number& a, const Number& b) {
  if (b.small_ ? *b.small_ == 0 : b.big_ == 0) return std::nullopt;
  if (a.small_ && b.small_ && *b.small_ != -1 && *a.small_ % *b.small_ == 0)
    return Number(*a.small_ / *b.small_);
  return Number::from_rational(a.to_rational() / b.to_rational());
}

bool operator==(const Number& a, const Number& b) {
  if (a.small_ && b.small_) return *a.small_ == *b.small_;
  return a.to_rational() == b.to_rational();
}

std::strong_ordering operator<=>(const Number& a, const Number& b) {
  if (a.small_ && b.small_) return *a.small_ <=> *b.small_;
  const auto ra = a.to_rational();
  const auto rb = b.to_rational();
  if (ra < rb) return std::strong_ordering::less;
  if (ra > rb) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Types

namespace {

std::string_view kind_name(Type::Kind k) {
  switch (k) {
    case Type::Kind::Integer: return "Integer";
    case Type::Kind::Real: return "Real";
    case Type::Kind::Boolean: return "Boolean";
    case Type::Kind::String: return "String";
    case Type::Kind::Object: return "Object";
    case Type::Kind::Collection: return "Collection";
  }
  return "?";
}

Type simple(Type::Kind k) { return Type{k, Type::Kind::Object, {}}; }

}  // namespace

std::string Type::to_string() const {
  if (kind == Kind::Object) return objectType;
  if (kind == Kind::Collection)
    return "Collection(" +
           (element == Kind::Object ? objectType : std::string(kind_name(element))) + ")";
  return std::string(kind_name(kind));
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  End,
  Integer,
  Decimal,
  String,
  Ident,
  Context,
  Inv,
  Self,
  True,
  False,
  And,
  Or,
  Not,
  Implies,
  LParen,
  RParen,
  Dot,
  Arrow,
  Bar,
  Colon,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  Slash,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Position pos;
};

struct SyntaxError {
  Position pos;
  std::string message;
};

const std::map<std::string, Tok, std::less<>>& keywords() {
  static const std::map<std::string, Tok, std::less<>> k = {
      {"context", Tok::Context}, {"inv", Tok::Inv},   {"self", Tok::Self},
      {"true", Tok::True},       {"false", Tok::False}, {"and", Tok::And},
      {"or", Tok::Or},           {"not", Tok::Not},   {"implies", Tok::Implies},
  };
  return k;
}

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (src.substr(i, 2) == "--") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.text = std::string(src.substr(i, j - i));
      auto kw = keywords().find(t.text);
      t.kind = kw == keywords().end() ? Tok::Ident : kw->second;
      advance(j - i);
    } else if (digit(c)) {
      std::size_t j = i;
      while (j < src.size() && digit(src[j])) ++j;
      t.kind = Tok::Integer;
      if (j + 1 < src.size() && src[j] == '.' && digit(src[j + 1])) {
        ++j;
        while (j < src.size() && digit(src[j])) ++j;
        t.kind = Tok::Decimal;
      }
      if (j < src.size() &&
          (ident_start(src[j]) || (src[j] == '.' && j + 1 < src.size() && digit(src[j + 1]))))
        throw SyntaxError{t.pos, "malformed number"};
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '\'') {
      std::size_t j = i + 1;
      std::string value;
      for (;;) {
        if (j >= src.size() || src[j] == '\n') throw SyntaxError{t.pos, "unterminated string literal"};
        if (src[j] == '\'') {
          if (j + 1 < src.size() && src[j + 1] == '\'') {
            value.push_back('\'');
            j += 2;
            continue;
          }
          break;
        }
        value.push_back(src[j++]);
      }
      t.kind = Tok::String;
      t.text = std::move(value);
      advance(j + 1 - i);
    } else {
      struct Sym {
        std::string_view text;
        Tok kind;
      };
      static constexpr Sym syms[] = {
          {"->", Tok::Arrow}, {"<>", Tok::Ne},     {"<=", Tok::Le},    {">=", Tok::Ge},
          {"(", Tok::LParen}, {")", Tok::RParen},  {".", Tok::Dot},    {"|", Tok::Bar},
          {":", Tok::Colon},  {"=", Tok::Eq},      {"<", Tok::Lt},     {">", Tok::Gt},
          {"+", Tok::Plus},   {"-", Tok::Minus},   {"*", Tok::Star},   {"/", Tok::Slash},
      };
      bool matched = false;
      for (const auto& s : syms) {
        if (src.substr(i, s.text.size()) == s.text) {
          t.kind = s.kind;
          t.text = std::string(s.text);
          advance(s.text.size());
          matched = true;
          break;
        }
      }
      if (!matched) throw SyntaxError{t.pos, std::string("unexpected character '") + c + "'"};
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Parser (untyped AST)

struct RawInvariant {
  std::string contextType;
  Position contextPos;
  std::string name;
  Position pos;
  std::shared_ptr<const Expr> body;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string literal";
    default: return "'" + t.text + "'";
  }
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  std::vector<RawInvariant> document() {
    std::vector<RawInvariant> out;
    while (peek().kind != Tok::End) {
      const Token ctx = expect(Tok::Context, "'context'");
      const Token type = expect(Tok::Ident, "context type name");
      if (peek().kind != Tok::Inv) fail(peek(), "expected 'inv' after context " + type.text);
      while (peek().kind == Tok::Inv) {
        const Token inv = next();
        if (peek().kind != Tok::Ident) fail(peek(), "expected invariant name");
        const Token name = next();
        expect(Tok::Colon, "':'");
        RawInvariant r;
        r.contextType = type.text;
        r.contextPos = type.pos;
        r.name = name.text;
        r.pos = inv.pos;
        r.body = expression();
        if (peek().kind != Tok::Inv && peek().kind != Tok::Context && peek().kind != Tok::End)
          fail(peek(), "unexpected " + describe(peek()) + " after expression");
        out.push_back(std::move(r));
      }
      (void)ctx;
    }
    return out;
  }

 private:
  using Ptr = std::shared_ptr<Expr>;

  const Token& peek() const { return toks_[i_]; }
  Token next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++i_;
    return true;
  }
  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw SyntaxError{t.pos, msg};
  }
  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail(peek(), "expected " + what + ", found " + describe(peek()));
    return next();
  }

  static Ptr binary(const Token& op, Ptr lhs, Ptr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binary;
    e->pos = op.pos;
    e->text = op.text;
    e->operands = {std::move(lhs), std::move(rhs)};
    return e;
  }

  Ptr expression() { return implies(); }

  template <typename Next>
  Ptr left_assoc(std::initializer_list<Tok> ops, Next next_level) {
    Ptr lhs = (this->*next_level)();
    for (;;) {
      const Token& t = peek();
      if (std::find(ops.begin(), ops.end(), t.kind) == ops.end()) return lhs;
      Token op = next();
      lhs = binary(op, lhs, (this->*next_level)());
    }
  }

  Ptr implies() { return left_assoc({Tok::Implies}, &Parser::disjunction); }
  Ptr disjunction() { return left_assoc({Tok::Or}, &Parser::conjunction); }
  Ptr conjunction() { return left_assoc({Tok::And}, &Parser::equality); }
  Ptr equality() { return left_assoc({Tok::Eq, Tok::Ne}, &Parser::relational); }
  Ptr relational() {
    return left_assoc({Tok::Lt, Tok::Le, Tok::Gt, Tok::Ge}, &Parser::additive);
  }
  Ptr additive() { return left_assoc({Tok::Plus, Tok::Minus}, &Parser::multiplicative); }
  Ptr multiplicative() { return left_assoc({Tok::Star, Tok::Slash}, &Parser::unary); }

  Ptr unary() {
    if (peek().kind == Tok::Not || peek().kind == Tok::Minus) {
      const Token op = next();
      auto e = std::make_shared<Expr>();
      e->kind = op.kind == Tok::Not ? Expr::Kind::Not : Expr::Kind::Negate;
      e->pos = op.pos;
      e->text = op.text;
      e->operands = {unary()};
      return e;
    }
    return postfix();
  }

  Ptr postfix() {
    Ptr e = primary();
    for (;;) {
      if (peek().kind == Tok::Dot) {
        next();
        const Token name = expect(Tok::Ident, "attribute name after '.'");
        auto nav = std::make_shared<Expr>();
        nav->kind = Expr::Kind::Navigate;
        nav->pos = name.pos;
        nav->text = name.text;
        nav->operands = {e};
        e = nav;
      } else if (peek().kind == Tok::Arrow) {
        next();
        const Token op = expect(Tok::Ident, "collection operation after '->'");
        auto c = std::make_shared<Expr>();
        c->pos = op.pos;
        c->operands = {e};
        expect(Tok::LParen, "'('");
        if (op.text == "size" || op.text == "isEmpty" || op.text == "notEmpty") {
          c->kind = op.text == "size"      ? Expr::Kind::Size
                    : op.text == "isEmpty" ? Expr::Kind::IsEmpty
                                           : Expr::Kind::NotEmpty;
          expect(Tok::RParen, "')'");
        } else if (op.text == "forAll") {
          c->kind = Expr::Kind::ForAll;
          const Token var = expect(Tok::Ident, "iterator variable");
          expect(Tok::Bar, "'|'");
          c->text = var.text;
          c->operands.push_back(expression());
          expect(Tok::RParen, "')'");
        } else {
          fail(op, "unsupported collection operation '" + op.text + "'");
        }
        e = c;
      } else {
        return e;
      }
    }
  }

  Ptr primary() {
    const Token t = peek();
    auto e = std::make_shared<Expr>();
    e->pos = t.pos;
    switch (t.kind) {
      case Tok::Integer:
      case Tok::Decimal:
        next();
        e->kind = Expr::Kind::Number;
        e->number = *Number::parse(t.text);
        e->text = t.text;
        return e;
      case Tok::True:
      case Tok::False:
        next();
        e->kind = Expr::Kind::Boolean;
        e->boolean = t.kind == Tok::True;
        e->text = t.text;
        return e;
      case Tok::String:
        next();
        e->kind = Expr::Kind::String;
        e->text = t.text;
        return e;
      case Tok::Self:
        next();
        e->kind = Expr::Kind::Self;
        e->text = "self";
        return e;
      case Tok::Ident:
        next();
        e->kind = Expr::Kind::Variable;
        e->text = t.text;
        return e;
      case Tok::LParen: {
        next();
        Ptr inner = expression();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        fail(t, "expected expression, found " + describe(t));
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Type checker

struct TypeError {
  Position pos;
  std::string message;
};

Type field_type(const metamodel::FieldInfo& f) {
  switch (f.kind) {
    case FieldKind::Integer: return simple(Type::Kind::Integer);
    case FieldKind::Decimal: return simple(Type::Kind::Real);
    case FieldKind::Boolean: return simple(Type::Kind::Boolean);
    case FieldKind::String:
    case FieldKind::Enum: return simple(Type::Kind::String);
    case FieldKind::Reference: return Type{Type::Kind::Object, Type::Kind::Object, std::string(f.target)};
    case FieldKind::ReferenceList:
      return Type{Type::Kind::Collection, Type::Kind::Object, std::string(f.target)};
    case FieldKind::StringList: return Type{Type::Kind::Collection, Type::Kind::String, {}};
    case FieldKind::IntegerList: return Type{Type::Kind::Collection, Type::Kind::Integer, {}};
    case FieldKind::ParamMap: break;
  }
  return simple(Type::Kind::String);
}

class Checker {
 public:
  explicit Checker(std::string context) : context_(std::move(context)) {}

  std::shared_ptr<const Expr> check_body(const Expr& body) {
    auto typed = check(body);
    if (typed->type.kind != Type::Kind::Boolean)
      throw TypeError{body.pos, "body must be boolean, found " + typed->type.to_string()};
    return typed;
  }

 private:
  using Ptr = std::shared_ptr<Expr>;

  [[noreturn]] static void fail(Position p, std::string msg) { throw TypeError{p, std::move(msg)}; }

  Ptr navigate(Position pos, Ptr target, const std::string& attr) {
    if (target->type.kind != Type::Kind::Object)
      fail(pos, "cannot navigate '." + attr + "' on " + target->type.to_string());
    const auto fields = metamodel::fields_of_category(target->type.objectType);
    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const metamodel::FieldInfo& f) { return f.name == attr; });
    if (it == fields.end())
      fail(pos, "unknown attribute '" + attr + "' on " + target->type.objectType);
    if (it->kind == FieldKind::ParamMap)
      fail(pos, "attribute '" + attr + "' is a key/value map and cannot be navigated");
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Navigate;
    e->pos = pos;
    e->text = attr;
    e->type = field_type(*it);
    e->fieldKind = it->kind;
    e->optionalField = it->optional;
    e->operands = {std::move(target)};
    return e;
  }

  Ptr self_node(Position pos) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Self;
    e->pos = pos;
    e->text = "self";
    e->type = Type{Type::Kind::Object, Type::Kind::Object, context_};
    return e;
  }

  Ptr check(const Expr& raw) {
    auto e = std::make_shared<Expr>(raw);
    e->operands.clear();
    switch (raw.kind) {
      case Expr::Kind::Number:
        e->type = simple(raw.number.is_integer() && raw.text.find('.') == std::string::npos
                             ? Type::Kind::Integer
                             : Type::Kind::Real);
        return e;
      case Expr::Kind::Boolean:
        e->type = simple(Type::Kind::Boolean);
        return e;
      case Expr::Kind::String:
        e->type = simple(Type::Kind::String);
        return e;
      case Expr::Kind::Self:
        return self_node(raw.pos);
      case Expr::Kind::Variable: {
        for (auto it = vars_.rbegin(); it != vars_.rend(); ++it) {
          if (it->first == raw.text) {
            e->type = it->second;
            return e;
          }
        }
        return navigate(raw.pos, self_node(raw.pos), raw.text);
      }
      case Expr::Kind::Navigate:
        return navigate(raw.pos, check(*raw.operands[0]), raw.text);
      case Expr::Kind::Size:
      case Expr::Kind::IsEmpty:
      case Expr::Kind::NotEmpty: {
        auto source = check(*raw.operands[0]);
        if (source->type.kind != Type::Kind::Collection)
          fail(raw.pos, "collection operation applied to " + source->type.to_string());
        e->type = simple(raw.kind == Expr::Kind::Size ? Type::Kind::Integer : Type::Kind::Boolean);
        e->operands = {source};
        return e;
      }
      case Expr::Kind::ForAll: {
        auto source = check(*raw.operands[0]);
        if (source->type.kind != Type::Kind::Collection)
          fail(raw.pos, "forAll applied to " + source->type.to_string());
        if (in_iterator_) fail(raw.pos, "nested iterators are not supported");
        if (raw.text == "self") fail(raw.pos, "iterator variable cannot be named self");
        Type element = source->type.element == Type::Kind::Object
                           ? Type{Type::Kind::Object, Type::Kind::Object, source->type.objectType}
                           : simple(source->type.element);
        vars_.emplace_back(raw.text, element);
        in_iterator_ = true;
        auto body = check(*raw.operands[1]);
        in_iterator_ = false;
        vars_.pop_back();
        if (body->type.kind != Type::Kind::Boolean)
          fail(raw.operands[1]->pos, "forAll body must be boolean, found " + body->type.to_string());
        e->type = simple(Type::Kind::Boolean);
        e->operands = {source, body};
        return e;
      }
      case Expr::Kind::Not: {
        auto operand = check(*raw.operands[0]);
        if (operand->type.kind != Type::Kind::Boolean)
          fail(raw.pos, "'not' requires Boolean, found " + operand->type.to_string());
        e->type = simple(Type::Kind::Boolean);
        e->operands = {operand};
        return e;
      }
      case Expr::Kind::Negate: {
        auto operand = check(*raw.operands[0]);
        if (!operand->type.is_numeric())
          fail(raw.pos, "unary '-' requires a number, found " + operand->type.to_string());
        e->type = operand->type;
        e->operands = {operand};
        return e;
      }
      case Expr::Kind::Binary: {
        auto lhs = check(*raw.operands[0]);
        auto rhs = check(*raw.operands[1]);
        e->type = binary_type(raw, lhs->type, rhs->type);
        e->operands = {lhs, rhs};
        return e;
      }
    }
    fail(raw.pos, "unsupported expression");
  }

  static Type binary_type(const Expr& raw, const Type& l, const Type& r) {
    const std::string& op = raw.text;
    auto mismatch = [&]() -> TypeError {
      return TypeError{raw.pos, "operator '" + op + "' is not defined for " + l.to_string() +
                                    " and " + r.to_string()};
    };
    if (op == "+" || op == "-" || op == "*") {
      if (!l.is_numeric() || !r.is_numeric()) throw mismatch();
      return simple(l.kind == Type::Kind::Integer && r.kind == Type::Kind::Integer
                        ? Type::Kind::Integer
                        : Type::Kind::Real);
    }
    if (op == "/") {
      if (!l.is_numeric() || !r.is_numeric()) throw mismatch();
      return simple(Type::Kind::Real);
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      if (!l.is_numeric() || !r.is_numeric()) throw mismatch();
      return simple(Type::Kind::Boolean);
    }
    if (op == "=" || op == "<>") {
      const bool ok = (l.is_numeric() && r.is_numeric()) ||
                      (l.kind == r.kind && (l.kind == Type::Kind::Boolean ||
                                            l.kind == Type::Kind::String ||
                                            l.kind == Type::Kind::Object));
      if (!ok) throw mismatch();
      return simple(Type::Kind::Boolean);
    }
    if (op == "and" || op == "or" || op == "implies") {
      if (l.kind != Type::Kind::Boolean || r.kind != Type::Kind::Boolean) throw mismatch();
      return simple(Type::Kind::Boolean);
    }
    throw mismatch();
  }

  std::string context_;
  std::vector<std::pair<std::string, Type>> vars_;
  bool in_iterator_ = false;
};

// ---------------------------------------------------------------------------
// Evaluator

struct Value;
using List = std::vector<Value>;
struct Value {
  std::variant<Number, bool, std::string, ElementRef, std::shared_ptr<const List>> v;
};

struct EvalError {
  std::string message;
};

class Evaluator {
 public:
  Evaluator(const ModelInstance& instance, ElementRef self) : instance_(instance), self_(self) {}

  bool truth(const Expr& e) { return std::get<bool>(eval(e).v); }

 private:
  Value eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Number: return {e.number};
      case Expr::Kind::Boolean: return {e.boolean};
      case Expr::Kind::String: return {e.text};
      case Expr::Kind::Self: return {self_};
      case Expr::Kind::Variable:
        for (auto it = vars_.rbegin(); it != vars_.rend(); ++it)
          if (it->first == e.text) return it->second;
        throw EvalError{"unbound variable " + e.text};
      case Expr::Kind::Navigate: return navigate(e);
      case Expr::Kind::Size: return {Number(static_cast<std::int64_t>(list(*e.operands[0]).size()))};
      case Expr::Kind::IsEmpty: return {list(*e.operands[0]).empty()};
      case Expr::Kind::NotEmpty: return {!list(*e.operands[0]).empty()};
      case Expr::Kind::ForAll: {
        const auto items = eval(*e.operands[0]);
        for (const Value& item : *std::get<std::shared_ptr<const List>>(items.v)) {
          vars_.emplace_back(e.text, item);
          const bool ok = std::get<bool>(eval(*e.operands[1]).v);
          vars_.pop_back();
          if (!ok) return {false};
        }
        return {true};
      }
      case Expr::Kind::Not: return {!std::get<bool>(eval(*e.operands[0]).v)};
      case Expr::Kind::Negate: return {-std::get<Number>(eval(*e.operands[0]).v)};
      case Expr::Kind::Binary: return binary(e);
    }
    throw EvalError{"unsupported expression"};
  }

  List list(const Expr& e) { return *std::get<std::shared_ptr<const List>>(eval(e).v); }

  ElementRef resolve(const std::string& id) {
    auto ref = instance_.find(id);
    if (!ref) throw EvalError{"dangling reference '" + id + "'"};
    return *ref;
  }

  Value navigate(const Expr& e) {
    const ElementRef target = std::get<ElementRef>(eval(*e.operands[0]).v);
    const metamodel::FieldValue fv = metamodel::get_field(target, e.text);
    if (std::holds_alternative<std::monostate>(fv))
      throw EvalError{"attribute '" + e.text + "' of " + metamodel::element_id(target) +
                      " is not set"};
    switch (e.fieldKind) {
      case FieldKind::Integer: return {Number(std::get<std::int64_t>(fv))};
      case FieldKind::Decimal: return {Number::from_decimal(std::get<Decimal>(fv))};
      case FieldKind::Boolean: return {std::get<bool>(fv)};
      case FieldKind::String:
      case FieldKind::Enum: return {std::get<std::string>(fv)};
      case FieldKind::Reference: return {resolve(std::get<std::string>(fv))};
      case FieldKind::ReferenceList: {
        auto out = std::make_shared<List>();
        for (const auto& id : std::get<std::vector<std::string>>(fv)) out->push_back({resolve(id)});
        return {std::shared_ptr<const List>(out)};
      }
      case FieldKind::StringList: {
        auto out = std::make_shared<List>();
        for (const auto& s : std::get<std::vector<std::string>>(fv)) out->push_back({s});
        return {std::shared_ptr<const List>(out)};
      }
      case FieldKind::IntegerList: {
        auto out = std::make_shared<List>();
        for (auto n : std::get<std::vector<std::int64_t>>(fv)) out->push_back({Number(n)});
        return {std::shared_ptr<const List>(out)};
      }
      case FieldKind::ParamMap: break;
    }
    throw EvalError{"attribute '" + e.text + "' cannot be navigated"};
  }

  Value binary(const Expr& e) {
    const std::string& op = e.text;
    if (op == "and" || op == "or" || op == "implies") {
      const bool l = std::get<bool>(eval(*e.operands[0]).v);
      if (op == "and" && !l) return {false};
      if (op == "or" && l) return {true};
      if (op == "implies" && !l) return {true};
      return {std::get<bool>(eval(*e.operands[1]).v)};
    }
    const Value l = eval(*e.operands[0]);
    const Value r = eval(*e.operands[1]);
    if (op == "=" || op == "<>") {
      const bool eq = equal(l, r);
      return {op == "=" ? eq : !eq};
    }
    const Number& a = std::get<Number>(l.v);
    const Number& b = std::get<Number>(r.v);
    if (op == "+") return {a + b};
    if (op == "-") return {a - b};
    if (op == "*") return {a * b};
    if (op == "/") {
      auto q = Number::divide(a, b);
      if (!q) throw EvalError{"division by zero"};
      return {*q};
    }
    if (op == "<") return {a < b};
    if (op == "<=") return {a <= b};
    if (op == ">") return {a > b};
    if (op == ">=") return {a >= b};
    throw EvalError{"unsupported operator " + op};
  }

  static bool equal(const Value& l, const Value& r) {
    if (l.v.index() != r.v.index()) return false;
    if (auto* a = std::get_if<Number>(&l.v)) return *a == std::get<Number>(r.v);
    if (auto* a = std::get_if<bool>(&l.v)) return *a == std::get<bool>(r.v);
    if (auto* a = std::get_if<std::string>(&l.v)) return *a == std::get<std::string>(r.v);
    if (auto* a = std::get_if<ElementRef>(&l.v))
      return metamodel::element_id(*a) == metamodel::element_id(std::get<ElementRef>(r.v));
    return false;
  }

  const ModelInstance& instance_;
  ElementRef self_;
  std::vector<std::pair<std::string, Value>> vars_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Public API

std::string ParseResult::format_diagnostics(std::string_view source_name) const {
  std::ostringstream os;
  for (const auto& d : diagnostics)
    os << source_name << ":" << d.pos.line << ":" << d.pos.column << ": error: " << d.message
       << "\n";
  return os.str();
}

ParseResult parse_ocl(std::string_view text) {
  ParseResult result;
  std::vector<RawInvariant> raw;
  try {
    raw = Parser(tokenize(text)).document();
  } catch (const SyntaxError& e) {
    result.diagnostics.push_back({e.pos, "syntax error: " + e.message});
    return result;
  }

  Document doc;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& r : raw) {
    if (!metamodel::is_known_type(r.contextType)) {
      result.diagnostics.push_back({r.contextPos, "unknown context type '" + r.contextType + "'"});
      continue;
    }
    if (!seen.emplace(r.contextType, r.name).second) {
      result.diagnostics.push_back(
          {r.pos, "duplicate invariant " + r.contextType + "::" + r.name});
      continue;
    }
    try {
      auto body = Checker(r.contextType).check_body(*r.body);
      doc.invariants.push_back({r.contextType, r.name, std::move(body), r.pos});
    } catch (const TypeError& e) {
      result.diagnostics.push_back({e.pos, "type error in " + r.contextType + "::" + r.name +
                                               ": " + e.message});
    }
  }
  if (result.diagnostics.empty()) result.document = std::move(doc);
  return result;
}

bool is_syntactically_valid(std::string_view text) {
  try {
    Parser(tokenize(text)).document();
    return true;
  } catch (const SyntaxError&) {
    return false;
  }
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Error: return "ERROR";
  }
  return "?";
}

std::vector<ElementVerdict> evaluate(const Invariant& invariant, const ModelInstance& instance) {
  std::vector<ElementVerdict> out;
  const std::string qualified = invariant.qualified_name();
  for (const ElementRef& ref : instance.elements_of(invariant.contextType)) {
    ElementVerdict v{qualified, metamodel::element_id(ref), Verdict::Pass, {}};
    try {
      v.verdict = Evaluator(instance, ref).truth(*invariant.body) ? Verdict::Pass : Verdict::Fail;
    } catch (const EvalError& e) {
      v.verdict = Verdict::Error;
      v.detail = e.message;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::size_t CheckReport::count(Verdict v) const {
  return static_cast<std::size_t>(std::count_if(
      verdicts.begin(), verdicts.end(), [&](const ElementVerdict& e) { return e.verdict == v; }));
}

std::vector<std::string> CheckReport::invariants_with(Verdict v) const {
  std::set<std::string> names;
  for (const auto& e : verdicts)
    if (e.verdict == v) names.insert(e.invariant);
  return {names.begin(), names.end()};
}

const ElementVerdict* CheckReport::find(std::string_view invariant,
                                        std::string_view element_id) const {
  for (const auto& e : verdicts)
    if (e.invariant == invariant && e.elementId == element_id) return &e;
  return nullptr;
}

std::string CheckReport::format() const {
  std::ostringstream os;
  for (const auto& e : verdicts) {
    if (e.verdict == Verdict::Pass) continue;
    os << to_string(e.verdict) << " " << e.invariant << " on " << e.elementId;
    if (!e.detail.empty()) os << ": " << e.detail;
    os << "\n";
  }
  os << "checked " << verdicts.size() << " (pass " << count(Verdict::Pass) << ", fail "
     << count(Verdict::Fail) << ", error " << count(Verdict::Error) << "): "
     << (overall ? "compliant" : "not compliant") << "\n";
  return os.str();
}

CheckReport check_all(const Document& doc, const ModelInstance& instance) {
  CheckReport report;
  for (const auto& inv : doc.invariants) {
    auto verdicts = evaluate(inv, instance);
    report.verdicts.insert(report.verdicts.end(), std::make_move_iterator(verdicts.begin()),
                           std::make_move_iterator(verdicts.end()));
  }
  std::sort(report.verdicts.begin(), report.verdicts.end(),
            [](const ElementVerdict& a, const ElementVerdict& b) {
              return std::tie(a.invariant, a.elementId) < std::tie(b.invariant, b.elementId);
            });
  report.overall = std::none_of(report.verdicts.begin(), report.verdicts.end(),
                                [](const ElementVerdict& e) { return e.verdict != Verdict::Pass; });
  return report;
}

}  // namespace carserver::ocl
