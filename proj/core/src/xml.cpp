#include "carserver/xml.hpp"

#include <algorithm>
#include <cstdint>

namespace carserver::xml {

const Attribute* Element::attribute(std::string_view attr_name) const {
  for (const auto& a : attributes)
    if (a.name == attr_name) return &a;
  return nullptr;
}

namespace {

bool is_name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class Reader {
 public:
  Reader(std::string_view text, std::size_t offset) : text_(text), i_(offset) {
    line_starts_.push_back(0);
    for (std::size_t k = 0; k < text_.size(); ++k)
      if (text_[k] == '\n') line_starts_.push_back(k + 1);
  }

  Element document() {
    if (text_.substr(i_, 3) == "\xEF\xBB\xBF") i_ += 3;
    if (starts_with("<?xml")) processing_instruction();
    misc();
    if (at_end() || peek() != '<') fail("expected root element");
    Element root = element();
    misc();
    if (!at_end()) fail("content after root element");
    return root;
  }

  Element element() {
    const SourcePos start = pos_at(i_);
    expect('<');
    Element e;
    e.pos = start;
    e.name = name();
    for (;;) {
      const bool had_space = skip_space();
      if (at_end()) fail("unterminated start tag <" + e.name + ">");
      if (peek() == '/') {
        ++i_;
        expect('>');
        return e;
      }
      if (peek() == '>') {
        ++i_;
        break;
      }
      if (!had_space) fail("expected whitespace before attribute");
      Attribute a;
      a.pos = pos_at(i_);
      a.name = name();
      skip_space();
      expect('=');
      skip_space();
      a.value = quoted();
      if (e.attribute(a.name)) fail_at("duplicate attribute '" + a.name + "'", a.pos);
      e.attributes.push_back(std::move(a));
    }
    content(e);
    return e;
  }

  std::size_t offset() const { return i_; }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_at(i_)); }
  [[noreturn]] void fail_at(const std::string& msg, SourcePos p) const { throw ParseError(msg, p); }

 private:
  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }
  bool starts_with(std::string_view s) const { return text_.substr(i_, s.size()) == s; }

  SourcePos pos_at(std::size_t off) const {
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), off);
    const std::size_t line = static_cast<std::size_t>(it - line_starts_.begin());
    return {static_cast<int>(line), static_cast<int>(off - line_starts_[line - 1] + 1)};
  }

  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  bool skip_space() {
    const std::size_t start = i_;
    while (!at_end() && is_space(peek())) ++i_;
    return i_ != start;
  }

  std::string name() {
    if (at_end() || !is_name_start(peek())) fail("expected a name");
    const std::size_t start = i_;
    while (!at_end() && is_name_char(peek())) ++i_;
    return std::string(text_.substr(start, i_ - start));
  }

  void skip_until(std::string_view terminator, const char* what) {
    const std::size_t found = text_.find(terminator, i_);
    if (found == std::string_view::npos) fail(std::string("unterminated ") + what);
    i_ = found + terminator.size();
  }

  void processing_instruction() { skip_until("?>", "processing instruction"); }

  void comment() {
    i_ += 4;
    const std::size_t found = text_.find("--", i_);
    if (found == std::string_view::npos) fail("unterminated comment");
    if (text_.substr(found, 3) != "-->") fail("'--' not allowed inside comment");
    i_ = found + 3;
  }

  void misc() {
    for (;;) {
      skip_space();
      if (starts_with("<!--")) {
        comment();
      } else if (starts_with("<?")) {
        processing_instruction();
      } else if (starts_with("<!")) {
        fail("document type declarations are not supported");
      } else {
        return;
      }
    }
  }

  void entity(std::string& out) {
    const std::size_t semi = text_.find(';', i_);
    if (semi == std::string_view::npos || semi - i_ > 12) fail("malformed entity reference");
    std::string_view ent = text_.substr(i_ + 1, semi - i_ - 1);
    if (ent == "lt") {
      out.push_back('<');
    } else if (ent == "gt") {
      out.push_back('>');
    } else if (ent == "amp") {
      out.push_back('&');
    } else if (ent == "quot") {
      out.push_back('"');
    } else if (ent == "apos") {
      out.push_back('\'');
    } else if (ent.size() > 1 && ent[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = ent[1] == 'x';
      std::string_view digits = ent.substr(hex ? 2 : 1);
      if (digits.empty()) fail("malformed character reference");
      for (char c : digits) {
        int d;
        if (c >= '0' && c <= '9')
          d = c - '0';
        else if (hex && c >= 'a' && c <= 'f')
          d = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F')
          d = c - 'A' + 10;
        else
          fail("malformed character reference");
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
        if (cp > 0x10FFFF) fail("character reference out of range");
      }
      if (cp == 0) fail("character reference out of range");
      append_utf8(out, cp);
    } else {
      fail("unknown entity '&" + std::string(ent) + ";'");
    }
    i_ = semi + 1;
  }

  std::string quoted() {
    if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    const char q = peek();
    ++i_;
    std::string out;
    for (;;) {
      if (at_end()) fail("unterminated attribute value");
      const char c = peek();
      if (c == q) {
        ++i_;
        return out;
      }
      if (c == '<') fail("'<' not allowed in attribute value");
      if (c == '&') {
        entity(out);
      } else {
        out.push_back(c);
        ++i_;
      }
    }
  }

  void content(Element& e) {
    for (;;) {
      if (at_end()) fail_at("element <" + e.name + "> is not closed", e.pos);
      const char c = peek();
      if (c == '<') {
        if (starts_with("</")) {
          i_ += 2;
          const SourcePos close = pos_at(i_);
          std::string closing = name();
          skip_space();
          expect('>');
          if (closing != e.name)
            fail_at("mismatched closing tag </" + closing + "> for <" + e.name + ">", close);
          return;
        }
        if (starts_with("<!--")) {
          comment();
        } else if (starts_with("<![CDATA[")) {
          i_ += 9;
          const std::size_t found = text_.find("]]>", i_);
          if (found == std::string_view::npos) fail("unterminated CDATA section");
          e.text.append(text_.substr(i_, found - i_));
          i_ = found + 3;
        } else if (starts_with("<?")) {
          processing_instruction();
        } else if (starts_with("<!")) {
          fail("unexpected markup declaration");
        } else {
          e.children.push_back(element());
        }
      } else if (c == '&') {
        entity(e.text);
      } else {
        e.text.push_back(c);
        ++i_;
      }
    }
  }

  std::string_view text_;
  std::size_t i_;
  std::vector<std::size_t> line_starts_;
};

}  // namespace

Element parse_document(std::string_view text) { return Reader(text, 0).document(); }

std::optional<Fragment> parse_element_at(std::string_view text, std::size_t offset) {
  if (offset >= text.size() || text[offset] != '<') return std::nullopt;
  try {
    Reader r(text, offset);
    Element root = r.element();
    return Fragment{std::move(root), offset, r.offset()};
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

std::string escape_attribute(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace carserver::xml
