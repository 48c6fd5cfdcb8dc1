#include "carserver/xmi.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "carserver/error.hpp"
#include "carserver/text.hpp"
#include "carserver/xml.hpp"

namespace carserver::xmi {

using metamodel::ElementType;
using metamodel::FieldInfo;
using metamodel::FieldKind;
using metamodel::FieldValue;
using metamodel::ModelInstance;

namespace {

constexpr std::string_view kRoot = "CarServer";
constexpr std::string_view kVersion = "2.0";
constexpr std::string_view kParam = "param";

struct ValueError {
  std::string message;
};

std::optional<std::int64_t> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  if (s[0] == '+') return std::nullopt;
  return v;
}

std::variant<FieldValue, ValueError> parse_value(const FieldInfo& f, const std::string& raw) {
  const std::string name(f.name);
  switch (f.kind) {
    case FieldKind::Integer: {
      auto v = parse_integer(raw);
      if (!v) return ValueError{"invalid integer '" + raw + "' for " + name};
      if (*v < 0) return ValueError{"out-of-range numeric: " + name + " must be non-negative"};
      return FieldValue(*v);
    }
    case FieldKind::Decimal: {
      auto v = Decimal::parse(raw);
      if (!v) return ValueError{"invalid decimal '" + raw + "' for " + name};
      if (*v < Decimal()) return ValueError{"out-of-range numeric: " + name + " must be non-negative"};
      return FieldValue(*v);
    }
    case FieldKind::Boolean:
      if (raw == "true") return FieldValue(true);
      if (raw == "false") return FieldValue(false);
      return ValueError{"invalid boolean '" + raw + "' for " + name + " (expected true/false)"};
    case FieldKind::String:
      return FieldValue(raw);
    case FieldKind::Enum: {
      const auto token = std::string(text::trim(raw));
      for (auto allowed : f.enumValues)
        if (allowed == token) return FieldValue(token);
      std::string expected;
      for (auto allowed : f.enumValues) expected += (expected.empty() ? "" : ", ") + std::string(allowed);
      return ValueError{"invalid value '" + raw + "' for " + name + " (expected one of " + expected + ")"};
    }
    case FieldKind::Reference: {
      auto ids = text::split_whitespace(raw);
      if (ids.size() != 1) return ValueError{name + " must hold exactly one id"};
      return FieldValue(ids.front());
    }
    case FieldKind::ReferenceList:
      return FieldValue(text::split_whitespace(raw));
    case FieldKind::StringList: {
      std::vector<std::string> items;
      if (!text::trim(raw).empty()) {
        for (const auto& item : text::split(raw, ',')) {
          auto trimmed = text::trim(item);
          if (trimmed.empty()) return ValueError{"empty item in list " + name};
          items.emplace_back(trimmed);
        }
      }
      return FieldValue(std::move(items));
    }
    case FieldKind::IntegerList: {
      std::vector<std::int64_t> items;
      if (!text::trim(raw).empty()) {
        for (const auto& item : text::split(raw, ',')) {
          auto v = parse_integer(text::trim(item));
          if (!v) return ValueError{"invalid integer '" + item + "' in " + name};
          if (name == "communicationPorts" && (*v < 1 || *v > 65535))
            return ValueError{"out-of-range numeric: port " + std::to_string(*v) +
                              " outside [1, 65535]"};
          if (*v < 0) return ValueError{"out-of-range numeric: negative entry in " + name};
          items.push_back(*v);
        }
      }
      return FieldValue(std::move(items));
    }
    case FieldKind::ParamMap:
      return ValueError{name + " must be given as <param> child elements"};
  }
  return ValueError{"unsupported field " + name};
}

bool required(const FieldInfo& f) {
  if (f.optional) return false;
  return f.name == "id" || f.kind == FieldKind::Enum || f.kind == FieldKind::Reference;
}

struct Located {
  xml::SourcePos element;
  std::map<std::string, xml::SourcePos, std::less<>> attributes;
};

class InstanceReader {
 public:
  ParseResult read(std::string_view text) {
    xml::Element root;
    try {
      root = xml::parse_document(text);
    } catch (const xml::ParseError& e) {
      error(e.pos(), e.what());
      return finish();
    }
    read_root(root);
    for (const auto& child : root.children) read_element(child);
    if (!has_error()) check_structure();
    return finish();
  }

 private:
  void error(xml::SourcePos p, std::string msg) {
    result_.diagnostics.push_back({Severity::Error, p.line, p.column, std::move(msg)});
  }
  void warning(xml::SourcePos p, std::string msg) {
    result_.diagnostics.push_back({Severity::Warning, p.line, p.column, std::move(msg)});
  }
  bool has_error() const {
    return std::any_of(result_.diagnostics.begin(), result_.diagnostics.end(),
                       [](const auto& d) { return d.severity == Severity::Error; });
  }

  ParseResult finish() {
    if (!has_error()) result_.instance = std::move(instance_);
    return std::move(result_);
  }

  void read_root(const xml::Element& root) {
    if (root.name != kRoot) {
      error(root.pos, "root element must be <CarServer>, found <" + root.name + ">");
      return;
    }
    bool has_version = false;
    for (const auto& a : root.attributes) {
      if (a.name == "xmi:version") {
        has_version = true;
        if (a.value != kVersion)
          error(a.pos, "unsupported xmi:version '" + a.value + "' (expected 2.0)");
      } else if (a.name.rfind("xmlns", 0) != 0) {
        error(a.pos, "unknown attribute '" + a.name + "' on <CarServer>");
      }
    }
    if (!has_version) warning(root.pos, "missing xmi:version on <CarServer>");
    if (!text::trim(root.text).empty()) error(root.pos, "unexpected text inside <CarServer>");
  }

  void read_element(const xml::Element& node) {
    auto type = metamodel::parse_element_type(node.name);
    if (!type) {
      error(node.pos, "unknown element <" + node.name + ">");
      return;
    }
    metamodel::Element element = metamodel::make_element(*type);
    Located where{node.pos, {}};
    bool ok = true;

    for (const auto& a : node.attributes) {
      where.attributes.emplace(a.name, a.pos);
      const FieldInfo* f = metamodel::find_field(*type, a.name);
      if (!f) {
        error(a.pos, "unknown attribute '" + a.name + "' on <" + node.name + ">");
        ok = false;
        continue;
      }
      auto parsed = parse_value(*f, a.value);
      if (auto* err = std::get_if<ValueError>(&parsed)) {
        error(a.pos, err->message);
        ok = false;
        continue;
      }
      metamodel::set_field(element, f->name, std::move(std::get<FieldValue>(parsed)));
    }

    for (const FieldInfo& f : metamodel::fields_of(*type)) {
      if (required(f) && !node.attribute(f.name)) {
        error(node.pos, "missing required attribute '" + std::string(f.name) + "' on <" +
                            node.name + ">");
        ok = false;
      }
    }

    const FieldInfo* map_field = nullptr;
    for (const FieldInfo& f : metamodel::fields_of(*type))
      if (f.kind == FieldKind::ParamMap) map_field = &f;
    metamodel::ParamMap params;
    for (const auto& child : node.children) {
      if (child.name != kParam || !map_field) {
        error(child.pos, "unknown element <" + child.name + "> inside <" + node.name + ">");
        ok = false;
        continue;
      }
      const auto* key = child.attribute("key");
      const auto* value = child.attribute("value");
      if (!key || !value) {
        error(child.pos, "<param> needs both key and value attributes");
        ok = false;
        continue;
      }
      for (const auto& a : child.attributes)
        if (a.name != "key" && a.name != "value") {
          error(a.pos, "unknown attribute '" + a.name + "' on <param>");
          ok = false;
        }
      if (!child.children.empty() || !text::trim(child.text).empty()) {
        error(child.pos, "<param> must be empty");
        ok = false;
      }
      params.emplace_back(key->value, value->value);
    }
    if (!text::trim(node.text).empty()) {
      error(node.pos, "unexpected text inside <" + node.name + ">");
      ok = false;
    }
    if (map_field) metamodel::set_field(element, map_field->name, std::move(params));
    if (!ok) return;

    const auto id = metamodel::element_id(metamodel::ref_of(element));
    if (auto it = located_.find(id); it != located_.end()) {
      error(node.pos, "duplicate id '" + id + "' (first defined at line " +
                          std::to_string(it->second.element.line) + ")");
      return;
    }
    located_.emplace(id, std::move(where));
    metamodel::insert(instance_, std::move(element));
  }

  void check_structure() {
    for (const auto& v : metamodel::validate_structure(instance_)) {
      xml::SourcePos p{};
      if (auto it = located_.find(v.elementId); it != located_.end()) {
        p = it->second.element;
        if (auto at = it->second.attributes.find(v.field); at != it->second.attributes.end())
          p = at->second;
      }
      const bool fatal = v.kind == metamodel::ViolationKind::Identity ||
                         v.kind == metamodel::ViolationKind::Reference ||
                         v.kind == metamodel::ViolationKind::Domain;
      std::string msg = v.elementId + ": " + v.message;
      if (fatal)
        error(p, std::move(msg));
      else
        warning(p, std::move(msg));
    }
  }

  ModelInstance instance_;
  ParseResult result_;
  std::map<std::string, Located, std::less<>> located_;
};

bool encodable_list_item(const std::string& s) {
  return !s.empty() && s.find(',') == std::string::npos && text::trim(s) == s;
}

std::string attribute_text(const FieldInfo& f, const FieldValue& v) {
  switch (f.kind) {
    case FieldKind::ReferenceList:
      return text::join(std::get<std::vector<std::string>>(v), " ");
    default:
      return format_value(v);
  }
}

}  // namespace

std::string ParseResult::format_diagnostics(std::string_view source_name) const {
  std::ostringstream os;
  for (const auto& d : diagnostics)
    os << source_name << ":" << d.line << ":" << d.column << ": "
       << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.message << "\n";
  return os.str();
}

ParseResult parse_instance(std::string_view text) { return InstanceReader().read(text); }

std::string format_value(const FieldValue& value) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const Decimal& v) const { return v.to_string(); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(const std::vector<std::string>& v) const { return text::join(v, ","); }
    std::string operator()(const std::vector<std::int64_t>& v) const {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
      }
      return out;
    }
    std::string operator()(const metamodel::ParamMap& v) const {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i].first + "=" + v[i].second;
      }
      return out;
    }
  };
  return std::visit(Visitor{}, value);
}

std::string serialize_instance(const ModelInstance& instance) {
  for (const auto& v : metamodel::validate_structure(instance)) {
    if (v.kind == metamodel::ViolationKind::Identity ||
        v.kind == metamodel::ViolationKind::Reference || v.kind == metamodel::ViolationKind::Domain)
      throw Error(ErrorCode::InvalidInstance,
                  "cannot serialize invalid instance: " + v.elementId + ": " + v.message);
  }

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<CarServer xmi:version=\"2.0\" xmlns:xmi=\"http://www.omg.org/XMI\"";
  const auto elements = instance.elements();
  if (elements.empty()) {
    os << "/>\n";
    return os.str();
  }
  os << ">\n";
  for (const auto& ref : elements) {
    const ElementType type = metamodel::element_type(ref);
    os << "  <" << metamodel::type_name(type);
    const metamodel::ParamMap* params = nullptr;
    metamodel::ParamMap param_storage;
    for (const FieldInfo& f : metamodel::fields_of(type)) {
      FieldValue v = metamodel::get_field(ref, f.name);
      if (std::holds_alternative<std::monostate>(v)) continue;
      if (f.kind == FieldKind::ParamMap) {
        param_storage = std::get<metamodel::ParamMap>(v);
        params = &param_storage;
        continue;
      }
      if (f.kind == FieldKind::StringList) {
        const auto& items = std::get<std::vector<std::string>>(v);
        for (const auto& item : items)
          if (!encodable_list_item(item))
            throw Error(ErrorCode::InvalidInstance,
                        "cannot serialize list item '" + item + "' of " +
                            metamodel::element_id(ref) + "." + std::string(f.name));
        if (items.empty() && !f.optional) continue;
      }
      if (f.kind == FieldKind::ReferenceList &&
          std::get<std::vector<std::string>>(v).empty())
        continue;
      if (f.kind == FieldKind::IntegerList && std::get<std::vector<std::int64_t>>(v).empty())
        continue;
      os << ' ' << f.name << "=\"" << xml::escape_attribute(attribute_text(f, v)) << '"';
    }
    if (!params || params->empty()) {
      os << "/>\n";
      continue;
    }
    os << ">\n";
    for (const auto& [key, value] : *params)
      os << "    <param key=\"" << xml::escape_attribute(key) << "\" value=\""
         << xml::escape_attribute(value) << "\"/>\n";
    os << "  </" << metamodel::type_name(type) << ">\n";
  }
  os << "</CarServer>\n";
  return os.str();
}

std::string get_attribute(const ModelInstance& instance, std::string_view element_id,
                          std::string_view attribute) {
  auto ref = instance.find(element_id);
  if (!ref) throw Error(ErrorCode::UnknownId, "unknown element '" + std::string(element_id) + "'");
  const ElementType type = metamodel::element_type(*ref);
  if (metamodel::find_field(type, attribute)) {
    FieldValue v = metamodel::get_field(*ref, attribute);
    if (std::holds_alternative<std::monostate>(v))
      throw Error(ErrorCode::MissingValue, std::string(element_id) + "." +
                                               std::string(attribute) + " is not set");
    return format_value(v);
  }
  for (const FieldInfo& f : metamodel::fields_of(type)) {
    if (f.kind != FieldKind::ParamMap) continue;
    const auto params = std::get<metamodel::ParamMap>(metamodel::get_field(*ref, f.name));
    for (const auto& [key, value] : params)
      if (key == attribute) return value;
  }
  throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + std::string(attribute) +
                                               "' on " + std::string(element_id));
}

ModelInstance load_instance(const std::filesystem::path& path) {
  auto result = parse_instance(text::read_file(path));
  if (!result.ok())
    throw Error(ErrorCode::InvalidInstance, result.format_diagnostics(path.string()));
  return std::move(*result.instance);
}

}  // namespace carserver::xmi
