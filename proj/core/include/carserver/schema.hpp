#pragma once

// Field-level reflection over the metamodel. The XMI reader/writer, attribute
// lookup and the OCL type checker are all driven by these tables, so a field
// added here is immediately visible to every consumer.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "carserver/metamodel.hpp"

namespace carserver::metamodel {

enum class FieldKind {
  Integer,
  Decimal,
  Boolean,
  String,
  Enum,
  Reference,
  ReferenceList,
  StringList,
  IntegerList,
  ParamMap,
};

struct FieldInfo {
  std::string_view name;
  FieldKind kind;
  bool optional = false;
  /// Reference target category (type or abstract name); Reference kinds only.
  std::string_view target{};
  /// Allowed tokens; Enum kind only.
  std::span<const std::string_view> enumValues{};
};

/// Enum, String and Reference values are carried as std::string;
/// ReferenceList and StringList as std::vector<std::string>.
/// std::monostate marks an absent optional field.
using FieldValue = std::variant<std::monostate, std::int64_t, Decimal, bool, std::string,
                                std::vector<std::string>, std::vector<std::int64_t>, ParamMap>;

using Element = std::variant<Scenario, Feature, ZoneController, CoProcessor, Sensor, Camera, Lidar,
                             Radar, Actuator, ApplicationContainer, ProcessingTask, ConnectionLink>;

/// Fields in declaration order; `id` is always first.
std::span<const FieldInfo> fields_of(ElementType type);
const FieldInfo* find_field(ElementType type, std::string_view name);
/// Fields shared by every type conforming to an abstract category
/// (or the concrete type's own fields when `category` is concrete).
std::vector<FieldInfo> fields_of_category(std::string_view category);

/// Throws UnknownAttribute for names not in fields_of(type).
FieldValue get_field(const ElementRef& element, std::string_view name);

Element make_element(ElementType type);
ElementType element_type(const Element& element);
ElementRef ref_of(const Element& element);
/// Throws UnknownAttribute, or InvalidArgument when the value's alternative
/// does not fit the field kind or an enum token is unknown.
void set_field(Element& element, std::string_view name, FieldValue value);
void insert(ModelInstance& instance, Element element);

}  // namespace carserver::metamodel
