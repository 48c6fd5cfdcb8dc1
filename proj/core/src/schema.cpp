#include "carserver/schema.hpp"

#include <array>
#include <concepts>
#include <functional>

#include "carserver/error.hpp"

namespace carserver::metamodel {
namespace {

constexpr std::array<std::string_view, 5> kArchitectureTokens = {"X86", "ARM", "GPU", "TPU", "FPGA"};
constexpr std::array<std::string_view, 5> kZoneTokens = {"FRONT", "REAR", "LEFT", "RIGHT", "CENTER"};
constexpr std::array<std::string_view, 3> kCoProcessorTokens = {"GPU", "TPU", "FPGA"};
constexpr std::array<std::string_view, 3> kTechnologyTokens = {"DOCKER", "DOCKER_COMPOSE",
                                                               "KUBERNETES"};
constexpr std::array<std::string_view, 2> kConnectionTokens = {"PHYSICAL", "VIRTUAL"};

template <class T>
struct Binding {
  FieldInfo info;
  std::function<FieldValue(const T&)> get;
  std::function<void(T&, FieldValue&&)> set;
};

[[noreturn]] void bad_value(std::string_view field) {
  throw Error(ErrorCode::InvalidArgument,
              "value does not match the kind of field '" + std::string(field) + "'");
}

template <class Alt>
Alt take(FieldValue&& v, std::string_view field) {
  if (auto* p = std::get_if<Alt>(&v)) return std::move(*p);
  bad_value(field);
}

template <class T>
class Fields {
 public:
  template <class C>
    requires std::derived_from<T, C>
  Fields& integer(std::string_view name, std::int64_t C::*m) {
    add({name, FieldKind::Integer}, [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) { e.*m = take<std::int64_t>(std::move(v), name); });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& decimal(std::string_view name, Decimal C::*m) {
    add({name, FieldKind::Decimal}, [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) { e.*m = take<Decimal>(std::move(v), name); });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& boolean(std::string_view name, bool C::*m) {
    add({name, FieldKind::Boolean}, [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) { e.*m = take<bool>(std::move(v), name); });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& string(std::string_view name, std::string C::*m) {
    add({name, FieldKind::String}, [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) { e.*m = take<std::string>(std::move(v), name); });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& optional_string(std::string_view name, std::optional<std::string> C::*m) {
    add({name, FieldKind::String, true},
        [m](const T& e) { return e.*m ? FieldValue(*(e.*m)) : FieldValue(); },
        [m, name](T& e, FieldValue&& v) {
          if (std::holds_alternative<std::monostate>(v))
            (e.*m).reset();
          else
            e.*m = take<std::string>(std::move(v), name);
        });
    return *this;
  }

  template <class C, class E>
    requires std::derived_from<T, C>
  Fields& enumeration(std::string_view name, E C::*m, std::span<const std::string_view> tokens,
                      std::optional<E> (*parse)(std::string_view)) {
    add({name, FieldKind::Enum, false, {}, tokens},
        [m](const T& e) { return FieldValue(std::string(to_string(e.*m))); },
        [m, name, parse](T& e, FieldValue&& v) {
          auto parsed = parse(take<std::string>(std::move(v), name));
          if (!parsed) bad_value(name);
          e.*m = *parsed;
        });
    return *this;
  }

  template <class C, class E>
    requires std::derived_from<T, C>
  Fields& optional_enumeration(std::string_view name, std::optional<E> C::*m,
                               std::span<const std::string_view> tokens,
                               std::optional<E> (*parse)(std::string_view)) {
    add({name, FieldKind::Enum, true, {}, tokens},
        [m](const T& e) {
          return e.*m ? FieldValue(std::string(to_string(*(e.*m)))) : FieldValue();
        },
        [m, name, parse](T& e, FieldValue&& v) {
          if (std::holds_alternative<std::monostate>(v)) {
            (e.*m).reset();
            return;
          }
          auto parsed = parse(take<std::string>(std::move(v), name));
          if (!parsed) bad_value(name);
          e.*m = *parsed;
        });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& reference(std::string_view name, Id C::*m, std::string_view target) {
    add({name, FieldKind::Reference, false, target}, [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) { e.*m = take<std::string>(std::move(v), name); });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& optional_reference(std::string_view name, std::optional<Id> C::*m,
                             std::string_view target) {
    add({name, FieldKind::Reference, true, target},
        [m](const T& e) { return e.*m ? FieldValue(*(e.*m)) : FieldValue(); },
        [m, name](T& e, FieldValue&& v) {
          if (std::holds_alternative<std::monostate>(v))
            (e.*m).reset();
          else
            e.*m = take<std::string>(std::move(v), name);
        });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& references(std::string_view name, std::vector<Id> C::*m, std::string_view target) {
    add({name, FieldKind::ReferenceList, false, target},
        [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) {
          e.*m = take<std::vector<std::string>>(std::move(v), name);
        });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& strings(std::string_view name, std::vector<std::string> C::*m) {
    add({name, FieldKind::StringList}, [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) {
          e.*m = take<std::vector<std::string>>(std::move(v), name);
        });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& optional_strings(std::string_view name,
                           std::optional<std::vector<std::string>> C::*m) {
    add({name, FieldKind::StringList, true},
        [m](const T& e) { return e.*m ? FieldValue(*(e.*m)) : FieldValue(); },
        [m, name](T& e, FieldValue&& v) {
          if (std::holds_alternative<std::monostate>(v))
            (e.*m).reset();
          else
            e.*m = take<std::vector<std::string>>(std::move(v), name);
        });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& integers(std::string_view name, std::vector<std::int64_t> C::*m) {
    add({name, FieldKind::IntegerList}, [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) {
          e.*m = take<std::vector<std::int64_t>>(std::move(v), name);
        });
    return *this;
  }

  template <class C>
    requires std::derived_from<T, C>
  Fields& params(std::string_view name, ParamMap C::*m) {
    add({name, FieldKind::ParamMap}, [m](const T& e) { return FieldValue(e.*m); },
        [m, name](T& e, FieldValue&& v) { e.*m = take<ParamMap>(std::move(v), name); });
    return *this;
  }

  const std::vector<Binding<T>>& bindings() const { return bindings_; }
  const std::vector<FieldInfo>& infos() const { return infos_; }

 private:
  void add(FieldInfo info, std::function<FieldValue(const T&)> get,
           std::function<void(T&, FieldValue&&)> set) {
    infos_.push_back(info);
    bindings_.push_back({info, std::move(get), std::move(set)});
  }

  std::vector<Binding<T>> bindings_;
  std::vector<FieldInfo> infos_;
};

template <class T>
void node_fields(Fields<T>& f) {
  f.integer("memoryCapacity", &ProcessingNode::memoryCapacity)
      .integer("processingPower", &ProcessingNode::processingPower)
      .integer("cores", &ProcessingNode::cores)
      .decimal("maxBandwidth", &ProcessingNode::maxBandwidth)
      .enumeration("architecture", &ProcessingNode::architecture, kArchitectureTokens,
                   &parse_architecture)
      .boolean("realtimeCapability", &ProcessingNode::realtimeCapability)
      .decimal("cost", &ProcessingNode::cost)
      .decimal("powerConsumption", &ProcessingNode::powerConsumption);
}

template <class T>
void sensor_fields(Fields<T>& f) {
  f.string("measurementUnit", &Sensor::measurementUnit)
      .string("measurementFormat", &Sensor::measurementFormat)
      .decimal("measurementsPerSecond", &Sensor::measurementsPerSecond)
      .params("parameterList", &Sensor::parameterList)
      .optional_reference("controllerId", &Sensor::controllerId, "ApplicationContainer")
      .decimal("cost", &Sensor::cost)
      .decimal("powerConsumption", &Sensor::powerConsumption);
}

template <class T>
void component_fields(Fields<T>& f) {
  f.integer("memoryDemand", &SoftwareComponent::memoryDemand)
      .integer("processingDemand", &SoftwareComponent::processingDemand)
      .decimal("bandwidthDemand", &SoftwareComponent::bandwidthDemand)
      .boolean("realtimeRequired", &SoftwareComponent::realtimeRequired);
}

template <class T, class C>
Fields<T> start(Id C::*id) {
  Fields<T> f;
  f.string("id", id);
  return f;
}

template <class T>
const Fields<T>& table();

template <>
const Fields<Scenario>& table() {
  static const Fields<Scenario> f = [] {
    auto t = start<Scenario>(&Scenario::id);
    t.string("name", &Scenario::name).references("features", &Scenario::features, "Feature");
    return t;
  }();
  return f;
}

template <>
const Fields<Feature>& table() {
  static const Fields<Feature> f = [] {
    auto t = start<Feature>(&Feature::id);
    t.string("name", &Feature::name)
        .boolean("safetyCritical", &Feature::safetyCritical)
        .string("requirementText", &Feature::requirementText)
        .references("containers", &Feature::containers, "ApplicationContainer")
        .references("cameras", &Feature::cameras, "Camera")
        .references("lidars", &Feature::lidars, "LIDAR")
        .references("radars", &Feature::radars, "RADAR");
    return t;
  }();
  return f;
}

template <>
const Fields<ZoneController>& table() {
  static const Fields<ZoneController> f = [] {
    auto t = start<ZoneController>(&ProcessingNode::id);
    node_fields(t);
    t.enumeration("zone", &ZoneController::zone, kZoneTokens, &parse_zone)
        .string("platform", &ZoneController::platform)
        .references("containers", &ZoneController::containers, "ApplicationContainer");
    return t;
  }();
  return f;
}

template <>
const Fields<CoProcessor>& table() {
  static const Fields<CoProcessor> f = [] {
    auto t = start<CoProcessor>(&ProcessingNode::id);
    node_fields(t);
    t.enumeration("kind", &CoProcessor::kind, kCoProcessorTokens, &parse_coprocessor_kind)
        .reference("masterId", &CoProcessor::masterId, "ZoneController");
    return t;
  }();
  return f;
}

template <>
const Fields<Sensor>& table() {
  static const Fields<Sensor> f = [] {
    auto t = start<Sensor>(&Sensor::id);
    sensor_fields(t);
    return t;
  }();
  return f;
}

template <>
const Fields<Camera>& table() {
  static const Fields<Camera> f = [] {
    auto t = start<Camera>(&Sensor::id);
    sensor_fields(t);
    t.integer("width", &Camera::width)
        .integer("height", &Camera::height)
        .decimal("fov", &Camera::fov);
    return t;
  }();
  return f;
}

template <>
const Fields<Lidar>& table() {
  static const Fields<Lidar> f = [] {
    auto t = start<Lidar>(&Sensor::id);
    sensor_fields(t);
    t.integer("channels", &Lidar::channels).decimal("range", &Lidar::range);
    return t;
  }();
  return f;
}

template <>
const Fields<Radar>& table() {
  static const Fields<Radar> f = [] {
    auto t = start<Radar>(&Sensor::id);
    sensor_fields(t);
    t.decimal("range", &Radar::range);
    return t;
  }();
  return f;
}

template <>
const Fields<Actuator>& table() {
  static const Fields<Actuator> f = [] {
    auto t = start<Actuator>(&Actuator::id);
    t.string("commandFormat", &Actuator::commandFormat)
        .params("parameters", &Actuator::parameters)
        .optional_reference("controllerId", &Actuator::controllerId, "ApplicationContainer")
        .decimal("cost", &Actuator::cost)
        .decimal("powerConsumption", &Actuator::powerConsumption);
    return t;
  }();
  return f;
}

template <>
const Fields<ApplicationContainer>& table() {
  static const Fields<ApplicationContainer> f = [] {
    auto t = start<ApplicationContainer>(&SoftwareComponent::id);
    component_fields(t);
    t.string("image", &ApplicationContainer::image)
        .enumeration("targetTechnology", &ApplicationContainer::targetTechnology,
                     kTechnologyTokens, &parse_target_technology)
        .string("repository", &ApplicationContainer::repository)
        .optional_string("script", &ApplicationContainer::script)
        .optional_strings("dependencies", &ApplicationContainer::dependencies)
        .enumeration("architecture", &ApplicationContainer::architecture, kArchitectureTokens,
                     &parse_architecture)
        .integers("communicationPorts", &ApplicationContainer::communicationPorts)
        .params("environment", &ApplicationContainer::environment);
    return t;
  }();
  return f;
}

template <>
const Fields<ProcessingTask>& table() {
  static const Fields<ProcessingTask> f = [] {
    auto t = start<ProcessingTask>(&SoftwareComponent::id);
    component_fields(t);
    t.strings("inputs", &ProcessingTask::inputs)
        .strings("outputs", &ProcessingTask::outputs)
        .strings("inputFormat", &ProcessingTask::inputFormat)
        .strings("outputFormat", &ProcessingTask::outputFormat)
        .strings("compatibleFormat", &ProcessingTask::compatibleFormat)
        .optional_enumeration("architecture", &ProcessingTask::architecture, kArchitectureTokens,
                              &parse_architecture);
    return t;
  }();
  return f;
}

template <>
const Fields<ConnectionLink>& table() {
  static const Fields<ConnectionLink> f = [] {
    auto t = start<ConnectionLink>(&ConnectionLink::id);
    t.reference("fromId", &ConnectionLink::fromId, kAnyElement)
        .reference("toId", &ConnectionLink::toId, kAnyElement)
        .string("protocol", &ConnectionLink::protocol)
        .enumeration("connectionType", &ConnectionLink::connectionType, kConnectionTokens,
                     &parse_connection_type)
        .decimal("latency", &ConnectionLink::latency);
    return t;
  }();
  return f;
}

template <class T>
std::span<const FieldInfo> infos_for() {
  return table<T>().infos();
}

template <class T>
const Binding<T>* binding(std::string_view name) {
  for (const auto& b : table<T>().bindings())
    if (b.info.name == name) return &b;
  return nullptr;
}

[[noreturn]] void unknown_attribute(ElementType type, std::string_view name) {
  throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + std::string(name) +
                                               "' for " + std::string(type_name(type)));
}

template <class T>
struct TypeOf;
template <> struct TypeOf<Scenario> { static constexpr ElementType value = ElementType::Scenario; };
template <> struct TypeOf<Feature> { static constexpr ElementType value = ElementType::Feature; };
template <> struct TypeOf<ZoneController> { static constexpr ElementType value = ElementType::ZoneController; };
template <> struct TypeOf<CoProcessor> { static constexpr ElementType value = ElementType::CoProcessor; };
template <> struct TypeOf<Sensor> { static constexpr ElementType value = ElementType::Sensor; };
template <> struct TypeOf<Camera> { static constexpr ElementType value = ElementType::Camera; };
template <> struct TypeOf<Lidar> { static constexpr ElementType value = ElementType::Lidar; };
template <> struct TypeOf<Radar> { static constexpr ElementType value = ElementType::Radar; };
template <> struct TypeOf<Actuator> { static constexpr ElementType value = ElementType::Actuator; };
template <> struct TypeOf<ApplicationContainer> { static constexpr ElementType value = ElementType::ApplicationContainer; };
template <> struct TypeOf<ProcessingTask> { static constexpr ElementType value = ElementType::ProcessingTask; };
template <> struct TypeOf<ConnectionLink> { static constexpr ElementType value = ElementType::ConnectionLink; };

}  // namespace

std::span<const FieldInfo> fields_of(ElementType type) {
  switch (type) {
    case ElementType::Scenario: return infos_for<Scenario>();
    case ElementType::Feature: return infos_for<Feature>();
    case ElementType::ZoneController: return infos_for<ZoneController>();
    case ElementType::CoProcessor: return infos_for<CoProcessor>();
    case ElementType::Sensor: return infos_for<Sensor>();
    case ElementType::Camera: return infos_for<Camera>();
    case ElementType::Lidar: return infos_for<Lidar>();
    case ElementType::Radar: return infos_for<Radar>();
    case ElementType::Actuator: return infos_for<Actuator>();
    case ElementType::ApplicationContainer: return infos_for<ApplicationContainer>();
    case ElementType::ProcessingTask: return infos_for<ProcessingTask>();
    case ElementType::ConnectionLink: return infos_for<ConnectionLink>();
  }
  return {};
}

const FieldInfo* find_field(ElementType type, std::string_view name) {
  for (const auto& f : fields_of(type))
    if (f.name == name) return &f;
  return nullptr;
}

std::vector<FieldInfo> fields_of_category(std::string_view category) {
  std::vector<ElementType> members;
  for (ElementType t : kAllElementTypes)
    if (conforms_to(t, category)) members.push_back(t);
  if (members.empty()) return {};
  std::vector<FieldInfo> common;
  for (const auto& f : fields_of(members.front())) {
    bool shared = true;
    for (ElementType t : members) {
      const FieldInfo* other = find_field(t, f.name);
      if (!other || other->kind != f.kind || other->optional != f.optional ||
          other->target != f.target) {
        shared = false;
        break;
      }
    }
    if (shared) common.push_back(f);
  }
  return common;
}

FieldValue get_field(const ElementRef& element, std::string_view name) {
  return std::visit(
      [&](const auto* e) -> FieldValue {
        using T = std::remove_cvref_t<decltype(*e)>;
        const auto* b = binding<T>(name);
        if (!b) unknown_attribute(TypeOf<T>::value, name);
        return b->get(*e);
      },
      element);
}

Element make_element(ElementType type) {
  switch (type) {
    case ElementType::Scenario: return Scenario{};
    case ElementType::Feature: return Feature{};
    case ElementType::ZoneController: return ZoneController{};
    case ElementType::CoProcessor: return CoProcessor{};
    case ElementType::Sensor: return Sensor{};
    case ElementType::Camera: return Camera{};
    case ElementType::Lidar: return Lidar{};
    case ElementType::Radar: return Radar{};
    case ElementType::Actuator: return Actuator{};
    case ElementType::ApplicationContainer: return ApplicationContainer{};
    case ElementType::ProcessingTask: return ProcessingTask{};
    case ElementType::ConnectionLink: return ConnectionLink{};
  }
  return Scenario{};
}

ElementType element_type(const Element& element) {
  return std::visit([](const auto& e) { return TypeOf<std::remove_cvref_t<decltype(e)>>::value; },
                    element);
}

ElementRef ref_of(const Element& element) {
  return std::visit([](const auto& e) -> ElementRef { return &e; }, element);
}

void set_field(Element& element, std::string_view name, FieldValue value) {
  std::visit(
      [&](auto& e) {
        using T = std::remove_cvref_t<decltype(e)>;
        const auto* b = binding<T>(name);
        if (!b) unknown_attribute(TypeOf<T>::value, name);
        b->set(e, std::move(value));
      },
      element);
}

void insert(ModelInstance& instance, Element element) {
  std::visit([&](auto&& e) { instance.add(std::move(e)); }, std::move(element));
}

}  // namespace carserver::metamodel
