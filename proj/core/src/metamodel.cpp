#include "carserver/metamodel.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

#include "carserver/error.hpp"
#include "carserver/schema.hpp"

namespace carserver::metamodel {
namespace {

template <class E, std::size_t N>
std::optional<E> parse_token(std::string_view s, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [value, token] : table)
    if (token == s) return value;
  return std::nullopt;
}

template <class E, std::size_t N>
std::string_view token_of(E v, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [value, token] : table)
    if (value == v) return token;
  return "?";
}

constexpr std::pair<Architecture, std::string_view> kArchitectures[] = {
    {Architecture::X86, "X86"}, {Architecture::ARM, "ARM"}, {Architecture::GPU, "GPU"},
    {Architecture::TPU, "TPU"}, {Architecture::FPGA, "FPGA"}};
constexpr std::pair<Zone, std::string_view> kZones[] = {{Zone::FRONT, "FRONT"},
                                                        {Zone::REAR, "REAR"},
                                                        {Zone::LEFT, "LEFT"},
                                                        {Zone::RIGHT, "RIGHT"},
                                                        {Zone::CENTER, "CENTER"}};
constexpr std::pair<CoProcessorKind, std::string_view> kKinds[] = {
    {CoProcessorKind::GPU, "GPU"}, {CoProcessorKind::TPU, "TPU"}, {CoProcessorKind::FPGA, "FPGA"}};
constexpr std::pair<TargetTechnology, std::string_view> kTechnologies[] = {
    {TargetTechnology::DOCKER, "DOCKER"},
    {TargetTechnology::DOCKER_COMPOSE, "DOCKER_COMPOSE"},
    {TargetTechnology::KUBERNETES, "KUBERNETES"}};
constexpr std::pair<ConnectionType, std::string_view> kConnections[] = {
    {ConnectionType::PHYSICAL, "PHYSICAL"}, {ConnectionType::VIRTUAL, "VIRTUAL"}};

constexpr std::pair<ElementType, std::string_view> kTypeNames[] = {
    {ElementType::Scenario, "Scenario"},
    {ElementType::Feature, "Feature"},
    {ElementType::ZoneController, "ZoneController"},
    {ElementType::CoProcessor, "CoProcessor"},
    {ElementType::Sensor, "Sensor"},
    {ElementType::Camera, "Camera"},
    {ElementType::Lidar, "LIDAR"},
    {ElementType::Radar, "RADAR"},
    {ElementType::Actuator, "Actuator"},
    {ElementType::ApplicationContainer, "ApplicationContainer"},
    {ElementType::ProcessingTask, "ProcessingTask"},
    {ElementType::ConnectionLink, "ConnectionLink"},
};

template <class T>
void append_refs(std::vector<ElementRef>& out, const std::map<Id, T>& m) {
  for (const auto& [id, e] : m) out.emplace_back(&e);
}

}  // namespace

std::string_view to_string(Architecture v) { return token_of(v, kArchitectures); }
std::string_view to_string(Zone v) { return token_of(v, kZones); }
std::string_view to_string(CoProcessorKind v) { return token_of(v, kKinds); }
std::string_view to_string(TargetTechnology v) { return token_of(v, kTechnologies); }
std::string_view to_string(ConnectionType v) { return token_of(v, kConnections); }

std::optional<Architecture> parse_architecture(std::string_view s) {
  return parse_token(s, kArchitectures);
}
std::optional<Zone> parse_zone(std::string_view s) { return parse_token(s, kZones); }
std::optional<CoProcessorKind> parse_coprocessor_kind(std::string_view s) {
  return parse_token(s, kKinds);
}
std::optional<TargetTechnology> parse_target_technology(std::string_view s) {
  return parse_token(s, kTechnologies);
}
std::optional<ConnectionType> parse_connection_type(std::string_view s) {
  return parse_token(s, kConnections);
}

std::string_view type_name(ElementType t) { return token_of(t, kTypeNames); }
std::optional<ElementType> parse_element_type(std::string_view name) {
  return parse_token(name, kTypeNames);
}

bool conforms_to(ElementType type, std::string_view category) {
  if (type_name(type) == category || category == kAnyElement) return true;
  switch (type) {
    case ElementType::ZoneController:
    case ElementType::CoProcessor:
      return category == kProcessingNode;
    case ElementType::Camera:
    case ElementType::Lidar:
    case ElementType::Radar:
      return category == kSensor;
    case ElementType::ApplicationContainer:
    case ElementType::ProcessingTask:
      return category == kSoftwareComponent;
    default:
      return false;
  }
}

bool is_known_type(std::string_view name) {
  return parse_element_type(name).has_value() || name == kProcessingNode ||
         name == kSoftwareComponent;
}

ElementType element_type(const ElementRef& ref) {
  return static_cast<ElementType>(ref.index());
}

const Id& element_id(const ElementRef& ref) {
  return std::visit([](const auto* e) -> const Id& { return e->id; }, ref);
}

std::vector<ElementRef> ModelInstance::elements() const {
  std::vector<ElementRef> out;
  out.reserve(size());
  append_refs(out, scenarios);
  append_refs(out, features);
  append_refs(out, zoneControllers);
  append_refs(out, coProcessors);
  append_refs(out, sensors);
  append_refs(out, cameras);
  append_refs(out, lidars);
  append_refs(out, radars);
  append_refs(out, actuators);
  append_refs(out, containers);
  append_refs(out, tasks);
  append_refs(out, links);
  return out;
}

std::vector<ElementRef> ModelInstance::elements_of(std::string_view category) const {
  std::vector<ElementRef> out;
  for (const auto& ref : elements())
    if (conforms_to(element_type(ref), category)) out.push_back(ref);
  return out;
}

std::optional<ElementRef> ModelInstance::find(std::string_view id) const {
  const std::string key(id);
  auto probe = [&](const auto& m) -> std::optional<ElementRef> {
    if (auto it = m.find(key); it != m.end()) return ElementRef(&it->second);
    return std::nullopt;
  };
  for (auto r : {probe(scenarios), probe(features), probe(zoneControllers), probe(coProcessors),
                 probe(sensors), probe(cameras), probe(lidars), probe(radars), probe(actuators),
                 probe(containers), probe(tasks), probe(links)})
    if (r) return r;
  return std::nullopt;
}

std::vector<const Sensor*> ModelInstance::all_sensors() const {
  std::vector<const Sensor*> out;
  for (const auto& [id, s] : sensors) out.push_back(&s);
  for (const auto& [id, s] : cameras) out.push_back(&s);
  for (const auto& [id, s] : lidars) out.push_back(&s);
  for (const auto& [id, s] : radars) out.push_back(&s);
  return out;
}

std::vector<const ProcessingNode*> ModelInstance::all_nodes() const {
  std::vector<const ProcessingNode*> out;
  for (const auto& [id, n] : zoneControllers) out.push_back(&n);
  for (const auto& [id, n] : coProcessors) out.push_back(&n);
  return out;
}

std::size_t ModelInstance::size() const {
  return scenarios.size() + features.size() + zoneControllers.size() + coProcessors.size() +
         sensors.size() + cameras.size() + lidars.size() + radars.size() + actuators.size() +
         containers.size() + tasks.size() + links.size();
}

namespace {

class Validator {
 public:
  explicit Validator(const ModelInstance& instance) : instance_(instance) {}

  std::vector<StructuralViolation> run() {
    check_identity();
    for (const auto& ref : instance_.elements()) check_element(ref);
    return std::move(out_);
  }

 private:
  void report(const Id& id, std::string field, ViolationKind kind, std::string message) {
    out_.push_back({id, std::move(field), kind, std::move(message)});
  }

  template <class T>
  void check_keys(const std::map<Id, T>& m) {
    for (const auto& [key, e] : m) {
      if (key != e.id)
        report(e.id, "id", ViolationKind::Identity,
               "element stored under key '" + key + "' but has id '" + e.id + "'");
    }
  }

  void check_identity() {
    check_keys(instance_.scenarios);
    check_keys(instance_.features);
    check_keys(instance_.zoneControllers);
    check_keys(instance_.coProcessors);
    check_keys(instance_.sensors);
    check_keys(instance_.cameras);
    check_keys(instance_.lidars);
    check_keys(instance_.radars);
    check_keys(instance_.actuators);
    check_keys(instance_.containers);
    check_keys(instance_.tasks);
    check_keys(instance_.links);

    std::unordered_map<std::string, ElementType> seen;
    for (const auto& ref : instance_.elements()) {
      const Id& id = element_id(ref);
      if (id.empty()) {
        report(id, "id", ViolationKind::Identity, "empty id");
        continue;
      }
      if (std::any_of(id.begin(), id.end(), [](unsigned char c) { return std::isspace(c); }))
        report(id, "id", ViolationKind::Identity, "id '" + id + "' contains whitespace");
      auto [it, inserted] = seen.emplace(id, element_type(ref));
      if (!inserted)
        report(id, "id", ViolationKind::Identity,
               "duplicate id '" + id + "' (" + std::string(type_name(it->second)) + " and " +
                   std::string(type_name(element_type(ref))) + ")");
    }
  }

  void check_reference(const Id& owner, std::string_view field, const std::string& target_id,
                       std::string_view category) {
    auto target = instance_.find(target_id);
    if (!target) {
      report(owner, std::string(field), ViolationKind::Reference,
             "dangling reference '" + target_id + "' in " + std::string(field));
      return;
    }
    if (!category.empty() && !conforms_to(element_type(*target), category))
      report(owner, std::string(field), ViolationKind::Reference,
             "reference '" + target_id + "' in " + std::string(field) + " is a " +
                 std::string(type_name(element_type(*target))) + ", expected " +
                 std::string(category));
  }

  void check_element(const ElementRef& ref) {
    const ElementType type = element_type(ref);
    const Id& id = element_id(ref);
    for (const FieldInfo& f : fields_of(type)) {
      FieldValue v = get_field(ref, f.name);
      switch (f.kind) {
        case FieldKind::Integer:
          if (std::get<std::int64_t>(v) < 0)
            report(id, std::string(f.name), ViolationKind::Domain,
                   std::string(f.name) + " must be non-negative");
          break;
        case FieldKind::Decimal:
          if (std::get<Decimal>(v) < Decimal())
            report(id, std::string(f.name), ViolationKind::Domain,
                   std::string(f.name) + " must be non-negative");
          break;
        case FieldKind::Reference:
          if (auto* target = std::get_if<std::string>(&v))
            check_reference(id, f.name, *target, f.target);
          break;
        case FieldKind::ReferenceList: {
          std::set<std::string> distinct;
          for (const auto& target : std::get<std::vector<std::string>>(v)) {
            check_reference(id, f.name, target, f.target);
            if (!distinct.insert(target).second)
              report(id, std::string(f.name), ViolationKind::Shape,
                     "reference '" + target + "' listed twice in " + std::string(f.name));
          }
          break;
        }
        case FieldKind::ParamMap: {
          std::set<std::string> keys;
          for (const auto& [k, val] : std::get<ParamMap>(v))
            if (!keys.insert(k).second)
              report(id, std::string(f.name), ViolationKind::Shape,
                     "duplicate parameter key '" + k + "'");
          break;
        }
        default:
          break;
      }
    }
    std::visit([&](const auto* e) { check_specific(*e); }, ref);
  }

  void positive(const Id& id, const char* field, bool ok, const char* what) {
    if (!ok) report(id, field, ViolationKind::Range, std::string(field) + " must be " + what);
  }

  template <class T>
  void check_specific(const T&) {}

  void check_node(const ProcessingNode& n) { positive(n.id, "cores", n.cores >= 1, ">= 1"); }
  void check_sensor(const Sensor& s) {
    positive(s.id, "measurementsPerSecond", s.measurementsPerSecond > Decimal(), "> 0");
  }

  void check_specific(const ZoneController& n) { check_node(n); }
  void check_specific(const CoProcessor& n) { check_node(n); }
  void check_specific(const Sensor& s) { check_sensor(s); }
  void check_specific(const Camera& c) {
    check_sensor(c);
    positive(c.id, "width", c.width > 0, "> 0");
    positive(c.id, "height", c.height > 0, "> 0");
    positive(c.id, "fov", c.fov > Decimal() && c.fov <= Decimal::from_units(360), "in (0, 360]");
  }
  void check_specific(const Lidar& l) {
    check_sensor(l);
    positive(l.id, "channels", l.channels > 0, "> 0");
    positive(l.id, "range", l.range > Decimal(), "> 0");
  }
  void check_specific(const Radar& r) {
    check_sensor(r);
    positive(r.id, "range", r.range > Decimal(), "> 0");
  }
  void check_specific(const ApplicationContainer& c) {
    if (c.image.empty())
      report(c.id, "image", ViolationKind::Shape, "image must be non-empty");
    std::set<std::int64_t> ports;
    for (std::int64_t p : c.communicationPorts) {
      if (p < 1 || p > 65535)
        report(c.id, "communicationPorts", ViolationKind::Domain,
               "port " + std::to_string(p) + " outside [1, 65535]");
      else if (!ports.insert(p).second)
        report(c.id, "communicationPorts", ViolationKind::Shape,
               "port " + std::to_string(p) + " listed twice");
    }
  }
  void check_specific(const ProcessingTask& t) {
    if (t.inputFormat.size() != t.inputs.size())
      report(t.id, "inputFormat", ViolationKind::Shape,
             "inputFormat has " + std::to_string(t.inputFormat.size()) + " entries for " +
                 std::to_string(t.inputs.size()) + " inputs");
    if (t.outputFormat.size() != t.outputs.size())
      report(t.id, "outputFormat", ViolationKind::Shape,
             "outputFormat has " + std::to_string(t.outputFormat.size()) + " entries for " +
                 std::to_string(t.outputs.size()) + " outputs");
  }
  void check_specific(const Scenario& s) {
    if (s.features.empty())
      report(s.id, "features", ViolationKind::Shape, "scenario needs at least one feature");
  }

  const ModelInstance& instance_;
  std::vector<StructuralViolation> out_;
};

std::string kind_label(const FieldInfo& f) {
  std::string label;
  switch (f.kind) {
    case FieldKind::Integer: label = "integer"; break;
    case FieldKind::Decimal: label = "decimal"; break;
    case FieldKind::Boolean: label = "boolean"; break;
    case FieldKind::String: label = "string"; break;
    case FieldKind::Enum: {
      label = "enum {";
      for (std::size_t i = 0; i < f.enumValues.size(); ++i) {
        if (i) label += ", ";
        label += f.enumValues[i];
      }
      label += "}";
      break;
    }
    case FieldKind::Reference: label = "reference to " + std::string(f.target); break;
    case FieldKind::ReferenceList:
      label = "space-separated references to " + std::string(f.target);
      break;
    case FieldKind::StringList: label = "comma-separated strings"; break;
    case FieldKind::IntegerList: label = "comma-separated integers"; break;
    case FieldKind::ParamMap: label = "<param key=\"...\" value=\"...\"/> children"; break;
  }
  if (f.optional) label += " (optional)";
  return label;
}

}  // namespace

std::vector<StructuralViolation> validate_structure(const ModelInstance& instance) {
  return Validator(instance).run();
}

std::string element_type_of(const ModelInstance& instance, std::string_view id) {
  auto ref = instance.find(id);
  if (!ref) throw Error(ErrorCode::UnknownId, "unknown element id '" + std::string(id) + "'");
  return std::string(type_name(element_type(*ref)));
}

std::string describe_metamodel() {
  std::ostringstream os;
  os << "CarServer metamodel (root element <CarServer xmi:version=\"2.0\">)\n";
  os << "Abstract types: ProcessingNode {ZoneController, CoProcessor}; "
        "Sensor {Camera, LIDAR, RADAR}; SoftwareComponent {ApplicationContainer, "
        "ProcessingTask}\n";
  for (ElementType t : kAllElementTypes) {
    os << "\n" << type_name(t) << "\n";
    for (const FieldInfo& f : fields_of(t)) os << "  " << f.name << ": " << kind_label(f) << "\n";
  }
  return os.str();
}

}  // namespace carserver::metamodel
