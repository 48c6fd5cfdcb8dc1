#pragma once

// Centralized car server domain model: processing nodes, sensors, actuators,
// software components, features and scenarios.
//
// Units: memory in mebibytes, bandwidth in megabits/s, power in watts,
// latency in milliseconds, processing power in abstract compute units.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "carserver/decimal.hpp"

namespace carserver::metamodel {

using Id = std::string;
/// Ordered key/value pairs. Keys are expected to be unique; duplicates are a
/// structural violation rather than unrepresentable.
using ParamMap = std::vector<std::pair<std::string, std::string>>;

enum class Architecture { X86, ARM, GPU, TPU, FPGA };
enum class Zone { FRONT, REAR, LEFT, RIGHT, CENTER };
enum class CoProcessorKind { GPU, TPU, FPGA };
enum class TargetTechnology { DOCKER, DOCKER_COMPOSE, KUBERNETES };
enum class ConnectionType { PHYSICAL, VIRTUAL };

std::string_view to_string(Architecture v);
std::string_view to_string(Zone v);
std::string_view to_string(CoProcessorKind v);
std::string_view to_string(TargetTechnology v);
std::string_view to_string(ConnectionType v);

std::optional<Architecture> parse_architecture(std::string_view s);
std::optional<Zone> parse_zone(std::string_view s);
std::optional<CoProcessorKind> parse_coprocessor_kind(std::string_view s);
std::optional<TargetTechnology> parse_target_technology(std::string_view s);
std::optional<ConnectionType> parse_connection_type(std::string_view s);

struct ProcessingNode {
  Id id;
  std::int64_t memoryCapacity = 0;
  std::int64_t processingPower = 0;
  std::int64_t cores = 1;
  Decimal maxBandwidth;
  Architecture architecture = Architecture::X86;
  bool realtimeCapability = false;
  Decimal cost;
  Decimal powerConsumption;

  bool operator==(const ProcessingNode&) const = default;
};

/// Master node responsible for one region of the vehicle.
struct ZoneController : ProcessingNode {
  Zone zone = Zone::FRONT;
  std::string platform;
  std::vector<Id> containers;

  bool operator==(const ZoneController&) const = default;
};

/// Slave node (GPU/TPU/FPGA) attached to a master.
struct CoProcessor : ProcessingNode {
  CoProcessorKind kind = CoProcessorKind::GPU;
  Id masterId;

  bool operator==(const CoProcessor&) const = default;
};

struct Sensor {
  Id id;
  std::string measurementUnit;
  std::string measurementFormat;
  Decimal measurementsPerSecond = Decimal::from_units(1);
  ParamMap parameterList;
  std::optional<Id> controllerId;
  Decimal cost;
  Decimal powerConsumption;

  bool operator==(const Sensor&) const = default;
};

struct Camera : Sensor {
  std::int64_t width = 0;
  std::int64_t height = 0;
  Decimal fov;

  bool operator==(const Camera&) const = default;
};

struct Lidar : Sensor {
  std::int64_t channels = 0;
  Decimal range;

  bool operator==(const Lidar&) const = default;
};

struct Radar : Sensor {
  Decimal range;

  bool operator==(const Radar&) const = default;
};

struct Actuator {
  Id id;
  std::string commandFormat;
  ParamMap parameters;
  std::optional<Id> controllerId;
  Decimal cost;
  Decimal powerConsumption;

  bool operator==(const Actuator&) const = default;
};

struct SoftwareComponent {
  Id id;
  std::int64_t memoryDemand = 0;
  std::int64_t processingDemand = 0;
  Decimal bandwidthDemand;
  bool realtimeRequired = false;

  bool operator==(const SoftwareComponent&) const = default;
};

struct ApplicationContainer : SoftwareComponent {
  std::string image;
  TargetTechnology targetTechnology = TargetTechnology::DOCKER_COMPOSE;
  std::string repository;
  std::optional<std::string> script;
  std::optional<std::vector<std::string>> dependencies;
  Architecture architecture = Architecture::X86;
  std::vector<std::int64_t> communicationPorts;
  ParamMap environment;

  bool operator==(const ApplicationContainer&) const = default;
};

struct ProcessingTask : SoftwareComponent {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> inputFormat;
  std::vector<std::string> outputFormat;
  std::vector<std::string> compatibleFormat;
  /// Absent means the task can run on any node architecture.
  std::optional<Architecture> architecture;

  bool operator==(const ProcessingTask&) const = default;
};

struct ConnectionLink {
  Id id;
  Id fromId;
  Id toId;
  std::string protocol;
  ConnectionType connectionType = ConnectionType::VIRTUAL;
  Decimal latency;

  bool operator==(const ConnectionLink&) const = default;
};

struct Feature {
  Id id;
  std::string name;
  bool safetyCritical = false;
  std::string requirementText;
  std::vector<Id> containers;
  std::vector<Id> cameras;
  std::vector<Id> lidars;
  std::vector<Id> radars;

  bool operator==(const Feature&) const = default;
};

struct Scenario {
  Id id;
  std::string name;
  std::vector<Id> features;

  bool operator==(const Scenario&) const = default;
};

/// Most specific element types, in canonical document order.
enum class ElementType {
  Scenario,
  Feature,
  ZoneController,
  CoProcessor,
  Sensor,
  Camera,
  Lidar,
  Radar,
  Actuator,
  ApplicationContainer,
  ProcessingTask,
  ConnectionLink,
};

inline constexpr ElementType kAllElementTypes[] = {
    ElementType::Scenario,    ElementType::Feature,        ElementType::ZoneController,
    ElementType::CoProcessor, ElementType::Sensor,         ElementType::Camera,
    ElementType::Lidar,       ElementType::Radar,          ElementType::Actuator,
    ElementType::ApplicationContainer, ElementType::ProcessingTask, ElementType::ConnectionLink,
};

/// Metamodel name ("LIDAR", "ZoneController", ...).
std::string_view type_name(ElementType t);
std::optional<ElementType> parse_element_type(std::string_view name);

/// Abstract categories usable as OCL contexts and reference targets.
inline constexpr std::string_view kProcessingNode = "ProcessingNode";
inline constexpr std::string_view kSoftwareComponent = "SoftwareComponent";
inline constexpr std::string_view kSensor = "Sensor";
inline constexpr std::string_view kAnyElement = "Element";

/// True when `type` equals `category` or specializes it
/// (e.g. Camera conforms to Sensor, ZoneController to ProcessingNode).
bool conforms_to(ElementType type, std::string_view category);
/// Known concrete or abstract type name.
bool is_known_type(std::string_view name);

using ElementRef =
    std::variant<const Scenario*, const Feature*, const ZoneController*, const CoProcessor*,
                 const Sensor*, const Camera*, const Lidar*, const Radar*, const Actuator*,
                 const ApplicationContainer*, const ProcessingTask*, const ConnectionLink*>;

ElementType element_type(const ElementRef& ref);
const Id& element_id(const ElementRef& ref);

class ModelInstance {
 public:
  std::map<Id, Scenario> scenarios;
  std::map<Id, Feature> features;
  std::map<Id, ZoneController> zoneControllers;
  std::map<Id, CoProcessor> coProcessors;
  std::map<Id, Sensor> sensors;
  std::map<Id, Camera> cameras;
  std::map<Id, Lidar> lidars;
  std::map<Id, Radar> radars;
  std::map<Id, Actuator> actuators;
  std::map<Id, ApplicationContainer> containers;
  std::map<Id, ProcessingTask> tasks;
  std::map<Id, ConnectionLink> links;

  bool operator==(const ModelInstance&) const = default;

  // Convenience inserters keyed by the element's own id.
  void add(Scenario v) { scenarios.insert_or_assign(v.id, std::move(v)); }
  void add(Feature v) { features.insert_or_assign(v.id, std::move(v)); }
  void add(ZoneController v) { zoneControllers.insert_or_assign(v.id, std::move(v)); }
  void add(CoProcessor v) { coProcessors.insert_or_assign(v.id, std::move(v)); }
  void add(Sensor v) { sensors.insert_or_assign(v.id, std::move(v)); }
  void add(Camera v) { cameras.insert_or_assign(v.id, std::move(v)); }
  void add(Lidar v) { lidars.insert_or_assign(v.id, std::move(v)); }
  void add(Radar v) { radars.insert_or_assign(v.id, std::move(v)); }
  void add(Actuator v) { actuators.insert_or_assign(v.id, std::move(v)); }
  void add(ApplicationContainer v) { containers.insert_or_assign(v.id, std::move(v)); }
  void add(ProcessingTask v) { tasks.insert_or_assign(v.id, std::move(v)); }
  void add(ConnectionLink v) { links.insert_or_assign(v.id, std::move(v)); }

  /// Every element, ordered by type (ElementType order) then id.
  std::vector<ElementRef> elements() const;
  /// Elements whose type conforms to `category` (concrete or abstract name).
  std::vector<ElementRef> elements_of(std::string_view category) const;
  /// First element with this id, searching types in canonical order.
  std::optional<ElementRef> find(std::string_view id) const;

  /// Sensor view across Sensor/Camera/LIDAR/RADAR, ordered by type then id.
  std::vector<const Sensor*> all_sensors() const;
  /// Node view across ZoneController/CoProcessor, ordered by type then id.
  std::vector<const ProcessingNode*> all_nodes() const;

  std::size_t size() const;
  bool empty() const { return size() == 0; }
};

enum class ViolationKind {
  Identity,   // missing, malformed or duplicate id
  Reference,  // dangling or wrongly typed cross-reference
  Domain,     // value outside its representable domain (negative quantity, bad port)
  Range,      // semantic bound such as width > 0
  Shape,      // structural shape: list lengths, duplicate keys, empty image
};

struct StructuralViolation {
  Id elementId;
  std::string field;  // empty when the violation concerns the whole element
  ViolationKind kind;
  std::string message;

  bool operator==(const StructuralViolation&) const = default;
};

/// Reports every broken structural invariant. Empty result means the
/// instance is structurally valid.
std::vector<StructuralViolation> validate_structure(const ModelInstance& instance);

/// Most specific type name of the element with `id`; throws UnknownId.
std::string element_type_of(const ModelInstance& instance, std::string_view id);

/// Plain-text description of every element type and field, suitable for
/// inlining into prompts.
std::string describe_metamodel();

}  // namespace carserver::metamodel
