#include "generators.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace carserver::testkit {

using namespace metamodel;

namespace {

std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

template <class T, std::size_t N>
T pick(Rng& rng, const T (&items)[N]) {
  return items[static_cast<std::size_t>(uniform(rng, 0, N - 1))];
}

// Printable text that exercises XML escaping. Never contains a comma so it
// can also serve as a list item, and never has surrounding whitespace.
std::string word(Rng& rng) {
  static constexpr char kChars[] = "abcxyzAZ09_-.&<>\"'/:;=#%";
  std::string s;
  const auto len = uniform(rng, 1, 8);
  for (std::int64_t i = 0; i < len; ++i) s += kChars[uniform(rng, 0, sizeof(kChars) - 2)];
  return s;
}

std::string phrase(Rng& rng) {
  std::string s = word(rng);
  for (auto n = uniform(rng, 0, 3); n > 0; --n) s += " " + word(rng);
  return s;
}

std::string maybe_empty(Rng& rng) { return coin(rng, 0.2) ? std::string() : phrase(rng); }

Decimal decimal(Rng& rng, std::int64_t max_units = 10'000) {
  return Decimal::from_raw(uniform(rng, 0, max_units * Decimal::kScale));
}

Decimal positive_decimal(Rng& rng, std::int64_t max_units = 10'000) {
  return Decimal::from_raw(uniform(rng, 1, max_units * Decimal::kScale));
}

ParamMap params(Rng& rng) {
  ParamMap out;
  const auto n = uniform(rng, 0, 3);
  for (std::int64_t i = 0; i < n; ++i)
    out.emplace_back("k" + std::to_string(i) + "_" + word(rng), maybe_empty(rng));
  return out;
}

std::vector<std::string> words(Rng& rng, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(word(rng));
  return out;
}

template <class Map>
std::vector<Id> sample_ids(Rng& rng, const Map& m, double p) {
  std::vector<Id> out;
  for (const auto& [id, _] : m)
    if (coin(rng, p)) out.push_back(id);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

template <class Map>
Id any_id(Rng& rng, const Map& m) {
  auto it = m.begin();
  std::advance(it, uniform(rng, 0, static_cast<std::int64_t>(m.size()) - 1));
  return it->first;
}

template <class Map>
std::optional<Id> maybe_id(Rng& rng, const Map& m) {
  if (m.empty() || coin(rng, 0.3)) return std::nullopt;
  return any_id(rng, m);
}

void fill_node(Rng& rng, ProcessingNode& n) {
  static constexpr Architecture kArch[] = {Architecture::X86, Architecture::ARM, Architecture::GPU,
                                           Architecture::TPU, Architecture::FPGA};
  n.memoryCapacity = uniform(rng, 0, 65'536);
  n.processingPower = uniform(rng, 0, 100'000);
  n.cores = uniform(rng, 1, 64);
  n.maxBandwidth = decimal(rng);
  n.architecture = pick(rng, kArch);
  n.realtimeCapability = coin(rng);
  n.cost = decimal(rng, 500);
  n.powerConsumption = decimal(rng, 300);
}

void fill_sensor(Rng& rng, Sensor& s, const ModelInstance& inst) {
  s.measurementUnit = maybe_empty(rng);
  s.measurementFormat = maybe_empty(rng);
  s.measurementsPerSecond = positive_decimal(rng, 120);
  s.parameterList = params(rng);
  s.controllerId = maybe_id(rng, inst.containers);
  s.cost = decimal(rng, 1'000);
  s.powerConsumption = decimal(rng, 50);
}

void fill_component(Rng& rng, SoftwareComponent& c) {
  c.memoryDemand = uniform(rng, 0, 8'192);
  c.processingDemand = uniform(rng, 0, 10'000);
  c.bandwidthDemand = decimal(rng, 1'000);
  c.realtimeRequired = coin(rng);
}

}  // namespace

std::filesystem::path source_dir() { return CARSERVER_SOURCE_DIR; }
std::filesystem::path data_dir() { return source_dir() / "tests" / "data"; }

std::string read_data(const std::string& name) {
  std::ifstream in(data_dir() / name, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ModelInstance random_instance(Rng& rng) {
  static constexpr Architecture kArch[] = {Architecture::X86, Architecture::ARM, Architecture::GPU,
                                           Architecture::TPU, Architecture::FPGA};
  static constexpr Zone kZones[] = {Zone::FRONT, Zone::REAR, Zone::LEFT, Zone::RIGHT,
                                    Zone::CENTER};
  static constexpr CoProcessorKind kKinds[] = {CoProcessorKind::GPU, CoProcessorKind::TPU,
                                               CoProcessorKind::FPGA};
  static constexpr TargetTechnology kTech[] = {
      TargetTechnology::DOCKER, TargetTechnology::DOCKER_COMPOSE, TargetTechnology::KUBERNETES};

  ModelInstance inst;
  for (auto n = uniform(rng, 0, 4); n > 0; --n) {
    ApplicationContainer c;
    c.id = "app" + std::to_string(inst.containers.size());
    fill_component(rng, c);
    c.image = word(rng);
    c.targetTechnology = pick(rng, kTech);
    c.repository = maybe_empty(rng);
    if (coin(rng)) c.script = word(rng) + ".py";
    if (coin(rng)) c.dependencies = words(rng, static_cast<std::size_t>(uniform(rng, 0, 3)));
    c.architecture = pick(rng, kArch);
    std::set<std::int64_t> ports;
    for (auto k = uniform(rng, 0, 3); k > 0; --k) ports.insert(uniform(rng, 1, 65'535));
    c.communicationPorts.assign(ports.begin(), ports.end());
    std::shuffle(c.communicationPorts.begin(), c.communicationPorts.end(), rng);
    c.environment = params(rng);
    inst.add(c);
  }
  for (auto n = uniform(rng, 0, 3); n > 0; --n) {
    ProcessingTask t;
    t.id = "task" + std::to_string(inst.tasks.size());
    fill_component(rng, t);
    const auto ins = static_cast<std::size_t>(uniform(rng, 0, 3));
    const auto outs = static_cast<std::size_t>(uniform(rng, 0, 3));
    t.inputs = words(rng, ins);
    t.inputFormat = words(rng, ins);
    t.outputs = words(rng, outs);
    t.outputFormat = words(rng, outs);
    t.compatibleFormat = words(rng, static_cast<std::size_t>(uniform(rng, 0, 2)));
    if (coin(rng)) t.architecture = pick(rng, kArch);
    inst.add(t);
  }
  for (auto n = uniform(rng, 1, 3); n > 0; --n) {
    ZoneController z;
    z.id = "zone" + std::to_string(inst.zoneControllers.size());
    fill_node(rng, z);
    z.zone = pick(rng, kZones);
    z.platform = maybe_empty(rng);
    z.containers = sample_ids(rng, inst.containers, 0.4);
    inst.add(z);
  }
  for (auto n = uniform(rng, 0, 2); n > 0; --n) {
    CoProcessor p;
    p.id = "co" + std::to_string(inst.coProcessors.size());
    fill_node(rng, p);
    p.kind = pick(rng, kKinds);
    p.masterId = any_id(rng, inst.zoneControllers);
    inst.add(p);
  }
  for (auto n = uniform(rng, 0, 2); n > 0; --n) {
    Sensor s;
    s.id = "sensor" + std::to_string(inst.sensors.size());
    fill_sensor(rng, s, inst);
    inst.add(s);
  }
  for (auto n = uniform(rng, 0, 3); n > 0; --n) {
    Camera c;
    c.id = "camera" + std::to_string(inst.cameras.size());
    fill_sensor(rng, c, inst);
    c.width = uniform(rng, 1, 8'000);
    c.height = uniform(rng, 1, 8'000);
    c.fov = Decimal::from_raw(uniform(rng, 1, 360 * Decimal::kScale));
    inst.add(c);
  }
  for (auto n = uniform(rng, 0, 2); n > 0; --n) {
    Lidar l;
    l.id = "lidar" + std::to_string(inst.lidars.size());
    fill_sensor(rng, l, inst);
    l.channels = uniform(rng, 1, 128);
    l.range = positive_decimal(rng, 300);
    inst.add(l);
  }
  for (auto n = uniform(rng, 0, 3); n > 0; --n) {
    Radar r;
    r.id = "radar" + std::to_string(inst.radars.size());
    fill_sensor(rng, r, inst);
    r.range = positive_decimal(rng, 300);
    inst.add(r);
  }
  for (auto n = uniform(rng, 0, 2); n > 0; --n) {
    Actuator a;
    a.id = "actuator" + std::to_string(inst.actuators.size());
    a.commandFormat = maybe_empty(rng);
    a.parameters = params(rng);
    a.controllerId = maybe_id(rng, inst.containers);
    a.cost = decimal(rng, 1'000);
    a.powerConsumption = decimal(rng, 50);
    inst.add(a);
  }
  for (auto n = uniform(rng, 0, 3); n > 0; --n) {
    Feature f;
    f.id = "feature" + std::to_string(inst.features.size());
    f.name = word(rng);
    f.safetyCritical = coin(rng);
    f.requirementText = maybe_empty(rng);
    f.containers = sample_ids(rng, inst.containers, 0.5);
    f.cameras = sample_ids(rng, inst.cameras, 0.6);
    f.lidars = sample_ids(rng, inst.lidars, 0.6);
    f.radars = sample_ids(rng, inst.radars, 0.6);
    inst.add(f);
  }
  if (!inst.features.empty()) {
    for (auto n = uniform(rng, 0, 2); n > 0; --n) {
      Scenario s;
      s.id = "scenario" + std::to_string(inst.scenarios.size());
      s.name = maybe_empty(rng);
      s.features = sample_ids(rng, inst.features, 0.7);
      if (s.features.empty()) s.features.push_back(inst.features.begin()->first);
      inst.add(s);
    }
  }
  {
    std::vector<Id> ids;
    for (const auto& ref : inst.elements()) ids.push_back(element_id(ref));
    for (auto n = uniform(rng, 0, 2); n > 0; --n) {
      ConnectionLink l;
      l.id = "link" + std::to_string(inst.links.size());
      l.fromId = ids[static_cast<std::size_t>(uniform(rng, 0, ids.size() - 1))];
      l.toId = ids[static_cast<std::size_t>(uniform(rng, 0, ids.size() - 1))];
      l.protocol = maybe_empty(rng);
      l.connectionType = coin(rng) ? ConnectionType::PHYSICAL : ConnectionType::VIRTUAL;
      l.latency = decimal(rng, 100);
      inst.add(l);
    }
  }
  return inst;
}

allocator::Problem random_problem(Rng& rng, ProblemShape shape) {
  // Small architecture pool so that conflicts happen but are not universal.
  static constexpr Architecture kArch[] = {Architecture::X86, Architecture::X86,
                                           Architecture::ARM, Architecture::GPU};
  allocator::Problem p;
  p.objective =
      coin(rng) ? allocator::Objective::PerAssignmentCost : allocator::Objective::NodeActivationCost;
  p.realtime = coin(rng, 0.3) ? allocator::RealtimeSemantics::ExactMatch
                         : allocator::RealtimeSemantics::RequirementImpliesCapability;
  const auto n = uniform(rng, 1, static_cast<std::int64_t>(shape.maxNodes));
  const auto m = uniform(rng, 1, static_cast<std::int64_t>(shape.maxComponents));
  for (std::int64_t i = 0; i < n; ++i) {
    allocator::Node node;
    node.id = "n" + std::to_string(i);
    node.memoryCapacity = uniform(rng, 4, 16) * 512;
    node.processingPower = uniform(rng, 4, 20) * 100;
    node.maxBandwidth = Decimal::from_units(uniform(rng, 4, 20) * 50);
    node.architecture = pick(rng, kArch);
    node.realtimeCapability = coin(rng, 0.5);
    // Few distinct costs so that ties are common.
    node.cost = Decimal::from_raw(uniform(rng, 0, 6) * Decimal::kScale / 2);
    p.nodes.push_back(node);
  }
  for (std::int64_t j = 0; j < m; ++j) {
    allocator::Component c;
    c.id = "c" + std::to_string(j);
    c.memoryDemand = uniform(rng, 0, 4) * 512;
    c.processingDemand = uniform(rng, 0, 6) * 100;
    c.bandwidthDemand = Decimal::from_units(uniform(rng, 0, 6) * 50);
    c.realtimeRequired = coin(rng, 0.25);
    if (coin(rng, 0.2)) c.architecture = pick(rng, kArch);
    p.components.push_back(c);
  }
  return p;
}

ModelInstance sensor_suite(int cameras, std::int64_t width, std::int64_t height) {
  ModelInstance inst;
  Feature f;
  f.id = "highway-drive";
  f.name = "HighwayDrive";
  for (int i = 1; i <= cameras; ++i) {
    Camera c;
    c.id = "camera" + std::to_string(i);
    c.width = width;
    c.height = height;
    c.fov = Decimal::from_units(90);
    f.cameras.push_back(c.id);
    inst.add(c);
  }
  for (int i = 1; i <= 2; ++i) {
    Lidar l;
    l.id = "lidar" + std::to_string(i);
    l.channels = 64;
    l.range = Decimal::from_units(120);
    f.lidars.push_back(l.id);
    inst.add(l);
  }
  for (int i = 1; i <= 5; ++i) {
    Radar r;
    r.id = "radar" + std::to_string(i);
    r.range = Decimal::from_units(200);
    f.radars.push_back(r.id);
    inst.add(r);
  }
  inst.add(f);
  return inst;
}

}  // namespace carserver::testkit
