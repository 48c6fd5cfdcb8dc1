#include "carserver/codegen.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include "carserver/error.hpp"
#include "carserver/text.hpp"
#include "carserver/xmi.hpp"

namespace carserver::codegen {

using metamodel::ApplicationContainer;
using metamodel::ModelInstance;
using metamodel::ZoneController;

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          static constexpr char hex[] = "0123456789abcdef";
          out += "\\x";
          out.push_back(hex[c >> 4]);
          out.push_back(hex[c & 0xF]);
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  return out + "\"";
}

std::string key(std::string_view s) {
  static const std::regex plain(R"(^[A-Za-z_][A-Za-z0-9_.\-]*$)");
  static const std::set<std::string> reserved = {"true", "false", "null", "yes", "no",
                                                 "on",   "off",   "y",    "n",   "~"};
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (std::regex_match(lower.begin(), lower.end(), plain) && !reserved.count(lower))
    return std::string(s);
  return quote(s);
}

const ZoneController& zone_of(const ModelInstance& instance, std::string_view zoneId) {
  auto it = instance.zoneControllers.find(std::string(zoneId));
  if (it == instance.zoneControllers.end())
    throw Error(ErrorCode::UnknownZone, "unknown ZoneController '" + std::string(zoneId) + "'");
  return it->second;
}

std::vector<const ApplicationContainer*> zone_containers(const ModelInstance& instance,
                                                         const ZoneController& zone) {
  std::set<std::string> ids(zone.containers.begin(), zone.containers.end());
  std::vector<const ApplicationContainer*> out;
  for (const auto& id : ids) {
    auto it = instance.containers.find(id);
    if (it == instance.containers.end())
      throw Error(ErrorCode::UnknownId,
                  "ZoneController " + zone.id + " references unknown container '" + id + "'");
    if (text::trim(it->second.image).empty())
      throw Error(ErrorCode::EmptyImage, "container " + id + " has an empty image");
    out.push_back(&it->second);
  }
  return out;
}

std::vector<std::int64_t> sorted_ports(const ApplicationContainer& c) {
  std::vector<std::int64_t> ports = c.communicationPorts;
  std::sort(ports.begin(), ports.end());
  ports.erase(std::unique(ports.begin(), ports.end()), ports.end());
  return ports;
}

bool safety_critical(const ModelInstance& instance, const std::string& container_id) {
  for (const auto& [id, f] : instance.features)
    if (f.safetyCritical &&
        std::find(f.containers.begin(), f.containers.end(), container_id) != f.containers.end())
      return true;
  return false;
}

using Properties = std::vector<std::pair<std::string, std::string>>;

void add_param_map(Properties& out, const metamodel::ParamMap& params) {
  for (const auto& [k, v] : params) out.emplace_back(text::upper_snake(k), v);
}

Properties sensor_properties(const metamodel::ElementRef& ref, const metamodel::Sensor& s) {
  Properties p;
  p.emplace_back("MEASUREMENTS_PER_SECOND", s.measurementsPerSecond.to_string());
  if (!s.measurementUnit.empty()) p.emplace_back("MEASUREMENT_UNIT", s.measurementUnit);
  if (!s.measurementFormat.empty()) p.emplace_back("MEASUREMENT_FORMAT", s.measurementFormat);
  if (const auto* cam = std::get_if<const metamodel::Camera*>(&ref)) {
    p.emplace_back("WIDTH", std::to_string((*cam)->width));
    p.emplace_back("HEIGHT", std::to_string((*cam)->height));
    p.emplace_back("FOV", (*cam)->fov.to_string());
  } else if (const auto* lidar = std::get_if<const metamodel::Lidar*>(&ref)) {
    p.emplace_back("CHANNELS", std::to_string((*lidar)->channels));
    p.emplace_back("RANGE", (*lidar)->range.to_string());
  } else if (const auto* radar = std::get_if<const metamodel::Radar*>(&ref)) {
    p.emplace_back("RANGE", (*radar)->range.to_string());
  }
  add_param_map(p, s.parameterList);
  return p;
}

std::string indent(int n) { return std::string(static_cast<std::size_t>(n), ' '); }

// ---------------------------------------------------------------------------
// Adapters

struct BuiltinAdapter {
  std::string_view source;
  std::string_view target;
  std::string_view body;
};

constexpr std::string_view kIdentityAdapter = R"(def convert(data):
    return data
)";

constexpr std::string_view kChannelSwapAdapter = R"(import numpy as np


def convert(frame: np.ndarray) -> np.ndarray:
    """Reverse the channel order of an H x W x 3 frame."""
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError("expected an H x W x 3 array")
    return np.ascontiguousarray(frame[:, :, ::-1])
)";

constexpr std::string_view kCsvToJsonAdapter = R"(import csv
import io
import json


def convert(text: str) -> str:
    """Map CSV rows to a JSON array of objects keyed by the header row."""
    reader = csv.DictReader(io.StringIO(text))
    return json.dumps([dict(row) for row in reader])
)";

constexpr BuiltinAdapter kAdapters[] = {
    {"RGB", "BGR", kChannelSwapAdapter},
    {"BGR", "RGB", kChannelSwapAdapter},
    {"CSV", "JSON", kCsvToJsonAdapter},
};

std::string upper(std::string_view s) {
  std::string out(text::trim(s));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

// ---------------------------------------------------------------------------
// Interfaces

constexpr std::string_view kZoneControllerIdl = R"(interface ZoneController{
    void scheduleTask(String containerId);
    void freeResource(String containerId);
    void attachDevice(String deviceId);
    void detachDevice(String deviceId);
}
)";

constexpr std::string_view kCoProcessorIdl = R"(interface CoProcessor{
    void powerSavingMode();
}
)";

constexpr std::string_view kSensorControllerIdl = R"(interface SensorController{
    void startMeasuring(double measurementsPerSecond, Map parameters);
    void stopMeasuring();
    List getMeasurements(double allowedLatency);
}
)";

constexpr std::string_view kActuatorControllerIdl = R"(interface ActuatorController{
    void turnOn();
    void turnOff();
    void executeCommand(String protocol, Map parameters, String template, double allowedLatency);
}
)";

constexpr std::string_view kProcessingTaskIdl = R"(interface ProcessingTask{
    List process(List inputs, List inputFormat, List compatibleFormat, List outputFormat, double allowedLatency);
}
)";

std::vector<std::string> lines_of(std::string_view s) {
  auto lines = text::split(s, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string_view to_string(DeploymentTarget t) {
  return t == DeploymentTarget::DockerCompose ? "compose" : "k8s";
}

std::map<std::string, std::string> container_environment(const ModelInstance& instance,
                                                         const ApplicationContainer& container) {
  struct Bound {
    std::string id;
    Properties props;
  };
  std::vector<Bound> devices;
  for (const auto& ref : instance.elements_of(metamodel::kSensor)) {
    const auto* s = std::visit(
        [](const auto* e) -> const metamodel::Sensor* {
          if constexpr (std::is_base_of_v<metamodel::Sensor,
                                          std::remove_cv_t<std::remove_pointer_t<decltype(e)>>>)
            return e;
          else
            return nullptr;
        },
        ref);
    if (s && s->controllerId == container.id) devices.push_back({s->id, sensor_properties(ref, *s)});
  }
  for (const auto& [id, a] : instance.actuators) {
    if (a.controllerId != container.id) continue;
    Properties p;
    if (!a.commandFormat.empty()) p.emplace_back("COMMAND_FORMAT", a.commandFormat);
    add_param_map(p, a.parameters);
    devices.push_back({a.id, std::move(p)});
  }
  std::sort(devices.begin(), devices.end(),
            [](const Bound& a, const Bound& b) { return a.id < b.id; });

  std::map<std::string, std::string> env;
  const bool prefix = devices.size() > 1;
  for (const auto& d : devices)
    for (const auto& [k, v] : d.props)
      env[prefix ? text::upper_snake(d.id) + "_" + k : k] = v;
  for (const auto& [k, v] : container.environment) env[k] = v;
  return env;
}

std::string generate_compose(const ModelInstance& instance, std::string_view zoneId) {
  const auto containers = zone_containers(instance, zone_of(instance, zoneId));
  if (containers.empty()) return "services: {}\n";
  std::ostringstream os;
  os << "services:\n";
  for (const auto* c : containers) {
    os << indent(2) << key(c->id) << ":\n";
    os << indent(4) << "image: " << quote(c->image) << "\n";
    const auto ports = sorted_ports(*c);
    if (!ports.empty()) {
      os << indent(4) << "ports:\n";
      for (auto p : ports) os << indent(6) << "- \"" << p << ":" << p << "\"\n";
    }
    const auto env = container_environment(instance, *c);
    if (!env.empty()) {
      os << indent(4) << "environment:\n";
      for (const auto& [k, v] : env) os << indent(6) << key(k) << ": " << quote(v) << "\n";
    }
  }
  return os.str();
}

std::string generate_k8s(const ModelInstance& instance, std::string_view zoneId) {
  const auto containers = zone_containers(instance, zone_of(instance, zoneId));
  std::ostringstream os;
  bool first = true;
  for (const auto* c : containers) {
    const auto ports = sorted_ports(*c);
    const auto env = container_environment(instance, *c);
    const std::string name = quote(c->id);
    if (!first) os << "---\n";
    first = false;
    os << "apiVersion: apps/v1\n"
       << "kind: Deployment\n"
       << "metadata:\n"
       << "  name: " << name << "\n"
       << "  labels:\n"
       << "    app: " << name << "\n"
       << "    zone: " << quote(zoneId) << "\n"
       << "spec:\n"
       << "  replicas: " << (safety_critical(instance, c->id) ? 2 : 1) << "\n"
       << "  selector:\n"
       << "    matchLabels:\n"
       << "      app: " << name << "\n"
       << "  template:\n"
       << "    metadata:\n"
       << "      labels:\n"
       << "        app: " << name << "\n"
       << "    spec:\n"
       << "      containers:\n"
       << "        - name: " << name << "\n"
       << "          image: " << quote(c->image) << "\n";
    if (!ports.empty()) {
      os << "          ports:\n";
      for (auto p : ports) os << "            - containerPort: " << p << "\n";
    }
    if (!env.empty()) {
      os << "          env:\n";
      for (const auto& [k, v] : env)
        os << "            - name: " << quote(k) << "\n"
           << "              value: " << quote(v) << "\n";
    }
    os << "---\n"
       << "apiVersion: v1\n"
       << "kind: Service\n"
       << "metadata:\n"
       << "  name: " << name << "\n"
       << "spec:\n"
       << "  selector:\n"
       << "    app: " << name << "\n";
    if (ports.empty()) {
      os << "  clusterIP: None\n";
    } else {
      os << "  ports:\n";
      for (auto p : ports)
        os << "    - name: \"p" << p << "\"\n"
           << "      port: " << p << "\n"
           << "      targetPort: " << p << "\n";
    }
  }
  return os.str();
}

DeploymentDescriptor generate_deployment(const ModelInstance& instance, DeploymentTarget target) {
  DeploymentDescriptor d;
  d.target = target;
  for (const auto& [id, zone] : instance.zoneControllers)
    d.perZone[id] = target == DeploymentTarget::DockerCompose ? generate_compose(instance, id)
                                                              : generate_k8s(instance, id);
  return d;
}

std::string generate_dockerfile(const ApplicationContainer& c) {
  if (!c.script || text::trim(*c.script).empty())
    throw Error(ErrorCode::MissingField, "container " + c.id + " has no script");
  if (!c.dependencies)
    throw Error(ErrorCode::MissingField, "container " + c.id + " has no dependencies");
  const std::string& script = *c.script;
  const std::string file = std::filesystem::path(script).filename().string();
  const std::string ext = std::filesystem::path(script).extension().string();

  std::string base;
  std::string install;
  std::string entry;
  const std::string deps = text::join(*c.dependencies, " ");
  if (ext == ".py") {
    base = "python:3.11-slim";
    install = "pip install --no-cache-dir " + deps;
    entry = R"(["python", "/app/)" + file + "\"]";
  } else if (ext == ".js" || ext == ".mjs") {
    base = "node:20-slim";
    install = "npm install --omit=dev " + deps;
    entry = R"(["node", "/app/)" + file + "\"]";
  } else {
    base = "debian:bookworm-slim";
    install = "apt-get update && apt-get install -y --no-install-recommends " + deps +
              " && rm -rf /var/lib/apt/lists/*";
    entry = R"(["/app/)" + file + "\"]";
  }

  std::ostringstream os;
  os << "FROM " << base << "\n";
  os << "WORKDIR /app\n";
  if (!c.dependencies->empty()) os << "RUN " << install << "\n";
  os << "COPY " << script << " /app/" << file << "\n";
  for (auto p : sorted_ports(c)) os << "EXPOSE " << p << "\n";
  os << "ENTRYPOINT " << entry << "\n";
  return os.str();
}

std::string parametrize_carla(const ModelInstance& instance, const CodeTemplate& t) {
  if (t.kind != CodeTemplateKind::CarlaScript)
    throw Error(ErrorCode::InvalidArgument, "template " + t.id + " is not a CARLA script template");
  static const std::regex re(R"(\[([A-Za-z_][\w\-]*)\.([A-Za-z_]\w*)(?::(number|string))?\])");
  std::string out;
  std::vector<std::string> unresolved;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(t.text.begin(), t.text.end(), re);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(t.text, last, static_cast<std::size_t>(m.position(0)) - last);
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
    std::string element = m[1].str();
    if (auto alias = t.aliases.find(element); alias != t.aliases.end()) element = alias->second;
    std::string value;
    try {
      value = xmi::get_attribute(instance, element, m[2].str());
    } catch (const Error&) {
      unresolved.push_back(m[0].str());
      continue;
    }
    if (m[3].matched && m[3].str() == "number") {
      std::string_view digits = value;
      if (!digits.empty() && digits[0] == '-') digits.remove_prefix(1);
      if (!Decimal::parse(digits))
        throw Error(ErrorCode::TypeMismatch, "placeholder " + m[0].str() + " expects a number, got '" +
                                                 value + "'");
    }
    out += value;
  }
  out.append(t.text, last, std::string::npos);
  if (!unresolved.empty())
    throw Error(ErrorCode::UnresolvedPlaceholder,
                "unresolved placeholders in " + t.id + ": " + text::join(unresolved, ", "));
  return out;
}

std::string generate_adapter(std::string_view sourceFormat, std::string_view targetFormat,
                             AdapterMode mode, const promptkit::ProviderConfig* config,
                             std::string_view language) {
  const std::string src = upper(sourceFormat);
  const std::string dst = upper(targetFormat);
  if (mode == AdapterMode::Llm) {
    if (!config) throw Error(ErrorCode::InvalidConfig, "LLM adapter generation needs a provider");
    const std::string prompt = promptkit::valorize_template(
        promptkit::TemplateId::Adapter,
        {{"language", std::string(language)}, {"source", src}, {"target", dst}});
    const auto response = promptkit::execute_prompt(prompt, *config);
    return promptkit::post_process(promptkit::TemplateId::Adapter, response.raw) + "\n";
  }
  if (upper(language) != "PYTHON")
    throw Error(ErrorCode::UnsupportedPair,
                "builtin adapters are Python only, requested " + std::string(language));
  if (src.empty() || dst.empty())
    throw Error(ErrorCode::UnsupportedPair, "adapter formats must be non-empty");
  std::string header = "\"\"\"Adapter " + src + " -> " + dst + ".\"\"\"\n\n\n";
  if (src == dst) return header + std::string(kIdentityAdapter);
  for (const auto& a : kAdapters)
    if (a.source == src && a.target == dst) return header + std::string(a.body);
  throw Error(ErrorCode::UnsupportedPair, "no builtin adapter from " + src + " to " + dst);
}

std::string emit_interfaces(const ModelInstance& instance) {
  std::vector<std::string_view> blocks;
  if (!instance.zoneControllers.empty()) blocks.push_back(kZoneControllerIdl);
  if (!instance.coProcessors.empty()) blocks.push_back(kCoProcessorIdl);
  if (!instance.all_sensors().empty()) blocks.push_back(kSensorControllerIdl);
  if (!instance.actuators.empty()) blocks.push_back(kActuatorControllerIdl);
  if (!instance.tasks.empty()) blocks.push_back(kProcessingTaskIdl);
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n";
    out += blocks[i];
  }
  return out;
}

std::string deployment_prompt_lines(const ModelInstance& instance, std::string_view zoneId) {
  const auto& zone = zone_of(instance, zoneId);
  std::ostringstream os;
  for (const auto* c : zone_containers(instance, zone)) {
    std::vector<std::string> ports;
    for (auto p : sorted_ports(*c)) ports.push_back(std::to_string(p));
    std::vector<std::string> env;
    for (const auto& [k, v] : container_environment(instance, *c)) env.push_back(k + "=" + v);
    os << c->image << " on " << zone.id << " open port "
       << (ports.empty() ? "none" : text::join(ports, ",")) << " with environment variables "
       << (env.empty() ? "none" : text::join(env, ",")) << "\n";
  }
  return os.str();
}

std::string line_diff(std::string_view expected, std::string_view actual) {
  const auto a = lines_of(expected);
  const auto b = lines_of(actual);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  std::ostringstream os;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      os << "  " << a[i++] << "\n";
      ++j;
    } else if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
      os << "+ " << b[j++] << "\n";
    } else {
      os << "- " << a[i++] << "\n";
    }
  }
  return os.str();
}

void validate_llm_deployment(const ModelInstance& instance, std::string_view zoneId,
                             DeploymentTarget target, std::string_view candidate) {
  const auto& zone = zone_of(instance, zoneId);
  const std::string expected = target == DeploymentTarget::DockerCompose
                                   ? generate_compose(instance, zoneId)
                                   : generate_k8s(instance, zoneId);
  std::vector<std::string> problems;
  if (!promptkit::is_yaml_mapping(candidate)) problems.push_back("not a YAML mapping");
  for (const auto* c : zone_containers(instance, zone)) {
    const std::regex token("(^|[^A-Za-z0-9_.\\-])" +
                           std::regex_replace(c->id, std::regex(R"([.^$|()\[\]{}*+?\\\-])"),
                                              R"(\$&)") +
                           "($|[^A-Za-z0-9_.\\-])");
    if (!std::regex_search(candidate.begin(), candidate.end(), token))
      problems.push_back("container " + c->id + " is missing");
  }
  if (problems.empty()) return;
  throw Error(ErrorCode::Rejected, "generated deployment for zone " + zone.id + " rejected (" +
                                       text::join(problems, "; ") + ")\n" +
                                       line_diff(expected, candidate));
}

std::string generate_deployment_llm(const ModelInstance& instance, std::string_view zoneId,
                                    DeploymentTarget target,
                                    const promptkit::ProviderConfig& config,
                                    std::string_view instanceText) {
  const std::string descriptor = target == DeploymentTarget::DockerCompose
                                     ? "Docker Compose file"
                                     : "Kubernetes descriptor (a single YAML document of kind List)";
  const std::string prompt = promptkit::valorize_template(
      promptkit::TemplateId::Deployment, {{"descriptor", descriptor},
                                          {"containers", deployment_prompt_lines(instance, zoneId)},
                                          {"instance", std::string(instanceText)}});
  const auto response = promptkit::execute_prompt(prompt, config);
  std::string doc = promptkit::post_process(promptkit::TemplateId::Deployment, response.raw);
  validate_llm_deployment(instance, zoneId, target, doc);
  return doc + "\n";
}

}  // namespace carserver::codegen
