#pragma once

// Rule-based artifact generators: deployment descriptors, Dockerfiles,
// parametrized simulator scripts, format adapters and IDL interfaces.
// Output is LF-terminated and byte-stable for a given input.

#include <map>
#include <string>
#include <string_view>

#include "carserver/metamodel.hpp"
#include "carserver/promptkit.hpp"

namespace carserver::codegen {

enum class DeploymentTarget { DockerCompose, Kubernetes };
std::string_view to_string(DeploymentTarget t);

struct DeploymentDescriptor {
  DeploymentTarget target = DeploymentTarget::DockerCompose;
  /// ZoneController id -> document text.
  std::map<std::string, std::string> perZone;
};

/// Environment of a container: its own entries plus properties of every
/// Sensor/Actuator bound to it, upper-snake-cased and sorted by key. Device
/// keys get a `<DEVICE_ID>_` prefix when more than one device is bound.
/// The container's own entries win on key collisions.
std::map<std::string, std::string> container_environment(
    const metamodel::ModelInstance& instance, const metamodel::ApplicationContainer& container);

/// Throws UnknownZone, UnknownId (dangling container) or EmptyImage.
std::string generate_compose(const metamodel::ModelInstance& instance, std::string_view zoneId);
std::string generate_k8s(const metamodel::ModelInstance& instance, std::string_view zoneId);
DeploymentDescriptor generate_deployment(const metamodel::ModelInstance& instance,
                                         DeploymentTarget target);

/// Throws MissingField when script or dependencies are absent.
std::string generate_dockerfile(const metamodel::ApplicationContainer& container);

enum class CodeTemplateKind { CarlaScript, Dockerfile, Adapter };

struct CodeTemplate {
  std::string id;
  std::string text;
  CodeTemplateKind kind = CodeTemplateKind::CarlaScript;
  /// Placeholder prefix -> element id, e.g. "camera" -> "camera1".
  std::map<std::string, std::string> aliases;
};

/// Substitutes `[element.attribute]` and `[element.attribute:number]`
/// placeholders with xmi::get_attribute values. Throws UnresolvedPlaceholder
/// listing every unresolved placeholder, or TypeMismatch when a `:number`
/// slot receives a non-numeric value.
std::string parametrize_carla(const metamodel::ModelInstance& instance,
                              const CodeTemplate& code_template);

enum class AdapterMode { Builtin, Llm };

/// Builtin pairs: X->X, RGB<->BGR, CSV->JSON (Python). Throws
/// UnsupportedPair. Llm mode needs `config` and returns the post-processed
/// provider output.
std::string generate_adapter(std::string_view sourceFormat, std::string_view targetFormat,
                             AdapterMode mode, const promptkit::ProviderConfig* config = nullptr,
                             std::string_view language = "Python");

std::string emit_interfaces(const metamodel::ModelInstance& instance);

/// Per-container lines for the deployment prompt of one zone.
std::string deployment_prompt_lines(const metamodel::ModelInstance& instance,
                                    std::string_view zoneId);

/// Checks an LLM deployment document: it must be a YAML mapping and mention
/// every container id of the zone. Throws Rejected with a line diff against
/// the rule-based document otherwise.
void validate_llm_deployment(const metamodel::ModelInstance& instance, std::string_view zoneId,
                             DeploymentTarget target, std::string_view candidate);

/// Builds the deployment prompt for one zone, executes it and validates the
/// post-processed result.
std::string generate_deployment_llm(const metamodel::ModelInstance& instance,
                                    std::string_view zoneId, DeploymentTarget target,
                                    const promptkit::ProviderConfig& config,
                                    std::string_view instanceText);

/// Line diff: "  " common, "- " only in `expected`, "+ " only in `actual`.
std::string line_diff(std::string_view expected, std::string_view actual);

}  // namespace carserver::codegen
