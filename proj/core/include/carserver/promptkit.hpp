#pragma once

// Prompt templates, provider execution and response clean-up.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace carserver::promptkit {

enum class TemplateId {
  ModelInstance,
  OclExtraction,
  CarlaParametrize,
  Dockerfile,
  Adapter,
  Deployment,
};

std::string_view to_string(TemplateId id);
/// Accepts the upper-case names (MODEL_INSTANCE, ...); throws UnknownTemplate.
TemplateId parse_template_id(std::string_view name);

struct PromptTemplate {
  TemplateId id;
  std::string_view text;
  /// Placeholder names in order of first appearance.
  std::vector<std::string> requiredParams;
};

const PromptTemplate& get_template(TemplateId id);
const std::vector<TemplateId>& all_templates();

/// `[name]` placeholders in order of first appearance, without duplicates.
std::vector<std::string> placeholders(std::string_view text);

using Params = std::map<std::string, std::string>;

/// Single-pass substitution; values are inserted literally and never
/// rescanned. Throws MissingParam or ExtraParam.
std::string valorize_template(TemplateId id, const Params& params);
std::string valorize_template(std::string_view id, const Params& params);

enum class ProviderKind { Mock, HttpChat };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Mock;
  std::optional<std::string> endpointUrl;
  /// Name of the environment variable holding the API key.
  std::string apiKeyEnvVar = "CARSERVER_API_KEY";
  std::string model = "gpt-4o";
  std::int64_t tokenLimit = 4096;
  std::chrono::milliseconds timeout{60'000};
  /// Extra attempts after a timeout, clamped to 2.
  int maxRetries = 0;

  // Mock provider.
  std::optional<std::filesystem::path> fixtureFile;
  std::map<std::string, std::string> fixtures;
  std::optional<std::string> defaultFixture;
};

struct ProviderResponse {
  std::string raw;
  std::int64_t tokensUsed = 0;
  std::chrono::milliseconds latency{0};
};

/// Lower-case hex SHA-256 of the prompt bytes; mock fixtures are keyed by it.
std::string prompt_hash(std::string_view prompt);

/// YAML map of prompt hash to response text. Throws InvalidConfig.
std::map<std::string, std::string> load_fixtures(const std::filesystem::path& path);

/// Throws InvalidConfig, MissingCredential, ProviderTimeout, ProviderStatus,
/// ProviderResponse or UnknownFixture.
ProviderResponse execute_prompt(std::string_view prompt, const ProviderConfig& config);

/// Extracts the artifact a template is expected to produce from a raw
/// response. Throws Extraction when nothing usable is found. The result is a
/// fixed point: post_process(t, post_process(t, x)) == post_process(t, x).
std::string post_process(TemplateId id, std::string_view raw);

/// Code fences found in `text`, contents only, in order.
std::vector<std::string> fenced_blocks(std::string_view text);

/// True for a text made only of Dockerfile instructions, comments and
/// continuation lines, whose first instruction (after ARG) is FROM.
bool is_dockerfile(std::string_view text);

/// True when `text` loads as a non-empty YAML mapping.
bool is_yaml_mapping(std::string_view text);

}  // namespace carserver::promptkit
