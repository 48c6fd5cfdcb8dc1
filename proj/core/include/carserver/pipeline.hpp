#pragma once

// Requirement-to-deployment run: model instance and constraint prompts,
// verification, allocation and descriptor generation. Every intermediate
// artifact is written to the output directory.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carserver/allocator.hpp"
#include "carserver/codegen.hpp"
#include "carserver/metamodel.hpp"
#include "carserver/promptkit.hpp"

namespace carserver::pipeline {

inline constexpr std::string_view kNotCompliant = "Requirement not compliant with standard";

enum class GenerationMode { RuleBased, Llm };

struct PipelineConfig {
  promptkit::ProviderConfig provider;
  std::filesystem::path metamodelDoc;
  std::filesystem::path standardDoc;
  std::filesystem::path outputDir = "out";
  allocator::Objective objective = allocator::Objective::PerAssignmentCost;
  allocator::RealtimeSemantics realtime = allocator::RealtimeSemantics::ExactMatch;
  GenerationMode generation = GenerationMode::RuleBased;
  codegen::DeploymentTarget target = codegen::DeploymentTarget::DockerCompose;
};

/// Applies one `key=value` setting. Relative paths resolve against `base`.
/// Throws InvalidConfig for unknown keys or bad values.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base);

/// Reads `key=value` lines (`#` comments, blank lines ignored).
PipelineConfig load_config(const std::filesystem::path& path);

enum class Stage { Setup, ModelInstance, Constraints, Verify, Allocate, Generate };
std::string_view to_string(Stage s);

struct PipelineResult {
  /// 0 success, 1 stage error, 2 verification or feasibility failure.
  int exitCode = 0;
  std::optional<Stage> failedStage;
  /// Text for the user; exactly kNotCompliant when verification fails.
  std::string message;
  /// Files written, relative to the output directory, in write order.
  std::vector<std::string> written;
};

PipelineResult run_pipeline(std::string_view requirement, const PipelineConfig& config);

/// Copy of `instance` where each ZoneController hosts exactly the containers
/// the allocation placed on it or on one of its CoProcessors.
metamodel::ModelInstance apply_allocation(const metamodel::ModelInstance& instance,
                                          const allocator::Problem& problem,
                                          const allocator::Allocation& allocation);

}  // namespace carserver::pipeline
