#pragma once

// Adversarial raw provider responses for post-processing tests.

#include <string>
#include <vector>

#include "carserver/promptkit.hpp"

namespace carserver::testkit {

struct RawResponse {
  std::string name;
  promptkit::TemplateId kind;
  std::string raw;
  /// Whether a usable artifact is present at all.
  bool expectArtifact;
};

const std::vector<RawResponse>& adversarial_corpus();

/// Validates an extracted artifact with the parser that owns its format.
/// Returns an empty string when valid, otherwise the reason.
std::string artifact_problem(promptkit::TemplateId kind, const std::string& artifact);

}  // namespace carserver::testkit
