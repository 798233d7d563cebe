#pragma once

#include "llm4cap/pipeline/pipeline.hpp"

#include <filesystem>
#include <string>

namespace llm4cap::config {

/// "openai" | "anthropic" | "replay" (case-sensitive).
llm::ProviderKind provider_kind_from_string(const std::string& name);
std::string to_string(llm::ProviderKind kind);

/// Reads a JSON file holding PipelineConfig fields. Relative paths are
/// resolved against the config file's directory. Unknown keys are rejected;
/// literal API keys are refused — only apiKeyEnvVar is accepted.
pipeline::PipelineConfig load_pipeline_config_file(const std::filesystem::path& path);

/// Same field rules, applied to an already-parsed JSON object serialized as
/// text (used by callers that embed the pipeline object in a larger file).
pipeline::PipelineConfig pipeline_config_from_json_text(const std::string& jsonText,
                                                        const std::filesystem::path& baseDir);

} // namespace llm4cap::config
