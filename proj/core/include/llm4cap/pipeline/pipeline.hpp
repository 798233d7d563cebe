#pragma once

#include "llm4cap/llm/client.hpp"
#include "llm4cap/prompt/prompt.hpp"
#include "llm4cap/rdf/graph.hpp"
#include "llm4cap/shacl/validator.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace llm4cap::pipeline {

struct PipelineConfig {
    std::filesystem::path templateDir;
    std::filesystem::path shapesFile;
    std::filesystem::path schemaFile; // context ontology, reused as reasoning schema
    llm::ProviderConfig provider;
    int maxRepeatPerStep = 1;
    int closureTripleCap = 1'000'000;
};

enum class Step { Syntax, Reasoning, Shacl };

std::string to_string(Step step); // "Syntax" | "Reasoning" | "SHACL"

struct StepOutcome {
    Step step;
    bool passed = false;
    std::string diagnosticsText; // empty iff passed
    int attemptIndex = 0;
};

struct AttemptRecord {
    std::string promptDigest; // sha256 of the prompt text sent for this attempt
    std::string rawResponse;
    std::string extractedOntology;
    bool extractedFromFence = false;
    std::string startedAt; // ISO-8601 UTC
    std::vector<StepOutcome> stepOutcomes;
};

enum class PipelineStatus { Verified, NeedsManualReview, ProviderError };

std::string to_string(PipelineStatus status);

struct PipelineTrace {
    std::vector<AttemptRecord> attempts; // one per LLM completion issued
    PipelineStatus finalStatus = PipelineStatus::ProviderError;
    std::optional<Step> failureStep;
    int totalLatencyMs = 0;
    std::string startedAt;
    std::string finishedAt;
};

struct PipelineResult {
    PipelineStatus status = PipelineStatus::ProviderError;
    /// Present when Verified; best-effort last parseable ontology when
    /// NeedsManualReview.
    std::optional<rdf::Graph> ontology;
    std::string ontologyText; // deterministic serialization of `ontology`
    std::string report;       // human-readable summary
    PipelineTrace trace;
};

/// Invalid configuration: missing or non-parsing template, schema or shapes
/// file, bad limits. Raised at construction, before any model call.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trace_to_json(const PipelineTrace& trace);

class Pipeline {
public:
    /// Loads and validates template, schema and shapes up front.
    explicit Pipeline(PipelineConfig config, llm::LlmClient::Sleeper sleeper = nullptr);
    ~Pipeline();
    Pipeline(Pipeline&&) noexcept;
    Pipeline& operator=(Pipeline&&) noexcept;

    /// Generate-and-verify loop: prompt → model → extract → syntax → reasoning
    /// → SHACL, back-prompting on failure and restarting verification from the
    /// syntax step on each repaired ontology. A step that fails more than
    /// maxRepeatPerStep times ends the run as NeedsManualReview.
    PipelineResult run(const std::string& description);

    const PipelineConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace llm4cap::pipeline
