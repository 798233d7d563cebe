#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace llm4cap::prompt {

struct ExamplePair {
    std::string description; // natural-language capability description
    std::string ontology;    // Turtle text, validated at load time
};

struct PromptTemplate {
    std::string instruction;
    std::string contextOntology; // Turtle source of the capability ontology
    std::vector<ExamplePair> examples;
    std::string taskPlaceholder = "{{TASK}}";
};

struct PromptBundle {
    std::string renderedText; // no placeholder marker remains
    int tokenEstimate = 0;    // chars/4 heuristic, an estimate only
    std::vector<std::string> sectionsDigest; // sha256 per section, stable for identical inputs
};

/// Template loading / validation problem; the message names the offending path.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Caller-supplied text rejected (empty task, empty diagnostics).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Loads instruction.txt, context.ttl and examples/NN-name/{description.txt,
/// ontology.ttl} from `dir`; examples ordered by directory name. All Turtle
/// parts must parse; at least one example is required.
PromptTemplate load_template(const std::filesystem::path& dir);

/// instruction + context + examples (in order) + task substituted at the
/// placeholder. Deterministic.
PromptBundle build_prompt(const PromptTemplate& t, const std::string& taskDescription);

/// Fixed repair template naming the failed step, carrying the rejected
/// ontology and diagnostics verbatim, and directing the model to return the
/// full corrected Turtle. The digest chain starts from the previous bundle.
PromptBundle build_backprompt(const PromptBundle& previous, const std::string& failedOntology,
                              const std::string& stepName, const std::string& diagnosticsText);

} // namespace llm4cap::prompt
