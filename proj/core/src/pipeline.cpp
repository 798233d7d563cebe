#include "llm4cap/pipeline/pipeline.hpp"

#include "llm4cap/rdf/turtle.hpp"
#include "llm4cap/reason/reasoner.hpp"
#include "llm4cap/util/sha256.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace llm4cap::pipeline {

namespace {

using nlohmann::json;

std::string read_file_or_throw(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(std::string("cannot read ") + what + " file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

rdf::Graph parse_file_or_throw(const std::filesystem::path& path, const char* what) {
    const std::string text = read_file_or_throw(path, what);
    auto parsed = rdf::parse_turtle(text);
    if (!parsed.ok()) {
        throw ConfigError(std::string(what) + " file " + path.string() +
                          " does not parse:\n" + rdf::render_diagnostics(parsed.diagnostics));
    }
    return std::move(*parsed.graph);
}

std::string now_iso8601_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&seconds, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

std::size_t step_index(Step step) { return static_cast<std::size_t>(step); }

} // namespace

std::string to_string(Step step) {
    switch (step) {
    case Step::Syntax: return "Syntax";
    case Step::Reasoning: return "Reasoning";
    case Step::Shacl: return "SHACL";
    }
    return "Syntax";
}

std::string to_string(PipelineStatus status) {
    switch (status) {
    case PipelineStatus::Verified: return "Verified";
    case PipelineStatus::NeedsManualReview: return "NeedsManualReview";
    case PipelineStatus::ProviderError: return "ProviderError";
    }
    return "ProviderError";
}

std::string trace_to_json(const PipelineTrace& trace) {
    json attempts = json::array();
    for (const auto& attempt : trace.attempts) {
        json outcomes = json::array();
        for (const auto& outcome : attempt.stepOutcomes) {
            outcomes.push_back({{"step", to_string(outcome.step)},
                                {"passed", outcome.passed},
                                {"diagnosticsText", outcome.diagnosticsText},
                                {"attemptIndex", outcome.attemptIndex}});
        }
        attempts.push_back({{"promptDigest", attempt.promptDigest},
                            {"rawResponse", attempt.rawResponse},
                            {"extractedOntology", attempt.extractedOntology},
                            {"extractedFromFence", attempt.extractedFromFence},
                            {"startedAt", attempt.startedAt},
                            {"stepOutcomes", std::move(outcomes)}});
    }
    json doc{{"schemaVersion", 1},
             {"finalStatus", to_string(trace.finalStatus)},
             {"failureStep", trace.failureStep ? json(to_string(*trace.failureStep)) : json()},
             {"totalLatencyMs", trace.totalLatencyMs},
             {"startedAt", trace.startedAt},
             {"finishedAt", trace.finishedAt},
             {"attempts", std::move(attempts)}};
    return doc.dump(2);
}

struct Pipeline::Impl {
    PipelineConfig config;
    llm::LlmClient::Sleeper sleeper;
    prompt::PromptTemplate promptTemplate;
    rdf::Graph schema;
    rdf::Graph shapesDoc;
    shacl::ShapesGraph shapes;
    std::unique_ptr<llm::LlmClient> httpClient; // shared across runs for HTTP kinds
};

Pipeline::Pipeline(PipelineConfig config, llm::LlmClient::Sleeper sleeper)
    : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    impl_->sleeper = std::move(sleeper);
    if (impl_->config.maxRepeatPerStep < 0) {
        throw ConfigError("maxRepeatPerStep must be non-negative");
    }
    if (impl_->config.closureTripleCap <= 0) {
        throw ConfigError("closureTripleCap must be positive");
    }

    try {
        impl_->promptTemplate = prompt::load_template(impl_->config.templateDir);
    } catch (const prompt::ConfigError& e) {
        throw ConfigError(std::string("prompt template: ") + e.what());
    }
    impl_->schema = parse_file_or_throw(impl_->config.schemaFile, "schema");
    impl_->shapesDoc = parse_file_or_throw(impl_->config.shapesFile, "shapes");
    try {
        impl_->shapes = shacl::parse_shapes(impl_->shapesDoc);
    } catch (const shacl::ShapeDefinitionError& e) {
        throw ConfigError(std::string("shapes file ") + impl_->config.shapesFile.string() +
                          ": " + e.what());
    }

    if (impl_->config.provider.kind == llm::ProviderKind::Replay) {
        // Validate the session fixture up front; runs re-open it so each run
        // starts at turn zero.
        try {
            llm::load_replay_session(impl_->config.provider.replaySessionPath);
        } catch (const llm::LlmError& e) {
            throw ConfigError(std::string("replay session: ") + e.what());
        }
    } else {
        impl_->httpClient =
            std::make_unique<llm::LlmClient>(impl_->config.provider, impl_->sleeper);
    }
}

Pipeline::~Pipeline() = default;
Pipeline::Pipeline(Pipeline&&) noexcept = default;
Pipeline& Pipeline::operator=(Pipeline&&) noexcept = default;

const PipelineConfig& Pipeline::config() const { return impl_->config; }

PipelineResult Pipeline::run(const std::string& description) {
    const auto runStart = std::chrono::steady_clock::now();

    PipelineResult result;
    result.trace.startedAt = now_iso8601_utc();

    // Per-run replay client keeps every run a pure function of the fixture.
    std::unique_ptr<llm::LlmClient> replayClient;
    llm::LlmClient* client = impl_->httpClient.get();
    if (impl_->config.provider.kind == llm::ProviderKind::Replay) {
        replayClient = std::make_unique<llm::LlmClient>(impl_->config.provider, impl_->sleeper);
        client = replayClient.get();
    }

    auto finish = [&](PipelineStatus status, std::optional<Step> failureStep,
                      const std::string& extraReportLine) {
        result.status = status;
        result.trace.finalStatus = status;
        result.trace.failureStep = failureStep;
        result.trace.finishedAt = now_iso8601_utc();
        result.trace.totalLatencyMs = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - runStart)
                .count());

        std::ostringstream report;
        report << "status: " << to_string(status) << "\n";
        if (failureStep) {
            report << "failure step: " << to_string(*failureStep) << "\n";
        }
        report << "attempts: " << result.trace.attempts.size() << "\n";
        for (std::size_t i = 0; i < result.trace.attempts.size(); ++i) {
            report << "attempt " << (i + 1) << ":";
            const auto& outcomes = result.trace.attempts[i].stepOutcomes;
            if (outcomes.empty()) {
                report << " no verification ran";
            }
            for (std::size_t k = 0; k < outcomes.size(); ++k) {
                report << (k == 0 ? " " : "; ") << to_string(outcomes[k].step)
                       << (outcomes[k].passed ? " passed" : " failed");
            }
            report << "\n";
        }
        if (!extraReportLine.empty()) {
            report << extraReportLine << "\n";
        }
        result.report = report.str();
        return result;
    };

    prompt::PromptBundle bundle = prompt::build_prompt(impl_->promptTemplate, description);
    std::vector<llm::Message> history{{llm::Role::User, bundle.renderedText}};

    std::array<int, 3> failures{0, 0, 0};
    std::optional<rdf::Graph> lastParsed;
    std::string lastFailureDiagnostics;

    const int maxCalls = 1 + 3 * impl_->config.maxRepeatPerStep;
    for (int call = 0; call < maxCalls; ++call) {
        AttemptRecord attempt;
        attempt.startedAt = now_iso8601_utc();
        attempt.promptDigest = util::sha256_hex(history.back().content);

        llm::LlmRequest request;
        request.messages = history;
        request.model = impl_->config.provider.model;

        llm::LlmResponse response;
        try {
            response = client->complete(request);
        } catch (const llm::LlmError& e) {
            return finish(PipelineStatus::ProviderError, std::nullopt,
                          std::string("provider error: ") + e.what());
        }

        attempt.rawResponse = response.content;
        history.push_back({llm::Role::Assistant, response.content});

        const int attemptIndex = static_cast<int>(result.trace.attempts.size());
        std::optional<Step> failedStep;
        std::string diagnostics;
        std::optional<rdf::Graph> parsedGraph;

        try {
            auto extraction = llm::extract_turtle(response);
            attempt.extractedOntology = extraction.text;
            attempt.extractedFromFence = extraction.fromFence;
        } catch (const llm::LlmError&) {
            // An answer with no Turtle in it cannot even enter the syntax
            // check; treat it as a syntax failure so the repair loop applies.
            failedStep = Step::Syntax;
            diagnostics = "the response contained no extractable Turtle content\n";
        }

        if (!failedStep) {
            auto parsed = rdf::parse_turtle(attempt.extractedOntology);
            StepOutcome outcome{Step::Syntax, parsed.ok(),
                                parsed.ok() ? "" : rdf::render_diagnostics(parsed.diagnostics),
                                attemptIndex};
            attempt.stepOutcomes.push_back(outcome);
            if (!parsed.ok()) {
                failedStep = Step::Syntax;
                diagnostics = outcome.diagnosticsText;
            } else {
                parsedGraph = std::move(parsed.graph);
                lastParsed = parsedGraph;
            }
        } else {
            attempt.stepOutcomes.push_back({Step::Syntax, false, diagnostics, attemptIndex});
        }

        if (!failedStep) {
            reason::ReasonerOptions options;
            options.maxClosureTriples =
                static_cast<std::size_t>(impl_->config.closureTripleCap);
            try {
                auto consistency = reason::check_consistency(*parsedGraph, impl_->schema, options);
                StepOutcome outcome{Step::Reasoning, consistency.consistent,
                                    consistency.consistent
                                        ? ""
                                        : reason::render_clashes(consistency.clashes),
                                    attemptIndex};
                attempt.stepOutcomes.push_back(outcome);
                if (!consistency.consistent) {
                    failedStep = Step::Reasoning;
                    diagnostics = outcome.diagnosticsText;
                }
            } catch (const reason::ResourceBoundError& e) {
                // Closure blow-up means the ontology cannot be judged; hand it
                // back to the model like any other reasoning failure.
                StepOutcome outcome{Step::Reasoning, false, std::string(e.what()) + "\n",
                                    attemptIndex};
                attempt.stepOutcomes.push_back(outcome);
                failedStep = Step::Reasoning;
                diagnostics = outcome.diagnosticsText;
            }
        }

        if (!failedStep) {
            auto report = shacl::validate(*parsedGraph, impl_->schema, impl_->shapes);
            StepOutcome outcome{Step::Shacl, report.conforms,
                                report.conforms ? "" : shacl::render_report(report),
                                attemptIndex};
            attempt.stepOutcomes.push_back(outcome);
            if (!report.conforms) {
                failedStep = Step::Shacl;
                diagnostics = outcome.diagnosticsText;
            }
        }

        const std::string failedOntology = attempt.extractedOntology.empty()
                                               ? attempt.rawResponse
                                               : attempt.extractedOntology;
        result.trace.attempts.push_back(std::move(attempt));

        if (!failedStep) {
            result.ontology = std::move(parsedGraph);
            result.ontologyText = rdf::serialize_turtle(*result.ontology);
            return finish(PipelineStatus::Verified, std::nullopt, "");
        }

        lastFailureDiagnostics = diagnostics;
        int& counter = failures[step_index(*failedStep)];
        ++counter;
        if (counter > impl_->config.maxRepeatPerStep) {
            if (lastParsed) {
                result.ontology = lastParsed;
                result.ontologyText = rdf::serialize_turtle(*result.ontology);
            }
            return finish(PipelineStatus::NeedsManualReview, failedStep,
                          "diagnostics from the last failure:\n" + lastFailureDiagnostics);
        }

        bundle = prompt::build_backprompt(bundle, failedOntology, to_string(*failedStep),
                                          diagnostics);
        history.push_back({llm::Role::User, bundle.renderedText});
    }

    // The per-step counters stop every run before the call bound; reaching
    // here would mean the loop accounting broke.
    if (lastParsed) {
        result.ontology = lastParsed;
        result.ontologyText = rdf::serialize_turtle(*result.ontology);
    }
    return finish(PipelineStatus::NeedsManualReview, std::nullopt,
                  "diagnostics from the last failure:\n" + lastFailureDiagnostics);
}

} // namespace llm4cap::pipeline
