#include "llm4cap/config/config.hpp"
#include "llm4cap/pipeline/pipeline.hpp"
#include "llm4cap/rdf/turtle.hpp"
#include "llm4cap/reason/reasoner.hpp"
#include "llm4cap/shacl/validator.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace llm4cap;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNeedsReview = 2;
constexpr int kExitProviderError = 3;
constexpr int kExitSyntax = 4;
constexpr int kExitInconsistent = 5;
constexpr int kExitNonconforming = 6;

int fail_usage(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return kExitUsage;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pipeline::ConfigError("cannot read file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pipeline::ConfigError("cannot write file: " + path);
    out << text;
}

rdf::Graph parse_graph_file(const std::string& path, int exitOnSyntax, int& failCode,
                            std::string& failText) {
    const std::string text = read_file(path);
    auto parsed = rdf::parse_turtle(text);
    if (!parsed.ok()) {
        failCode = exitOnSyntax;
        failText = rdf::render_diagnostics(parsed.diagnostics);
        return {};
    }
    return std::move(*parsed.graph);
}

struct GenerateArgs {
    std::string inputFile;
    std::string text;
    std::string configFile;
    std::string outFile;
    std::string reportFile;
    std::string traceFile;
    std::string templateDir;
    std::string schemaFile;
    std::string shapesFile;
    std::string providerKind;
    std::string model;
    std::string endpointUrl;
    std::string apiKeyEnv;
    std::string replaySession;
    int maxRepeat = -1;
    bool maxRepeatSet = false;
};

int run_generate(const GenerateArgs& args) {
    if (args.inputFile.empty() == args.text.empty()) {
        return fail_usage("give exactly one of --input or --text");
    }

    pipeline::PipelineConfig config;
    try {
        if (!args.configFile.empty()) {
            config = config::load_pipeline_config_file(args.configFile);
        }
        if (!args.templateDir.empty()) config.templateDir = args.templateDir;
        if (!args.schemaFile.empty()) config.schemaFile = args.schemaFile;
        if (!args.shapesFile.empty()) config.shapesFile = args.shapesFile;
        if (!args.providerKind.empty()) {
            config.provider.kind = config::provider_kind_from_string(args.providerKind);
        }
        if (!args.model.empty()) config.provider.model = args.model;
        if (!args.endpointUrl.empty()) config.provider.endpointUrl = args.endpointUrl;
        if (!args.apiKeyEnv.empty()) config.provider.apiKeyEnvVar = args.apiKeyEnv;
        if (!args.replaySession.empty()) {
            config.provider.replaySessionPath = args.replaySession;
        }
        if (args.maxRepeatSet) config.maxRepeatPerStep = args.maxRepeat;
        if (config.provider.apiKeyEnvVar.empty()) {
            config.provider.apiKeyEnvVar =
                config.provider.kind == llm::ProviderKind::OpenAiCompatible
                    ? "OPENAI_API_KEY"
                    : "ANTHROPIC_API_KEY";
        }

        std::string description =
            args.text.empty() ? read_file(args.inputFile) : args.text;

        pipeline::Pipeline pipe(std::move(config));
        pipeline::PipelineResult result = pipe.run(description);

        if (!result.ontologyText.empty()) {
            if (args.outFile.empty()) {
                std::cout << result.ontologyText;
            } else {
                write_file(args.outFile, result.ontologyText);
            }
        }
        if (args.reportFile.empty()) {
            std::cerr << result.report;
        } else {
            write_file(args.reportFile, result.report);
        }
        if (!args.traceFile.empty()) {
            write_file(args.traceFile, pipeline::trace_to_json(result.trace) + "\n");
        }

        switch (result.status) {
        case pipeline::PipelineStatus::Verified: return kExitOk;
        case pipeline::PipelineStatus::NeedsManualReview: return kExitNeedsReview;
        case pipeline::PipelineStatus::ProviderError:
            std::cerr << "error: generation failed with a provider error\n";
            return kExitProviderError;
        }
        return kExitProviderError;
    } catch (const prompt::InputError& e) {
        return fail_usage(e.what());
    } catch (const pipeline::ConfigError& e) {
        return fail_usage(e.what());
    } catch (const prompt::ConfigError& e) {
        return fail_usage(e.what());
    }
}

struct VerifyArgs {
    std::string ontologyFile;
    std::string schemaFile;
    std::string shapesFile;
    int closureTripleCap = 1'000'000;
};

int check_syntax(const VerifyArgs& args, std::optional<rdf::Graph>& data) {
    int failCode = 0;
    std::string failText;
    auto graph = parse_graph_file(args.ontologyFile, kExitSyntax, failCode, failText);
    if (failCode != 0) {
        std::cout << "syntax: failed\n" << failText;
        return failCode;
    }
    std::cout << "syntax: ok\n";
    data = std::move(graph);
    return kExitOk;
}

int check_reasoning(const VerifyArgs& args, const rdf::Graph& data, const rdf::Graph& schema) {
    reason::ReasonerOptions options;
    options.maxClosureTriples = static_cast<std::size_t>(args.closureTripleCap);
    try {
        auto result = reason::check_consistency(data, schema, options);
        if (!result.consistent) {
            std::cout << "reasoning: failed\n" << reason::render_clashes(result.clashes);
            return kExitInconsistent;
        }
    } catch (const reason::ResourceBoundError& e) {
        std::cout << "reasoning: failed\n" << e.what() << "\n";
        return kExitInconsistent;
    }
    std::cout << "reasoning: ok\n";
    return kExitOk;
}

int check_shapes(const VerifyArgs& args, const rdf::Graph& data, const rdf::Graph& schema) {
    const std::string text = read_file(args.shapesFile);
    auto parsed = rdf::parse_turtle(text);
    if (!parsed.ok()) {
        throw pipeline::ConfigError("shapes file " + args.shapesFile + " does not parse:\n" +
                                    rdf::render_diagnostics(parsed.diagnostics));
    }
    auto shapes = shacl::parse_shapes(*parsed.graph);
    auto report = shacl::validate(data, schema, shapes);
    if (!report.conforms) {
        std::cout << "shacl: failed\n" << shacl::render_report(report);
        return kExitNonconforming;
    }
    std::cout << "shacl: ok\n";
    return kExitOk;
}

int run_verify(const VerifyArgs& args) {
    try {
        std::optional<rdf::Graph> data;
        if (int code = check_syntax(args, data); code != kExitOk) return code;

        int failCode = 0;
        std::string failText;
        auto schema = parse_graph_file(args.schemaFile, 0, failCode, failText);
        if (failCode != 0) {
            throw pipeline::ConfigError("schema file " + args.schemaFile + " does not parse:\n" +
                                        failText);
        }
        if (int code = check_reasoning(args, *data, schema); code != kExitOk) return code;
        return check_shapes(args, *data, schema);
    } catch (const shacl::ShapeDefinitionError& e) {
        return fail_usage(e.what());
    } catch (const pipeline::ConfigError& e) {
        return fail_usage(e.what());
    }
}

int run_parse(const std::string& ontologyFile) {
    try {
        const std::string text = read_file(ontologyFile);
        auto parsed = rdf::parse_turtle(text);
        if (!parsed.ok()) {
            std::cout << "syntax: failed\n" << rdf::render_diagnostics(parsed.diagnostics);
            return kExitSyntax;
        }
        std::cout << "syntax: ok\n";
        return kExitOk;
    } catch (const pipeline::ConfigError& e) {
        return fail_usage(e.what());
    }
}

int run_reason(const VerifyArgs& args) {
    try {
        std::optional<rdf::Graph> data;
        if (int code = check_syntax(args, data); code != kExitOk) return code;
        int failCode = 0;
        std::string failText;
        auto schema = parse_graph_file(args.schemaFile, 0, failCode, failText);
        if (failCode != 0) {
            throw pipeline::ConfigError("schema file " + args.schemaFile + " does not parse:\n" +
                                        failText);
        }
        return check_reasoning(args, *data, schema);
    } catch (const pipeline::ConfigError& e) {
        return fail_usage(e.what());
    }
}

int run_shacl(const VerifyArgs& args) {
    try {
        std::optional<rdf::Graph> data;
        if (int code = check_syntax(args, data); code != kExitOk) return code;
        int failCode = 0;
        std::string failText;
        auto schema = parse_graph_file(args.schemaFile, 0, failCode, failText);
        if (failCode != 0) {
            throw pipeline::ConfigError("schema file " + args.schemaFile + " does not parse:\n" +
                                        failText);
        }
        return check_shapes(args, *data, schema);
    } catch (const shacl::ShapeDefinitionError& e) {
        return fail_usage(e.what());
    } catch (const pipeline::ConfigError& e) {
        return fail_usage(e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate OWL capability ontologies from natural language and verify them"};
    app.require_subcommand(1);

    GenerateArgs generateArgs;
    auto* generate = app.add_subcommand(
        "generate", "Run the full generate-and-verify loop against a model provider");
    generate->add_option("--input", generateArgs.inputFile,
                         "File holding the capability description");
    generate->add_option("--text", generateArgs.text, "Capability description as a string");
    generate->add_option("--config", generateArgs.configFile, "JSON config file");
    generate->add_option("--out", generateArgs.outFile, "Write the ontology here (default stdout)");
    generate->add_option("--report", generateArgs.reportFile,
                         "Write the run report here (default stderr)");
    generate->add_option("--trace", generateArgs.traceFile, "Write the JSON trace here");
    generate->add_option("--template-dir", generateArgs.templateDir, "Prompt template directory");
    generate->add_option("--schema", generateArgs.schemaFile, "Context/schema ontology file");
    generate->add_option("--shapes", generateArgs.shapesFile, "SHACL shapes file");
    generate->add_option("--provider", generateArgs.providerKind,
                         "Provider kind: openai, anthropic or replay");
    generate->add_option("--model", generateArgs.model, "Model name");
    generate->add_option("--endpoint", generateArgs.endpointUrl, "Provider endpoint URL");
    generate->add_option("--api-key-env", generateArgs.apiKeyEnv,
                         "Environment variable holding the API key");
    generate->add_option("--replay-session", generateArgs.replaySession,
                         "Replay session fixture (replay provider)");
    auto* maxRepeatOpt = generate->add_option("--max-repeat", generateArgs.maxRepeat,
                                              "Repair attempts allowed per verification step");

    VerifyArgs verifyArgs;
    auto* verify = app.add_subcommand("verify", "Run syntax, reasoning and SHACL checks in order");
    verify->add_option("--ontology", verifyArgs.ontologyFile, "Ontology under test")->required();
    verify->add_option("--schema", verifyArgs.schemaFile, "Schema/context ontology")->required();
    verify->add_option("--shapes", verifyArgs.shapesFile, "SHACL shapes file")->required();
    verify->add_option("--closure-cap", verifyArgs.closureTripleCap, "Closure size bound");

    std::string parseOntology;
    auto* parse = app.add_subcommand("parse", "Syntax-check a Turtle file");
    parse->add_option("--ontology", parseOntology, "Ontology under test")->required();

    VerifyArgs reasonArgs;
    auto* reasonCmd = app.add_subcommand("reason", "Consistency-check an ontology");
    reasonCmd->add_option("--ontology", reasonArgs.ontologyFile, "Ontology under test")
        ->required();
    reasonCmd->add_option("--schema", reasonArgs.schemaFile, "Schema/context ontology")
        ->required();
    reasonCmd->add_option("--closure-cap", reasonArgs.closureTripleCap, "Closure size bound");

    VerifyArgs shaclArgs;
    auto* shaclCmd = app.add_subcommand("shacl", "Validate an ontology against SHACL shapes");
    shaclCmd->add_option("--ontology", shaclArgs.ontologyFile, "Ontology under test")->required();
    shaclCmd->add_option("--schema", shaclArgs.schemaFile, "Schema/context ontology")->required();
    shaclCmd->add_option("--shapes", shaclArgs.shapesFile, "SHACL shapes file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << app.help();
        return kExitUsage;
    }

    generateArgs.maxRepeatSet = maxRepeatOpt->count() > 0;

    try {
        if (generate->parsed()) return run_generate(generateArgs);
        if (verify->parsed()) return run_verify(verifyArgs);
        if (parse->parsed()) return run_parse(parseOntology);
        if (reasonCmd->parsed()) return run_reason(reasonArgs);
        if (shaclCmd->parsed()) return run_shacl(shaclArgs);
    } catch (const std::exception& e) {
        return fail_usage(e.what());
    }
    return fail_usage("no subcommand given");
}
