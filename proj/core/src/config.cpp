#include "llm4cap/config/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace llm4cap::config {

namespace {

using nlohmann::json;
using pipeline::ConfigError;

json parse_json_or_throw(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + " is not valid JSON: " + e.what());
    }
}

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        (void)value;
        if (key == "apiKey" || key == "api_key") {
            throw ConfigError("config key \"" + key + "\" in " + where +
                              " is refused: API keys are read from the environment variable "
                              "named by apiKeyEnvVar, never from config files");
        }
        if (!known.count(key)) {
            throw ConfigError("unknown config key \"" + key + "\" in " + where);
        }
    }
}

std::filesystem::path resolve(const std::filesystem::path& baseDir, const std::string& value) {
    const std::filesystem::path p(value);
    return p.is_absolute() ? p : baseDir / p;
}

template <typename T>
T get_field(const json& object, const char* key, T fallback) {
    if (!object.contains(key)) return fallback;
    try {
        return object.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key \"") + key + "\" has the wrong type");
    }
}

llm::ProviderConfig provider_from_json(const json& object,
                                       const std::filesystem::path& baseDir) {
    reject_unknown_keys(object,
                        {"kind", "endpointUrl", "apiKeyEnvVar", "model", "timeoutSeconds",
                         "maxRetriesTransport", "replaySessionPath"},
                        "provider");
    llm::ProviderConfig provider;
    if (object.contains("kind")) {
        provider.kind = provider_kind_from_string(get_field<std::string>(object, "kind", ""));
    }
    provider.endpointUrl = get_field<std::string>(object, "endpointUrl", "");
    provider.apiKeyEnvVar = get_field<std::string>(object, "apiKeyEnvVar", "");
    provider.model = get_field<std::string>(object, "model", "");
    provider.timeoutSeconds = get_field<int>(object, "timeoutSeconds", provider.timeoutSeconds);
    provider.maxRetriesTransport =
        get_field<int>(object, "maxRetriesTransport", provider.maxRetriesTransport);
    if (object.contains("replaySessionPath")) {
        provider.replaySessionPath =
            resolve(baseDir, get_field<std::string>(object, "replaySessionPath", "")).string();
    }
    if (provider.apiKeyEnvVar.empty()) {
        provider.apiKeyEnvVar = provider.kind == llm::ProviderKind::OpenAiCompatible
                                    ? "OPENAI_API_KEY"
                                    : "ANTHROPIC_API_KEY";
    }
    return provider;
}

pipeline::PipelineConfig pipeline_from_json(const json& object,
                                            const std::filesystem::path& baseDir,
                                            const std::string& where) {
    if (!object.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    reject_unknown_keys(object,
                        {"templateDir", "schemaFile", "shapesFile", "provider",
                         "maxRepeatPerStep", "closureTripleCap"},
                        where);
    pipeline::PipelineConfig config;
    if (object.contains("templateDir")) {
        config.templateDir = resolve(baseDir, get_field<std::string>(object, "templateDir", ""));
    }
    if (object.contains("schemaFile")) {
        config.schemaFile = resolve(baseDir, get_field<std::string>(object, "schemaFile", ""));
    }
    if (object.contains("shapesFile")) {
        config.shapesFile = resolve(baseDir, get_field<std::string>(object, "shapesFile", ""));
    }
    config.maxRepeatPerStep =
        get_field<int>(object, "maxRepeatPerStep", config.maxRepeatPerStep);
    config.closureTripleCap =
        get_field<int>(object, "closureTripleCap", config.closureTripleCap);
    if (object.contains("provider")) {
        if (!object["provider"].is_object()) {
            throw ConfigError("config key \"provider\" must be an object");
        }
        config.provider = provider_from_json(object["provider"], baseDir);
    }
    return config;
}

} // namespace

llm::ProviderKind provider_kind_from_string(const std::string& name) {
    if (name == "openai") return llm::ProviderKind::OpenAiCompatible;
    if (name == "anthropic") return llm::ProviderKind::AnthropicCompatible;
    if (name == "replay") return llm::ProviderKind::Replay;
    throw pipeline::ConfigError("unknown provider kind \"" + name +
                                "\" (expected openai, anthropic or replay)");
}

std::string to_string(llm::ProviderKind kind) {
    switch (kind) {
    case llm::ProviderKind::OpenAiCompatible: return "openai";
    case llm::ProviderKind::AnthropicCompatible: return "anthropic";
    case llm::ProviderKind::Replay: return "replay";
    }
    return "anthropic";
}

pipeline::PipelineConfig load_pipeline_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw pipeline::ConfigError("cannot read config file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const json doc = parse_json_or_throw(buffer.str(), path.string());
    return pipeline_from_json(doc, path.parent_path(), path.string());
}

pipeline::PipelineConfig pipeline_config_from_json_text(const std::string& jsonText,
                                                        const std::filesystem::path& baseDir) {
    const json doc = parse_json_or_throw(jsonText, "pipeline config");
    return pipeline_from_json(doc, baseDir, "pipeline config");
}

} // namespace llm4cap::config
