#include "llm4cap/llm/client.hpp"

#include "llm4cap/util/sha256.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace llm4cap::llm {

namespace {

using nlohmann::json;

struct SplitUrl {
    std::string base;       // scheme://host[:port]
    std::string pathPrefix; // "" or "/some/prefix"
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw LlmError(LlmError::Code::Config, "endpoint URL missing scheme: " + url);
    }
    SplitUrl out;
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        out.base = url;
    } else {
        out.base = url.substr(0, path_start);
        out.pathPrefix = url.substr(path_start);
        while (!out.pathPrefix.empty() && out.pathPrefix.back() == '/') {
            out.pathPrefix.pop_back();
        }
    }
    return out;
}

const char* role_name(Role role) {
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    }
    return "user";
}

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

json openai_body(const LlmRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    return json{{"model", request.model},
                {"messages", std::move(messages)},
                {"temperature", 0},
                {"max_tokens", request.maxOutputTokens}};
}

json anthropic_body(const LlmRequest& request) {
    json body{{"model", request.model},
              {"max_tokens", request.maxOutputTokens},
              {"temperature", 0}};
    json messages = json::array();
    for (const auto& m : request.messages) {
        // The messages endpoint takes the system prompt as a top-level field.
        if (m.role == Role::System && messages.empty() && !body.contains("system")) {
            body["system"] = m.content;
            continue;
        }
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);
    return body;
}

FinishReason openai_finish(const std::string& reason) {
    if (reason == "stop") return FinishReason::Stop;
    if (reason == "length") return FinishReason::Length;
    return FinishReason::Other;
}

FinishReason anthropic_finish(const std::string& reason) {
    if (reason == "end_turn" || reason == "stop_sequence") return FinishReason::Stop;
    if (reason == "max_tokens") return FinishReason::Length;
    return FinishReason::Other;
}

LlmResponse parse_openai_response(const std::string& body) {
    try {
        const json doc = json::parse(body);
        const json& choice = doc.at("choices").at(0);
        LlmResponse out;
        out.content = choice.at("message").at("content").get<std::string>();
        out.finishReason = openai_finish(choice.value("finish_reason", "stop"));
        if (doc.contains("usage")) {
            Usage usage;
            usage.inputTokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
            usage.outputTokens = doc["usage"].value("completion_tokens", std::int64_t{0});
            out.usage = usage;
        }
        return out;
    } catch (const json::exception& e) {
        throw LlmError(LlmError::Code::Config,
                       std::string("unexpected chat-completions response shape: ") + e.what() +
                           "; body: " + body_excerpt(body));
    }
}

LlmResponse parse_anthropic_response(const std::string& body) {
    try {
        const json doc = json::parse(body);
        LlmResponse out;
        for (const auto& block : doc.at("content")) {
            if (block.value("type", "text") == "text") {
                out.content += block.at("text").get<std::string>();
            }
        }
        out.finishReason = anthropic_finish(doc.value("stop_reason", "end_turn"));
        if (doc.contains("usage")) {
            Usage usage;
            usage.inputTokens = doc["usage"].value("input_tokens", std::int64_t{0});
            usage.outputTokens = doc["usage"].value("output_tokens", std::int64_t{0});
            out.usage = usage;
        }
        return out;
    } catch (const json::exception& e) {
        throw LlmError(LlmError::Code::Config,
                       std::string("unexpected messages response shape: ") + e.what() +
                           "; body: " + body_excerpt(body));
    }
}

std::string default_endpoint(ProviderKind kind) {
    return kind == ProviderKind::OpenAiCompatible ? "https://api.openai.com"
                                                  : "https://api.anthropic.com";
}

std::string_view trim_view(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

} // namespace

ReplaySession load_replay_session(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw LlmError(LlmError::Code::Config, "cannot open replay session file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw LlmError(LlmError::Code::Config,
                       "replay session " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("turns") || !doc["turns"].is_array()) {
        throw LlmError(LlmError::Code::Config,
                       "replay session " + path + " must be an object with a \"turns\" array");
    }
    ReplaySession session;
    for (const auto& entry : doc["turns"]) {
        if (!entry.is_object() || !entry.contains("response") || !entry["response"].is_string()) {
            throw LlmError(LlmError::Code::Config,
                           "replay session " + path +
                               ": every turn needs a string \"response\" field");
        }
        ReplayTurn turn;
        turn.response = entry["response"].get<std::string>();
        if (entry.contains("expectedPromptDigest")) {
            if (!entry["expectedPromptDigest"].is_string()) {
                throw LlmError(LlmError::Code::Config,
                               "replay session " + path +
                                   ": expectedPromptDigest must be a string");
            }
            turn.expectedPromptDigest = entry["expectedPromptDigest"].get<std::string>();
        }
        session.turns.push_back(std::move(turn));
    }
    return session;
}

struct LlmClient::Impl {
    ProviderConfig config;
    Sleeper sleeper;
    ReplaySession session;
    std::size_t nextTurn = 0;
    std::mutex replayMutex;
};

LlmClient::LlmClient(ProviderConfig config, Sleeper sleeper) : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    impl_->sleeper = sleeper ? std::move(sleeper) : [](std::chrono::milliseconds delay) {
        std::this_thread::sleep_for(delay);
    };
    if (impl_->config.kind == ProviderKind::Replay) {
        if (impl_->config.replaySessionPath.empty()) {
            throw LlmError(LlmError::Code::Config,
                           "replay provider requires a session fixture path");
        }
        impl_->session = load_replay_session(impl_->config.replaySessionPath);
    }
}

LlmClient::~LlmClient() = default;
LlmClient::LlmClient(LlmClient&&) noexcept = default;
LlmClient& LlmClient::operator=(LlmClient&&) noexcept = default;

const ProviderConfig& LlmClient::config() const { return impl_->config; }

LlmResponse LlmClient::complete(const LlmRequest& request) {
    if (request.messages.empty()) {
        throw LlmError(LlmError::Code::Config, "request must carry at least one message");
    }
    if (request.messages.front().role == Role::Assistant) {
        throw LlmError(LlmError::Code::Config,
                       "first request message must be a system or user message");
    }

    if (impl_->config.kind == ProviderKind::Replay) {
        std::lock_guard lock(impl_->replayMutex);
        if (impl_->nextTurn >= impl_->session.turns.size()) {
            throw LlmError(LlmError::Code::ReplayExhausted,
                           "replay session exhausted after " +
                               std::to_string(impl_->session.turns.size()) + " turn(s)");
        }
        const ReplayTurn& turn = impl_->session.turns[impl_->nextTurn];
        const std::string digest = util::sha256_hex(request.messages.back().content);
        if (turn.expectedPromptDigest && *turn.expectedPromptDigest != digest) {
            throw LlmError(LlmError::Code::ReplayMismatch,
                           "replay turn " + std::to_string(impl_->nextTurn) +
                               " expected prompt digest " + *turn.expectedPromptDigest +
                               " but got " + digest);
        }
        ++impl_->nextTurn;
        LlmResponse out;
        out.content = turn.response;
        out.finishReason = FinishReason::Stop;
        return out;
    }

    const std::string& envVar = impl_->config.apiKeyEnvVar;
    if (envVar.empty()) {
        throw LlmError(LlmError::Code::MissingCredentials,
                       "no API key environment variable configured");
    }
    const char* key = std::getenv(envVar.c_str());
    if (key == nullptr || *key == '\0') {
        throw LlmError(LlmError::Code::MissingCredentials,
                       "API key environment variable " + envVar + " is not set");
    }

    const std::string endpoint = impl_->config.endpointUrl.empty()
                                     ? default_endpoint(impl_->config.kind)
                                     : impl_->config.endpointUrl;
    const SplitUrl url = split_url(endpoint);

    std::string path;
    httplib::Headers headers;
    std::string body;
    if (impl_->config.kind == ProviderKind::OpenAiCompatible) {
        path = url.pathPrefix + "/v1/chat/completions";
        headers.emplace("Authorization", std::string("Bearer ") + key);
        body = openai_body(request).dump();
    } else {
        path = url.pathPrefix + "/v1/messages";
        headers.emplace("x-api-key", key);
        headers.emplace("anthropic-version", "2023-06-01");
        body = anthropic_body(request).dump();
    }

    const int attempts = 1 + std::max(0, impl_->config.maxRetriesTransport);
    std::string lastTransportError;
    int lastRetryableStatus = 0;
    std::string lastRetryableBody;

    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            // Exponential backoff: 1 s, 2 s, 4 s, ...
            impl_->sleeper(std::chrono::milliseconds(1000) * (1 << (attempt - 1)));
        }
        httplib::Client client(url.base);
        client.set_connection_timeout(impl_->config.timeoutSeconds, 0);
        client.set_read_timeout(impl_->config.timeoutSeconds, 0);
        client.set_write_timeout(impl_->config.timeoutSeconds, 0);
        client.set_follow_location(true);

        const auto started = std::chrono::steady_clock::now();
        httplib::Result result = client.Post(path, headers, body, "application/json");
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);

        if (!result) {
            lastTransportError = httplib::to_string(result.error());
            lastRetryableStatus = 0;
            continue;
        }
        if (result->status >= 200 && result->status < 300) {
            LlmResponse response = impl_->config.kind == ProviderKind::OpenAiCompatible
                                       ? parse_openai_response(result->body)
                                       : parse_anthropic_response(result->body);
            response.latencyMs = static_cast<int>(elapsed.count());
            return response;
        }
        if (result->status >= 500 && result->status < 600) {
            lastRetryableStatus = result->status;
            lastRetryableBody = result->body;
            lastTransportError.clear();
            continue;
        }
        // Client errors and anything else non-retryable surface immediately.
        throw LlmError(LlmError::Code::HttpStatus,
                       "provider returned HTTP " + std::to_string(result->status) + ": " +
                           body_excerpt(result->body),
                       result->status);
    }

    if (lastRetryableStatus != 0) {
        throw LlmError(LlmError::Code::HttpStatus,
                       "provider returned HTTP " + std::to_string(lastRetryableStatus) + " after " +
                           std::to_string(attempts) + " attempt(s): " +
                           body_excerpt(lastRetryableBody),
                       lastRetryableStatus);
    }
    throw LlmError(LlmError::Code::Timeout,
                   "transport failure after " + std::to_string(attempts) +
                       " attempt(s): " + lastTransportError);
}

Extraction extract_turtle(const LlmResponse& response) {
    const std::string& content = response.content;
    std::vector<std::string> blocks;
    std::string current;
    bool inBlock = false;

    std::size_t pos = 0;
    while (pos <= content.size()) {
        const auto eol = content.find('\n', pos);
        const std::size_t end = eol == std::string::npos ? content.size() : eol;
        const std::string_view line(content.data() + pos, end - pos);
        if (trim_view(line).substr(0, 3) == "```") {
            if (inBlock) {
                blocks.push_back(std::move(current));
                current.clear();
                inBlock = false;
            } else {
                inBlock = true;
                current.clear();
            }
        } else if (inBlock) {
            current.append(line);
            current.push_back('\n');
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }

    Extraction out;
    if (!blocks.empty()) {
        const auto longest = std::max_element(
            blocks.begin(), blocks.end(),
            [](const std::string& a, const std::string& b) { return a.size() < b.size(); });
        out.text = std::string(trim_view(*longest));
        out.fromFence = true;
    } else {
        out.text = std::string(trim_view(content));
        out.fromFence = false;
    }
    if (out.text.empty()) {
        throw LlmError(LlmError::Code::EmptyExtraction,
                       "no Turtle content found in the model response");
    }
    return out;
}

} // namespace llm4cap::llm
