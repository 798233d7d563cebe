#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace llm4cap::llm {

enum class Role { System, User, Assistant };

struct Message {
    Role role;
    std::string content;
};

/// Request temperature is not a field: every outbound request carries
/// temperature 0.0 by construction.
struct LlmRequest {
    std::vector<Message> messages; // non-empty; first role system or user
    std::string model;
    int maxOutputTokens = 4096;
};

enum class FinishReason { Stop, Length, Other };

struct Usage {
    std::int64_t inputTokens = 0;
    std::int64_t outputTokens = 0;
};

struct LlmResponse {
    std::string content;
    FinishReason finishReason = FinishReason::Stop;
    std::optional<Usage> usage;
    int latencyMs = 0;
};

enum class ProviderKind { OpenAiCompatible, AnthropicCompatible, Replay };

struct ProviderConfig {
    ProviderKind kind = ProviderKind::AnthropicCompatible;
    std::string endpointUrl;          // scheme://host[:port]; default per provider
    std::string apiKeyEnvVar;         // key read from the environment, never from files
    std::string model;
    int timeoutSeconds = 60;
    int maxRetriesTransport = 2;
    std::string replaySessionPath;    // Replay kind only
};

struct LlmError : std::runtime_error {
    enum class Code {
        MissingCredentials,
        Timeout,
        HttpStatus,
        ReplayMismatch,
        ReplayExhausted,
        EmptyExtraction,
        Config,
    };

    LlmError(Code code, const std::string& what, int httpStatus = 0)
        : std::runtime_error(what), code(code), httpStatus(httpStatus) {}

    Code code;
    int httpStatus; // set for Code::HttpStatus
};

/// One scripted exchange: the response to hand out, optionally guarded by the
/// sha256 digest of the latest request message.
struct ReplayTurn {
    std::optional<std::string> expectedPromptDigest;
    std::string response;
};

struct ReplaySession {
    std::vector<ReplayTurn> turns; // consumed strictly in order
};

ReplaySession load_replay_session(const std::string& path);

class LlmClient {
public:
    /// Injectable sleep for retry backoff; tests pass a recorder.
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit LlmClient(ProviderConfig config, Sleeper sleeper = nullptr);
    ~LlmClient();
    LlmClient(LlmClient&&) noexcept;
    LlmClient& operator=(LlmClient&&) noexcept;

    /// Sends the request; transport failures and 5xx retried with exponential
    /// backoff (base 1 s, factor 2) up to maxRetriesTransport; 4xx surfaced
    /// immediately and never retried.
    LlmResponse complete(const LlmRequest& request);

    const ProviderConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct Extraction {
    std::string text;
    bool fromFence = false; // recorded in the pipeline trace
};

/// Longest fenced code block (language tag ignored) or the whole content
/// trimmed. Throws LlmError{EmptyExtraction} when only whitespace remains.
Extraction extract_turtle(const LlmResponse& response);

} // namespace llm4cap::llm
