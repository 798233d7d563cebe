#include <doctest.h>

#include "llm4cap/llm/client.hpp"
#include "llm4cap/util/sha256.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

using namespace llm4cap;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kKeyVar = "LLM4CAP_TEST_API_KEY";

struct FakeServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~FakeServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

struct SleepRecorder {
    std::vector<std::chrono::milliseconds> delays;

    llm::LlmClient::Sleeper sleeper() {
        return [this](std::chrono::milliseconds d) { delays.push_back(d); };
    }
};

llm::ProviderConfig http_config(llm::ProviderKind kind, const std::string& url) {
    llm::ProviderConfig config;
    config.kind = kind;
    config.endpointUrl = url;
    config.apiKeyEnvVar = kKeyVar;
    config.model = "test-model";
    config.timeoutSeconds = 5;
    config.maxRetriesTransport = 0;
    return config;
}

llm::LlmRequest simple_request(const std::string& user = "hello") {
    llm::LlmRequest request;
    request.messages = {{llm::Role::System, "be terse"}, {llm::Role::User, user}};
    request.model = "test-model";
    return request;
}

std::string openai_ok_body(const std::string& content) {
    return json{{"choices",
                 {{{"message", {{"role", "assistant"}, {"content", content}}},
                   {"finish_reason", "stop"}}}},
                {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 7}}}}
        .dump();
}

std::string anthropic_ok_body(const std::string& content) {
    return json{{"content", {{{"type", "text"}, {"text", content}}}},
                {"stop_reason", "end_turn"},
                {"usage", {{"input_tokens", 20}, {"output_tokens", 9}}}}
        .dump();
}

fs::path write_session(const std::string& name, const json& doc) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << doc.dump(2);
    return path;
}

struct EnvKeyGuard {
    EnvKeyGuard() { ::setenv(kKeyVar, "test-key-123", 1); }
    ~EnvKeyGuard() { ::unsetenv(kKeyVar); }
};

} // namespace

TEST_CASE("chat-completions wire format: path, bearer auth, temperature zero") {
    EnvKeyGuard env;
    FakeServer fake;
    std::string seen_path, seen_auth, seen_body;
    fake.server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                                 httplib::Response& res) {
        seen_path = req.path;
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        res.set_content(openai_ok_body("hi there"), "application/json");
    });
    fake.start();

    llm::LlmClient client(http_config(llm::ProviderKind::OpenAiCompatible, fake.url()));
    auto response = client.complete(simple_request());

    CHECK(seen_path == "/v1/chat/completions");
    CHECK(seen_auth == "Bearer test-key-123");
    // Temperature is pinned to zero and serialized as the integer 0.
    CHECK(seen_body.find("\"temperature\":0") != std::string::npos);
    const json body = json::parse(seen_body);
    CHECK(body["temperature"].is_number_integer());
    CHECK(body["temperature"] == 0);
    CHECK(body["model"] == "test-model");
    CHECK(body["max_tokens"] == 4096);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == "be terse");
    CHECK(body["messages"][1]["role"] == "user");

    CHECK(response.content == "hi there");
    CHECK(response.finishReason == llm::FinishReason::Stop);
    REQUIRE(response.usage.has_value());
    CHECK(response.usage->inputTokens == 12);
    CHECK(response.usage->outputTokens == 7);
    CHECK(response.latencyMs >= 0);
}

TEST_CASE("messages wire format: api key header, version header, system extraction") {
    EnvKeyGuard env;
    FakeServer fake;
    std::string seen_key, seen_version, seen_body;
    fake.server.Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
        seen_key = req.get_header_value("x-api-key");
        seen_version = req.get_header_value("anthropic-version");
        seen_body = req.body;
        res.set_content(anthropic_ok_body("bonjour"), "application/json");
    });
    fake.start();

    llm::LlmClient client(http_config(llm::ProviderKind::AnthropicCompatible, fake.url()));
    auto response = client.complete(simple_request("salut"));

    CHECK(seen_key == "test-key-123");
    CHECK(seen_version == "2023-06-01");
    const json body = json::parse(seen_body);
    CHECK(body["temperature"] == 0);
    CHECK(body["temperature"].is_number_integer());
    CHECK(body["system"] == "be terse");
    REQUIRE(body["messages"].size() == 1); // system message lifted out
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(body["messages"][0]["content"] == "salut");

    CHECK(response.content == "bonjour");
    CHECK(response.finishReason == llm::FinishReason::Stop);
    REQUIRE(response.usage.has_value());
    CHECK(response.usage->inputTokens == 20);
    CHECK(response.usage->outputTokens == 9);
}

TEST_CASE("length finish reasons map to Length") {
    EnvKeyGuard env;
    FakeServer fake;
    fake.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        json body = json::parse(openai_ok_body("truncated"));
        body["choices"][0]["finish_reason"] = "length";
        res.set_content(body.dump(), "application/json");
    });
    fake.server.Post("/v1/messages", [&](const httplib::Request&, httplib::Response& res) {
        json body = json::parse(anthropic_ok_body("truncated"));
        body["stop_reason"] = "max_tokens";
        res.set_content(body.dump(), "application/json");
    });
    fake.start();

    llm::LlmClient openai(http_config(llm::ProviderKind::OpenAiCompatible, fake.url()));
    CHECK(openai.complete(simple_request()).finishReason == llm::FinishReason::Length);
    llm::LlmClient anthropic(http_config(llm::ProviderKind::AnthropicCompatible, fake.url()));
    CHECK(anthropic.complete(simple_request()).finishReason == llm::FinishReason::Length);
}

TEST_CASE("missing API key environment variable fails before any request") {
    ::unsetenv(kKeyVar);
    FakeServer fake;
    std::atomic<int> hits{0};
    fake.server.Post("/v1/messages", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.set_content(anthropic_ok_body("x"), "application/json");
    });
    fake.start();

    llm::LlmClient client(http_config(llm::ProviderKind::AnthropicCompatible, fake.url()));
    try {
        client.complete(simple_request());
        FAIL("expected MissingCredentials");
    } catch (const llm::LlmError& e) {
        CHECK(e.code == llm::LlmError::Code::MissingCredentials);
        CHECK(std::string(e.what()).find(kKeyVar) != std::string::npos);
    }
    CHECK(hits.load() == 0);
}

TEST_CASE("server errors are retried with exponential backoff, then succeed") {
    EnvKeyGuard env;
    FakeServer fake;
    std::atomic<int> hits{0};
    fake.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        const int n = ++hits;
        if (n <= 2) {
            res.status = 503;
            res.set_content("overloaded", "text/plain");
        } else {
            res.set_content(openai_ok_body("finally"), "application/json");
        }
    });
    fake.start();

    SleepRecorder recorder;
    auto config = http_config(llm::ProviderKind::OpenAiCompatible, fake.url());
    config.maxRetriesTransport = 2;
    llm::LlmClient client(config, recorder.sleeper());
    auto response = client.complete(simple_request());

    CHECK(response.content == "finally");
    CHECK(hits.load() == 3);
    REQUIRE(recorder.delays.size() == 2);
    CHECK(recorder.delays[0] == std::chrono::milliseconds(1000));
    CHECK(recorder.delays[1] == std::chrono::milliseconds(2000));
}

TEST_CASE("persistent server errors surface the HTTP status after retries") {
    EnvKeyGuard env;
    FakeServer fake;
    std::atomic<int> hits{0};
    fake.server.Post("/v1/messages", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 500;
        res.set_content("internal", "text/plain");
    });
    fake.start();

    SleepRecorder recorder;
    auto config = http_config(llm::ProviderKind::AnthropicCompatible, fake.url());
    config.maxRetriesTransport = 1;
    llm::LlmClient client(config, recorder.sleeper());
    try {
        client.complete(simple_request());
        FAIL("expected HttpStatus");
    } catch (const llm::LlmError& e) {
        CHECK(e.code == llm::LlmError::Code::HttpStatus);
        CHECK(e.httpStatus == 500);
        CHECK(std::string(e.what()).find("internal") != std::string::npos);
    }
    CHECK(hits.load() == 2);
    CHECK(recorder.delays.size() == 1);
}

TEST_CASE("client errors are surfaced immediately and never retried") {
    EnvKeyGuard env;
    FakeServer fake;
    std::atomic<int> hits{0};
    fake.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
        res.set_content("{\"error\":\"bad key\"}", "application/json");
    });
    fake.start();

    SleepRecorder recorder;
    auto config = http_config(llm::ProviderKind::OpenAiCompatible, fake.url());
    config.maxRetriesTransport = 3;
    llm::LlmClient client(config, recorder.sleeper());
    try {
        client.complete(simple_request());
        FAIL("expected HttpStatus");
    } catch (const llm::LlmError& e) {
        CHECK(e.code == llm::LlmError::Code::HttpStatus);
        CHECK(e.httpStatus == 401);
        CHECK(std::string(e.what()).find("bad key") != std::string::npos);
    }
    CHECK(hits.load() == 1);
    CHECK(recorder.delays.empty());
}

TEST_CASE("unreachable endpoint exhausts retries and reports a transport failure") {
    EnvKeyGuard env;
    SleepRecorder recorder;
    // Nothing listens on the discard port.
    auto config = http_config(llm::ProviderKind::AnthropicCompatible, "http://127.0.0.1:9");
    config.timeoutSeconds = 1;
    config.maxRetriesTransport = 1;
    llm::LlmClient client(config, recorder.sleeper());
    try {
        client.complete(simple_request());
        FAIL("expected Timeout");
    } catch (const llm::LlmError& e) {
        CHECK(e.code == llm::LlmError::Code::Timeout);
    }
    CHECK(recorder.delays.size() == 1);
}

TEST_CASE("requests must start with a system or user message") {
    EnvKeyGuard env;
    llm::LlmClient client(
        http_config(llm::ProviderKind::AnthropicCompatible, "http://127.0.0.1:9"));
    llm::LlmRequest request;
    CHECK_THROWS_AS(client.complete(request), llm::LlmError);
    request.messages = {{llm::Role::Assistant, "I speak first"}};
    try {
        client.complete(request);
        FAIL("expected Config error");
    } catch (const llm::LlmError& e) {
        CHECK(e.code == llm::LlmError::Code::Config);
    }
}

TEST_CASE("replay provider hands out scripted turns in order") {
    const auto path = write_session(
        "llm4cap-replay-basic.json",
        json{{"turns", {{{"response", "first reply"}},
                        {{"response", "second reply"},
                         {"expectedPromptDigest", util::sha256_hex("round two")}}}}});

    llm::ProviderConfig config;
    config.kind = llm::ProviderKind::Replay;
    config.replaySessionPath = path.string();
    llm::LlmClient client(config);

    CHECK(client.complete(simple_request("anything")).content == "first reply");
    CHECK(client.complete(simple_request("round two")).content == "second reply");
    try {
        client.complete(simple_request("round three"));
        FAIL("expected ReplayExhausted");
    } catch (const llm::LlmError& e) {
        CHECK(e.code == llm::LlmError::Code::ReplayExhausted);
    }
    fs::remove(path);
}

TEST_CASE("replay digest guard rejects a prompt that differs from the recording") {
    const std::string expected = util::sha256_hex("the recorded prompt");
    const auto path = write_session(
        "llm4cap-replay-digest.json",
        json{{"turns", {{{"response", "reply"}, {"expectedPromptDigest", expected}}}}});

    llm::ProviderConfig config;
    config.kind = llm::ProviderKind::Replay;
    config.replaySessionPath = path.string();
    llm::LlmClient client(config);
    try {
        client.complete(simple_request("a different prompt"));
        FAIL("expected ReplayMismatch");
    } catch (const llm::LlmError& e) {
        CHECK(e.code == llm::LlmError::Code::ReplayMismatch);
        CHECK(std::string(e.what()).find(expected) != std::string::npos);
    }
    fs::remove(path);
}

TEST_CASE("replay provider needs no API key and touches no network") {
    ::unsetenv(kKeyVar);
    const auto path =
        write_session("llm4cap-replay-nokey.json", json{{"turns", {{{"response", "offline"}}}}});
    llm::ProviderConfig config;
    config.kind = llm::ProviderKind::Replay;
    config.replaySessionPath = path.string();
    llm::LlmClient client(config);
    CHECK(client.complete(simple_request()).content == "offline");
    fs::remove(path);
}

TEST_CASE("replay construction validates the session file") {
    llm::ProviderConfig config;
    config.kind = llm::ProviderKind::Replay;

    SUBCASE("missing path") {
        CHECK_THROWS_AS(llm::LlmClient{config}, llm::LlmError);
    }
    SUBCASE("nonexistent file") {
        config.replaySessionPath = "/nonexistent/session.json";
        try {
            llm::LlmClient client(config);
            FAIL("expected Config error");
        } catch (const llm::LlmError& e) {
            CHECK(e.code == llm::LlmError::Code::Config);
        }
    }
    SUBCASE("turn without response") {
        const auto path = write_session("llm4cap-replay-bad.json",
                                        json{{"turns", {{{"expectedPromptDigest", "abc"}}}}});
        config.replaySessionPath = path.string();
        CHECK_THROWS_AS(llm::LlmClient{config}, llm::LlmError);
        fs::remove(path);
    }
}

TEST_CASE("extract_turtle prefers fenced content") {
    llm::LlmResponse response;

    SUBCASE("single fence with language tag") {
        response.content = "```turtle\n@prefix ex: <http://e/> .\nex:a ex:b ex:c .\n```";
        auto extraction = llm::extract_turtle(response);
        CHECK(extraction.text == "@prefix ex: <http://e/> .\nex:a ex:b ex:c .");
        CHECK(extraction.fromFence);
    }
    SUBCASE("prose around one fence") {
        response.content = "Here is the ontology you asked for:\n\n```\nex:a ex:b ex:c .\n```\n"
                           "Let me know if you need changes.";
        auto extraction = llm::extract_turtle(response);
        CHECK(extraction.text == "ex:a ex:b ex:c .");
        CHECK(extraction.fromFence);
    }
    SUBCASE("longest of several fences wins") {
        response.content = "```\nshort .\n```\nand\n```ttl\nmuch longer contents here .\n"
                           "spanning two lines .\n```";
        auto extraction = llm::extract_turtle(response);
        CHECK(extraction.text == "much longer contents here .\nspanning two lines .");
    }
    SUBCASE("bare content falls back to the whole trimmed text") {
        response.content = "  \nex:a ex:b ex:c .\n  ";
        auto extraction = llm::extract_turtle(response);
        CHECK(extraction.text == "ex:a ex:b ex:c .");
        CHECK(!extraction.fromFence);
    }
    SUBCASE("unclosed fence is not treated as a block") {
        response.content = "```turtle\nex:a ex:b ex:c .";
        auto extraction = llm::extract_turtle(response);
        CHECK(!extraction.fromFence);
        CHECK(extraction.text.find("ex:a ex:b ex:c .") != std::string::npos);
    }
}

TEST_CASE("extract_turtle rejects whitespace-only results") {
    llm::LlmResponse response;
    response.content = "   \n\t \n";
    try {
        llm::extract_turtle(response);
        FAIL("expected EmptyExtraction");
    } catch (const llm::LlmError& e) {
        CHECK(e.code == llm::LlmError::Code::EmptyExtraction);
    }
    response.content = "```\n\n```";
    CHECK_THROWS_AS(llm::extract_turtle(response), llm::LlmError);
}

TEST_CASE("extract_turtle is idempotent") {
    llm::LlmResponse response;
    response.content = "Sure!\n```turtle\n@prefix ex: <http://e/> .\nex:a ex:b ex:c .\n```\n";
    auto once = llm::extract_turtle(response);
    llm::LlmResponse rewrapped;
    rewrapped.content = once.text;
    auto twice = llm::extract_turtle(rewrapped);
    CHECK(twice.text == once.text);
}
