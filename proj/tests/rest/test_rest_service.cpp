#include <doctest.h>

#include "llm4cap/pipeline/pipeline.hpp"
#include "llm4cap/rest/service.hpp"

#include "support/replay_world.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/stat.h>
#include <thread>
#include <unistd.h>
#include <vector>

using namespace llm4cap;
using nlohmann::json;
using testsupport::fenced;
using testsupport::kClashOntology;
using testsupport::kGoodOntology;
using testsupport::kSyntaxBadOntology;
using testsupport::World;

namespace {

rest::ServiceConfig service_config(World& world, const std::filesystem::path& session,
                                   int maxRepeat = 1) {
    rest::ServiceConfig config;
    config.pipeline = world.config(session, maxRepeat);
    config.workerCount = 2;
    config.queueCapacity = 8;
    return config;
}

json post_json(httplib::Client& client, const std::string& path, const json& body,
               int& statusOut) {
    auto res = client.Post(path, body.dump(), "application/json");
    REQUIRE(res);
    statusOut = res->status;
    return json::parse(res->body);
}

json get_json(httplib::Client& client, const std::string& path, int& statusOut) {
    auto res = client.Get(path);
    REQUIRE(res);
    statusOut = res->status;
    return json::parse(res->body);
}

json wait_done(httplib::Client& client, const std::string& statusUrl,
               int timeoutMs = 10'000) {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(timeoutMs);
    for (;;) {
        int status = 0;
        json body = get_json(client, statusUrl, status);
        REQUIRE(status == 200);
        const std::string state = body["state"].get<std::string>();
        if (state == "Done" || state == "Failed") return body;
        REQUIRE(std::chrono::steady_clock::now() < deadline);
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

} // namespace

TEST_CASE("health endpoint answers") {
    World world;
    rest::RestService service(service_config(world, world.write_session({fenced(kGoodOntology)})));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    int status = 0;
    json body = get_json(client, "/healthz", status);
    CHECK(status == 200);
    CHECK(body["status"] == "ok");
    CHECK(body["schemaVersion"] == 1);
    service.stop();
}

TEST_CASE("posting a description yields a job that finishes Verified") {
    World world;
    rest::RestService service(service_config(world, world.write_session({fenced(kGoodOntology)})));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    int status = 0;
    json accepted =
        post_json(client, "/capabilities", {{"description", "Brew a coffee."}}, status);
    CHECK(status == 202);
    CHECK(accepted["schemaVersion"] == 1);
    const std::string jobId = accepted["jobId"].get<std::string>();
    CHECK(jobId.size() == 36);
    CHECK(accepted["statusUrl"] == "/capabilities/" + jobId);

    json record = wait_done(client, accepted["statusUrl"].get<std::string>());
    CHECK(record["state"] == "Done");
    CHECK(record["jobId"] == jobId);
    CHECK(!record["createdAt"].get<std::string>().empty());
    CHECK(!record["finishedAt"].get<std::string>().empty());
    const json& result = record["result"];
    CHECK(result["finalStatus"] == "Verified");
    CHECK(!result["ontology"].get<std::string>().empty());
    CHECK(result["report"].get<std::string>().find("status: Verified") != std::string::npos);
    CHECK(result["trace"]["attempts"].size() == 1);
    service.stop();
}

TEST_CASE("REST job result equals a direct pipeline run") {
    World world;
    auto session = world.write_session({fenced(kSyntaxBadOntology), fenced(kGoodOntology)});

    pipeline::Pipeline direct(world.config(session, 1));
    auto expected = direct.run("Brew a coffee.");

    rest::RestService service(service_config(world, session));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);
    int status = 0;
    json accepted =
        post_json(client, "/capabilities", {{"description", "Brew a coffee."}}, status);
    REQUIRE(status == 202);
    json record = wait_done(client, accepted["statusUrl"].get<std::string>());

    REQUIRE(record["state"] == "Done");
    CHECK(record["result"]["finalStatus"] == pipeline::to_string(expected.status));
    CHECK(record["result"]["ontology"].get<std::string>() == expected.ontologyText);
    CHECK(record["result"]["trace"]["attempts"].size() == expected.trace.attempts.size());
    service.stop();
}

TEST_CASE("bad requests are rejected with 400") {
    World world;
    rest::RestService service(service_config(world, world.write_session({fenced(kGoodOntology)})));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    int status = 0;
    SUBCASE("invalid JSON") {
        auto res = client.Post("/capabilities", "{not json", "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
    }
    SUBCASE("missing description") {
        json body = post_json(client, "/capabilities", {{"note", "hi"}}, status);
        CHECK(status == 400);
        CHECK(!body["error"].get<std::string>().empty());
    }
    SUBCASE("empty description") {
        json body = post_json(client, "/capabilities", {{"description", "   "}}, status);
        CHECK(status == 400);
        CHECK(body["error"].get<std::string>().find("empty") != std::string::npos);
    }
    SUBCASE("non-object options") {
        json body = post_json(client, "/capabilities",
                              {{"description", "x"}, {"options", 7}}, status);
        CHECK(status == 400);
    }
    service.stop();
}

TEST_CASE("unknown job ids answer 404") {
    World world;
    rest::RestService service(service_config(world, world.write_session({fenced(kGoodOntology)})));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    int status = 0;
    json body = get_json(client, "/capabilities/00000000-0000-4000-8000-000000000000", status);
    CHECK(status == 404);
    CHECK(body["error"] == "unknown job id");
    service.stop();
}

TEST_CASE("model overrides are bounded by the allowlist") {
    World world;
    auto config = service_config(world, world.write_session({fenced(kGoodOntology),
                                                             fenced(kGoodOntology)}));
    config.allowedModels = {"other-model"};
    rest::RestService service(std::move(config));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    int status = 0;
    SUBCASE("disallowed model") {
        json body = post_json(
            client, "/capabilities",
            {{"description", "x"}, {"options", {{"model", "sneaky-model"}}}}, status);
        CHECK(status == 400);
        CHECK(body["error"].get<std::string>().find("sneaky-model") != std::string::npos);
    }
    SUBCASE("allowlisted model") {
        json body = post_json(
            client, "/capabilities",
            {{"description", "x"}, {"options", {{"model", "other-model"}}}}, status);
        CHECK(status == 202);
        json record = wait_done(client, body["statusUrl"].get<std::string>());
        CHECK(record["state"] == "Done");
    }
    SUBCASE("base model always allowed") {
        json body = post_json(
            client, "/capabilities",
            {{"description", "x"}, {"options", {{"model", "replay-model"}}}}, status);
        CHECK(status == 202);
    }
    service.stop();
}

TEST_CASE("maxRepeatPerStep override is applied and bounded") {
    World world;
    // Base budget 0 would fail this two-turn script; the override rescues it.
    auto session = world.write_session({fenced(kSyntaxBadOntology), fenced(kGoodOntology)});
    auto config = service_config(world, session, 0);
    config.maxRepeatPerStepLimit = 2;
    rest::RestService service(std::move(config));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    int status = 0;
    SUBCASE("override beyond the limit is rejected") {
        json body = post_json(
            client, "/capabilities",
            {{"description", "x"}, {"options", {{"maxRepeatPerStep", 3}}}}, status);
        CHECK(status == 400);
    }
    SUBCASE("negative override is rejected") {
        json body = post_json(
            client, "/capabilities",
            {{"description", "x"}, {"options", {{"maxRepeatPerStep", -1}}}}, status);
        CHECK(status == 400);
    }
    SUBCASE("without override the base budget fails fast") {
        json body = post_json(client, "/capabilities", {{"description", "x"}}, status);
        REQUIRE(status == 202);
        json record = wait_done(client, body["statusUrl"].get<std::string>());
        REQUIRE(record["state"] == "Done");
        CHECK(record["result"]["finalStatus"] == "NeedsManualReview");
    }
    SUBCASE("with the override the repair loop runs") {
        json body = post_json(
            client, "/capabilities",
            {{"description", "x"}, {"options", {{"maxRepeatPerStep", 1}}}}, status);
        REQUIRE(status == 202);
        json record = wait_done(client, body["statusUrl"].get<std::string>());
        REQUIRE(record["state"] == "Done");
        CHECK(record["result"]["finalStatus"] == "Verified");
    }
    service.stop();
}

TEST_CASE("full queue answers 503") {
    // Deterministic back-pressure: after the service's startup probe has read
    // the session file, the path is swapped for a FIFO. The single worker then
    // blocks opening it inside the first job (a FIFO open waits for a writer),
    // so the queue below stays full for as long as the assertions need. The
    // worker is released afterwards by renaming a regular session file back
    // onto the path and feeding the one blocked open through a hard link that
    // still names the FIFO.
    World world;
    const std::string sessionJson =
        json{{"turns", json::array({json{{"response", fenced(kGoodOntology)}}})}}.dump();

    const auto path = world.root / "session.json";
    const auto fifoAlias = world.root / "session-fifo-alias";
    const auto regular = world.root / "session-regular.json";
    std::ofstream(path) << sessionJson;
    std::ofstream(regular) << sessionJson;

    auto config = service_config(world, path, 0);
    config.workerCount = 1;
    config.queueCapacity = 1;
    rest::RestService service(std::move(config));
    const int port = service.start();

    REQUIRE(::unlink(path.c_str()) == 0);
    REQUIRE(::mkfifo(path.c_str(), 0600) == 0);
    REQUIRE(::link(path.c_str(), fifoAlias.c_str()) == 0);

    // Runs at scope exit too, so a failing assertion cannot leave the worker
    // blocked forever under the service destructor.
    struct Unblock {
        std::filesystem::path path, alias, regular;
        std::string session;
        bool done = false;
        void operator()() {
            if (done) return;
            done = true;
            std::filesystem::rename(regular, path); // later opens see a file
            const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
            while (std::chrono::steady_clock::now() < deadline) {
                const int fd = ::open(alias.c_str(), O_WRONLY | O_NONBLOCK);
                if (fd >= 0) { // a reader is blocked on the FIFO: feed it
                    (void)!::write(fd, session.data(), session.size());
                    ::close(fd);
                    return;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(5));
            }
        }
        ~Unblock() { (*this)(); }
    } unblock{path, fifoAlias, regular, sessionJson};

    httplib::Client client("127.0.0.1", port);
    int status = 0;
    json first = post_json(client, "/capabilities", {{"description", "held"}}, status);
    CHECK(status == 202);

    // Wait until the worker owns the first job, so the queue is empty. From
    // here the worker cannot finish: its next session open has no writer.
    const std::string firstUrl = first["statusUrl"].get<std::string>();
    std::string state = "Queued";
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
    while (state == "Queued" && std::chrono::steady_clock::now() < deadline) {
        state = get_json(client, firstUrl, status)["state"].get<std::string>();
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    CHECK(state == "Running");

    json second = post_json(client, "/capabilities", {{"description", "queued"}}, status);
    CHECK(status == 202);
    json third = post_json(client, "/capabilities", {{"description", "rejected"}}, status);
    CHECK(status == 503);
    REQUIRE(third.contains("error"));
    CHECK(!third["error"].get<std::string>().empty());

    unblock();
    json firstDone = wait_done(client, firstUrl, 30'000);
    CHECK(firstDone["result"]["finalStatus"] == "Verified");
    wait_done(client, second["statusUrl"].get<std::string>(), 30'000);
    service.stop();
}

TEST_CASE("finished jobs are evicted after their TTL") {
    World world;
    auto config = service_config(world, world.write_session({fenced(kGoodOntology)}));
    config.jobTtlSeconds = 1;
    rest::RestService service(std::move(config));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    int status = 0;
    json accepted = post_json(client, "/capabilities", {{"description", "x"}}, status);
    REQUIRE(status == 202);
    const std::string url = accepted["statusUrl"].get<std::string>();
    wait_done(client, url);

    std::this_thread::sleep_for(std::chrono::milliseconds(1300));
    get_json(client, url, status);
    CHECK(status == 404);
    service.stop();
}

TEST_CASE("concurrent jobs stay isolated") {
    World world;
    auto config = service_config(world, world.write_session({fenced(kGoodOntology)}));
    config.workerCount = 2;
    rest::RestService service(std::move(config));
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    std::vector<std::string> urls;
    std::vector<std::string> ids;
    for (int i = 0; i < 4; ++i) {
        int status = 0;
        json accepted = post_json(client, "/capabilities",
                                  {{"description", "job " + std::to_string(i)}}, status);
        REQUIRE(status == 202);
        urls.push_back(accepted["statusUrl"].get<std::string>());
        ids.push_back(accepted["jobId"].get<std::string>());
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t k = i + 1; k < ids.size(); ++k) CHECK(ids[i] != ids[k]);
    }
    for (const auto& url : urls) {
        json record = wait_done(client, url);
        REQUIRE(record["state"] == "Done");
        CHECK(record["result"]["finalStatus"] == "Verified");
        // Each job consumed its own replay cursor: exactly one attempt each.
        CHECK(record["result"]["trace"]["attempts"].size() == 1);
    }
    service.stop();
}

TEST_CASE("service construction validates the pipeline configuration") {
    World world;
    auto config = service_config(world, world.write_session({fenced(kGoodOntology)}));
    config.pipeline.templateDir = world.root / "missing";
    CHECK_THROWS_AS(rest::RestService{std::move(config)}, pipeline::ConfigError);
}

TEST_CASE("service config file loads with bounds and rejects unknown keys") {
    World world;
    auto session = world.write_session({fenced(kGoodOntology)});

    json pipelineJson{{"templateDir", (world.root / "template").string()},
                      {"schemaFile", (world.root / "schema.ttl").string()},
                      {"shapesFile", (world.root / "shapes.ttl").string()},
                      {"provider",
                       {{"kind", "replay"},
                        {"model", "replay-model"},
                        {"replaySessionPath", session.string()}}}};

    SUBCASE("valid file") {
        json doc{{"pipeline", pipelineJson},
                 {"workerCount", 3},
                 {"queueCapacity", 5},
                 {"jobTtlSeconds", 60},
                 {"maxRepeatPerStepLimit", 2},
                 {"allowedModels", json::array({"a", "b"})}};
        const auto path = world.root / "service.json";
        testsupport::write_file(path, doc.dump(2));
        auto config = rest::load_service_config_file(path);
        CHECK(config.workerCount == 3);
        CHECK(config.queueCapacity == 5);
        CHECK(config.jobTtlSeconds == 60);
        CHECK(config.maxRepeatPerStepLimit == 2);
        CHECK(config.allowedModels == std::vector<std::string>{"a", "b"});
        CHECK(config.pipeline.provider.kind == llm::ProviderKind::Replay);
    }
    SUBCASE("unknown top-level key") {
        json doc{{"pipeline", pipelineJson}, {"wrokerCount", 3}};
        const auto path = world.root / "typo.json";
        testsupport::write_file(path, doc.dump(2));
        CHECK_THROWS_AS(rest::load_service_config_file(path), pipeline::ConfigError);
    }
    SUBCASE("literal API key in provider is refused") {
        json bad = pipelineJson;
        bad["provider"]["apiKey"] = "sk-oops";
        json doc{{"pipeline", bad}};
        const auto path = world.root / "leaky.json";
        testsupport::write_file(path, doc.dump(2));
        CHECK_THROWS_WITH_AS(rest::load_service_config_file(path),
                             doctest::Contains("environment"), pipeline::ConfigError);
    }
    SUBCASE("missing pipeline section") {
        json doc{{"workerCount", 1}};
        const auto path = world.root / "nopipe.json";
        testsupport::write_file(path, doc.dump(2));
        CHECK_THROWS_AS(rest::load_service_config_file(path), pipeline::ConfigError);
    }
}
