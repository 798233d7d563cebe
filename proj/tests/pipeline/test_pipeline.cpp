#include <doctest.h>

#include "llm4cap/pipeline/pipeline.hpp"
#include "llm4cap/rdf/turtle.hpp"
#include "llm4cap/reason/reasoner.hpp"
#include "llm4cap/shacl/validator.hpp"
#include "llm4cap/util/sha256.hpp"

#include "support/replay_world.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace llm4cap;
using nlohmann::json;
namespace fs = std::filesystem;
using testsupport::fenced;
using testsupport::kClashOntology;
using testsupport::kGoodOntology;
using testsupport::kSchemaTtl;
using testsupport::kShaclBadOntology;
using testsupport::kShapesTtl;
using testsupport::kSyntaxBadOntology;
using testsupport::World;
using testsupport::write_file;

namespace {

enum class TurnKind { Good, SyntaxBad, Clash, ShaclBad };

const std::string& ontology_for(TurnKind kind) {
    switch (kind) {
    case TurnKind::Good: return kGoodOntology;
    case TurnKind::SyntaxBad: return kSyntaxBadOntology;
    case TurnKind::Clash: return kClashOntology;
    case TurnKind::ShaclBad: return kShaclBadOntology;
    }
    return kGoodOntology;
}

pipeline::Step step_for(TurnKind kind) {
    switch (kind) {
    case TurnKind::SyntaxBad: return pipeline::Step::Syntax;
    case TurnKind::Clash: return pipeline::Step::Reasoning;
    case TurnKind::ShaclBad: return pipeline::Step::Shacl;
    case TurnKind::Good: break;
    }
    return pipeline::Step::Syntax;
}

struct ExpectedRun {
    pipeline::PipelineStatus status;
    std::optional<pipeline::Step> failureStep;
    int attempts;
};

// Reference model of the repair loop: cumulative per-step failure counters,
// stop once one exceeds the repeat budget, provider error on script underrun.
ExpectedRun simulate(const std::vector<TurnKind>& script, int maxRepeat) {
    std::array<int, 3> failures{0, 0, 0};
    int attempts = 0;
    for (const TurnKind kind : script) {
        ++attempts;
        if (kind == TurnKind::Good) {
            return {pipeline::PipelineStatus::Verified, std::nullopt, attempts};
        }
        const auto step = step_for(kind);
        if (++failures[static_cast<std::size_t>(step)] > maxRepeat) {
            return {pipeline::PipelineStatus::NeedsManualReview, step, attempts};
        }
    }
    return {pipeline::PipelineStatus::ProviderError, std::nullopt, attempts};
}

pipeline::PipelineResult run_script(World& world, const std::vector<TurnKind>& script,
                                    int maxRepeat) {
    std::vector<std::string> responses;
    responses.reserve(script.size());
    for (const TurnKind kind : script) responses.push_back(fenced(ontology_for(kind)));
    pipeline::Pipeline pipe(world.config(world.write_session(responses), maxRepeat));
    return pipe.run("Make a cup of coffee.");
}

} // namespace

TEST_CASE("happy path verifies in one attempt with three passing steps") {
    World world;
    auto result = run_script(world, {TurnKind::Good}, 1);

    CHECK(result.status == pipeline::PipelineStatus::Verified);
    REQUIRE(result.trace.attempts.size() == 1);
    const auto& outcomes = result.trace.attempts[0].stepOutcomes;
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].step == pipeline::Step::Syntax);
    CHECK(outcomes[1].step == pipeline::Step::Reasoning);
    CHECK(outcomes[2].step == pipeline::Step::Shacl);
    for (const auto& outcome : outcomes) {
        CHECK(outcome.passed);
        CHECK(outcome.diagnosticsText.empty());
    }
    CHECK(result.trace.attempts[0].extractedFromFence);
    REQUIRE(result.ontology.has_value());
    CHECK(!result.ontologyText.empty());
    CHECK(!result.trace.failureStep.has_value());
}

TEST_CASE("verified ontology re-passes all three checkers") {
    World world;
    auto result = run_script(world, {TurnKind::Good}, 1);
    REQUIRE(result.status == pipeline::PipelineStatus::Verified);

    auto reparsed = rdf::parse_turtle(result.ontologyText);
    REQUIRE(reparsed.ok());
    auto schema = rdf::parse_turtle(kSchemaTtl);
    REQUIRE(schema.ok());
    auto consistency = reason::check_consistency(*reparsed.graph, *schema.graph);
    CHECK(consistency.consistent);
    auto shapesDoc = rdf::parse_turtle(kShapesTtl);
    REQUIRE(shapesDoc.ok());
    auto shapes = shacl::parse_shapes(*shapesDoc.graph);
    auto report = shacl::validate(*reparsed.graph, *schema.graph, shapes);
    CHECK(report.conforms);
}

TEST_CASE("syntax failure is repaired through one backprompt") {
    World world;
    auto result = run_script(world, {TurnKind::SyntaxBad, TurnKind::Good}, 1);

    CHECK(result.status == pipeline::PipelineStatus::Verified);
    REQUIRE(result.trace.attempts.size() == 2);
    const auto& first = result.trace.attempts[0].stepOutcomes;
    REQUIRE(first.size() == 1);
    CHECK(first[0].step == pipeline::Step::Syntax);
    CHECK(!first[0].passed);
    CHECK(!first[0].diagnosticsText.empty());
    const auto& second = result.trace.attempts[1].stepOutcomes;
    REQUIRE(second.size() == 3);
    for (const auto& outcome : second) CHECK(outcome.passed);
}

TEST_CASE("recurring reasoning failure stops with NeedsManualReview") {
    World world;
    auto result = run_script(world, {TurnKind::Clash, TurnKind::Clash}, 1);

    CHECK(result.status == pipeline::PipelineStatus::NeedsManualReview);
    REQUIRE(result.trace.failureStep.has_value());
    CHECK(*result.trace.failureStep == pipeline::Step::Reasoning);
    REQUIRE(result.trace.attempts.size() == 2);
    for (const auto& attempt : result.trace.attempts) {
        REQUIRE(attempt.stepOutcomes.size() == 2);
        CHECK(attempt.stepOutcomes[0].passed);                       // syntax
        CHECK(!attempt.stepOutcomes[1].passed);                      // reasoning
        CHECK(attempt.stepOutcomes[1].step == pipeline::Step::Reasoning);
    }
    // The last parseable ontology is handed to the human reviewer.
    CHECK(result.ontology.has_value());
    CHECK(!result.ontologyText.empty());
    CHECK(result.report.find("Reasoning") != std::string::npos);
}

TEST_CASE("one failure of each kind still verifies within the call bound") {
    World world;
    auto result = run_script(
        world, {TurnKind::SyntaxBad, TurnKind::Clash, TurnKind::ShaclBad, TurnKind::Good}, 1);

    CHECK(result.status == pipeline::PipelineStatus::Verified);
    REQUIRE(result.trace.attempts.size() == 4);
    CHECK(result.trace.attempts.size() <= 1 + 3 * 1);
    CHECK(result.trace.attempts[0].stepOutcomes.size() == 1);
    CHECK(result.trace.attempts[1].stepOutcomes.size() == 2);
    CHECK(result.trace.attempts[2].stepOutcomes.size() == 3);
    CHECK(result.trace.attempts[2].stepOutcomes[2].step == pipeline::Step::Shacl);
    CHECK(!result.trace.attempts[2].stepOutcomes[2].passed);
    CHECK(result.trace.attempts[3].stepOutcomes.size() == 3);
}

TEST_CASE("later steps never run after an earlier step fails in the same attempt") {
    World world;
    auto result = run_script(world, {TurnKind::SyntaxBad, TurnKind::SyntaxBad}, 1);
    CHECK(result.status == pipeline::PipelineStatus::NeedsManualReview);
    REQUIRE(result.trace.failureStep.has_value());
    CHECK(*result.trace.failureStep == pipeline::Step::Syntax);
    for (const auto& attempt : result.trace.attempts) {
        REQUIRE(attempt.stepOutcomes.size() == 1);
        CHECK(attempt.stepOutcomes[0].step == pipeline::Step::Syntax);
    }
    // Nothing ever parsed, so no best-effort ontology exists.
    CHECK(!result.ontology.has_value());
    CHECK(result.ontologyText.empty());
}

TEST_CASE("zero repeat budget hands the first failure straight to review") {
    World world;
    auto result = run_script(world, {TurnKind::ShaclBad}, 0);
    CHECK(result.status == pipeline::PipelineStatus::NeedsManualReview);
    REQUIRE(result.trace.failureStep.has_value());
    CHECK(*result.trace.failureStep == pipeline::Step::Shacl);
    CHECK(result.trace.attempts.size() == 1);
}

TEST_CASE("first prompt digest matches an independently built prompt") {
    World world;
    auto result = run_script(world, {TurnKind::Good}, 1);
    REQUIRE(result.trace.attempts.size() == 1);

    auto tmpl = prompt::load_template(world.root / "template");
    auto bundle = prompt::build_prompt(tmpl, "Make a cup of coffee.");
    CHECK(result.trace.attempts[0].promptDigest == util::sha256_hex(bundle.renderedText));
}

TEST_CASE("replay digest guard accepts the real prompt and rejects others") {
    World world;
    auto tmpl = prompt::load_template(world.root / "template");
    auto bundle = prompt::build_prompt(tmpl, "Make a cup of coffee.");
    const std::string digest = util::sha256_hex(bundle.renderedText);

    SUBCASE("matching digest verifies") {
        auto session = world.write_session({fenced(kGoodOntology)}, {digest});
        pipeline::Pipeline pipe(world.config(session, 1));
        CHECK(pipe.run("Make a cup of coffee.").status == pipeline::PipelineStatus::Verified);
    }
    SUBCASE("a different task breaks the digest guard") {
        auto session = world.write_session({fenced(kGoodOntology)}, {digest});
        pipeline::Pipeline pipe(world.config(session, 1));
        auto result = pipe.run("Weld two sheets together.");
        CHECK(result.status == pipeline::PipelineStatus::ProviderError);
        CHECK(result.report.find("provider error") != std::string::npos);
        CHECK(result.trace.attempts.empty());
    }
}

TEST_CASE("an exhausted replay script surfaces as a provider error") {
    World world;
    auto result = run_script(world, {TurnKind::SyntaxBad}, 1);
    CHECK(result.status == pipeline::PipelineStatus::ProviderError);
    // The one completed call is still in the trace.
    CHECK(result.trace.attempts.size() == 1);
}

TEST_CASE("a response with no Turtle counts as a syntax failure") {
    World world;
    auto session = world.write_session({"   \n", fenced(kGoodOntology)});
    pipeline::Pipeline pipe(world.config(session, 1));
    auto result = pipe.run("Make a cup of coffee.");
    CHECK(result.status == pipeline::PipelineStatus::Verified);
    REQUIRE(result.trace.attempts.size() == 2);
    const auto& first = result.trace.attempts[0].stepOutcomes;
    REQUIRE(first.size() == 1);
    CHECK(first[0].step == pipeline::Step::Syntax);
    CHECK(!first[0].passed);
    CHECK(first[0].diagnosticsText.find("no extractable Turtle") != std::string::npos);
}

TEST_CASE("each run restarts the replay session from the first turn") {
    World world;
    auto session = world.write_session({fenced(kGoodOntology)});
    pipeline::Pipeline pipe(world.config(session, 1));
    CHECK(pipe.run("Make a cup of coffee.").status == pipeline::PipelineStatus::Verified);
    CHECK(pipe.run("Make a cup of coffee.").status == pipeline::PipelineStatus::Verified);
}

TEST_CASE("empty task is rejected before any model call") {
    World world;
    auto session = world.write_session({fenced(kGoodOntology)});
    pipeline::Pipeline pipe(world.config(session, 1));
    CHECK_THROWS_AS(pipe.run("   "), prompt::InputError);
}

TEST_CASE("configuration problems are rejected at construction") {
    World world;
    auto session = world.write_session({fenced(kGoodOntology)});

    SUBCASE("missing template directory") {
        auto config = world.config(session, 1);
        config.templateDir = world.root / "nope";
        CHECK_THROWS_AS(pipeline::Pipeline{config}, pipeline::ConfigError);
    }
    SUBCASE("schema file does not parse") {
        write_file(world.root / "broken.ttl", "not turtle @@@");
        auto config = world.config(session, 1);
        config.schemaFile = world.root / "broken.ttl";
        CHECK_THROWS_AS(pipeline::Pipeline{config}, pipeline::ConfigError);
    }
    SUBCASE("shapes file does not parse") {
        write_file(world.root / "broken-shapes.ttl", "also not turtle @@@");
        auto config = world.config(session, 1);
        config.shapesFile = world.root / "broken-shapes.ttl";
        CHECK_THROWS_AS(pipeline::Pipeline{config}, pipeline::ConfigError);
    }
    SUBCASE("malformed shape definition") {
        write_file(world.root / "bad-shape.ttl",
                   "@prefix sh: <http://www.w3.org/ns/shacl#> .\n"
                   "@prefix cap: <http://example.org/cap#> .\n"
                   "cap:S a sh:NodeShape ; sh:targetClass cap:Capability ;\n"
                   "  sh:property [ sh:path cap:hasInput ; sh:minCount \"many\" ] .\n");
        auto config = world.config(session, 1);
        config.shapesFile = world.root / "bad-shape.ttl";
        CHECK_THROWS_AS(pipeline::Pipeline{config}, pipeline::ConfigError);
    }
    SUBCASE("negative repeat budget") {
        auto config = world.config(session, -1);
        CHECK_THROWS_AS(pipeline::Pipeline{config}, pipeline::ConfigError);
    }
    SUBCASE("missing replay session") {
        auto config = world.config(world.root / "missing-session.json", 1);
        CHECK_THROWS_AS(pipeline::Pipeline{config}, pipeline::ConfigError);
    }
}

TEST_CASE("trace serializes to a machine-readable document") {
    World world;
    auto result = run_script(world, {TurnKind::SyntaxBad, TurnKind::Good}, 1);
    const json doc = json::parse(pipeline::trace_to_json(result.trace));

    CHECK(doc["schemaVersion"] == 1);
    CHECK(doc["finalStatus"] == "Verified");
    CHECK(doc["failureStep"].is_null());
    REQUIRE(doc["attempts"].size() == 2);
    CHECK(doc["attempts"][0]["promptDigest"].get<std::string>().size() == 64);
    CHECK(doc["attempts"][0]["stepOutcomes"][0]["step"] == "Syntax");
    CHECK(doc["attempts"][0]["stepOutcomes"][0]["passed"] == false);
    CHECK(doc["attempts"][1]["stepOutcomes"][2]["step"] == "SHACL");
    // ISO-8601 UTC timestamps.
    const auto started = doc["startedAt"].get<std::string>();
    CHECK(started.size() == 20);
    CHECK(started[4] == '-');
    CHECK(started[10] == 'T');
    CHECK(started.back() == 'Z');
}

TEST_CASE("randomized failure schedules respect the loop contract") {
    World world;
    std::mt19937 rng(20260814u);
    std::uniform_int_distribution<int> repeat_dist(0, 3);
    std::uniform_int_distribution<int> kind_dist(0, 3);

    int verified = 0, review = 0, provider = 0;
    for (int round = 0; round < 120; ++round) {
        const int maxRepeat = repeat_dist(rng);
        const int bound = 1 + 3 * maxRepeat;
        std::uniform_int_distribution<int> len_dist(1, bound + 2);
        std::vector<TurnKind> script(static_cast<std::size_t>(len_dist(rng)));
        for (auto& kind : script) kind = static_cast<TurnKind>(kind_dist(rng));

        const ExpectedRun expected = simulate(script, maxRepeat);
        auto result = run_script(world, script, maxRepeat);

        CAPTURE(round);
        CAPTURE(maxRepeat);
        CHECK(result.status == expected.status);
        CHECK(result.trace.attempts.size() == static_cast<std::size_t>(expected.attempts));
        CHECK(result.trace.attempts.size() <= static_cast<std::size_t>(bound));
        if (expected.failureStep) {
            REQUIRE(result.trace.failureStep.has_value());
            CHECK(*result.trace.failureStep == *expected.failureStep);
        } else {
            CHECK(!result.trace.failureStep.has_value());
        }
        switch (result.status) {
        case pipeline::PipelineStatus::Verified: ++verified; break;
        case pipeline::PipelineStatus::NeedsManualReview: ++review; break;
        case pipeline::PipelineStatus::ProviderError: ++provider; break;
        }
    }
    // The generator must actually exercise every terminal state.
    CHECK(verified > 0);
    CHECK(review > 0);
    CHECK(provider > 0);
}
